//! Unary measurements of arcs and lines, pairwise relations between
//! primitives, and coverage.
//!
//! Directions are degrees in `[0, 360)`, turns and differences signed
//! degrees; see [`crate::geometry`] for the conventions. Every measurement
//! is an angle or a dimensionless ratio.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{centroid, wrap_180, Point};
use crate::primitives::{EdgeSet, Primitive, PrimitiveKind};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("coverage of an empty feature is undefined")]
    EmptyFeature,
    #[error("graph has zero total length")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ArcMeasurements<T> {
    pub overall_change: T,
    pub chord_direction: T,
    pub normal_direction: T,
    pub first_edge_direction: T,
    pub last_edge_direction: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LineMeasurements<T> {
    pub direction: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RelationMeasurements<T> {
    pub length_ratio: T,
    pub com_offset_direction: T,
    pub com_offset_over_l1: T,
    pub com_offset_over_l2: T,
    pub com_offset_over_lg: T,
    /// Arc pairs only.
    pub change_ratio: Option<T>,
    /// Pairs involving a loop only; 0 when the two do not touch.
    pub connection_quarter: Option<u8>,
    /// Line and arc pairs only.
    pub direction_difference: Option<T>,
}

fn points<T: Real>(g: &SimplifiedGraph<T>, p: &Primitive<T>) -> Vec<Point<T>> {
    p.walk.distinct().iter().map(|&v| g.vertices()[v]).collect()
}

fn chord<T: Real>(g: &SimplifiedGraph<T>, p: &Primitive<T>) -> Point<T> {
    let v = &p.walk.vertices;
    g.vertices()[*v.last().unwrap()] - g.vertices()[v[0]]
}

pub fn measure_arc<T: Real>(g: &SimplifiedGraph<T>, a: &Primitive<T>) -> ArcMeasurements<T> {
    assert!(a.kind.is_arc(), "measure_arc on a {:?}", a.kind);
    let p = g.vertices();
    let v = &a.walk.vertices;
    let c = chord(g, a);
    let chord_direction = c.direction();
    // the side of the chord facing away from the vertex centroid
    let mid = (p[v[0]] + p[*v.last().unwrap()]).scale(T::lit(0.5));
    let side = c.cross(centroid(&points(g, a)) - mid);
    let side = if side.abs() <= T::lit(1e-9) * c.norm() * a.length { T::zero() } else { side };
    let quarter = T::lit(90.0);
    let clockwise_normal = chord_direction + quarter;
    let normal = if side < T::zero() || (side == T::zero() && a.kind == PrimitiveKind::ArcPlus) {
        clockwise_normal
    } else {
        chord_direction - quarter
    };
    let n = v.len();
    ArcMeasurements {
        overall_change: a.walk.turns(g).into_iter().fold(T::zero(), |s, t| s + t),
        chord_direction,
        normal_direction: crate::geometry::wrap_360(normal),
        first_edge_direction: (p[v[1]] - p[v[0]]).direction(),
        last_edge_direction: (p[v[n - 1]] - p[v[n - 2]]).direction(),
    }
}

pub fn measure_line<T: Real>(g: &SimplifiedGraph<T>, l: &Primitive<T>) -> LineMeasurements<T> {
    assert_eq!(l.kind, PrimitiveKind::Line);
    LineMeasurements {
        direction: chord(g, l).direction(),
    }
}

/// Quadrant (1..=4) of `d` in image axes: 1 holds directions `[0, 90)`.
/// Components within `tol` of zero count as zero, so points on an axis do
/// not flip quadrant under rounding.
fn quadrant<T: Real>(d: Point<T>, tol: T) -> u8 {
    let snap = |v: T| if v.abs() <= tol { T::zero() } else { v };
    let (x, y) = (snap(d.x), snap(d.y));
    let z = T::zero();
    if x > z && y >= z {
        1
    } else if x <= z && y > z {
        2
    } else if x < z && y <= z {
        3
    } else if x >= z && y < z {
        4
    } else {
        1
    }
}

fn connection_quarter<T: Real>(g: &SimplifiedGraph<T>, lp: &Primitive<T>, sl: &Summary<T>, other: &Primitive<T>) -> u8 {
    let shared = lp
        .walk
        .distinct()
        .iter()
        .copied()
        .filter(|v| other.walk.vertices.contains(v))
        .min();
    match shared {
        None => 0,
        Some(v) => quadrant(g.vertices()[v] - sl.centroid, lp.length * T::lit(1e-9)),
    }
}

/// Per-primitive quantities that relations are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub kind: PrimitiveKind,
    pub length: T,
    pub centroid: Point<T>,
    /// Signed sum of turns (arcs; zero otherwise).
    pub total_turn: T,
    /// Chord direction of an arc or direction of a line.
    pub heading: Option<T>,
}

pub fn summarize<T: Real>(g: &SimplifiedGraph<T>, p: &Primitive<T>) -> Summary<T> {
    Summary {
        kind: p.kind,
        length: p.length,
        centroid: centroid(&points(g, p)),
        total_turn: if p.kind.is_arc() {
            p.walk.turns(g).into_iter().fold(T::zero(), |s, t| s + t)
        } else {
            T::zero()
        },
        heading: (p.kind != PrimitiveKind::Loop).then(|| chord(g, p).direction()),
    }
}

/// Relations of `q` relative to `p`; `graph_length` is the total length of
/// the connected component holding both.
pub fn measure_relation<T: Real>(
    g: &SimplifiedGraph<T>,
    p: &Primitive<T>,
    q: &Primitive<T>,
    graph_length: T,
) -> RelationMeasurements<T> {
    relation_from_summaries(g, (p, &summarize(g, p)), (q, &summarize(g, q)), graph_length)
}

/// [`measure_relation`] with precomputed summaries.
pub fn relation_from_summaries<T: Real>(
    g: &SimplifiedGraph<T>,
    (p, sp): (&Primitive<T>, &Summary<T>),
    (q, sq): (&Primitive<T>, &Summary<T>),
    graph_length: T,
) -> RelationMeasurements<T> {
    let delta = sq.centroid - sp.centroid;
    // Coincident centroids differ only by rounding; their offset has no direction.
    let tiny = T::lit(1e-9) * (sp.length + sq.length);
    let magnitude = if delta.norm() <= tiny { T::zero() } else { delta.norm() };
    let change_ratio = (p.kind.is_arc() && q.kind.is_arc()).then(|| sp.total_turn / sq.total_turn);
    let connection_quarter = match (p.kind, q.kind) {
        (PrimitiveKind::Loop, _) => Some(connection_quarter(g, p, sp, q)),
        (_, PrimitiveKind::Loop) => Some(connection_quarter(g, q, sq, p)),
        _ => None,
    };
    let direction_difference = match (sp.heading, sq.heading) {
        (Some(a), Some(b)) => Some(wrap_180(b - a)),
        _ => None,
    };
    RelationMeasurements {
        length_ratio: sp.length / sq.length,
        com_offset_direction: if magnitude > T::zero() { delta.direction() } else { T::zero() },
        com_offset_over_l1: magnitude / sp.length,
        com_offset_over_l2: magnitude / sq.length,
        com_offset_over_lg: magnitude / graph_length,
        change_ratio,
        connection_quarter,
        direction_difference,
    }
}

/// Length of the feature's edges over the graph's total length.
pub fn coverage<T: Real>(feature: &EdgeSet, g: &SimplifiedGraph<T>) -> Result<T, MeasureError> {
    if feature.is_empty() {
        return Err(MeasureError::EmptyFeature);
    }
    let total = g.total_length();
    if total <= T::zero() {
        return Err(MeasureError::EmptyGraph);
    }
    let covered = feature.iter().fold(T::zero(), |s, e| s + g.edge_length(e));
    Ok(covered / total)
}

/// How values of a measurement are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Linear,
    /// Degrees on the circle.
    Circular,
    /// Connection quarter: 0 (not touching) or 1..=4.
    Quarter,
}

/// Name of one scalar measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    OverallChange,
    ChordDirection,
    NormalDirection,
    FirstEdgeDirection,
    LastEdgeDirection,
    Direction,
    LengthRatio,
    ComOffsetDirection,
    ComOffsetOverL1,
    ComOffsetOverL2,
    ComOffsetOverLg,
    ChangeRatio,
    ConnectionQuarter,
    DirectionDifference,
}

impl Measure {
    pub fn scale(self) -> Scale {
        use Measure::*;
        match self {
            OverallChange | LengthRatio | ComOffsetOverL1 | ComOffsetOverL2 | ComOffsetOverLg | ChangeRatio => {
                Scale::Linear
            }
            ChordDirection | NormalDirection | FirstEdgeDirection | LastEdgeDirection | Direction
            | ComOffsetDirection | DirectionDifference => Scale::Circular,
            ConnectionQuarter => Scale::Quarter,
        }
    }

    /// Names measured on a single primitive of this kind.
    pub fn unary_names(kind: PrimitiveKind) -> &'static [Measure] {
        use Measure::*;
        match kind {
            PrimitiveKind::ArcPlus | PrimitiveKind::ArcMinus => &[
                OverallChange,
                ChordDirection,
                NormalDirection,
                FirstEdgeDirection,
                LastEdgeDirection,
            ],
            PrimitiveKind::Line => &[Direction],
            PrimitiveKind::Loop => &[],
        }
    }

    /// Names measured on an ordered pair of kinds.
    pub fn relation_names(p: PrimitiveKind, q: PrimitiveKind) -> Vec<Measure> {
        use Measure::*;
        let mut out = vec![LengthRatio, ComOffsetDirection, ComOffsetOverL1, ComOffsetOverL2, ComOffsetOverLg];
        if p.is_arc() && q.is_arc() {
            out.push(ChangeRatio);
        }
        if p == PrimitiveKind::Loop || q == PrimitiveKind::Loop {
            out.push(ConnectionQuarter);
        } else {
            out.push(DirectionDifference);
        }
        out
    }
}

/// Unary measurements in [`Measure::unary_names`] order.
pub fn unary_values<T: Real>(g: &SimplifiedGraph<T>, p: &Primitive<T>) -> Vec<T> {
    match p.kind {
        PrimitiveKind::ArcPlus | PrimitiveKind::ArcMinus => {
            let m = measure_arc(g, p);
            vec![
                m.overall_change,
                m.chord_direction,
                m.normal_direction,
                m.first_edge_direction,
                m.last_edge_direction,
            ]
        }
        PrimitiveKind::Line => vec![measure_line(g, p).direction],
        PrimitiveKind::Loop => Vec::new(),
    }
}

/// Relation measurements in [`Measure::relation_names`] order.
pub fn relation_values<T: Real>(g: &SimplifiedGraph<T>, p: &Primitive<T>, q: &Primitive<T>, graph_length: T) -> Vec<T> {
    relation_vector(&measure_relation(g, p, q, graph_length))
}

/// Values of `r` in [`Measure::relation_names`] order.
pub fn relation_vector<T: Real>(r: &RelationMeasurements<T>) -> Vec<T> {
    let mut out = vec![
        r.length_ratio,
        r.com_offset_direction,
        r.com_offset_over_l1,
        r.com_offset_over_l2,
        r.com_offset_over_lg,
    ];
    out.extend(r.change_ratio);
    out.extend(r.connection_quarter.map(|q| T::lit(f64::from(q))));
    out.extend(r.direction_difference);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{classify_arc, classify_line, find_loops, Walk};

    fn graph(pts: &[(f64, f64)], edges: &[(usize, usize)]) -> SimplifiedGraph<f64> {
        SimplifiedGraph::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), edges.to_vec())
    }

    fn path(pts: &[(f64, f64)]) -> SimplifiedGraph<f64> {
        let edges: Vec<_> = (1..pts.len()).map(|i| (i - 1, i)).collect();
        graph(pts, &edges)
    }

    fn whole(n: usize) -> Walk {
        Walk::new((0..n).collect())
    }

    #[test]
    fn semicircle_changes_by_half_a_turn() {
        let pts: Vec<(f64, f64)> = (0..=8)
            .map(|k| {
                let a = std::f64::consts::PI * (1.0 - k as f64 / 8.0);
                (10.0 * a.cos(), -10.0 * a.sin())
            })
            .collect();
        let g = path(&pts);
        let a = classify_arc(&g, &whole(9)).unwrap();
        let m = measure_arc(&g, &a);
        // over the top from (-10,0) to (10,0): each of 7 turns is 180/8
        assert!((m.overall_change - 7.0 * 22.5).abs() < 1e-9);
        assert_eq!(a.kind, PrimitiveKind::ArcPlus);
        assert!(m.chord_direction.abs() < 1e-9);
        // body is above the chord (negative y), so the normal points down
        assert!((m.normal_direction - 90.0).abs() < 1e-9);
    }

    #[test]
    fn two_quarter_turns() {
        let g = path(&[(0.0, 0.0), (10.0, 0.0), (17.0, 7.0), (17.0, 17.0)]);
        let m = measure_arc(&g, &classify_arc(&g, &whole(4)).unwrap());
        assert!((m.overall_change - 90.0).abs() < 1e-9);
        assert!(m.first_edge_direction.abs() < 1e-9);
        assert!((m.last_edge_direction - 90.0).abs() < 1e-9);
    }

    #[test]
    fn mirrored_arc_flips_normal() {
        let up = path(&[(0.0, 0.0), (5.0, -4.0), (10.0, 0.0)]);
        let down = path(&[(0.0, 0.0), (5.0, 4.0), (10.0, 0.0)]);
        let nu = measure_arc(&up, &classify_arc(&up, &whole(3)).unwrap()).normal_direction;
        let nd = measure_arc(&down, &classify_arc(&down, &whole(3)).unwrap()).normal_direction;
        assert!((wrap_180(nu - nd).abs() - 180.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_arc_negates_change() {
        let g = path(&[(0.0, 0.0), (5.0, -4.0), (10.0, 0.0), (12.0, 6.0)]);
        let a = classify_arc(&g, &whole(4)).unwrap();
        let b = classify_arc(&g, &whole(4).reversed()).unwrap();
        let (ma, mb) = (measure_arc(&g, &a), measure_arc(&g, &b));
        assert!((ma.overall_change + mb.overall_change).abs() < 1e-9);
    }

    #[test]
    fn line_directions() {
        let g = path(&[(0.0, 0.0), (0.0, 5.0)]);
        let l = classify_line(&g, &whole(2), 0.1).unwrap();
        assert!((measure_line(&g, &l).direction - 90.0).abs() < 1e-12);
        let g = path(&[(1.0, 1.0), (2.0, 2.0)]);
        let l = classify_line(&g, &whole(2), 0.1).unwrap();
        assert!((measure_line(&g, &l).direction - 45.0).abs() < 1e-12);
        let r = classify_line(&g, &whole(2).reversed(), 0.1).unwrap();
        assert!((measure_line(&g, &r).direction - 225.0).abs() < 1e-12);
    }

    #[test]
    fn relation_of_equal_lines_and_arcs() {
        let g = path(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0)]);
        let a = classify_line(&g, &Walk::new(vec![0, 1]), 0.1).unwrap();
        let b = classify_line(&g, &Walk::new(vec![1, 2]), 0.1).unwrap();
        let r = measure_relation(&g, &a, &b, 8.0);
        assert_eq!(r.length_ratio, 1.0);
        // centroids (2,0) and (4,2)
        assert!((r.com_offset_direction - 45.0).abs() < 1e-12);
        assert!((r.com_offset_over_lg - 8f64.sqrt() / 8.0).abs() < 1e-12);
        assert_eq!(r.direction_difference, Some(90.0));
        assert_eq!(r.change_ratio, None);
        assert_eq!(r.connection_quarter, None);
    }

    #[test]
    fn change_ratio_of_arcs() {
        // half turn then quarter turn, drawn apart
        let g = graph(
            &[
                (0.0, 0.0),
                (10.0, 0.0),
                (10.0, 10.0),
                (0.0, 10.0),
                (30.0, 0.0),
                (40.0, 0.0),
                (40.0, 10.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (4, 5), (5, 6)],
        );
        let a = classify_arc(&g, &Walk::new(vec![0, 1, 2, 3])).unwrap();
        let b = classify_arc(&g, &Walk::new(vec![4, 5, 6])).unwrap();
        assert_eq!(measure_relation(&g, &a, &b, 50.0).change_ratio, Some(2.0));
    }

    #[test]
    fn loop_connection_quarter() {
        // square loop with a tail leaving its bottom-right corner
        let g = graph(
            &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 20.0)],
            &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)],
        );
        let lp = find_loops(&g, 24, 10).0.remove(0);
        let tail = classify_line(&g, &Walk::new(vec![3, 4]), 0.1).unwrap();
        // (10,10) - centroid (5,5) points to direction 45
        assert_eq!(measure_relation(&g, &lp, &tail, 50.0).connection_quarter, Some(1));
        assert_eq!(measure_relation(&g, &tail, &lp, 50.0).connection_quarter, Some(1));
        let apart = graph(
            &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (30.0, 20.0), (40.0, 20.0)],
            &[(0, 1), (0, 2), (1, 3), (2, 3), (4, 5)],
        );
        let lp = find_loops(&apart, 24, 10).0.remove(0);
        let l = classify_line(&apart, &Walk::new(vec![4, 5]), 0.1).unwrap();
        assert_eq!(measure_relation(&apart, &lp, &l, 50.0).connection_quarter, Some(0));
    }

    #[test]
    fn coverage_ratios() {
        let g = path(&[(0.0, 0.0), (3.0, 0.0), (6.0, 0.0)]);
        let all = EdgeSet::from_indices(2, &[0, 1]);
        assert_eq!(coverage(&all, &g), Ok(1.0));
        assert_eq!(coverage(&EdgeSet::from_indices(2, &[1]), &g), Ok(0.5));
        assert_eq!(coverage(&EdgeSet::with_capacity(2), &g), Err(MeasureError::EmptyFeature));
    }

    #[test]
    fn names_match_values() {
        let g = graph(
            &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 20.0), (14.0, 30.0)],
            &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5)],
        );
        let lp = find_loops(&g, 24, 10).0.remove(0);
        let arc = classify_arc(&g, &Walk::new(vec![3, 4, 5])).unwrap();
        let line = classify_line(&g, &Walk::new(vec![3, 4]), 0.1).unwrap();
        for p in [&lp, &arc, &line] {
            assert_eq!(unary_values(&g, p).len(), Measure::unary_names(p.kind).len());
            for q in [&lp, &arc, &line] {
                assert_eq!(
                    relation_values(&g, p, q, 60.0).len(),
                    Measure::relation_names(p.kind, q.kind).len()
                );
            }
        }
    }

    #[test]
    fn relation_json_field_names() {
        let r = RelationMeasurements {
            length_ratio: 1.0,
            com_offset_direction: 0.0,
            com_offset_over_l1: 0.5,
            com_offset_over_l2: 0.5,
            com_offset_over_lg: 0.25,
            change_ratio: None,
            connection_quarter: Some(2),
            direction_difference: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains(r#""com-offset-over-lg":0.25"#));
        assert!(s.contains(r#""connection-quarter":2"#));
    }
}
