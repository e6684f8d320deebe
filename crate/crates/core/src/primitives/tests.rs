use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::Point;
use crate::synth::random_graph;

fn path_graph(pts: &[(f64, f64)]) -> SimplifiedGraph<f64> {
    let vertices = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
    let edges = (1..pts.len()).map(|i| (i - 1, i)).collect();
    SimplifiedGraph::new(vertices, edges)
}

fn whole(n: usize) -> Walk {
    Walk::new((0..n).collect())
}

/// Polyline starting at the origin whose edges have the given directions.
fn polyline(dirs_deg: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    for d in dirs_deg {
        let (x, y) = *pts.last().unwrap();
        let r = d.to_radians();
        pts.push((x + 10.0 * r.cos(), y + 10.0 * r.sin()));
    }
    pts
}

#[test]
fn collinear_walk_is_a_line() {
    let g = path_graph(&[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)]);
    let p = classify_line(&g, &whole(3), 0.1).unwrap();
    assert_eq!(p.kind, PrimitiveKind::Line);
    assert!((p.length - 18f64.sqrt()).abs() < 1e-12);
}

#[test]
fn kink_with_large_deviation_is_not_a_line() {
    // apex height h with h / (2 * sqrt(25 + h^2)) = 0.2, i.e. h^2 = 4 / 0.84
    let h = (4.0f64 / 0.84).sqrt();
    let g = path_graph(&[(0.0, 0.0), (5.0, h), (10.0, 0.0)]);
    let ratio = h / g.total_length();
    assert!((ratio - 0.2).abs() < 1e-12);
    assert!(classify_line(&g, &whole(3), 0.1).is_none());
    assert!(classify_line(&g, &whole(3), ratio + 1e-9).is_some());
}

#[test]
fn degenerate_chord_is_not_a_line() {
    let g = SimplifiedGraph::new(
        vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(2.0, 3.0)],
        vec![(0, 1), (1, 2), (0, 2)],
    );
    assert!(classify_line(&g, &Walk::new(vec![0, 1, 2, 0]), 0.5).is_none());
}

#[test]
fn gentle_arc_is_both_line_and_arc() {
    let g = path_graph(&[(0.0, 0.0), (10.0, 1.0), (20.0, 0.0)]);
    let kinds: Vec<_> = classify_walk(&g, &whole(3), 0.1).into_iter().map(|p| p.kind).collect();
    // y grows downwards, so bending back up is a counter-clockwise turn
    assert_eq!(kinds, vec![PrimitiveKind::Line, PrimitiveKind::ArcMinus]);
}

#[test]
fn monotone_turns_make_an_arc() {
    let g = path_graph(&polyline(&[0.0, 30.0, 70.0]));
    let p = classify_arc(&g, &whole(4)).unwrap();
    assert_eq!(p.kind, PrimitiveKind::ArcPlus);
    let total: f64 = whole(4).turns(&g).iter().sum();
    assert!((total - 70.0).abs() < 1e-9);
}

#[test]
fn mixed_turns_are_not_an_arc() {
    let g = path_graph(&polyline(&[0.0, 30.0, 0.0]));
    assert!(classify_arc(&g, &whole(4)).is_none());
}

#[test]
fn spiral_beyond_full_turn_is_not_an_arc() {
    let dirs: Vec<f64> = (0..11).map(|i| 40.0 * i as f64).collect();
    let g = path_graph(&polyline(&dirs));
    let total: f64 = whole(12).turns(&g).iter().sum();
    assert!((total - 400.0).abs() < 1e-9);
    assert!(classify_arc(&g, &whole(12)).is_none());
    // stopping at 360 degrees is still an arc
    let g = path_graph(&polyline(&dirs[..10]));
    assert!(classify_arc(&g, &whole(11)).is_some());
}

#[test]
fn straight_interior_vertices_are_ignored() {
    let g = path_graph(&polyline(&[0.0, 0.0, 45.0]));
    assert_eq!(classify_arc(&g, &whole(4)).unwrap().kind, PrimitiveKind::ArcPlus);
    let g = path_graph(&polyline(&[0.0, 0.0, 0.0]));
    assert!(classify_arc(&g, &whole(4)).is_none());
}

#[test]
fn reversal_swaps_arc_sign() {
    let g = path_graph(&polyline(&[10.0, 50.0, 100.0, 120.0]));
    let fwd = classify_arc(&g, &whole(5)).unwrap();
    let back = classify_arc(&g, &whole(5).reversed()).unwrap();
    assert_eq!((fwd.kind, back.kind), (PrimitiveKind::ArcPlus, PrimitiveKind::ArcMinus));
    let s: f64 = whole(5).turns(&g).iter().sum();
    let r: f64 = whole(5).reversed().turns(&g).iter().sum();
    assert!((s + r).abs() < 1e-9);
}

fn triangle() -> SimplifiedGraph<f64> {
    SimplifiedGraph::new(
        vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(0.0, 4.0)],
        vec![(0, 1), (1, 2), (0, 2)],
    )
}

#[test]
fn triangle_has_one_loop() {
    let (loops, exhausted) = find_loops(&triangle(), 24, 100);
    assert!(!exhausted);
    assert_eq!(loops.len(), 1);
    assert_eq!(loops[0].walk.vertices, vec![0, 1, 2, 0]);
    assert!((loops[0].length - 12.0).abs() < 1e-12);
}

#[test]
fn tree_has_no_loops() {
    let g = path_graph(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)]);
    assert!(find_loops(&g, 24, 100).0.is_empty());
}

/// Edge subsets that form exactly one cycle.
fn brute_force_cycles(g: &SimplifiedGraph<f64>) -> BTreeSet<Vec<usize>> {
    let m = g.edges().len();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|e| mask & (1 << e) != 0).collect();
        if let Some(Shape::Cycle(w)) = shape_of(g, &chosen) {
            out.insert(w.vertices);
        }
    }
    out
}

enum Shape {
    Path(Walk),
    Cycle(Walk),
}

/// The unique walk using exactly these edges, if they form a simple path
/// or cycle; canonical orientation.
fn shape_of(g: &SimplifiedGraph<f64>, edges: &[usize]) -> Option<Shape> {
    let n = g.vertices().len();
    let mut adj = vec![Vec::new(); n];
    for &e in edges {
        let (a, b) = g.edges()[e];
        adj[a].push(b);
        adj[b].push(a);
    }
    if adj.iter().any(|a| a.len() > 2) {
        return None;
    }
    let used: Vec<usize> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
    let ends: Vec<usize> = used.iter().copied().filter(|&v| adj[v].len() == 1).collect();
    let start = match ends.len() {
        0 => used[0],
        2 => ends[0],
        _ => return None,
    };
    let mut walk = vec![start];
    let (mut prev, mut cur) = (usize::MAX, start);
    loop {
        let Some(&next) = adj[cur].iter().find(|&&u| u != prev) else { break };
        if next == start {
            walk.push(start);
            break;
        }
        if walk.contains(&next) {
            return None;
        }
        walk.push(next);
        prev = cur;
        cur = next;
        if walk.len() > n + 1 {
            return None;
        }
    }
    if walk.len() - 1 != edges.len() {
        return None; // more than one component
    }
    let w = Walk::new(walk).canonical();
    Some(if ends.is_empty() { Shape::Cycle(w) } else { Shape::Path(w) })
}

#[test]
fn find_loops_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let g: SimplifiedGraph<f64> = random_graph(&mut rng, 9, 12);
        let got: BTreeSet<Vec<usize>> = find_loops(&g, 24, 1000).0.into_iter().map(|p| p.walk.vertices).collect();
        assert_eq!(got, brute_force_cycles(&g), "{g:?}");
    }
}

#[test]
fn two_triangles_sharing_a_vertex() {
    let g = SimplifiedGraph::new(
        vec![
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 4.0),
            Point::new(4.0, 4.0),
        ],
        vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
    );
    assert_eq!(find_loops(&g, 24, 100).0.len(), 2);
    assert_eq!(brute_force_cycles(&g).len(), 2);
}

#[test]
fn canonical_orientation() {
    assert_eq!(Walk::new(vec![7, 2, 5]).canonical().vertices, vec![5, 2, 7]);
    assert_eq!(Walk::new(vec![3, 9, 1, 4, 3]).canonical().vertices, vec![1, 4, 3, 9, 1]);
}

#[test]
fn simple_paths_are_listed_once() {
    let (paths, exhausted) = simple_paths(&triangle(), None, 24, 100);
    assert!(!exhausted);
    // three single edges and three two-edge paths
    assert_eq!(paths.len(), 6);
    assert!(paths.iter().all(|w| w.vertices[0] < *w.vertices.last().unwrap()));
}

fn kinds(d: &Decomposition<f64>) -> Vec<PrimitiveKind> {
    let mut k: Vec<_> = d.primitives.iter().map(|p| p.kind).collect();
    k.sort();
    k
}

#[test]
fn single_edge_decomposes_into_one_line() {
    let g = path_graph(&[(0.0, 0.0), (5.0, 2.0)]);
    let r = decompose(&g, &[0], &DecomposeConfig::default());
    assert_eq!(r.decompositions.len(), 1);
    assert_eq!(kinds(&r.decompositions[0]), vec![PrimitiveKind::Line]);
}

/// Loop at the top, tail leaving the loop's right vertex downwards.
fn nine() -> SimplifiedGraph<f64> {
    let pts = [(10.0, 0.0), (0.0, 10.0), (20.0, 10.0), (10.0, 20.0), (22.0, 45.0)];
    let vertices = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
    SimplifiedGraph::new(vertices, vec![(0, 1), (0, 2), (1, 3), (2, 3), (2, 4)])
}

#[test]
fn loop_with_tail_has_loop_line_and_arc_line_covers() {
    let g = nine();
    let all: Vec<usize> = (0..g.edges().len()).collect();
    let r = decompose(&g, &all, &DecomposeConfig::default());
    let found: Vec<Vec<PrimitiveKind>> = r.decompositions.iter().map(kinds).collect();
    assert!(found.contains(&vec![PrimitiveKind::Line, PrimitiveKind::Loop]), "{found:?}");
    assert!(
        found
            .iter()
            .any(|k| k.len() == 2 && k.contains(&PrimitiveKind::Line) && k.iter().any(|x| x.is_arc())),
        "{found:?}"
    );
}

/// Every partition of the edges into blocks, via restricted growth strings.
fn partitions(m: usize, visit: &mut dyn FnMut(&[Vec<usize>])) {
    fn rec(i: usize, m: usize, blocks: &mut Vec<Vec<usize>>, visit: &mut dyn FnMut(&[Vec<usize>])) {
        if i == m {
            visit(blocks);
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, m, blocks, visit);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, m, blocks, visit);
        blocks.pop();
    }
    rec(0, m, &mut Vec::new(), visit);
}

type Cover = Vec<(PrimitiveKind, Vec<usize>)>;

fn brute_force_covers(g: &SimplifiedGraph<f64>, threshold: f64) -> BTreeSet<Cover> {
    let mut out = BTreeSet::new();
    partitions(g.edges().len(), &mut |blocks| {
        let mut options: Vec<Vec<Primitive<f64>>> = Vec::new();
        for b in blocks {
            let prims = match shape_of(g, b) {
                Some(Shape::Path(w)) | Some(Shape::Cycle(w)) => classify_walk(g, &w, threshold),
                None => Vec::new(),
            };
            if prims.is_empty() {
                return;
            }
            options.push(prims);
        }
        let mut pick = vec![0; options.len()];
        loop {
            let mut cover: Cover = options
                .iter()
                .zip(&pick)
                .map(|(o, &k)| (o[k].kind, o[k].walk.vertices.clone()))
                .collect();
            cover.sort();
            out.insert(cover);
            let mut i = 0;
            while i < pick.len() {
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
    });
    out
}

#[test]
fn decompose_matches_brute_force_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = DecomposeConfig {
        max_decompositions: usize::MAX,
        max_primitives: usize::MAX,
        ..DecomposeConfig::default()
    };
    for _ in 0..120 {
        let g: SimplifiedGraph<f64> = random_graph(&mut rng, 8, 10);
        let all: Vec<usize> = (0..g.edges().len()).collect();
        let r = decompose(&g, &all, &cfg);
        assert!(!r.exhausted);
        let got: BTreeSet<Cover> = r
            .decompositions
            .iter()
            .map(|d| {
                let mut c: Cover = d.primitives.iter().map(|p| (p.kind, p.walk.vertices.clone())).collect();
                c.sort();
                c
            })
            .collect();
        assert_eq!(got.len(), r.decompositions.len(), "duplicate covers");
        assert_eq!(got, brute_force_covers(&g, 0.1), "{g:?}");
    }
}

#[test]
fn decompositions_are_sorted_and_capped() {
    let g = nine();
    let all: Vec<usize> = (0..g.edges().len()).collect();
    let r = decompose(&g, &all, &DecomposeConfig::default());
    assert!(r.decompositions.len() <= 10);
    for w in r.decompositions.windows(2) {
        assert_ne!(cover_order(&w[0], &w[1]), std::cmp::Ordering::Greater);
    }
    for d in &r.decompositions {
        let mut used: Vec<usize> = d.primitives.iter().flat_map(|p| p.walk.edge_indices(&g)).collect();
        used.sort_unstable();
        assert_eq!(used, all);
    }
}

#[test]
fn primitive_json_shape() {
    let p = Primitive {
        kind: PrimitiveKind::ArcMinus,
        walk: Walk::new(vec![0, 1, 2]),
        length: 2.5,
    };
    let s = serde_json::to_string(&p).unwrap();
    assert_eq!(s, r#"{"kind":"arc-minus","vertices":[0,1,2],"length":2.5}"#);
    assert_eq!(serde_json::from_str::<Primitive<f64>>(&s).unwrap(), p);
}
