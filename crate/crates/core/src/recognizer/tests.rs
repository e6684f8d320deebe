use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::Point;
use crate::synth::{brute_force_instances, random_class, random_graph};

fn budget() -> SearchBudget {
    SearchBudget::default()
}

#[test]
fn search_matches_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonempty = 0;
    for _ in 0..150 {
        let m = rng.gen_range(1..=7);
        let g = random_graph::<f64, _>(&mut rng, m, 12);
        let cls = random_class(&mut rng, &g, 0.1);
        let want = brute_force_instances(&g, &cls, 0.1);
        let found = find_instances(&g, &cls, &budget());
        assert!(!found.stats.exhausted);
        let got: BTreeSet<_> = found.detections.iter().map(|d| d.assignment.clone()).collect();
        assert_eq!(got.len(), found.detections.len(), "duplicate instances");
        assert_eq!(got, want, "{g:?}");
        nonempty += !want.is_empty() as usize;

        let pg = PreparedGraph::new(g.clone(), &budget().primitives);
        let (best, _) = best_instance(&pg, &cls, budget().node_limit);
        let max = found.detections.iter().map(|d| d.coverage).fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
        assert_eq!(best.map(|b| b.1), max);
    }
    assert!(nonempty > 30, "oracle comparison too often trivial: {nonempty}");
}

#[test]
fn empty_graph_has_no_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_graph::<f64, _>(&mut rng, 3, 10);
    let cls = random_class(&mut rng, &g, 0.1);
    let found = find_instances(&SimplifiedGraph::<f64>::empty(), &cls, &budget());
    assert!(found.detections.is_empty());
}

#[test]
fn search_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let m = rng.gen_range(2..=6);
        let g = random_graph::<f64, _>(&mut rng, m, 12);
        let cls = random_class(&mut rng, &g, 0.1);
        let a = find_instances(&g, &cls, &budget());
        let b = find_instances(&g, &cls, &budget());
        assert_eq!(a, b);
    }
}

#[test]
fn verdicts_survive_translation_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let m = rng.gen_range(1..=6);
        let g = random_graph::<f64, _>(&mut rng, m, 12);
        let cls = random_class(&mut rng, &g, 0.1);
        let base: BTreeSet<_> = find_instances(&g, &cls, &budget()).detections.into_iter().map(|d| d.assignment).collect();
        for h in [g.translated(37.0, -12.0), g.scaled(4.0)] {
            let moved: BTreeSet<_> = find_instances(&h, &cls, &budget()).detections.into_iter().map(|d| d.assignment).collect();
            assert_eq!(moved, base);
        }
    }
}

#[test]
fn node_limit_reports_exhaustion() {
    // a star of six spokes offers many line triples
    let mut v = vec![Point::new(0.0, 0.0)];
    let mut e = Vec::new();
    for k in 0..6 {
        let a = k as f64 * std::f64::consts::PI / 3.0;
        v.push(Point::new(10.0 * a.cos(), 10.0 * a.sin()));
        e.push((0, k + 1));
    }
    let g = SimplifiedGraph::new(v, e);
    let mut cls = random_class(&mut ChaCha8Rng::seed_from_u64(0), &g, 0.1);
    cls.graph = crate::features::DecompositionGraph::complete(vec![PrimitiveKind::Line; 3]);
    cls.ranges.unary = vec![vec![crate::features::Interval::Any]; 3];
    cls.ranges.relations = vec![vec![crate::features::Interval::Any; 6]; 3];
    let tight = SearchBudget {
        node_limit: 5,
        ..budget()
    };
    let r = find_instances(&g, &cls, &tight);
    assert!(r.stats.exhausted);
    let full = find_instances(&g, &cls, &budget());
    assert!(!full.stats.exhausted);
    assert!(full.detections.len() > r.detections.len());
}
