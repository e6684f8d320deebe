//! Acceptance run: every criterion at its stated tolerance, one pass/fail
//! line each. Exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapegraph::features::{FeatureClass, Interval, MeasuredInstance, Model};
use shapegraph::geometry::wrap_360;
use shapegraph::measurements::{Measure, Scale};
use shapegraph::pipeline::data::{load_pool, Split};
use shapegraph::pipeline::{
    by_digit, evaluate_damaged, evaluate_distractors, evaluate_multi, evaluate_noise, evaluate_single, perturbation_class, train,
    DigitExamples, DistractorConfig, EvalReport, MultiSceneConfig, RecoveryConfig, SingleSceneConfig, TrainConfig,
};
use shapegraph::primitives::PrimitiveKind;
use shapegraph::raster::GrayImage;
use shapegraph::recognizer::{best_instance, find_instances, PreparedGraph, SearchBudget};
use shapegraph::skeleton_graph::SimplifiedGraph;
use shapegraph::synth::{brute_force_instances, random_class, random_graph};
use shapegraph::thinning::thin;

const PERCENTAGE_POINT: f64 = 0.01;
const EPS: f64 = 1e-9;

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn line(o: &Outcome) -> String {
    format!("criterion {}: {} | {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail)
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn pool() -> Vec<GrayImage> {
    load_pool(
        &data_path("mnist-sample-images-idx3-ubyte.gz"),
        &data_path("mnist-sample-labels-idx1-ubyte.gz"),
    )
    .expect("bundled digit pool")
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = wrap_360(a - b);
    d.min(360.0 - d)
}

fn same_value(m: Measure, a: f64, b: f64) -> bool {
    match m.scale() {
        Scale::Circular => angle_gap(a, b) <= EPS,
        _ => (a - b).abs() <= EPS * a.abs().max(1.0),
    }
}

type CandidateKey = (PrimitiveKind, Vec<usize>);

fn keys(pg: &PreparedGraph<f64>) -> Vec<CandidateKey> {
    pg.index
        .candidates
        .iter()
        .map(|c| (c.primitive.kind, c.primitive.walk.vertices.clone()))
        .collect()
}

/// Every unary and pairwise measurement, keyed by primitive walk.
fn measurements(pg: &PreparedGraph<f64>) -> BTreeMap<(CandidateKey, Option<CandidateKey>), Vec<(Measure, f64)>> {
    let ks = keys(pg);
    let mut out = BTreeMap::new();
    for (a, ka) in ks.iter().enumerate() {
        let names = Measure::unary_names(ka.0);
        out.insert((ka.clone(), None), names.iter().copied().zip(pg.unary[a].iter().copied()).collect());
        for (b, kb) in ks.iter().enumerate().filter(|&(b, _)| b != a) {
            let names = Measure::relation_names(ka.0, kb.0);
            out.insert((ka.clone(), Some(kb.clone())), names.into_iter().zip(pg.relation(a, b)).collect());
        }
    }
    out
}

fn verdicts(g: &SimplifiedGraph<f64>, cls: &FeatureClass, budget: &SearchBudget) -> BTreeSet<Vec<(PrimitiveKind, Vec<usize>)>> {
    find_instances(g, cls, budget).detections.into_iter().map(|d| d.assignment).collect()
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let budget = SearchBudget::default();
    let (mut graphs, mut values, mut broken) = (0, 0usize, Vec::new());
    for i in 0..1000 {
        let m = rng.gen_range(1..=8);
        let g = random_graph::<f64, _>(&mut rng, m, 20);
        let cls = random_class(&mut rng, &g, budget.primitives.line_threshold);
        let (dx, dy) = (rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
        let s = rng.gen_range(0.05..20.0);
        let base = PreparedGraph::new(g.clone(), &budget.primitives);
        let want = measurements(&base);
        let want_verdicts = verdicts(&g, &cls, &budget);
        for h in [g.translated(dx, dy), g.scaled(s), g.scaled(s).translated(dx, dy)] {
            let got = measurements(&PreparedGraph::new(h.clone(), &budget.primitives));
            let same = got.len() == want.len()
                && want.iter().all(|(k, vs)| {
                    got.get(k).is_some_and(|ws| {
                        ws.len() == vs.len() && vs.iter().zip(ws).all(|(&(m, a), &(_, b))| same_value(m, a, b))
                    })
                });
            values += want.values().map(Vec::len).sum::<usize>();
            if !same || verdicts(&h, &cls, &budget) != want_verdicts {
                broken.push(i);
            }
        }
        graphs += 1;
    }
    Outcome {
        id: 6,
        pass: broken.is_empty(),
        detail: format!("{graphs} random graphs, {values} measurement comparisons over translation, scaling and both; violating graphs {broken:?}"),
    }
}

fn oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = SearchBudget::default();
    let (mut mismatches, mut nonempty, mut detections) = (Vec::new(), 0, 0);
    for i in 0..200 {
        let m = rng.gen_range(1..=8);
        let g = random_graph::<f64, _>(&mut rng, m, 14);
        let cls = random_class(&mut rng, &g, budget.primitives.line_threshold);
        let want = brute_force_instances(&g, &cls, budget.primitives.line_threshold);
        let found = find_instances(&g, &cls, &budget);
        let got: BTreeSet<_> = found.detections.iter().map(|d| d.assignment.clone()).collect();
        if found.stats.exhausted || got.len() != found.detections.len() || got != want {
            mismatches.push(i);
        }
        nonempty += usize::from(!want.is_empty());
        detections += want.len();
    }
    Outcome {
        id: 7,
        pass: mismatches.is_empty(),
        detail: format!("200 graphs of at most 8 edges, {nonempty} with instances, {detections} oracle instances; mismatching graphs {mismatches:?}"),
    }
}

fn thinning(pool: &[GrayImage], cfg: &TrainConfig) -> Outcome {
    let (mut blocks, mut outside, mut components, mut holes) = (0, 0, 0, 0);
    let n = 1000.min(pool.len());
    for img in &pool[..n] {
        let mask = cfg.front.binary(img);
        let skel = thin(&mask);
        blocks += usize::from(skel.has_2x2_block());
        outside += usize::from(!skel.is_subset_of(&mask));
        components += usize::from(skel.component_count() != mask.component_count());
        holes += usize::from(skel.hole_count() != mask.hole_count());
    }
    Outcome {
        id: 8,
        pass: blocks + outside + components + holes == 0,
        detail: format!("{n} skeletons: 2x2 blocks {blocks}, pixels outside input {outside}, component changes {components}, hole changes {holes}"),
    }
}

fn has_arc(c: &FeatureClass) -> bool {
    c.graph.vertices.iter().any(|&k| matches!(k, PrimitiveKind::ArcPlus | PrimitiveKind::ArcMinus))
}

fn five_class(model: &Model, seconds: f64) -> Outcome {
    let fives: Vec<&FeatureClass> = model.classes.iter().filter(|c| c.label == 5).collect();
    let best = fives.iter().copied().fold(None, |b: Option<&FeatureClass>, c| match b {
        Some(b) if b.hit_rate >= c.hit_rate => Some(b),
        _ => Some(c),
    });
    let two_arcs = fives
        .iter()
        .filter(|c| c.graph.vertices.len() == 2 && c.graph.vertices.iter().all(|&k| k != PrimitiveKind::Line && k != PrimitiveKind::Loop))
        .map(|c| c.hit_rate)
        .fold(0.0, f64::max);
    let pass = fives.iter().any(|c| c.false_alarm_rate <= 0.01 && c.hit_rate >= 0.70) && seconds < 600.0;
    Outcome {
        id: 1,
        pass,
        detail: match best {
            Some(b) => format!(
                "{} digit-5 classes; best {} hit {:.2} FA {:.3}; best two-arc class hit {:.2}; training {:.0} s",
                fives.len(),
                b.id,
                b.hit_rate,
                b.false_alarm_rate,
                two_arcs,
                seconds
            ),
            None => "no digit-5 class".into(),
        },
    }
}

fn location_scale(centered: &EvalReport, random: &EvalReport) -> Outcome {
    let gap = (centered.accuracy - random.accuracy).abs();
    Outcome {
        id: 2,
        pass: random.accuracy >= 0.70 && gap <= 3.0 * PERCENTAGE_POINT + EPS,
        detail: format!(
            "{} images: random placement {:.3}, centered {:.3}, gap {:.1} pp",
            random.total,
            random.accuracy,
            centered.accuracy,
            gap * 100.0
        ),
    }
}

fn per_digit_gap(a: &EvalReport, b: &EvalReport) -> f64 {
    a.per_digit
        .iter()
        .zip(&b.per_digit)
        .map(|(x, y)| (x.accuracy - y.accuracy).abs())
        .fold((a.accuracy - b.accuracy).abs(), f64::max)
}

fn multi_digit(model: &Model, test: &[GrayImage]) -> Outcome {
    let run = |k: usize| evaluate_multi(model, test, &MultiSceneConfig { digits_per_scene: k, ..Default::default() }).expect("scenes");
    let three = run(3);
    let two = run(2);
    let five = run(5);
    let equal = per_digit_gap(&three.scenes, &three.alone);
    let flat = per_digit_gap(&two.scenes, &five.scenes);
    Outcome {
        id: 3,
        pass: equal <= 2.0 * PERCENTAGE_POINT + EPS && flat <= 2.0 * PERCENTAGE_POINT + EPS,
        detail: format!(
            "3-digit scenes {:.3} vs alone {:.3} (largest per-digit gap {:.1} pp); 2-digit {:.3} vs 5-digit {:.3} (largest gap {:.1} pp)",
            three.scenes.accuracy,
            three.alone.accuracy,
            equal * 100.0,
            two.scenes.accuracy,
            five.scenes.accuracy,
            flat * 100.0
        ),
    }
}

fn distractors(model: &Model, test: &[GrayImage], random_accuracy: f64) -> Outcome {
    let digits: Vec<GrayImage> = test.iter().step_by(5).take(100).cloned().collect();
    let r = evaluate_distractors(model, &digits, &DistractorConfig::default()).expect("distractor scenes");
    let gap = (r.digit_rate() - random_accuracy).abs();
    Outcome {
        id: 4,
        pass: r.distractor_detections == 0 && gap <= 3.0 * PERCENTAGE_POINT + EPS,
        detail: format!(
            "{} scenes: detections on the letter in {}, digit rate {:.3} vs {:.3} single-digit ({:.1} pp)",
            r.scenes,
            r.distractor_detections,
            r.digit_rate(),
            random_accuracy,
            gap * 100.0
        ),
    }
}

/// Zero-slack interval of `samples`.
fn fitted(m: Measure, samples: &[f64]) -> Option<Interval> {
    Interval::fit(m.scale(), samples).ok()
}

fn span_share(small: Option<Interval>, large: Option<Interval>) -> f64 {
    match (small.and_then(|i| i.span()), large.and_then(|i| i.span())) {
        (Some(s), Some(l)) if l > 0.0 => s / l,
        (Some(_), Some(_)) => 1.0,
        _ => 0.0,
    }
}

fn range_stability(model: &Model, pool: &[GrayImage], cfg: &TrainConfig) -> Outcome {
    let cls = model
        .classes
        .iter()
        .filter(|c| c.label == 5 && has_arc(c) && c.graph.vertices.len() >= 2)
        .fold(None, |b: Option<&FeatureClass>, c| match b {
            Some(b) if b.hit_rate >= c.hit_rate => Some(b),
            _ => Some(c),
        });
    let Some(cls) = cls else {
        return Outcome { id: 5, pass: false, detail: "no digit-5 class with an arc".into() };
    };
    // Up to 300 fives from the training pool, enough for 100 instances.
    let fives = Split { train: 0..300, ..Split::default() }.train(pool);
    let per = by_digit(&fives, &TrainConfig { examples_per_digit: 300, ..cfg.clone() }).expect("labeled training pool");
    let ex = DigitExamples::new(5, &per[5], cfg);
    let widest = *cfg.perturbations.last().expect("perturbation levels");
    let neighbourhood = perturbation_class(5, &cls.graph, &cls.source, widest);
    let found: Vec<MeasuredInstance> = ex
        .images
        .iter()
        .filter_map(|img| img.components.iter().max_by(|a, b| a.length.total_cmp(&b.length)))
        .filter_map(|pg| {
            let (best, _) = best_instance(pg, &neighbourhood, cfg.node_limit);
            let (assignment, _) = best?;
            let prims: Vec<_> = assignment.iter().map(|&c| &pg.index.candidates[c].primitive).collect();
            Some(MeasuredInstance::measure(&pg.graph, &prims, pg.length))
        })
        .take(100)
        .collect();
    let arc = cls.graph.vertices.iter().position(|&k| matches!(k, PrimitiveKind::ArcPlus | PrimitiveKind::ArcMinus)).expect("arc vertex");
    let change_at = Measure::unary_names(cls.graph.vertices[arc]).iter().position(|&m| m == Measure::OverallChange).expect("arc change");
    let (k0, k1) = (cls.graph.vertices[0], cls.graph.vertices[1]);
    let names = Measure::relation_names(k0, k1);
    let dir_at = names.iter().position(|&m| m == Measure::ComOffsetDirection).expect("offset direction");
    let len_at = names.iter().position(|&m| m == Measure::ComOffsetOverL1).expect("offset over length");
    let change: Vec<f64> = found.iter().map(|f| f.unary[arc][change_at]).collect();
    let com_y: Vec<f64> = found
        .iter()
        .map(|f| {
            let r = &f.relations[0][1];
            r[len_at] * r[dir_at].to_radians().sin()
        })
        .collect();
    let n = found.len();
    let small = 20.min(n);
    let share_change = span_share(fitted(Measure::OverallChange, &change[..small]), fitted(Measure::OverallChange, &change));
    let share_com = span_share(fitted(Measure::ComOffsetOverL1, &com_y[..small]), fitted(Measure::ComOffsetOverL1, &com_y));
    Outcome {
        id: 5,
        pass: n == 100 && share_change >= 0.8 && share_com >= 0.8,
        detail: format!(
            "class {} matched in {n} training 5s; 20-example interval covers {:.0}% of the full change-of-direction interval and {:.0}% of the vertical CoM offset / length interval",
            cls.id,
            share_change * 100.0,
            share_com * 100.0
        ),
    }
}

fn noisy(model: &Model, digits: &[GrayImage]) -> Outcome {
    let cfg = RecoveryConfig::default();
    let damaged = evaluate_damaged(model, digits, &cfg).expect("damaged digits");
    let noise = evaluate_noise(model, digits, &cfg).expect("noise images");
    let mut iterations: BTreeMap<usize, usize> = BTreeMap::new();
    for t in damaged.trials.iter().filter(|t| t.detected.is_some() && t.detected == t.label) {
        *iterations.entry(t.iteration.unwrap_or(0)).or_default() += 1;
    }
    Outcome {
        id: 9,
        pass: damaged.rate() >= 0.5 && noise.rate() <= 0.05,
        detail: format!(
            "damaged digits recovered {}/{} (by filter iteration {:?}); noise images firing {}/{}",
            damaged.successes,
            damaged.trials.len(),
            iterations,
            noise.successes,
            noise.trials.len()
        ),
    }
}

/// Criterion ids given as arguments select what runs; none runs everything.
fn selected() -> Vec<usize> {
    let ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ids.is_empty() {
        (1..=9).collect()
    } else {
        ids
    }
}

fn main() {
    let started = Instant::now();
    let want = selected();
    let on = |id: usize| want.contains(&id);
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("{}", line(&o));
        outcomes.push(o);
    };
    if on(6) {
        report(invariance());
    }
    if on(7) {
        report(oracle());
    }
    if !want.iter().any(|&id| id != 6 && id != 7) {
        return finish(started, outcomes);
    }

    let pool = pool();
    let cfg = TrainConfig::default();
    if on(8) {
        report(thinning(&pool, &cfg));
    }
    if !want.iter().any(|&id| id != 6 && id != 7 && id != 8) {
        return finish(started, outcomes);
    }

    let split = Split::default();
    let train_set = split.train(&pool);
    let validation = split.validation(&pool);
    let t = Instant::now();
    let (model, _) = train(&train_set, &validation, &cfg).expect("training");
    if on(1) {
        report(five_class(&model, t.elapsed().as_secs_f64()));
    }

    let test = split.test(&pool, 50);
    let mut random_accuracy = None;
    if on(2) || on(4) {
        let random = evaluate_single(&model, &test, &SingleSceneConfig::default()).expect("random placement");
        if on(2) {
            let centered = evaluate_single(&model, &test, &SingleSceneConfig { centered: true, ..Default::default() })
                .expect("centered");
            report(location_scale(&centered, &random));
        }
        random_accuracy = Some(random.accuracy);
    }
    if on(3) {
        report(multi_digit(&model, &test));
    }
    if let (true, Some(acc)) = (on(4), random_accuracy) {
        report(distractors(&model, &test, acc));
    }
    if on(5) {
        report(range_stability(&model, &pool, &cfg));
    }
    if on(9) {
        report(noisy(&model, &split.test(&pool, 20)));
    }
    finish(started, outcomes)
}

fn finish(started: Instant, mut outcomes: Vec<Outcome>) {
    outcomes.sort_by_key(|o| o.id);
    println!("\nacceptance summary ({:.0} s)", started.elapsed().as_secs_f64());
    for o in &outcomes {
        println!("{}", line(o));
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
