//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Reference numbers are transcribed here by hand and
//! every check recomputes its expectation independently of the library.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use emoact::epa::{label_emotion, EmotionCatalog, EmotionLabel, EpaVector};
use emoact::expression::{select_cues, AnimationPicker, DisplayMode, ExpressionSettings, Trigger};
use emoact::generation::{generate_emotion_raw, GenerationParams, Identity};
use emoact::impression::{ExpectedSigns, PerceptionKind, Sign};
use emoact::session::{
    replay, Autoplay, ClientMessage, ServerMessage, Session, SessionConfig, SessionTrace,
    TracedSession,
};
use emoact::story::{builtin, NodeId, NodeKind, StoryGraph, BUILTIN_STORIES};
use emoact::AffectPipeline;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

/// Reference emotion vectors.
const TABLE_1: [(EmotionLabel, [f64; 3]); 4] = [
    (EmotionLabel::Anger, [1.95, 1.34, 1.78]),
    (EmotionLabel::Fear, [-2.04, -0.94, -0.70]),
    (EmotionLabel::Happiness, [3.54, 2.53, 1.28]),
    (EmotionLabel::Sadness, [-2.52, -2.29, -2.21]),
];

/// Reference eye colours, as printed.
const TABLE_2: [(EmotionLabel, &str); 4] = [
    (EmotionLabel::Anger, "Red"),
    (EmotionLabel::Fear, "Black"),
    (EmotionLabel::Happiness, "Green"),
    (EmotionLabel::Sadness, "Dark Blue"),
];

fn oracle_emotion(id: [f64; 3], imp: [f64; 3], delta: f64) -> [f64; 3] {
    let e_e = imp[0] - id[0] + 1.0;
    let e = e_e + (imp[2] - id[2]) * delta;
    let p_p = imp[1] - id[1];
    let p = p_p - (imp[2] - id[2]);
    let a = imp[2] + id[2];
    [e, p, a]
}

fn oracle_cosine(u: [f64; 3], v: [f64; 3]) -> f64 {
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    dot / (nu * nv)
}

/// Brute force over the four reference vectors; ties keep the first.
fn oracle_label(v: [f64; 3]) -> (EmotionLabel, Option<f64>) {
    if v == [0.0; 3] {
        return (EmotionLabel::Neutral, None);
    }
    let mut best: Option<(EmotionLabel, f64)> = None;
    for (label, r) in TABLE_1 {
        let s = oracle_cosine(v, r);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((label, s));
        }
    }
    match best {
        Some((label, s)) if s >= 0.6 => (label, Some(s)),
        _ => (EmotionLabel::Neutral, None),
    }
}

fn color_name(label: EmotionLabel) -> Option<String> {
    TABLE_2
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, c)| c.replace(' ', ""))
}

fn rand_vec(rng: &mut ChaCha8Rng, r: f64) -> [f64; 3] {
    [
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
    ]
}

fn equation_oracle() -> Outcome {
    let grid = [-4.0, -2.0, 0.0, 2.0, 4.0];
    let mut points = Vec::new();
    for e in grid {
        for p in grid {
            for a in grid {
                points.push([e, p, a]);
            }
        }
    }
    let params = GenerationParams::default();
    let start = Instant::now();
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for id in &points {
        let identity = Identity::new(EpaVector::new(id[0], id[1], id[2])).unwrap();
        for imp in &points {
            let got =
                generate_emotion_raw(&identity, &EpaVector::new(imp[0], imp[1], imp[2]), &params)
                    .unwrap();
            let want = oracle_emotion(*id, *imp, params.delta);
            for (g, w) in got.components().iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(pairs == 15_625, "grid has {pairs} pairs");
    ensure!(worst <= 1e-9, "max deviation {worst:e}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "{pairs} pairs, max deviation {worst:e}, {elapsed:.2?}"
    ))
}

fn identity_confirmation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = GenerationParams::default();
    for _ in 0..100 {
        let v = rand_vec(&mut rng, 4.0);
        let id = EpaVector::new(v[0], v[1], v[2]);
        let got = generate_emotion_raw(&Identity::new(id).unwrap(), &id, &params).unwrap();
        ensure!(
            got == EpaVector::new(1.0, 0.0, 2.0 * v[2]),
            "identity {id} gave {got}"
        );
    }
    Ok("100 identities give exactly (1, 0, 2A)".into())
}

fn table_1_reproduction() -> Outcome {
    let catalog = EmotionCatalog::default();
    for (label, v) in TABLE_1 {
        ensure!(
            catalog.reference(label) == Some(EpaVector::new(v[0], v[1], v[2])),
            "catalog vector for {label} differs from the reference table"
        );
        let l = label_emotion(&EpaVector::new(v[0], v[1], v[2]), &catalog).unwrap();
        let s = l.similarity.unwrap_or(f64::NAN);
        ensure!(
            l.label == label && (s - 1.0).abs() <= 1e-9,
            "{label} self-labels as {} ({s})",
            l.label
        );
    }
    let probe = [1.0, 0.0, 2.0];
    let (want_label, want_sim) = oracle_label(probe);
    let got = label_emotion(&EpaVector::new(1.0, 0.0, 2.0), &catalog).unwrap();
    let sim = got.similarity.unwrap_or(f64::NAN);
    ensure!(
        want_label == EmotionLabel::Anger,
        "oracle labels the probe {want_label}"
    );
    ensure!(
        got.label == EmotionLabel::Anger,
        "probe labelled {}",
        got.label
    );
    ensure!((sim - 0.832).abs() <= 0.005, "probe similarity {sim}");
    ensure!(
        (sim - want_sim.unwrap()).abs() <= 1e-12,
        "oracle similarity {want_sim:?} vs {sim}"
    );
    Ok(format!(
        "4 self-labels at 1.0, probe (1,0,2) -> Anger {sim:.4}"
    ))
}

fn scale_invariance() -> Outcome {
    let catalog = EmotionCatalog::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 1000 {
        let v = rand_vec(&mut rng, 4.0);
        let v = EpaVector::new(v[0], v[1], v[2]);
        if v.norm() < 1e-6 {
            continue;
        }
        let base = label_emotion(&v, &catalog).unwrap();
        for k in [0.5, 2.0] {
            let scaled = label_emotion(&v.scale(k), &catalog).unwrap();
            ensure!(
                scaled.label == base.label,
                "{v} x{k}: {} vs {}",
                scaled.label,
                base.label
            );
            let same = match (scaled.similarity, base.similarity) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
                (None, None) => true,
                _ => false,
            };
            ensure!(
                same,
                "{v} x{k}: similarity {:?} vs {:?}",
                scaled.similarity,
                base.similarity
            );
        }
        checked += 1;
    }
    Ok("1000 vectors x {0.5, 2.0}".into())
}

fn random_session(rng: &mut ChaCha8Rng) -> TracedSession {
    let mut config = SessionConfig {
        seed: rng.gen(),
        ..Default::default()
    };
    if rng.gen_bool(0.5) {
        config.policy.mode = DisplayMode::HighFrequency;
    }
    let story = BUILTIN_STORIES[rng.gen_range(0..BUILTIN_STORIES.len())];
    TracedSession::new(Session::new(config, Arc::new(builtin(story).unwrap())).unwrap())
}

/// Random but mostly valid traffic: ticks, choices, perception and a few
/// rejected events.
fn random_traffic(
    rng: &mut ChaCha8Rng,
    traced: &mut TracedSession,
    events: usize,
) -> Vec<ServerMessage> {
    let mut all = Vec::new();
    let mut t = 0;
    let _ = traced
        .handle(&ClientMessage::start(0, 0, None))
        .map(|o| all.extend(o));
    for _ in 0..events {
        let session = traced.session();
        let seq = session.next_seq();
        t += rng.gen_range(0..6000);
        let msg = match rng.gen_range(0..10) {
            0..=4 => ClientMessage::Tick { seq, t },
            5..=6 => {
                let option = session
                    .story()
                    .node(session.cursor())
                    .and_then(|n| n.options())
                    .map(|o| o[rng.gen_range(0..2)].id.clone())
                    .unwrap_or_else(|| "not_an_option".into());
                ClientMessage::Choice { seq, t, option }
            }
            7 => ClientMessage::Perception {
                seq,
                t,
                perception: PerceptionKind::Gaze {
                    on_agent: rng.gen(),
                },
            },
            8 => ClientMessage::Perception {
                seq,
                t,
                perception: PerceptionKind::UserEmotion {
                    valence: rng.gen_range(-1.0..=1.0),
                },
            },
            _ => ClientMessage::Perception {
                seq,
                t,
                perception: PerceptionKind::Proximity {
                    distance_m: rng.gen_range(0.3..3.0),
                },
            },
        };
        if let Ok(out) = traced.handle(&msg) {
            all.extend(out);
        }
    }
    all
}

fn table_2_reproduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut per_label: BTreeMap<EmotionLabel, usize> = BTreeMap::new();
    for i in 0..1000 {
        let mut traced = random_session(&mut rng);
        let events = rng.gen_range(5..80);
        for m in random_traffic(&mut rng, &mut traced, events) {
            if let ServerMessage::ExpressionCue {
                label, eye_color, ..
            } = m
            {
                *per_label.entry(label).or_default() += 1;
                if let Some(want) = color_name(label) {
                    ensure!(
                        eye_color.as_str() == want,
                        "sequence {i}: {label} shown as {eye_color}, expected {want}"
                    );
                }
            }
        }
    }
    for (label, _) in TABLE_2 {
        ensure!(
            per_label.contains_key(&label),
            "no {label} cue in 1000 sequences"
        );
    }
    let summary: Vec<String> = per_label.iter().map(|(l, n)| format!("{l} {n}")).collect();
    Ok(format!("1000 sequences, cues: {}", summary.join(", ")))
}

fn paths(story: &StoryGraph) -> Vec<Vec<String>> {
    fn walk(g: &StoryGraph, id: &NodeId, acc: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        match &g.node(id).unwrap().kind {
            NodeKind::Terminal => out.push(acc.clone()),
            NodeKind::Linear { next, .. } => walk(g, next, acc, out),
            NodeKind::Decision { options, .. } => {
                for o in options {
                    acc.push(o.id.clone());
                    walk(g, &o.next, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(story, &story.start, &mut Vec::new(), &mut out);
    out
}

fn play(
    story: &Arc<StoryGraph>,
    mode: DisplayMode,
    seed: u64,
    choices: &[String],
    pace: Autoplay,
) -> TracedSession {
    let mut config = SessionConfig {
        seed,
        ..Default::default()
    };
    config.policy.mode = mode;
    let mut traced = TracedSession::new(Session::new(config, Arc::clone(story)).unwrap());
    let refs: Vec<&str> = choices.iter().map(String::as_str).collect();
    pace.play_path(&mut traced, &refs).unwrap();
    traced
}

fn cues(trace: &SessionTrace) -> Vec<(u64, Option<String>)> {
    trace
        .records
        .iter()
        .flat_map(|r| r.outputs.iter())
        .filter_map(|m| match m {
            ServerMessage::ExpressionCue { t, animation, .. } => {
                Some((*t, animation.as_ref().map(|a| a.to_string())))
            }
            _ => None,
        })
        .collect()
}

fn policy_behavior() -> Outcome {
    let steady = Autoplay {
        sentence_ms: 5_000,
        think_ms: 5_000,
    };
    let mut high_runs = 0;
    let mut min_gap = u64::MAX;
    let mut low_checked = 0;
    for id in BUILTIN_STORIES {
        let story = Arc::new(builtin(id).unwrap());
        let all = paths(&story);
        ensure!(all.len() == 16, "{id} has {} paths", all.len());
        for (i, choices) in all.iter().enumerate() {
            let traced = play(
                &story,
                DisplayMode::HighFrequency,
                i as u64,
                choices,
                steady,
            );
            let times: Vec<u64> = cues(traced.trace())
                .into_iter()
                .filter_map(|(t, a)| a.map(|_| t))
                .collect();
            for w in times.windows(2) {
                let gap = w[1] - w[0];
                ensure!(gap >= 30_000, "{id} path {i}: animations {gap} ms apart");
                min_gap = min_gap.min(gap);
            }
            high_runs += 1;

            let traced = play(&story, DisplayMode::LowFrequency, i as u64, choices, steady);
            let n_choices = traced
                .trace()
                .records
                .iter()
                .filter(|r| matches!(r.event, ClientMessage::Choice { .. }))
                .count();
            let n_cues = cues(traced.trace()).len();
            ensure!(n_choices == 4, "{id} path {i}: {n_choices} choices");
            ensure!(
                n_cues == n_choices,
                "{id} path {i}: {n_cues} cues for {n_choices} choices"
            );
            low_checked += 1;
        }
    }

    let settings = ExpressionSettings {
        policy: emoact::expression::DisplayPolicy {
            mode: DisplayMode::HighFrequency,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut picker = AnimationPicker::new(3);
    let mut last = None;
    let mut animated = Vec::new();
    for k in 0..120u64 {
        let t = k * 5_000;
        let cue = select_cues(
            EmotionLabel::Happiness,
            Trigger::SentenceSpoken,
            t,
            last,
            &settings,
            &mut picker,
        )
        .unwrap();
        if cue.animation.is_some() {
            last = Some(t);
            animated.push(t);
        }
    }
    let gaps: Vec<u64> = animated.windows(2).map(|w| w[1] - w[0]).collect();
    ensure!(
        !gaps.is_empty() && gaps.iter().all(|&g| g == 30_000),
        "steady-label gaps {gaps:?}"
    );
    Ok(format!(
        "high: {high_runs} runs, min gap {min_gap} ms, steady gap exactly 30000 ms; low: cues == choices on {low_checked} paths"
    ))
}

fn signs(s: &ExpectedSigns) -> [f64; 3] {
    let f = |x: Sign| match x {
        Sign::Negative => -1.0,
        Sign::Zero => 0.0,
        Sign::Positive => 1.0,
    };
    [f(s.e), f(s.p), f(s.a)]
}

/// Choice rule recomputed by hand: extend a matching sign by 0.5, snap a
/// mismatching one to sign * 1.0.
fn oracle_choice(v: [f64; 3], s: [f64; 3]) -> [f64; 3] {
    let mut out = v;
    for i in 0..3 {
        if s[i] == 0.0 {
            continue;
        }
        out[i] = if v[i] == 0.0 || v[i].signum() == s[i] {
            v[i] + 0.5 * s[i]
        } else {
            s[i]
        };
        out[i] = out[i].clamp(-4.0, 4.0);
    }
    out
}

fn story_guarantees() -> Outcome {
    let start = Instant::now();
    let pipeline = AffectPipeline::default();
    let identity = pipeline.identity.value().components();
    let mut total_paths = 0;
    for id in BUILTIN_STORIES {
        let story = builtin(id).unwrap();
        // annotated steps per path: chosen options plus forced nodes
        let mut found: Vec<Vec<EmotionLabel>> = Vec::new();
        fn walk(
            g: &StoryGraph,
            id: &NodeId,
            acc: &mut Vec<EmotionLabel>,
            decisions: usize,
            out: &mut Vec<Vec<EmotionLabel>>,
        ) {
            let node = g.node(id).unwrap();
            match &node.kind {
                NodeKind::Terminal => {
                    assert_eq!(decisions, 4, "path with {decisions} decisions");
                    out.push(acc.clone());
                }
                NodeKind::Linear { next, forced } => {
                    if let Some(f) = forced {
                        acc.push(f.expected_emotion);
                    }
                    walk(g, next, acc, decisions, out);
                    if forced.is_some() {
                        acc.pop();
                    }
                }
                NodeKind::Decision { options, .. } => {
                    for o in options {
                        acc.push(o.expected_emotion);
                        walk(g, &o.next, acc, decisions + 1, out);
                        acc.pop();
                    }
                }
            }
        }
        let walked = catch_unwind(AssertUnwindSafe(|| {
            walk(&story, &story.start, &mut Vec::new(), 0, &mut found)
        }));
        ensure!(
            walked.is_ok(),
            "{id}: a path does not have exactly 4 decisions"
        );
        ensure!(found.len() == 16, "{id}: {} paths", found.len());
        for (i, p) in found.iter().enumerate() {
            ensure!(
                p.contains(&EmotionLabel::Anger),
                "{id} path {i} has no Anger: {p:?}"
            );
            ensure!(
                p.contains(&EmotionLabel::Fear),
                "{id} path {i} has no Fear: {p:?}"
            );
        }
        total_paths += found.len();

        let mut annotated = Vec::new();
        for node in story.nodes() {
            if let Some(options) = node.options() {
                for o in options {
                    annotated.push((
                        format!("{}/{}", node.id, o.id),
                        o.expected,
                        o.expected_emotion,
                    ));
                }
            }
            if let Some(f) = node.forced() {
                annotated.push((
                    format!("{} (forced)", node.id),
                    f.expected,
                    f.expected_emotion,
                ));
            }
        }
        for label in EmotionLabel::BASIC {
            ensure!(
                annotated.iter().any(|(_, _, l)| *l == label),
                "{id}: no option elicits {label}"
            );
        }
        for (name, expected, label) in &annotated {
            let produced = pipeline.label_for_signs(expected).unwrap().labeling.label;
            let imp = oracle_choice(identity, signs(expected));
            let emo = oracle_emotion(identity, imp, 0.5).map(|x| x.clamp(-4.0, 4.0));
            let (oracle, _) = oracle_label(emo);
            ensure!(
                produced == *label,
                "{id} {name}: pipeline gives {produced}, annotated {label}"
            );
            ensure!(
                oracle == *label,
                "{id} {name}: oracle gives {oracle}, annotated {label}"
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "{total_paths} paths across 2 stories, {elapsed:.2?}"
    ))
}

fn replay_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut traces = 0;
    for id in BUILTIN_STORIES {
        let story = Arc::new(builtin(id).unwrap());
        for (i, choices) in paths(&story).iter().enumerate() {
            for mode in [DisplayMode::LowFrequency, DisplayMode::HighFrequency] {
                let pace = Autoplay::default();
                let a = play(&story, mode, i as u64, choices, pace).into_trace();
                let b = play(&story, mode, i as u64, choices, pace).into_trace();
                ensure!(
                    a.to_text() == b.to_text(),
                    "{id} path {i} {mode:?}: traces differ"
                );
                let r1 = replay(&a).unwrap();
                let r2 = replay(&SessionTrace::parse(&a.to_text()).unwrap()).unwrap();
                ensure!(r1.is_ok(), "{id} path {i} {mode:?}: {r1}");
                ensure!(r1.to_string() == r2.to_string(), "replay reports differ");
                traces += 1;
            }
        }
    }
    for _ in 0..100 {
        let seed: u64 = rng.gen();
        let mut r1 = ChaCha8Rng::seed_from_u64(seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_session(&mut r1);
        let mut b = random_session(&mut r2);
        random_traffic(&mut r1, &mut a, 60);
        random_traffic(&mut r2, &mut b, 60);
        let (a, b) = (a.into_trace(), b.into_trace());
        ensure!(
            a.to_text() == b.to_text(),
            "random script {seed}: traces differ"
        );
        let report = replay(&SessionTrace::parse(&a.to_text()).unwrap()).unwrap();
        ensure!(report.is_ok(), "random script {seed}: {report}");
        traces += 1;
    }
    Ok(format!(
        "{traces} traces replayed with zero divergences, reruns byte-identical"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("equation oracle", equation_oracle),
        ("identity confirmation", identity_confirmation),
        ("emotion vector table", table_1_reproduction),
        ("scale invariance", scale_invariance),
        ("eye colour table", table_2_reproduction),
        ("display policy", policy_behavior),
        ("story guarantees", story_guarantees),
        ("replay determinism", replay_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
