//! Feed simulated perception (user valence, gaze, proximity) and story
//! choices into the impression and watch the agent's emotion follow.

use emoact::impression::{
    apply_choice, apply_perception, ExpectedSigns, ImpressionGains, PerceptionKind,
};
use emoact::AffectPipeline;

fn main() {
    let pipeline = AffectPipeline::default();
    let gains = ImpressionGains::default();
    let mut imp = pipeline.baseline_impression();

    let show = |what: &str, imp: &emoact::impression::Impression| {
        let a = pipeline.appraise(&imp.value).unwrap();
        println!(
            "{what:<34} impression {}  emotion {}  {}",
            imp.value, a.emotion, a.labeling.label
        );
    };
    show("start", &imp);

    let perceptions = [
        (
            "user looks at the robot",
            PerceptionKind::Gaze { on_agent: true },
        ),
        (
            "user smiles (valence 0.8)",
            PerceptionKind::UserEmotion { valence: 0.8 },
        ),
        (
            "user stands at 1.5 m",
            PerceptionKind::Proximity { distance_m: 1.5 },
        ),
        (
            "user steps closer to 0.7 m",
            PerceptionKind::Proximity { distance_m: 0.7 },
        ),
        ("user looks away", PerceptionKind::Gaze { on_agent: false }),
        (
            "user frowns (valence -0.6)",
            PerceptionKind::UserEmotion { valence: -0.6 },
        ),
    ];
    for (what, p) in perceptions {
        imp = apply_perception(&imp, &p, &gains).unwrap();
        show(what, &imp);
    }

    for (what, signs) in [
        (
            "choice with signs [+1, 0, +1]",
            ExpectedSigns::from_ints(1, 0, 1),
        ),
        (
            "choice with signs [0, +1, +1]",
            ExpectedSigns::from_ints(0, 1, 1),
        ),
        (
            "choice with signs [-1, -1, -1]",
            ExpectedSigns::from_ints(-1, -1, -1),
        ),
    ] {
        imp = apply_choice(&imp, &signs, &gains).unwrap();
        show(what, &imp);
    }
}
