//! Emotion generation from an identity and an impression, with and without
//! clamping, for a few identities.

use emoact::epa::EpaVector;
use emoact::generation::{generate_emotion, generate_emotion_raw, GenerationParams, Identity};
use emoact::AffectPipeline;

fn main() {
    let cases = [
        (
            EpaVector::new(2.0, 1.0, 1.0),
            EpaVector::new(2.0, 1.0, 1.0),
            0.5,
        ),
        (
            EpaVector::new(1.0, 1.0, 1.0),
            EpaVector::new(3.0, 2.0, 0.0),
            0.5,
        ),
        (
            EpaVector::new(-3.0, -3.0, 3.0),
            EpaVector::new(4.0, 4.0, 4.0),
            1.0,
        ),
    ];
    for (id, imp, delta) in cases {
        let params = GenerationParams { delta };
        let identity = Identity::new(id).unwrap();
        let raw = generate_emotion_raw(&identity, &imp, &params).unwrap();
        let clamped = generate_emotion(&identity, &imp, &params).unwrap();
        println!(
            "identity {id}  impression {imp}  delta {delta}\n    raw {raw}  clamped {clamped}"
        );
    }

    let pipeline = AffectPipeline::default();
    println!("\ndefault identity {}", pipeline.identity.value());
    for imp in [
        pipeline.identity.value(),
        EpaVector::new(2.5, 1.5, 1.5),
        EpaVector::new(-1.0, -1.0, -1.0),
        EpaVector::new(0.0, -0.5, 0.0),
    ] {
        let a = pipeline.appraise(&imp).unwrap();
        println!(
            "    impression {imp} -> emotion {} = {}",
            a.emotion, a.labeling.label
        );
    }
}
