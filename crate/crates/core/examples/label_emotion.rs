//! Label EPA vectors against the reference emotion catalog.
//!
//! cargo run --example label_emotion -- 1 0 2

use emoact::epa::{cosine_similarity, label_emotion, EmotionCatalog, EpaVector};

fn main() {
    let catalog = EmotionCatalog::default();
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let probes = match args.as_slice() {
        [e, p, a] => vec![EpaVector::new(*e, *p, *a)],
        _ => vec![
            EpaVector::new(1.0, 0.0, 2.0),
            EpaVector::new(-2.0, -2.0, -2.0),
            EpaVector::new(3.0, 2.0, 1.0),
            EpaVector::new(0.0, 0.0, 0.0),
            EpaVector::new(0.0, 3.0, -3.0),
        ],
    };

    for v in probes {
        let labeling = label_emotion(&v, &catalog).expect("finite input");
        print!("{v}  ->  {}", labeling.label);
        if let Some(s) = labeling.similarity {
            print!(" ({s:.3})");
        }
        println!();
        if v.norm() > 0.0 {
            for entry in catalog.entries() {
                let s = cosine_similarity(&v, &entry.epa).unwrap();
                println!("    {:<10} {s:+.3}", entry.label.as_str());
            }
        }
    }
    println!("threshold: {}", catalog.threshold());
}
