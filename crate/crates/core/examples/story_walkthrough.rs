//! Enumerate every path through the built-in stories (or a story file) and
//! check the emotional coverage guarantees.
//!
//! cargo run --example story_walkthrough -- [story id or path]

use emoact::cli::resolve_story;
use emoact::story::{analyze_coverage, BUILTIN_STORIES};
use emoact::AffectPipeline;

fn main() {
    let ids: Vec<String> = match std::env::args().nth(1) {
        Some(s) => vec![s],
        None => BUILTIN_STORIES.iter().map(|s| s.to_string()).collect(),
    };
    let pipeline = AffectPipeline::default();
    for id in ids {
        let story = match resolve_story(&id) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{id}: {e}");
                std::process::exit(1);
            }
        };
        let report = analyze_coverage(&story, &pipeline);
        println!("{} ({} paths)", story.title, report.paths.len());
        for path in &report.paths {
            let labels: Vec<_> = path.labels().iter().map(|l| l.as_str()).collect();
            println!("  {}\n      {}", path, labels.join(" -> "));
        }
        if report.is_ok() {
            println!("  all guarantees hold\n");
        } else {
            for issue in &report.issues {
                println!("  ! {issue}");
            }
        }
    }
}
