//! Compare the low- and high-frequency display policies on the same stream
//! of sentences (one every 5 s) with a choice every 20 s.

use emoact::epa::EmotionLabel;
use emoact::expression::{
    select_cues, AnimationPicker, DisplayMode, DisplayPolicy, ExpressionSettings, Trigger,
};

fn main() {
    for mode in [DisplayMode::LowFrequency, DisplayMode::HighFrequency] {
        let settings = ExpressionSettings {
            policy: DisplayPolicy {
                mode,
                ..Default::default()
            },
            ..Default::default()
        };
        let mut picker = AnimationPicker::new(7);
        let mut last_animation = None;
        println!("{mode:?}");
        for i in 0..16u64 {
            let t = i * 5_000;
            let trigger = if i % 4 == 3 {
                Trigger::ChoiceMade
            } else {
                Trigger::SentenceSpoken
            };
            let label = match i / 4 {
                0 => EmotionLabel::Happiness,
                1 => EmotionLabel::Sadness,
                2 => EmotionLabel::Anger,
                _ => EmotionLabel::Fear,
            };
            if let Some(cue) =
                select_cues(label, trigger, t, last_animation, &settings, &mut picker)
            {
                if cue.animation.is_some() {
                    last_animation = Some(t);
                }
                let anim = cue.animation.as_ref().map(|a| a.as_str()).unwrap_or("-");
                println!(
                    "  t={t:>6}  {:<15} {:<10} {:<9} {anim}",
                    format!("{trigger:?}"),
                    label.as_str(),
                    cue.eye_color
                );
            }
        }
    }
}
