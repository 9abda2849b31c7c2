//! Evaluates the detector on a synthetic corpus and prints both F-measures.
//!
//! `cargo run --release -p saliency-core --example synth_eval -- [seed] [count]`

use std::time::Instant;

use saliency_core::eval::evaluate_images;
use saliency_core::pipeline::PipelineConfig;
use saliency_core::synth::synth_corpus;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let corpus = synth_corpus(seed, count);
    let config = PipelineConfig::default();
    let start = Instant::now();
    let eval = evaluate_images(
        corpus
            .iter()
            .map(|s| (s.name.as_str(), &s.image, &s.mask))
            .collect::<Vec<_>>(),
        &config,
    );
    for (a, b) in eval.mlp.samples.iter().zip(&eval.mean_fusion.samples) {
        println!(
            "{} mlp {:.4} mean {:.4}",
            a.name, a.adaptive.f, b.adaptive.f
        );
    }
    println!(
        "seed {seed} n {count}: MLP F = {:.4}, mean-fusion F = {:.4}, skipped {}, {:.1?}",
        eval.mlp.adaptive_f,
        eval.mean_fusion.adaptive_f,
        eval.skipped.len(),
        start.elapsed()
    );
    for s in &eval.skipped {
        println!("skipped {}: {}", s.name, s.reason);
    }
}
