//! Paired with/without-VRA classification runs at desk scale.
//!
//! `cargo run --release -p ambnet --example tables -- [seed] [epochs] [decay_every] [vra|raw|both] [learning_rate]`

use std::time::Instant;

use ambnet::classifier::{build_dataset, evaluate, format_table, train, DatasetConfig, Hyperparameters};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let hyper = Hyperparameters {
        epochs: args.get(2).and_then(|s| s.parse().ok()).unwrap_or(Hyperparameters::default().epochs),
        decay_every: args.get(3).and_then(|s| s.parse().ok()).unwrap_or(Hyperparameters::default().decay_every),
        learning_rate: args.get(5).and_then(|s| s.parse().ok()).unwrap_or(Hyperparameters::default().learning_rate),
        ..Hyperparameters::default()
    };
    let cfg = DatasetConfig::desk_scale(100);
    let variants: &[bool] = match args.get(4).map(String::as_str) {
        Some("vra") => &[true],
        Some("raw") => &[false],
        _ => &[false, true],
    };
    for &vra in variants {
        let t = Instant::now();
        let ds = build_dataset(&cfg, vra, seed).expect("dataset");
        let built = t.elapsed();
        let model = train(&ds, &hyper, seed).expect("training");
        let report = evaluate(&model, &ds.test).expect("evaluation");
        let title = if vra { "with VRA" } else { "without VRA" };
        print!("{}", format_table(&report, title));
        println!("confusion {:?}", report.confusion);
        let lowest = report.precision.iter().chain(&report.recall).map(|v| v.unwrap_or(0.0)).fold(1.0, f64::min);
        println!("seed {seed} epochs {} decay {} lr {} lowest {:.1}%", hyper.epochs, hyper.decay_every, hyper.learning_rate, 100.0 * lowest);
        println!(
            "losses {:?}\ndataset {:.1?}, total {:.1?}\n",
            model.meta.as_ref().map(|m| &m.loss_curve),
            built,
            t.elapsed()
        );
    }
}
