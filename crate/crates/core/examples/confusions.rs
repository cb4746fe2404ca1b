//! Lists misclassified test items of one desk-scale with-VRA run.
//!
//! `cargo run --release -p ambnet --example confusions -- [seed] [epochs]`

use ambnet::classifier::{build_dataset, train, DatasetConfig, Hyperparameters};
use ambnet::degrees;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let hyper = Hyperparameters {
        epochs: args.get(2).and_then(|s| s.parse().ok()).unwrap_or(Hyperparameters::default().epochs),
        ..Hyperparameters::default()
    };
    let ds = build_dataset(&DatasetConfig::desk_scale(100), true, seed).expect("dataset");
    let model = train(&ds, &hyper, seed).expect("training");
    for it in &ds.test {
        let probs = model.predict(&it.image).expect("side matches");
        let pred = model.predict_label(&it.image).expect("side matches");
        if pred != it.label {
            let g = it.params.generate().expect("valid params");
            let classes = degrees(&g).classes.len();
            println!(
                "{} -> {pred}: {} (degree classes {classes}) probs {:.3?}",
                it.label,
                serde_json::to_string(&it.params).expect("json"),
                probs
            );
        }
    }
}
