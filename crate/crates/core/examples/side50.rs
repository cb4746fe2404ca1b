use std::time::Instant;

use ambnet::classifier::{build_dataset, evaluate, format_table, train, DatasetConfig, Hyperparameters};
use ambnet::mixture::{classify_subnetwork, describe_detailed};
use ambnet::{gen_ba, gen_er, gen_ncn, gen_ws, read_edge_list};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let per: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let t = Instant::now();
    let cfg = DatasetConfig { train_per_class: per, test_per_class: 50, ..DatasetConfig::desk_scale(50) };
    let ds = build_dataset(&cfg, true, 1).unwrap();
    let model = train(&ds, &Hyperparameters::default(), 1).unwrap();
    print!("{}", format_table(&evaluate(&model, &ds.test).unwrap(), "side 50"));
    println!("trained in {:?}", t.elapsed());
    for (name, g) in [
        ("NCN(40,6)", gen_ncn(40, 6).unwrap()),
        ("NCN(20,4)", gen_ncn(20, 4).unwrap()),
        ("WS(40,6,.1)", gen_ws(40, 6, 0.1, 3).unwrap()),
        ("ER(40,100)", gen_er(40, 100, 3).unwrap()),
        ("BA(40,3)", gen_ba(40, 3, 3).unwrap()),
    ] {
        let labels: Vec<_> = (0..5).map(|s| classify_subnetwork(&model, &g, s).unwrap().to_string()).collect();
        println!("{name}: {labels:?}");
    }
    let z = read_edge_list(&std::fs::read_to_string("crates/core/fixtures/zachary.edges").unwrap()).unwrap();
    let d = describe_detailed(&model, &z, 1).unwrap();
    for c in &d.communities {
        println!("community {:?} -> {}", c.vertices, c.label);
    }
    println!("whole {} | {}", d.whole, d.mixture.format_equation("Zachary"));
}
