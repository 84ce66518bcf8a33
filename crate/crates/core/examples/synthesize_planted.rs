//! End to end: plant a formula in random walks and mine it back.

use std::time::Instant;

use ptstl::domains::Range;
use ptstl::{formula_space, formula_synthesis, parse_formula, planted_dataset, prune, DomainConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec!["x".to_string(), "y".to_string()];
    let planted = parse_formula("(P[2,4] (x > 6)) or (A[0,2] (y < 2))", &vars)?;
    let d = planted_dataset(5, &vars, 10, 100, &planted, 0.0)?;
    let (pos, neg) = d.label_counts();
    println!("planted {planted}: {pos} positives, {neg} negatives");

    let mut cfg = DomainConfig { time: Some(Range::new(0.0, 4.0, 2.0)), ..Default::default() };
    cfg.variables.insert("x".into(), Range::new(0.0, 10.0, 2.0));
    cfg.variables.insert("y".into(), Range::new(0.0, 10.0, 2.0));

    let templates = prune(&formula_space(&vars, 1));
    let start = Instant::now();
    let r = formula_synthesis(&templates, 0, &d, 3, &cfg)?;
    print!("{}", r.report());
    println!("took {:.1?}", start.elapsed());
    assert_eq!(r.combined_metrics.accuracy, 1.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
