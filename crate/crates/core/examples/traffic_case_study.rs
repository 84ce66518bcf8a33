//! Traffic network: which past conditions precede congestion on link 1?

use ptstl::datagen::traffic_schema;
use ptstl::domains::Range;
use ptstl::{formula_space, formula_synthesis, prune, shift_wrap, traffic_dataset, DomainConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let d = traffic_dataset(7, 20, 100)?;
    let (pos, neg) = d.label_counts();
    println!("{} points, {pos} congested, {neg} free", d.total_points());

    let mut cfg = DomainConfig { time: Some(Range::new(0.0, 4.0, 2.0)), ..Default::default() };
    for v in ["x0", "x1", "x2"] {
        cfg.variables.insert(v.into(), Range::new(0.0, 40.0, 5.0));
    }
    for v in ["x3", "x4", "x5"] {
        cfg.variables.insert(v.into(), Range::new(0.0, 20.0, 5.0));
    }
    for v in ["s0", "s1"] {
        cfg.variables.insert(v.into(), Range::new(0.0, 1.0, 1.0));
    }

    // Conditions one step before the labeled point.
    let templates = shift_wrap(&prune(&formula_space(&traffic_schema(), 1)), 1);
    let r = formula_synthesis(&templates, 5, &d, 3, &cfg)?;
    print!("{}", r.report());
    for dj in &r.disjuncts {
        assert!(dj.metrics.fp <= 5);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
