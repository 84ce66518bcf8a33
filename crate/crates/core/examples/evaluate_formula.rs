//! Evaluate a formula on a hand-written trace and score it against labels.

use ptstl::{label_vector, metrics, parse_formula, Dataset, LabeledTrace};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec!["speed".to_string(), "brake".to_string()];
    let speed = [12.0, 15.0, 21.0, 24.0, 18.0, 9.0, 4.0, 3.0];
    let brake = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let labels = [false, false, false, false, true, true, true, false];
    let rows = speed.iter().zip(&brake).map(|(s, b)| vec![*s, *b]).collect();
    let trace = LabeledTrace::new("drive", vars.clone(), rows, labels.to_vec())?;

    // "braking now, and speed exceeded 20 at some point 1 to 3 steps ago"
    let f = parse_formula("(brake > 0.5) and (P[1,3] (speed > 20))", &vars)?;
    let bits = label_vector(&f, &trace)?;
    let shown: String = bits.iter().map(|b| if b { '1' } else { '0' }).collect();
    println!("{f}");
    println!("labels  {}", labels.iter().map(|b| if *b { '1' } else { '0' }).collect::<String>());
    println!("formula {shown}");

    let d = Dataset::new(vec![trace])?;
    let m = metrics(&f, &d)?;
    println!("tp={} fp={} tn={} fn={} accuracy={:.3}", m.tp, m.fp, m.tn, m.fn_, m.accuracy);
    assert_eq!(shown, "00011100");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
