//! Moments of the cup generator in the graded Temperley-Lieb algebra, by two
//! independent algorithms, and positivity of the moment Hankel matrix.

use freedim::scalar::Scalar;
use freedim::tl::{self, catalan, Delta, GrElement};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cup = GrElement::cup(Delta::Symbolic);
    let report = tl::moments(&cup, 6)?;
    for (j, m) in report.moments.iter().enumerate() {
        println!("tr(∪^{j}) = {}", m.poly);
    }
    println!("algorithms agree: {}", report.algorithms_agree);

    let counts: Vec<String> = (0..=12).map(|n| tl::noncrossing_pairings(n).len().to_string()).collect();
    let expected: Vec<String> = (0..=12).map(|n| catalan(n).to_string()).collect();
    println!("pairings of 2n points: {}", counts.join(" "));
    println!("Catalan numbers:       {}", expected.join(" "));

    for d in ["2", "5/2", "3"] {
        let g = GrElement::cup(Delta::value(Scalar::parse(d)?)?);
        let p = tl::positivity_check(&g, 5)?;
        println!("δ = {d}: Hankel matrix positive semidefinite: {}", p.positive_semidefinite);
    }
    Ok(())
}
