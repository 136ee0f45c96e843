//! Parse a graph file (path as the first argument, or a built-in sample) and
//! decompose it.

use freedim::decompose::{decompose_direct, Outcome};
use freedim::graph::parse_graph;

const SAMPLE: &str = "\
# a triangle with one doubled edge
vertex x 3
vertex y 2
vertex z 1
edge x y 2
edge y z
edge z x
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let g = parse_graph(&text)?;
    g.check()?;
    match decompose_direct(&g)? {
        Outcome::Factor(d) => {
            println!("{d}");
            println!("fdim = {}", d.fdim);
        }
        Outcome::NotAFactor { algebra, fdim } => println!("not a factor: {algebra} (fdim {fdim})"),
    }
    Ok(())
}
