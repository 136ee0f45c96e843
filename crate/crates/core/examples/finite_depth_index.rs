//! At full depth of a finite principal graph, the rescaled parameter equals
//! 1 + 2(δ − 1)·I with I the sum of squared weights at even depth.

use freedim::principal::{gjs_finite_depth_check, GjsReport, PrincipalGraph};
use freedim::scalar::{self, NumericConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    scalar::configure(NumericConfig { precision_digits: 50, tolerance: 1e-9 }).ok();
    for name in ["A3", "A4", "A5", "D5"] {
        let g = PrincipalGraph::builtin(name, None)?;
        match gjs_finite_depth_check(&g, 1e-9)? {
            GjsReport::Compared { engine, formula, difference, within_tolerance, .. } => {
                println!("{name}: engine {engine}");
                println!("{:w$}  formula {formula}", "", w = name.len());
                println!("{:w$}  |difference| = {difference}, agree: {within_tolerance}", "", w = name.len());
            }
            GjsReport::Inapplicable { atoms } => println!("{name}: atoms remain at full depth: {atoms:?}"),
        }
    }
    Ok(())
}
