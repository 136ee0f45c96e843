//! The square of a random rectangular Gaussian block has an atom at zero of
//! mass (μ_v − μ_w)/(μ_v + μ_w).

use freedim::rmt::{simulate_edge, EdgeModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (mu_v, mu_w) in [(2.0, 1.0), (3.0, 1.0), (3.0, 2.0)] {
        let model = EdgeModel::new(mu_v, mu_w, 300.0 / mu_w, 10, 7);
        let r = simulate_edge(&model)?;
        println!(
            "μ = ({mu_v}, {mu_w}), block {}x{}: atom {:.4} in [{:.4}, {:.4}], expected {:.4}",
            r.rows, r.cols, r.atom_estimate, r.ci_low, r.ci_high, r.atom_formula
        );
        println!("  moments {:.4?}\n  limit   {:.4?}", r.moments, r.moments_limit);
    }
    Ok(())
}
