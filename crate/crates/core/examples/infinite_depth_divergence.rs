//! Along the depth truncations of A_∞ at δ = 2 the factor parameter, rescaled
//! to the root, grows without bound.

use freedim::principal::{majorization, t_prime_sequence, PrincipalGraph};
use freedim::scalar::Scalar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = PrincipalGraph::a_infinity(Scalar::int(2))?;
    let rows = t_prime_sequence(&g, 40)?;
    for row in rows.iter().take(8) {
        println!("k = {:2}  t = {:>10}  t' = {}", row.k, row.decomposition.factor.t.to_string(), row.t_prime);
    }
    let first_large = rows.iter().find(|r| r.t_prime > Scalar::int(1000)).map(|r| r.k);
    println!("first k with t' > 1000: {first_large:?}");
    for k in [2, 10, 40] {
        let (lhs, rhs) = majorization(&g, k)?;
        println!("k = {k}: {lhs} ≥ {rhs}");
    }
    Ok(())
}
