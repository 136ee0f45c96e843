//! Free dimension of algebras in normal form: direct sums, amplification,
//! compression, and amalgamated free products over finite abelian algebras.

use freedim::scalar::Scalar;
use freedim::vn::{self, ProjectionSpec, Summand, VNAlgebra};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let half = Scalar::ratio(1, 2);

    // L(F_2) ⊕ M_2(ℂ) with equal weights.
    let m = VNAlgebra::new(vec![
        Summand::factor(Scalar::int(2), half.clone())?,
        Summand::matrix(2, half.clone())?,
    ]);
    println!("M = {m}");
    println!("fdim(M) = {}", vn::fdim(&m)?);

    // Amplifying L(F_3) by 1/2 gives L(F_9), and back again.
    let f3 = VNAlgebra::free_group_factor(Scalar::int(3))?;
    let amplified = vn::amplify(&f3, &half)?;
    println!("L(F_3) amplified by 1/2 = {amplified}");
    println!("and by 2 again = {}", vn::amplify(&amplified, &Scalar::int(2))?);

    // Cutting the factor summand of M down to a quarter of its trace.
    let p = ProjectionSpec::new().with(0, Scalar::ratio(1, 4)).with(1, half.clone());
    println!("pMp = {}", vn::compress(&m, &p)?);

    // ℓ^∞ of two atoms free with itself over ℂ: 1 + 1/2 + 1/2 − 1.
    let atoms = VNAlgebra::abelian([("p".to_string(), half.clone()), ("q".to_string(), half)])?;
    let scalars = VNAlgebra::abelian([("1".to_string(), Scalar::one())])?;
    println!("fdim(ℓ^∞(2) * ℓ^∞(2)) = {}", vn::fdim_free_product(&atoms, &atoms, &scalars)?);
    Ok(())
}
