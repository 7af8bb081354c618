//! The three noise channels acting on a qubit, via their dilation unitary and
//! via the Kraus sum.

use nalgebra::DMatrix;
use qbatt::hilbert::{c, real, ComplexOperator, Subsystem};
use qbatt::noise::{apply_channel, apply_kraus, dilation_unitary, kraus_operators, NoiseKind, NoiseSpec};

pub fn run(k: f64) -> qbatt::Result<Vec<(NoiseKind, ComplexOperator, f64)>> {
    // |+i><+i| mixed with a little |e><e|
    let rho = DMatrix::from_row_slice(2, 2, &[real(0.6), c(0.0, -0.4), c(0.0, 0.4), real(0.4)]);
    let rho = ComplexOperator::on_qubits(rho, &[Subsystem::A])?;
    NoiseKind::ALL
        .into_iter()
        .map(|kind| {
            let spec = NoiseSpec::new(kind, k)?;
            let out = apply_channel(&rho, &spec)?;
            let diff = out.max_abs_diff(&apply_kraus(&rho, &spec)?);
            Ok((kind, out, diff))
        })
        .collect()
}

fn main() -> qbatt::Result<()> {
    let k = 0.3;
    for (kind, out, diff) in run(k)? {
        let m = out.matrix();
        println!(
            "{kind:18} rho_ee={:.4} rho_gg={:.4} |rho_eg|={:.4}  dilation vs Kraus {diff:.1e}",
            m[(0, 0)].re,
            m[(1, 1)].re,
            m[(0, 1)].norm()
        );
        let u = dilation_unitary(&NoiseSpec::new(kind, k)?)?;
        println!("{:18} unitarity error {:.1e}, {} Kraus operators", "", u.unitary_deviation(), kraus_operators(&NoiseSpec::new(kind, k)?)?.len());
    }
    Ok(())
}
