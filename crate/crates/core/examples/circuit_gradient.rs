//! Compares shift-rule gradients of a layered circuit with finite differences.

use qlogad::encode::EncodingScheme;
use qlogad::pqc::{Circuit, CircuitDesign, Layout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qlogad::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let design = CircuitDesign::new(Layout::RxRy, 3, 2, EncodingScheme::AngleRy)?;
    let circuit = Circuit::new(&design)?;
    let theta: Vec<f64> = (0..design.parameter_count())
        .map(|_| rng.gen_range(-3.0..3.0))
        .collect();
    let x = [0.4, -0.7, 1.1];
    let upstream = [1.0, 0.5, -0.25];

    let loss = |t: &[f64]| -> f64 {
        let z = circuit.forward(t, &x).unwrap();
        z.iter().zip(&upstream).map(|(a, b)| a * b).sum()
    };
    let shift = circuit.gradient_params(&theta, &x, &upstream)?;
    let h = 1e-5;
    println!("{} parameters", theta.len());
    for (j, g) in shift.iter().enumerate() {
        let (mut plus, mut minus) = (theta.clone(), theta.clone());
        plus[j] += h;
        minus[j] -= h;
        let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
        println!(
            "  theta[{j:>2}]  shift {g:+.8}  fd {fd:+.8}  diff {:.1e}",
            (g - fd).abs()
        );
    }
    let dx = circuit.gradient_inputs(&theta, &x, &upstream, false)?;
    println!("input gradient: {dx:.6?}");
    Ok(())
}
