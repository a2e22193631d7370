//! Builds a Bell pair and a GHZ state on the statevector simulator.

use qlogad::qsim::{Gate, StateVector};

fn main() -> qlogad::Result<()> {
    let bell = StateVector::zero(2)?
        .apply(&Gate::H(0))?
        .apply(&Gate::Cnot {
            control: 0,
            target: 1,
        })?;
    println!(
        "Bell probabilities |00>,|01>,|10>,|11>: {:?}",
        bell.probabilities()
    );

    let mut ghz = StateVector::zero(4)?;
    ghz.apply_mut(&Gate::H(0))?;
    for q in 0..3 {
        ghz.apply_mut(&Gate::Cnot {
            control: q,
            target: q + 1,
        })?;
    }
    println!("GHZ(4) nonzero amplitudes:");
    for (i, a) in ghz
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-12)
    {
        println!("  |{i:04b}> {a:.4}");
    }

    let tilted = StateVector::zero(1)?.apply(&Gate::Ry(0, std::f64::consts::FRAC_PI_3))?;
    println!("<Z> after Ry(pi/3): {:.6}", tilted.expectation_z(0)?);
    Ok(())
}
