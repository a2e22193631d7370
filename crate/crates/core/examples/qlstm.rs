//! Runs a quantum LSTM cell over a short sequence and prints its size.

use qlogad::encode::EncodingScheme;
use qlogad::models::QLstmCell;
use qlogad::nn::Parameterized;
use qlogad::pqc::{CircuitDesign, Layout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qlogad::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let design = CircuitDesign::new(Layout::Rx, 4, 1, EncodingScheme::AngleRy)?;
    let cell = QLstmCell::init(6, 4, &design, &mut rng)?;
    println!(
        "QLSTM: {} trainable reals, {} qubits across its four gates",
        cell.parameter_count(),
        cell.qubit_count()
    );
    let (mut h, mut c) = (vec![0.0; 4], vec![0.0; 4]);
    for t in 0..6 {
        let mut x = vec![0.0; 6];
        x[t % 6] = 1.0;
        let (h2, c2, _) = cell.forward(&x, &h, &c)?;
        println!("step {t}: h = {h2:+.4?}");
        h = h2;
        c = c2;
    }
    Ok(())
}
