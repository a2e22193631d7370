//! Angle and amplitude feature maps side by side.

use qlogad::encode::EncodingScheme;

fn main() -> qlogad::Result<()> {
    let features = [0.3, -1.2];
    for scheme in EncodingScheme::ALL {
        let state = scheme.encode(&features, 2)?;
        let amps: Vec<String> = state
            .amplitudes()
            .iter()
            .map(|a| format!("{a:.3}"))
            .collect();
        println!(
            "{scheme:<10} [{}]  <Z> = {:.3?}",
            amps.join(", "),
            state.expectations_z()
        );
    }
    // amplitude encoding pads to 2^n and normalizes
    let padded = EncodingScheme::Amplitude.encode(&[3.0, 4.0, 0.0], 2)?;
    println!(
        "amplitude [3,4,0] on 2 qubits -> {:?}",
        padded.probabilities()
    );
    Ok(())
}
