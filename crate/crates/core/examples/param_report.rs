//! Prints the parameter accounting of every model at default sizes.

use qlogad::models::{count_parameters, ModelKind, ModelSpec, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qlogad::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for kind in ModelKind::ALL {
        for variant in [Variant::Classical, Variant::Quantum] {
            let spec = ModelSpec::new(kind, variant, 18);
            let model = spec.build(&mut rng)?;
            println!("{:<13} {}", spec.display_name(), count_parameters(&model));
            for (part, rep) in model.component_reports() {
                println!("    {part:<14} {rep}");
            }
        }
    }
    Ok(())
}
