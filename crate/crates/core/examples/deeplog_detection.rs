//! Trains a classical DeepLog on a small synthetic corpus and scores it.

use qlogad::harness::{execute, DatasetSource, ExperimentConfig, SYNTHETIC_TOP_G};
use qlogad::logpipe::SyntheticConfig;
use qlogad::models::{ModelKind, Variant};

fn main() -> qlogad::Result<()> {
    let mut cfg = ExperimentConfig::new(ModelKind::DeepLog, Variant::Classical);
    cfg.name = "deeplog-demo".into();
    cfg.dataset = DatasetSource::Synthetic(SyntheticConfig {
        windows: 300,
        ..SyntheticConfig::default()
    });
    cfg.model.top_g = SYNTHETIC_TOP_G;
    cfg.epochs = 15;
    cfg.batch_size = 64;
    cfg.lr = 1e-2;
    cfg.sync_dataset();

    let run = execute(&cfg)?;
    let r = &run.result;
    for (epoch, loss) in r.losses.train.iter().enumerate() {
        println!("epoch {:>2}: train loss {loss:.4}", epoch + 1);
    }
    let c = r.evaluation.counts;
    println!(
        "test windows {}: tp={} fp={} tn={} fn={}",
        r.test_windows, c.tp, c.fp, c.tn, c.fn_
    );
    println!("{}", r.metrics());
    Ok(())
}
