use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::DatasetSource;
use super::experiment::ExperimentResult;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str =
    "name,model,variant,dataset,window_size,n_qubits,encoding,layout,n_layers,\
lr,epochs,batch_size,train_ratio,top_g,seed,train_windows,test_windows,skipped,tp,fp,tn,fn,\
precision,recall,specificity,f1,classical_params,classical_bits,qubit_count";

/// One `results.csv` row. Wall time is left out so reruns are byte-identical.
pub fn results_row(r: &ExperimentResult) -> String {
    let c = &r.config;
    let m = r.metrics();
    let k = r.evaluation.counts;
    let circuit = &c.model.circuit;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
        c.name,
        c.model.kind,
        c.model.variant,
        r.dataset,
        c.window_size,
        circuit.n_qubits,
        circuit.encoding,
        circuit.layout,
        circuit.n_layers,
        c.lr,
        c.epochs,
        c.batch_size,
        c.train_ratio,
        c.model.top_g,
        c.seed,
        r.train_windows,
        r.test_windows,
        r.evaluation.skipped,
        k.tp,
        k.fp,
        k.tn,
        k.fn_,
        m.precision,
        m.recall,
        m.specificity,
        m.f1,
        r.params.classical_params,
        r.params.classical_bits,
        r.params.qubit_count
    )
}

pub fn results_csv(results: &[ExperimentResult]) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for r in results {
        s.push_str(&results_row(r));
        s.push('\n');
    }
    s
}

/// `epoch,train_loss,val_loss`, one row per epoch; missing validation loss
/// is left blank.
pub fn loss_csv(r: &ExperimentResult) -> String {
    let mut s = String::from("epoch,train_loss,val_loss\n");
    for (i, (t, v)) in r.losses.train.iter().zip(&r.losses.val).enumerate() {
        let v = v.map(|v| format!("{v:.10}")).unwrap_or_default();
        let _ = writeln!(s, "{},{t:.10},{v}", i + 1);
    }
    s
}

/// Filesystem-safe version of an experiment name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Metrics as rows and experiments as columns, grouped by dataset, with the
/// parameter accounting underneath.
pub fn results_table(results: &[ExperimentResult]) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    for r in results {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }
    let mut out = String::new();
    for ds in datasets {
        let cols: Vec<&ExperimentResult> = results.iter().filter(|r| r.dataset == ds).collect();
        let width = cols
            .iter()
            .map(|r| r.config.name.len())
            .max()
            .unwrap_or(0)
            .max(8);
        let _ = write!(out, "{:<22}{:<8}", "Dataset", "Metric");
        for r in &cols {
            let _ = write!(out, " {:>width$}", r.config.name);
        }
        out.push('\n');
        let rows: [(&str, fn(&ExperimentResult) -> f64); 4] = [
            ("Prec", |r| r.metrics().precision),
            ("Rec", |r| r.metrics().recall),
            ("Spec", |r| r.metrics().specificity),
            ("F1", |r| r.metrics().f1),
        ];
        for (i, (label, get)) in rows.iter().enumerate() {
            let _ = write!(out, "{:<22}{:<8}", if i == 0 { ds } else { "" }, label);
            for r in &cols {
                let _ = write!(out, " {:>width$.3}", get(r));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("Parameters\n");
    for r in results {
        let _ = writeln!(out, "  {:<30} {}", r.config.name, r.params);
    }
    out
}

/// Writes `results.csv`, `results.txt` and one `loss_<name>.csv` per result
/// into `dir`, creating it if needed. Returns the written paths.
pub fn emit_reports(results: &[ExperimentResult], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::Precondition("no results to report".into()));
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    put("results.csv".into(), results_csv(results))?;
    put("results.txt".into(), results_table(results))?;
    for r in results {
        put(
            format!("loss_{}.csv", file_stem(&r.config.name)),
            loss_csv(r),
        )?;
    }
    Ok(written)
}

/// Human label for a dataset source, used by the CLI.
pub fn describe_dataset(d: &DatasetSource) -> String {
    match d {
        DatasetSource::Synthetic(s) => format!(
            "synthetic corpus: {} windows of {}, anomaly rate {}",
            s.windows, s.window_size, s.anomaly_rate
        ),
        DatasetSource::File { path, format } => format!("{} ({format})", path.display()),
    }
}
