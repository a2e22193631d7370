use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::logrobust::LogRobustModel;
use super::next_event::{LogAnomalyModel, NextEventModel};
use super::qattention::{QAttention, QubitAccounting, SelfAttention};
use super::qlstm::QLstmCell;
use super::recurrent::Recurrent;
use crate::encode::EncodingScheme;
use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::nn::{join_name, Attention, Linear, LstmCell, NamedTensor, Parameterized, Tensor2};
use crate::pqc::{CircuitDesign, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    DeepLog,
    LogAnomaly,
    LogRobust,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::DeepLog,
        ModelKind::LogAnomaly,
        ModelKind::LogRobust,
    ];

    /// Trained on normal windows only.
    pub fn semi_supervised(self) -> bool {
        !matches!(self, ModelKind::LogRobust)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::DeepLog => "deeplog",
            ModelKind::LogAnomaly => "loganomaly",
            ModelKind::LogRobust => "logrobust",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deeplog" => Ok(ModelKind::DeepLog),
            "loganomaly" => Ok(ModelKind::LogAnomaly),
            "logrobust" => Ok(ModelKind::LogRobust),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Classical,
    Quantum,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Classical => "classical",
            Variant::Quantum => "quantum",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classical" => Ok(Variant::Classical),
            "quantum" => Ok(Variant::Quantum),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Everything needed to rebuild a model's shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub variant: Variant,
    /// Known templates plus the out-of-vocabulary class.
    pub n_classes: usize,
    pub hidden: usize,
    pub history: usize,
    pub top_g: usize,
    pub embedding_dim: usize,
    /// Circuit used by every QLSTM gate.
    pub circuit: CircuitDesign,
    pub attention_qubits: usize,
    pub accounting: QubitAccounting,
}

pub const MODEL_KEYS: &[&str] = &[
    "model",
    "variant",
    "n_classes",
    "hidden",
    "history",
    "top_g",
    "embedding_dim",
    "layout",
    "n_qubits",
    "n_layers",
    "encoding",
    "ring",
    "attention_qubits",
    "qubit_accounting",
];

impl ModelSpec {
    pub fn new(kind: ModelKind, variant: Variant, n_classes: usize) -> Self {
        ModelSpec {
            kind,
            variant,
            n_classes,
            hidden: 4,
            history: 10,
            top_g: 9,
            embedding_dim: 16,
            circuit: CircuitDesign {
                layout: Layout::Rx,
                n_qubits: 4,
                n_layers: 1,
                encoding: EncodingScheme::AngleRx,
                ring: false,
            },
            attention_qubits: 8,
            accounting: QubitAccounting::SharedRegister,
        }
    }

    /// Display name such as `QDeepLog` or `LogRobust`.
    pub fn display_name(&self) -> String {
        let base = match self.kind {
            ModelKind::DeepLog => "DeepLog",
            ModelKind::LogAnomaly => "LogAnomaly",
            ModelKind::LogRobust => "LogRobust",
        };
        match self.variant {
            Variant::Classical => base.to_string(),
            Variant::Quantum => format!("Q{base}"),
        }
    }

    pub fn attention_design(&self) -> CircuitDesign {
        CircuitDesign {
            n_qubits: self.attention_qubits,
            ..self.circuit
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Config(format!(
                "{} event classes; need at least 2",
                self.n_classes
            )));
        }
        if self.hidden == 0 || self.history == 0 || self.embedding_dim == 0 {
            return Err(Error::Config(
                "hidden, history and embedding_dim must be positive".into(),
            ));
        }
        if self.variant == Variant::Quantum {
            self.circuit.validate()?;
            if self.kind == ModelKind::LogRobust {
                self.attention_design().validate()?;
            }
        }
        Ok(())
    }

    fn recurrent<R: Rng + ?Sized>(&self, input: usize, rng: &mut R) -> Result<Recurrent> {
        Ok(match self.variant {
            Variant::Classical => Recurrent::Classical(LstmCell::init(input, self.hidden, rng)),
            Variant::Quantum => {
                Recurrent::Quantum(QLstmCell::init(input, self.hidden, &self.circuit, rng)?)
            }
        })
    }

    pub fn build<R: Rng>(&self, rng: &mut R) -> Result<HybridModel> {
        self.validate()?;
        let n = self.n_classes;
        Ok(match self.kind {
            ModelKind::DeepLog => {
                HybridModel::DeepLog(NextEventModel::new(self.recurrent(n, rng)?, n, rng))
            }
            ModelKind::LogAnomaly => HybridModel::LogAnomaly(LogAnomalyModel {
                sequential: NextEventModel::new(self.recurrent(n, rng)?, n, rng),
                quantitative: NextEventModel::new(self.recurrent(n, rng)?, n, rng),
            }),
            ModelKind::LogRobust => {
                let d = self.embedding_dim;
                let embedding = Tensor2::uniform(n, d, 1.0, rng);
                let forward_rnn = self.recurrent(d, rng)?;
                let backward_rnn = self.recurrent(d, rng)?;
                let width = 2 * self.hidden;
                let attention = match self.variant {
                    Variant::Classical => {
                        SelfAttention::Classical(Attention::init(width, width, width, rng))
                    }
                    Variant::Quantum => SelfAttention::Quantum(QAttention::init(
                        width,
                        &self.attention_design(),
                        self.accounting,
                        rng,
                    )?),
                };
                let dv = attention.output_dim();
                let pool = Tensor2::uniform(1, dv, 1.0 / (dv as f64).sqrt(), rng);
                let head = Linear::init(dv, 1, rng);
                HybridModel::LogRobust(LogRobustModel {
                    embedding,
                    forward_rnn,
                    backward_rnn,
                    attention,
                    pool,
                    head,
                })
            }
        })
    }

    pub fn write_kv(&self, out: &mut String) {
        use std::fmt::Write;
        let c = &self.circuit;
        let _ = write!(
            out,
            "model = {}\nvariant = {}\nn_classes = {}\nhidden = {}\nhistory = {}\ntop_g = {}\n\
             embedding_dim = {}\nlayout = {}\nn_qubits = {}\nn_layers = {}\nencoding = {}\nring = {}\n\
             attention_qubits = {}\nqubit_accounting = {}\n",
            self.kind,
            self.variant,
            self.n_classes,
            self.hidden,
            self.history,
            self.top_g,
            self.embedding_dim,
            c.layout,
            c.n_qubits,
            c.n_layers,
            c.encoding,
            c.ring,
            self.attention_qubits,
            self.accounting
        );
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        self.write_kv(&mut s);
        s
    }

    /// Reads the model keys of `kv`, defaulting anything absent. `hidden`
    /// defaults to the qubit count.
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let kind = kv.require("model")?;
        let variant = kv.get("variant")?.unwrap_or(Variant::Quantum);
        let mut s = ModelSpec::new(kind, variant, kv.get("n_classes")?.unwrap_or(0));
        s.circuit.layout = kv.get("layout")?.unwrap_or(s.circuit.layout);
        s.circuit.n_qubits = kv.get("n_qubits")?.unwrap_or(s.circuit.n_qubits);
        s.circuit.n_layers = kv.get("n_layers")?.unwrap_or(s.circuit.n_layers);
        s.circuit.encoding = kv.get("encoding")?.unwrap_or(s.circuit.encoding);
        s.circuit.ring = kv.get("ring")?.unwrap_or(s.circuit.ring);
        s.hidden = kv.get("hidden")?.unwrap_or(s.circuit.n_qubits);
        s.history = kv.get("history")?.unwrap_or(s.history);
        s.top_g = kv.get("top_g")?.unwrap_or(s.top_g);
        s.embedding_dim = kv.get("embedding_dim")?.unwrap_or(s.embedding_dim);
        s.attention_qubits = kv.get("attention_qubits")?.unwrap_or(s.attention_qubits);
        s.accounting = kv.get("qubit_accounting")?.unwrap_or(s.accounting);
        Ok(s)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let kv = KvMap::parse(text)?;
        kv.reject_unknown(MODEL_KEYS)?;
        Self::from_kv(&kv)
    }
}

/// The three detector families, classical or quantum, behind one parameter
/// interface.
#[derive(Debug, Clone, PartialEq)]
pub enum HybridModel {
    DeepLog(NextEventModel),
    LogAnomaly(LogAnomalyModel),
    LogRobust(LogRobustModel),
}

impl HybridModel {
    pub fn qubit_count(&self) -> usize {
        match self {
            HybridModel::DeepLog(m) => m.recurrent.qubit_count(),
            HybridModel::LogAnomaly(m) => {
                m.sequential.recurrent.qubit_count() + m.quantitative.recurrent.qubit_count()
            }
            HybridModel::LogRobust(m) => m.qubit_count(),
        }
    }

    /// Per-component accounting, e.g. the LSTM part and the attention part.
    pub fn component_reports(&self) -> Vec<(String, ParamReport)> {
        fn rep<P: Parameterized>(p: &P, qubits: usize) -> ParamReport {
            ParamReport::new(p.parameter_count(), qubits)
        }
        match self {
            HybridModel::DeepLog(m) => vec![
                ("lstm".into(), rep(&m.recurrent, m.recurrent.qubit_count())),
                ("head".into(), rep(&m.head, 0)),
            ],
            HybridModel::LogAnomaly(m) => vec![
                (
                    "sequential".into(),
                    rep(&m.sequential, m.sequential.recurrent.qubit_count()),
                ),
                (
                    "quantitative".into(),
                    rep(&m.quantitative, m.quantitative.recurrent.qubit_count()),
                ),
            ],
            HybridModel::LogRobust(m) => vec![
                ("embedding".into(), rep(&m.embedding, 0)),
                (
                    "lstm".into(),
                    ParamReport::new(
                        m.forward_rnn.parameter_count() + m.backward_rnn.parameter_count(),
                        m.forward_rnn.qubit_count() + m.backward_rnn.qubit_count(),
                    ),
                ),
                (
                    "attention".into(),
                    rep(&m.attention, m.attention.qubit_count()),
                ),
                (
                    "pooling".into(),
                    ParamReport::new(m.pool.parameter_count() + m.head.parameter_count(), 0),
                ),
            ],
        }
    }
}

impl Parameterized for HybridModel {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        match self {
            HybridModel::DeepLog(m) => m.collect(&join_name(prefix, "deeplog"), out),
            HybridModel::LogAnomaly(m) => m.collect(&join_name(prefix, "loganomaly"), out),
            HybridModel::LogRobust(m) => m.collect(&join_name(prefix, "logrobust"), out),
        }
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        match self {
            HybridModel::DeepLog(m) => m.collect_mut(out),
            HybridModel::LogAnomaly(m) => m.collect_mut(out),
            HybridModel::LogRobust(m) => m.collect_mut(out),
        }
    }
}

/// Bits per stored real parameter in the accounting.
pub const BITS_PER_PARAMETER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamReport {
    /// Trainable reals, circuit angles included.
    pub classical_params: usize,
    pub classical_bits: usize,
    pub qubit_count: usize,
}

impl ParamReport {
    pub fn new(classical_params: usize, qubit_count: usize) -> Self {
        ParamReport {
            classical_params,
            classical_bits: classical_params * BITS_PER_PARAMETER,
            qubit_count,
        }
    }
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.qubit_count > 0 {
            write!(
                f,
                "{} bit + {} qubit",
                self.classical_bits, self.qubit_count
            )
        } else {
            write!(f, "{} bit", self.classical_bits)
        }
    }
}

pub fn count_parameters(model: &HybridModel) -> ParamReport {
    ParamReport::new(model.parameter_count(), model.qubit_count())
}
