//! Hybrid and classical anomaly-detection models.
//!
//! [`QLayer`] is the quantum stand-in for an affine map: project down to one
//! feature per qubit, encode, run a parameterized circuit, read `⟨Z⟩` per
//! qubit, optionally project back up. [`QLstmCell`] and [`QAttention`] use it
//! in place of the gate and Q/K/V transforms of their classical counterparts.
//! The detectors on top are DeepLog and LogAnomaly (next-event prediction with
//! a top-g check) and LogRobust (supervised window classification).

mod logrobust;
mod next_event;
mod qattention;
mod qlayer;
mod qlstm;
mod recurrent;
mod spec;

pub use logrobust::{logrobust_classify, LogRobustCache, LogRobustModel};
pub use next_event::{
    context_key, deeplog_detect, in_top_g, loganomaly_detect, next_event_forward, window_inputs,
    LogAnomalyDetector, LogAnomalyModel, NextEventModel, NextEventPredictor, TopGDetector, Verdict,
};
pub use qattention::{
    q_attention, QAttention, QAttentionCache, QubitAccounting, SelfAttention, SelfAttentionCache,
};
pub use qlayer::{QLayer, QLayerCache, Vqc};
pub use qlstm::{qlstm_cell, QLstmCache, QLstmCell};
pub use recurrent::{Recurrent, StepCache};
pub use spec::{
    count_parameters, HybridModel, ModelKind, ModelSpec, ParamReport, Variant, BITS_PER_PARAMETER,
    MODEL_KEYS,
};
