//! Log ingestion: raw-line parsing, Drain template mining, windowing,
//! splitting and vectorization.

pub mod drain;
pub mod io;
pub mod synthetic;
pub mod vocab;
pub mod window;

pub use drain::{drain_parse, DrainConfig, DrainParser, LogTemplate, EMPTY_TEMPLATE_ID, WILDCARD};
pub use io::{
    load_dataset, parse_lines, parse_raw_text, read_parsed_csv, read_raw_log, read_templates,
    write_parsed, write_parsed_csv, write_templates, LogFormat, ParsedLog, ParsedRecord,
    RawLogLine,
};
pub use synthetic::{generate_bgl, SyntheticConfig, SyntheticLog};
pub use vocab::{count_vectors, one_hot, vectorize, EventVector, VectorScheme, Vocabulary};
pub use window::{
    chronological_split, filter_normal, oversample_anomalies, subsample_training, windowize,
    WindowedSample, DEFAULT_WINDOW_SIZE,
};
