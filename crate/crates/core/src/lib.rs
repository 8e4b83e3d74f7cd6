//! Verification engine for assignments under layered incomplete
//! preferences: parse instances, decide the three optimality notions
//! over several algorithm backends, kernelize, and generate hard
//! instance families with known ground truth.

pub mod generate;
pub mod graph;
pub mod kernel;
pub mod model;
pub mod verify;

pub use graph::{SelfLoop, TradingCycle};
pub use model::Instance;
pub use verify::{check_witness, render_verdict, result_line, verify, Algo, Notion, Verdict, Witness};
