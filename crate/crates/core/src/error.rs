use thiserror::Error;

/// Contract violations surfaced by the library.
///
/// Anything that reaches a caller as `Error` means an input broke a stated
/// precondition; internal invariants are enforced with debug assertions
/// instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice distance must be at least 2, got {0}")]
    BadDistance(usize),

    #[error("qubit index {index} out of range for {count} qubits")]
    QubitOutOfRange { index: usize, count: usize },

    #[error("logical class is undefined while the syndrome is non-empty")]
    SyndromeNotEmpty,

    #[error("action index {index} out of range for {n_actions} actions")]
    ActionOutOfRange { index: usize, n_actions: usize },

    #[error("no perspectives: the syndrome is empty")]
    NoPerspectives,

    #[error("network expects {expected} {what}, got {got}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("enabled connections contain a cycle through {in_node} -> {out_node}")]
    CycleDetected { in_node: u32, out_node: u32 },

    #[error("genome is malformed: {0}")]
    MalformedGenome(String),

    #[error("crossover parents disagree on arity: ({0}, {1}) vs ({2}, {3})")]
    ParentArityMismatch(usize, usize, usize, usize),

    #[error("defect count {count} is odd; matching requires an even count")]
    OddDefectCount { count: usize },

    #[error(
        "defect count {count} exceeds the matching limit {limit}; raise the limit \
         (cost doubles per extra defect) or enable counting over-limit games as losses"
    )]
    TooManyDefects { count: usize, limit: usize },

    #[error("transplant requires a strictly larger odd distance: d1={d1}, d2={d2}")]
    BadTransplant { d1: usize, d2: usize },

    #[error("genome arity ({n_in}, {n_out}) does not match any {mode} lattice")]
    ArityModeMismatch {
        n_in: usize,
        n_out: usize,
        mode: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("genome file: {0}")]
    GenomeFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
