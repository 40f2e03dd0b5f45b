use thiserror::Error;

pub type Result<T> = std::result::Result<T, DiscordError>;

#[derive(Debug, Error)]
pub enum DiscordError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("invalid probability table: {0}")]
    Probability(String),

    #[error("expected a bipartite state, got {0} parties")]
    Arity(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error(
        "fock cutoff {cutoff} not converged: doubling it moved D^H by {delta:e}; try a cutoff of at least {suggested}"
    )]
    Convergence {
        cutoff: usize,
        delta: f64,
        suggested: usize,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
