use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vertex {v} out of range (graph has {n} vertices)")]
    VertexRange { v: u32, n: u32 },

    #[error("unknown edge id {0}")]
    UnknownEdge(u32),

    #[error("no edge between {u} and {v}")]
    EdgeAbsent { u: u32, v: u32 },

    #[error("an edge between {u} and {v} is already present")]
    EdgeExists { u: u32, v: u32 },

    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),

    #[error("edge {0} is updated more than once in one batch")]
    RepeatedUpdate(u32),

    #[error("edge weight {0} is not usable here")]
    BadWeight(f64),

    #[error("{got} failed edges exceed the supported budget f = {bound}")]
    TooManyFailures { got: usize, bound: usize },

    #[error("endpoints are already connected")]
    AlreadyConnected,

    #[error("edge is not in the forest")]
    NotInForest,

    #[error("vertices lie in different trees")]
    DifferentTrees,

    #[error("tree degree {0} exceeds the clustering bound of 3")]
    DegreeBound(usize),

    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
