use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cover relation contains a cycle through: {}", .0.join(" "))]
    CoverCycle(Vec<String>),

    #[error("empty poset")]
    EmptyPoset,

    #[error("reserved id `{0}` may not appear in a lattice")]
    ReservedId(String),

    #[error("not a lattice: `{x}` and `{y}` have {} {bound} bound(s): {}",
            .witnesses.len(), .witnesses.join(" "))]
    NotALattice {
        x: String,
        y: String,
        /// "upper" (join failure) or "lower" (meet failure).
        bound: &'static str,
        /// The minimal upper bounds / maximal lower bounds found.
        witnesses: Vec<String>,
    },

    #[error("not ULD at cover ({lower}, {upper}): M_lower = {{{}}}, M_upper = {{{}}}",
            .m_lower.join(" "), .m_upper.join(" "))]
    NotUld {
        lower: String,
        upper: String,
        m_lower: Vec<String>,
        m_upper: Vec<String>,
    },

    #[error("`{0}` is not a meet-irreducible")]
    NotMeetIrreducible(String),

    #[error("system still contains strict constraints; eliminate them first")]
    StrictConstraint,

    #[error("variable `{0}` is not registered in the system")]
    UnregisteredVariable(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("vertex `{0}` is not firable")]
    NotFirable(String),

    #[error("support graph has a closed component: {}", .0.join(" "))]
    ClosedComponent(Vec<String>),

    #[error("configuration cap of {0} exceeded during space generation")]
    CapExceeded(usize),

    #[error("configuration is not in the generated space")]
    UnknownConfiguration,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures that indicate a bug in this crate rather than bad
    /// input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
