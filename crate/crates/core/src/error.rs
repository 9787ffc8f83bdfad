//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is a puncture")]
    PointIsPuncture,

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("point lies outside the reference model")]
    OutsideModel,

    #[error("loop is not regular: |z'| vanishes near t = {t}")]
    NonRegularLoop { t: f64 },

    #[error("loop is self-intersecting at sampling resolution")]
    SelfIntersecting,

    #[error("strip width too large: maximal admissible delta is {max_delta}")]
    DeltaTooLarge { max_delta: f64 },

    #[error("offset {u} outside strip width {delta}")]
    OffsetOutsideStrip { u: f64, delta: f64 },

    #[error("branch collision: a second branch of the loop crosses the eps-ball")]
    BranchCollision,

    #[error("loop passes within tolerance of an inner disk center")]
    CenterTooClose,

    #[error("exponent must be < 2")]
    ExponentTooLarge,

    #[error("exponent must be > 1")]
    ExponentTooSmall,

    #[error("excluded u: parallel curve meets a puncture within tolerance")]
    ExcludedOffset,

    #[error("every grid offset is excluded, even after refinement")]
    AllOffsetsExcluded,

    #[error("need at least {need} distinct s values spanning {decades} decades")]
    NotEnoughData { need: usize, decades: u32 },

    #[error("budget exceeded: {what}")]
    BudgetExceeded { what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
