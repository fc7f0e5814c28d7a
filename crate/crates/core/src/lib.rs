//! Divergences on the Markov category of finite stochastic matrices.
//!
//! Distributions and channels ([`finstoch`]), the divergence families and
//! channel divergences ([`divergence`]), divergence-derived information
//! measures ([`info`]), the enrichment inequalities with counterexample
//! search ([`enrichment`]), partition refinement for continuous models
//! ([`partition`]) and the category of divergence spaces ([`divspace`]).

pub mod divergence;
pub mod divspace;
pub mod enrichment;
pub mod error;
pub mod finstoch;
pub mod info;
pub mod partition;
pub mod scalar;

pub use divergence::{
    channel_divergence, conditional_divergence, divergence, ChannelDivergence, DivergenceScalar, Family,
};
pub use error::{Error, Result};
pub use finstoch::{compose, joint, marginals, tensor, Alphabet, Channel, Distribution, JointDistribution};
pub use info::MeasureReport;
pub use scalar::{Ext, ExtReal, Rational, Scalar};
