//! Closed-form error probabilities and their numerical evaluation.
//!
//! [`formulas`] holds the per-node expressions, [`exact`] the variants that
//! follow the nearest-neighbour detector exactly, and [`sweep`] evaluates
//! either over an SNR grid.

pub mod context;
pub mod exact;
pub mod formulas;
pub mod qfunc;
pub mod quadrature;
pub mod sweep;

pub use context::{eve_laws, verbatim_distance_prior, AnalyticContext, EveSigma, Law1D, SigmaModel};
pub use exact::{
    merged_regions, pe_misclassification_exact, pfa_test2b_exact, pfa_test2c_exact,
    pmd_bar_test2b_exact, pmd_bar_test2c_exact, union_length,
};
pub use formulas::{
    ln_pfa_test1, ln_pfa_test2b, ln_pfa_test2c, ln_pmd_bar_test1, ln_pmd_bar_test2b, ln_pmd_bar_test2c,
    pe_misclassification, pfa_test1, pfa_test2b, pfa_test2c, pmd_bar_test1, pmd_bar_test2b, pmd_bar_test2c,
    Feature, Misclassification, Normalization,
};
pub use qfunc::{ln_normal_interval, ln_q, normal_interval, q_func};
pub use quadrature::{quadrature, quadrature_rel, quadrature_split, quadrature_split_rel};
pub use sweep::{feature_rates, step1_rates, AnalyticForm, AnalyticSweep, TestRates};
