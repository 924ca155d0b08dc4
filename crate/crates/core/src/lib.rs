//! Rectangular increments, Riemann–Stieltjes integration on hyperrectangles and
//! hypertriangles, and multiparameter Ornstein–Uhlenbeck fields.

mod error;
pub mod fields;
pub mod func;
pub mod grid;
pub mod indexkit;
pub mod numeric;
pub mod ou;
pub mod rsint;
pub mod stats;
pub mod triangle;
pub mod variation;

pub use error::{Error, Result};
pub use fields::{
    brownian_sheet, check_stationary_increments, fbm_covariance, fbm_sheet, g_theta_truncation_probe,
    g_theta_zero_normalize, gaussian_field, sub_seed, EnsembleMeta, FieldEnsemble, HurstVector, ThetaVector,
    TruncationProbe,
};
pub use func::{Differentiable, FiniteDifference, Integrand, Restrict, SeparableSum, Smooth, Univariate};
pub use grid::{rect_increment, GridField, GridHeader, GridPartition, Rect};
pub use indexkit::{compose, compose3, nonempty_subsets, subsets, MultiIndexSet, Point, MAX_DIM};
pub use ou::{
    equivalence_check, equivalence_gap, homogeneous_solution_check, inv_lamperti, lamperti, langevin_residual, m_theta,
    m_theta_inv, ou_solve, Provenance, TransformKind, TransformedField,
};
pub use rsint::{
    fundamental_lemma_check, hybrid_integral, ibp_rhs, mixed_integral, product_rule_check, rs_integral,
    substitute_derivative, substitute_partial, IntegralResult, Level, RsOptions, TagPolicy,
};
pub use stats::{
    bonferroni_threshold, empirical_cov, sample_cov, self_similarity_test, stationarity_test, z_score, ProbeStatistic,
    TestReport,
};
pub use triangle::{box_integral, build_domain, complement_integral, triangle_integral, Orientation, TriangleDomain};
pub use variation::{hk_variation, hk_variation_smooth, vitali_variation, VariationEstimate};
