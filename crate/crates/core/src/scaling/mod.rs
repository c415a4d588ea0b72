//! Continuum limit of the factorized dynamics and its self-similar solution.
//!
//! With `l = eps k` and `s = eps^2 t` the bulk of the mean-field system
//! becomes the degenerate diffusion `dP/ds = A d^2(P^5)/dl^2`, which has the
//! compactly supported similarity solution `P(l, s) = s^(-1/6) f(l s^(-1/6))`
//! with `f(x) = (C1 - x^2 / (15 A))^(1/4)`.

mod continuum;
mod exponents;
mod fit;
mod profile;
pub mod quad;

pub use continuum::{continuum_coefficient_a, continuum_drift, epsilon_refinement, GaussianBump, Refinement};
pub use exponents::{exponent_report, pk_moments, ExponentReport, KDomain, MomentFits, PkForm, PkMoments};
pub use fit::{fit_exponent, PowerFit};
pub use profile::{
    barenblatt_f, pde_convergence, pde_residual, pk_t, pk_t_printed, profile_mass,
    self_similar_p, similarity_ode_residual, DerivativeMode, PdeGrid, SelfSimilarParams,
};
