//! Shaped input distribution and the information-theoretic quantities
//! derived from it. Entropies and rates are in bits; LLRs elsewhere are in
//! natural-log units.

mod pmf;
mod rate;

pub use pmf::{
    asymptotic_p, asymptotic_shaping_bits, avg_power, binary_entropy, shaped_pmf, symbol_entropy,
    ShapedPmf,
};
pub use rate::{
    achievable_rate, achievable_rate_bmd, optimize_p, Integrator, OptimizedRate, RatePoint,
    DEFAULT_GH_ORDER,
};
