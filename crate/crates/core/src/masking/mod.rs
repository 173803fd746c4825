//! Boolean and multiplicative sharings, the masking context, and the
//! auxiliary gadgets.

mod context;
mod gadgets;
mod sharing;

pub use context::{CostCounters, MaskingContext, RandomSource, SeededSource};
pub use gadgets::{
    b2m, b2minv, full_add, nonzero_folds, refresh, sec_and, sec_mult, sec_nonzero, sec_not,
    sec_or, strong_refresh,
};
pub(crate) use gadgets::{isw, refresh_in, strong_refresh_in};
pub use sharing::{
    bool_share, bool_share_bit, bool_unshare, mult_share, mult_unshare, BoolSharing, MultSharing,
};
