//! Revenue-optimal partition mechanisms for a single additive buyer with
//! independent discrete valuations.
//!
//! All arithmetic is exact. A buyer facing price `p` for a bundle buys
//! whenever the bundle's value is at least `p`.
//!
//! - [`dist`]: discrete laws, convolution, posted-price revenue.
//! - [`mechanism`]: priced partitions and choose-one menus.
//! - [`exact`]: the exhaustive oracle over all set partitions.
//! - [`ptas`]: the approximation scheme and its simplification steps.
//! - [`generators`]: instance families.

pub mod dist;
pub mod exact;
pub mod generators;
pub mod mechanism;
pub mod ptas;
pub mod rational;

pub use dist::{
    brev, bundle_sum_dist, convolve, exceedance, optimal_price, srev, DiscreteDist, DistError,
    PriceQuote, ProductInstance,
};
pub use exact::{solve_exact, SolveError, SolveReport};
pub use mechanism::{
    eval_menu, eval_partition, optimize_prices, Bundle, ChooseOneMenu, MechanismError, MenuOption,
    PricedPartition,
};
pub use ptas::{solve_ptas, PtasConfig};
pub use rational::Rational;
