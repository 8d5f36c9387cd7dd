//! Bounds on the number of contingency tables with given marginals and cell
//! bounds, on marginal probabilities of random tables, and on volumes of flow
//! and transportation polytopes.
//!
//! Every bound is assembled from the capacity of a product of univariate cell
//! factors, computed by a damped Newton method in log coordinates. Exact
//! counters are provided as oracles for small instances.
//!
//! ```
//! use ctbounds::{compute_bounds, BoundId, BoundsSettings, CapMatrix, Marginals};
//!
//! let m = Marginals::uniform(3, 3, 100, 100).unwrap();
//! let k = CapMatrix::infinite(3, 3);
//! let report = compute_bounds(&m, &k, &BoundId::DEFAULT, &BoundsSettings::default()).unwrap();
//! assert_eq!(report.value(BoundId::Ub1).unwrap().to_display(2), "4.7e17");
//! ```

pub mod bigcount;
pub mod bounds;
pub mod capacity;
pub mod error;
pub mod exact;
pub mod factor;
pub mod feasibility;
pub mod logvalue;
pub mod par;
pub mod random;
pub mod special;
pub mod table;
pub mod volume;

pub use bigcount::BigCount;
pub use bounds::{
    compute_bounds, uniform_bounds_closed_form, BoundEntry, BoundId, BoundsReport, BoundsSettings, Orientation,
    UniformBounds,
};
pub use capacity::{solve_capacity, CapacityProblem, CapacityResult, HnSettings, SolverSettings, TypicalMatrix};
pub use error::{Error, Result};
pub use exact::{count_tables, count_tables_brute, exact_binomial_marginal_probability, CountResult};
pub use factor::FactorFamily;
pub use logvalue::LogValue;
pub use par::Exec;
pub use random::{Distribution, DistributionSpec, ProbabilityBounds};
pub use table::{Cap, CapMatrix, Marginals};
pub use volume::VolumeBound;
