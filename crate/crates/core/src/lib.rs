//! Spectrum dimensioning for TV delivery over a cellular network.
//!
//! Two delivery modes are modelled for a border cell of a hexagonal
//! network:
//!
//! * broadcast-only: every programme rides a single-frequency network
//!   (national, plus one regional SFN per intersecting region);
//! * hybrid: the most popular programmes are broadcast over regional SFNs
//!   and the rest is unicast, dimensioned as a multi-rate loss system whose
//!   link quality depends on the network load.
//!
//! ```no_run
//! use celldim::{dimension, Bundle, Mode, Morphology};
//!
//! let bundle = Bundle::preset(Morphology::Rural);
//! let r = dimension(&bundle, Mode::Hybrid, 1).unwrap();
//! println!("{:.1} MHz", r.bw_required);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dimensioning;
pub mod erlang;
pub mod error;
pub mod geometry;
pub mod propagation;
pub mod rng;
pub mod scenario;
pub mod sfn;
pub mod sweep;
pub mod traffic;
pub mod unicast;

pub use config::{load_scenario, parse_config};
pub use dimensioning::{
    dimension, dimension_broadcast_only, dimension_hybrid, spectrum_saving, DimensioningResult, Mode,
};
pub use erlang::{kaufman_roberts, mc_blocking_oracle, min_bandwidth, ErlangSystem};
pub use error::{Error, Result};
pub use geometry::{build_layout, HexLayout, Point};
pub use scenario::{builtin_scenario, Bundle, EfficiencyProfile, LinkMode, Morphology, Scenario, ServiceConfig};
pub use sfn::{simulate_sinr_distribution, SinrDistribution};
pub use traffic::{build_classes, popularity_model, ProgramCatalog, TrafficClasses};
pub use unicast::{solve_load, LoadSolution};
