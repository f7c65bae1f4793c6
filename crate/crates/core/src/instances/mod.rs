//! Instance families: herringbones, SAT-encoded LFP instances, discretized
//! continuous maps and generic random monotone functions.

pub mod discretize;
pub mod herringbone;
pub mod monotone;
pub mod random;
pub mod sat;

pub use discretize::{discretize_continuous, DiscretizedFn};
pub use herringbone::{HerringboneFn, HerringboneInstance};
pub use monotone::{
    exhaustive_monotone_catalog, monotone_component_tables, random_join, random_linear_threshold,
    random_monotone_mixed, random_monotone_table, LinearThresholdFn, RandomJoinFn,
};
pub use random::{
    herringbone_random, herringbone_random_with_layout, random_herringbone_any, random_staircase_herringbone,
    HerringboneDistributionParams, RegionLayout,
};
pub use sat::{sat_lfp_instance, CnfFormula, SatLfpFn};
