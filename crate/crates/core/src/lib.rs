//! Exact analysis of vendor pricing games with a single submodular buyer.
//!
//! Vendors own disjoint sets of items. In the continuous-price game each
//! vendor prices its items freely; in the price-moderated game vendors only
//! choose which items to offer and every offered item is priced at its
//! marginal value to the full offered set. The buyer takes a
//! utility-maximizing bundle, preferring the maximal one.
//!
//! All arithmetic is exact over [`Rational`].

pub mod analysis;
pub mod error;
pub mod instances;
pub mod itemset;
pub mod lp;
pub mod market;
pub mod pmvc;
pub mod rational;
pub mod schema;
pub mod valuation;
pub mod vcgame;

pub use analysis::{check_lemma1, check_lemma2, equilibrium_report, harmonic, welfare, EquilibriumReport, InequalityCheck};
pub use error::{GameError, ParseRationalError, SchemaError, ValuationError};
pub use instances::{
    cdsp_equilibrium, cdsp_instance, counterexample_instance, harmonic_instance, pos_instance, random_cdsp, random_prices,
    random_instance, CdspEquilibrium, CdspSpec, Generator,
};
pub use itemset::{Item, ItemSet, MAX_ITEMS};
pub use market::{buyer_utility, demand, demand_all, unavailable_price, DemandResult, PriceVector};
pub use pmvc::{
    payoff_table, pmvc_best_response, pmvc_outcome, pmvc_payoffs, pmvc_prices, pmvc_pure_ne, settle, GameInstance,
    Outcome, Pricing, ProfileSpace, StrategyProfile, DEFAULT_PROFILE_CAP,
};
pub use rational::Rational;
pub use schema::InstanceFile;
pub use valuation::{Curve, ValidationReport, Valuation, ValuationKind, Witness};
pub use vcgame::{
    br_dynamics, map_to_pmvc, vc_best_response, vc_verify_ne, vendor_revenue, BestResponse, BrMethod,
    DeviationCertificate, DynamicsState, DynamicsTrace, PmvcMapping, Termination, Verdict,
};
