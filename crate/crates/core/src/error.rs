use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Problems building or querying a valuation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("universe of {0} items exceeds the cap of {cap}", cap = crate::itemset::MAX_ITEMS)]
    TooManyItems(usize),
    #[error("item set {set:#b} reaches outside a universe of {n} items")]
    OutOfUniverse { set: u32, n: usize },
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error("item {0:?} listed twice")]
    DuplicateItem(String),
    #[error("item {item} is already in the set")]
    ItemInSet { item: usize },
    #[error("empty bundle must have value 0, got {0}")]
    NonzeroEmpty(String),
    #[error("negative value {value} for bundle {set}")]
    NegativeValue { set: String, value: String },
    #[error("no value given for bundle {0}")]
    MissingEntry(String),
    #[error("value for bundle {0} given twice")]
    DuplicateEntry(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("curve has {have} points but a group of size {need} needs {} points", need + 1)]
    CurveTooShort { have: usize, need: usize },
    #[error("curve must start at 0, got {0}")]
    CurveOrigin(String),
}

/// Problems building or analyzing a game.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("game needs at least one vendor")]
    NoVendors,
    #[error("vendor sets must be pairwise disjoint and cover all items: {0}")]
    BadVendorPartition(String),
    #[error("valuation is not {0}; pass it as a diagnostic instance to analyze anyway")]
    NotCertified(&'static str),
    #[error("profile has {got} strategies but the game has {want} vendors")]
    ProfileArity { got: usize, want: usize },
    #[error("vendor {vendor} offers items it does not own")]
    ForeignItems { vendor: usize },
    #[error("no vendor with index {0}")]
    NoSuchVendor(usize),
    #[error("price vector has {got} entries, expected {want}")]
    PriceArity { got: usize, want: usize },
    #[error("negative price {price} for item {item}")]
    NegativePrice { item: usize, price: String },
    #[error("{count} profiles exceed the enumeration cap of {cap}")]
    CapExceeded { count: u128, cap: u64 },
    #[error("profile is not a pure Nash equilibrium (vendor {vendor} can improve)")]
    NotAnEquilibrium { vendor: usize },
    #[error("operation needs a category-max valuation")]
    NotCategoryMax,
    #[error("epsilon {eps} outside the open interval (0, {bound})")]
    EpsilonOutOfRange { eps: String, bound: String },
    #[error("instance size: {0}")]
    Size(String),
    #[error("equilibrium sells nothing while the optimum is positive")]
    ZeroWelfareEquilibrium,
}

/// Problems reading or writing instance files and reports.
#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}
