use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("species data is missing the {0} series")]
    MissingSeries(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unphysical level {level}: effective quantum number {nstar}")]
    UnphysicalLevel { level: String, nstar: f64 },

    #[error("radial integration diverged for {level}: {detail}")]
    Divergence { level: String, detail: String },

    #[error("interaction matrix construction paths disagree by {0:e}")]
    ConstructionMismatch(f64),

    #[error("total C6 is zero, deviation from identity is undefined")]
    ZeroC6,

    #[error("interaction is not state insensitive: deviation {deviation} exceeds {threshold}")]
    NotStateInsensitive { deviation: f64, threshold: f64 },

    #[error("resonant dressing for spin pair {pair}: R_c^6 = {rc6:e} um^6 is negative")]
    ResonantDressing { pair: String, rc6: f64 },

    #[error("dressed ground state not identifiable at r = {r} um (overlap {overlap})")]
    LevelCrossing { r: f64, overlap: f64 },

    #[error("symplectic form drifted by {0:e}; propagation refused")]
    SymplecticDrift(f64),

    #[error("initial data-atom occupancy is zero")]
    ZeroOccupancy,

    #[error("equilibrium solve failed at t = {t} us: {detail}")]
    Equilibrium { t: f64, detail: String },

    #[error("equilibria bifurcate at t = {t} us (Jacobian determinant {det:e})")]
    Bifurcation { t: f64, det: f64 },

    #[error("time grid too coarse: finite-difference estimate changed by a relative {0:.3e} on refinement")]
    InsufficientSampling(f64),
}
