//! Unit conventions and physical constants.
//!
//! Everything outside the radial solver is expressed in laboratory units
//! with `ħ = 1` folded into angular frequencies:
//!
//! | quantity           | unit              |
//! |--------------------|-------------------|
//! | time               | μs                |
//! | length             | μm                |
//! | angular frequency  | rad/μs            |
//! | interaction (C6)   | rad/μs · μm⁶      |
//! | mass               | u (atomic mass)   |
//!
//! A frequency quoted as `f/2π` in MHz therefore becomes `2π·f` rad/μs.
//! The radial solver works in atomic units; [`C6_AU_TO_LAB`] converts its
//! output at the `vdw` boundary.

use std::f64::consts::PI;

/// Hartree energy divided by ħ, in rad/s (CODATA 2018).
pub const HARTREE_ANGULAR_PER_S: f64 = 4.134_137_333_518_2e16;

/// Hartree energy divided by h, in GHz.
pub const HARTREE_GHZ: f64 = 6.579_683_920_502e6;

/// Bohr radius in μm.
pub const BOHR_UM: f64 = 5.291_772_109_03e-5;

/// ħ / (1 u) in μm²/μs.
pub const HBAR_OVER_AMU: f64 = 6.350_779_93e-2;

/// Electron mass in atomic mass units.
pub const ELECTRON_MASS_AMU: f64 = 5.485_799_090_65e-4;

/// One Hartree, in rad/μs.
pub const HARTREE_RAD_PER_US: f64 = HARTREE_ANGULAR_PER_S * 1e-6;

/// Converts a C6 coefficient from atomic units (E_h a0⁶) to rad/μs · μm⁶.
pub const C6_AU_TO_LAB: f64 = HARTREE_RAD_PER_US
    * BOHR_UM
    * BOHR_UM
    * BOHR_UM
    * BOHR_UM
    * BOHR_UM
    * BOHR_UM;

/// `f` in kHz (ordinary frequency) to rad/μs.
pub fn khz(f: f64) -> f64 {
    2.0 * PI * f * 1e-3
}

/// `f` in MHz (ordinary frequency) to rad/μs.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f
}

/// `f` in GHz (ordinary frequency) to rad/μs.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

/// rad/μs to ordinary frequency in kHz.
pub fn to_khz(w: f64) -> f64 {
    w / (2.0 * PI) * 1e3
}

/// rad/μs to ordinary frequency in MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// rad/μs · μm⁶ to the customary `C6/2π` in GHz · μm⁶.
pub fn c6_to_ghz_um6(c6: f64) -> f64 {
    c6 / (2.0 * PI) * 1e-3
}

/// `C6/2π` in GHz · μm⁶ to rad/μs · μm⁶.
pub fn c6_from_ghz_um6(c6: f64) -> f64 {
    c6 * 2.0 * PI * 1e3
}

/// ħ/M in μm²/μs for a particle of mass `mass_amu`.
pub fn hbar_over_mass(mass_amu: f64) -> f64 {
    HBAR_OVER_AMU / mass_amu
}
