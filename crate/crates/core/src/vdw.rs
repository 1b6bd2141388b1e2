//! Second-order dipole-dipole (van der Waals) interaction between two
//! Rydberg atoms, projected on the two-atom Zeeman basis
//! `{|++⟩, |+−⟩, |−+⟩, |−−⟩}` of `m_J = ±1/2` states.
//!
//! Each dipole-allowed pair of intermediate series is a [`Channel`]. Its
//! strength `C6^(p)` is a sum over intermediate principal quantum numbers
//! and its angular structure `D^(p)` is an m-summed product of dipole
//! angular factors. For the four channels of a pair,
//! `D^(p) = c_p·I ∓ D0(θ, φ)` with `c_p = 2/27, 8/27, 4/27, 4/27` and signs
//! `−, −, +, +`, so the full interaction is
//! `C6·I − (C6^(a) + C6^(b) − C6^(c) − C6^(d))·D0` with
//! `C6 = (2/27)[C6^(a) + 4C6^(b) + 2(C6^(c) + C6^(d))]`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::angular::{clebsch_gordan, dipole_angular, sph_harm_rank2, HalfInt};
use crate::atomdata::{level_energy, radial_matrix_element, RydbergLevel, Series, SpeciesData};
use crate::par::{self, Execution};
use crate::units::{C6_AU_TO_LAB, HARTREE_RAD_PER_US};
use crate::{Error, Result};

pub type Matrix4c = Matrix4<Complex64>;

/// Default half-width of the intermediate-n window.
pub const DEFAULT_WINDOW: u32 = 6;

/// Relative change of C6 on widening the window by 2 that still counts as
/// converged.
pub const CONVERGENCE_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairType {
    SS,
    SP,
    PP,
}

impl PairType {
    pub fn initial_series(self) -> (Series, Series) {
        match self {
            PairType::SS => (Series::S12, Series::S12),
            PairType::SP => (Series::S12, Series::P12),
            PairType::PP => (Series::P12, Series::P12),
        }
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairType::SS => "SS",
            PairType::SP => "SP",
            PairType::PP => "PP",
        })
    }
}

impl FromStr for PairType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SS" => Ok(PairType::SS),
            "SP" => Ok(PairType::SP),
            "PP" => Ok(PairType::PP),
            _ => Err(Error::InvalidArgument(format!("unsupported pair type `{s}` (expected SS, SP or PP)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelLabel {
    A,
    B,
    C,
    D,
}

impl ChannelLabel {
    pub const ALL: [ChannelLabel; 4] = [ChannelLabel::A, ChannelLabel::B, ChannelLabel::C, ChannelLabel::D];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(c_p, s_p)` in `D^(p) = c_p·I + s_p·D0`.
    pub fn identity_decomposition(self) -> (f64, f64) {
        match self {
            ChannelLabel::A => (2.0 / 27.0, -1.0),
            ChannelLabel::B => (8.0 / 27.0, -1.0),
            ChannelLabel::C => (4.0 / 27.0, 1.0),
            ChannelLabel::D => (4.0 / 27.0, 1.0),
        }
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ['a', 'b', 'c', 'd'][self.index()];
        write!(f, "{c}")
    }
}

/// A dipole-allowed virtual transition `initial → final_lj` of both atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub initial: (RydbergLevel, RydbergLevel),
    pub final_lj: (Series, Series),
    pub label: ChannelLabel,
}

/// One `(n_α, n_β)` term of a channel sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTerm {
    pub n_alpha: u32,
    pub n_beta: u32,
    /// `R_{α,1}² R_{β,2}²` in a0⁴.
    pub radial_product: f64,
    /// `E(initial pair) − E(α) − E(β)`, rad/μs.
    pub defect: f64,
}

impl ChannelTerm {
    /// Contribution to C6 in rad/μs · μm⁶.
    pub fn contribution(&self) -> f64 {
        self.radial_product / (self.defect / HARTREE_RAD_PER_US) * C6_AU_TO_LAB
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSum {
    pub channel: Channel,
    /// rad/μs · μm⁶.
    pub c6: f64,
    pub terms: Vec<ChannelTerm>,
    pub converged: bool,
    /// Relative change of `c6` when the window grows by 2.
    pub window_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    pub pair_type: PairType,
    pub levels: (RydbergLevel, RydbergLevel),
    /// Indexed by [`ChannelLabel::index`], rad/μs · μm⁶.
    pub c6_channels: [f64; 4],
    pub c6_total: f64,
    /// Coefficient of `−D0`.
    pub d0_coeff: f64,
    pub theta: f64,
    pub phi: f64,
    /// Interaction at unit distance, rad/μs · μm⁶.
    pub h_matrix: Matrix4c,
    pub deviation: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl PairPotential {
    pub fn c6(&self, label: ChannelLabel) -> f64 {
        self.c6_channels[label.index()]
    }
}

fn check_levels(pair_type: PairType, levels: (RydbergLevel, RydbergLevel)) -> Result<()> {
    let (s1, s2) = pair_type.initial_series();
    if levels.0.series() != s1 || levels.1.series() != s2 {
        return Err(Error::InvalidArgument(format!(
            "levels {} + {} do not form a {pair_type} pair ({s1} + {s2})",
            levels.0, levels.1
        )));
    }
    Ok(())
}

/// The four channels `(a)..(d)` of a pair type.
pub fn enumerate_channels(pair_type: PairType, levels: (RydbergLevel, RydbergLevel)) -> Result<[Channel; 4]> {
    use Series as S;
    check_levels(pair_type, levels)?;
    let finals = match pair_type {
        PairType::SS => [(S::P12, S::P12), (S::P32, S::P32), (S::P32, S::P12), (S::P12, S::P32)],
        PairType::SP => [(S::P12, S::S12), (S::P32, S::D32), (S::P32, S::S12), (S::P12, S::D32)],
        PairType::PP => [(S::S12, S::S12), (S::D32, S::D32), (S::S12, S::D32), (S::D32, S::S12)],
    };
    Ok(std::array::from_fn(|i| Channel {
        initial: levels,
        final_lj: finals[i],
        label: ChannelLabel::ALL[i],
    }))
}

const SPINS: [HalfInt; 2] = [HalfInt::HALF, HalfInt::from_twice(-1)];

/// `J^q` between a spin-1/2 initial state and the projections of an
/// intermediate series, in both directions.
struct DipoleTable {
    /// `down[k][m][q+1] = J^q(initial m_k → intermediate m)`
    down: [Vec<[f64; 3]>; 2],
    /// `up[m][k][q+1] = J^q(intermediate m → initial m_k)`
    up: Vec<[[f64; 3]; 2]>,
}

impl DipoleTable {
    fn new(initial: Series, inter: Series) -> Self {
        let ms: Vec<HalfInt> = inter.j.projections().collect();
        let down = SPINS.map(|mk| {
            ms.iter()
                .map(|&m| std::array::from_fn(|i| dipole_angular(initial.l, initial.j, mk, i as i32 - 1, inter.l, inter.j, m)))
                .collect()
        });
        let up = ms
            .iter()
            .map(|&m| SPINS.map(|mk| std::array::from_fn(|i| dipole_angular(inter.l, inter.j, m, i as i32 - 1, initial.l, initial.j, mk))))
            .collect();
        DipoleTable { down, up }
    }
}

/// m-summed angular matrix `D^(p)` of a channel (independent of n).
pub fn compute_d_matrix(channel: &Channel, theta: f64, phi: f64) -> Matrix4c {
    let t1 = DipoleTable::new(channel.initial.0.series(), channel.final_lj.0);
    let t2 = DipoleTable::new(channel.initial.1.series(), channel.final_lj.1);
    // w[mu+1][nu+1] = CG(1 mu 1 nu | 2 mu+nu) · conj(Y_2^{mu+nu})
    let mut w = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (mu, nu) = (i as i32 - 1, j as i32 - 1);
            let cg = clebsch_gordan(HalfInt::ONE, HalfInt::int(mu), HalfInt::ONE, HalfInt::int(nu), HalfInt::int(2), HalfInt::int(mu + nu));
            let y = sph_harm_rank2(mu + nu, theta, phi).expect("|mu + nu| <= 2");
            *v = y.conj() * cg;
        }
    }
    let na = t1.up.len();
    let nb = t2.up.len();
    let contract = |ja: &[f64; 3], jb: &[f64; 3]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += w[i][j] * (ja[i] * jb[j]);
            }
        }
        s
    };
    let mut d = Matrix4c::zeros();
    for ma in 0..na {
        for mb in 0..nb {
            let a: [Complex64; 4] = std::array::from_fn(|row| contract(&t1.down[row / 2][ma], &t2.down[row % 2][mb]));
            let b: [Complex64; 4] = std::array::from_fn(|col| contract(&t1.up[ma][col / 2], &t2.up[mb][col % 2]));
            for row in 0..4 {
                for col in 0..4 {
                    d[(row, col)] += a[row] * b[col];
                }
            }
        }
    }
    d * Complex64::new(24.0 * PI / 5.0, 0.0)
}

/// Closed form of the traceless angular matrix `D0(θ, φ)`.
pub fn d0_closed_form(theta: f64, phi: f64) -> Matrix4c {
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    let cs = theta.cos() * theta.sin();
    let ss = theta.sin().powi(2);
    let e = |k: f64| Complex64::from_polar(1.0, k * phi);
    let r = |x: f64| Complex64::new(x, 0.0);
    let diag_out = r((3.0 * c2 - 1.0) / 81.0);
    let diag_in = r((1.0 - 3.0 * c2) / 81.0);
    let flip = r((-3.0 * c2 - 5.0) / 81.0);
    let up1 = e(-1.0) * (2.0 / 27.0 * cs);
    let up2 = e(-2.0) * (2.0 / 27.0 * ss);
    let lo1 = e(1.0) * (s2 / 27.0);
    let lo2 = e(2.0) * (2.0 / 27.0 * ss);
    Matrix4c::new(
        diag_out, up1, up1, up2, //
        lo1, diag_in, flip, -up1, //
        lo1, flip, diag_in, -up1, //
        lo2, -lo1, -lo1, diag_out,
    )
}

fn spectral_norm(m: &Matrix4c) -> f64 {
    m.singular_values().max()
}

fn channel_terms(species: &SpeciesData, channel: &Channel, window: u32) -> Result<Vec<ChannelTerm>> {
    let (i1, i2) = channel.initial;
    let e0 = level_energy(species, i1)? + level_energy(species, i2)?;
    let side = |init: RydbergLevel, series: Series| -> Result<Vec<(u32, f64, f64)>> {
        let lo = init.n.saturating_sub(window).max(1);
        let mut out = Vec::new();
        for n in lo..=init.n + window {
            let level = RydbergLevel::new(n, series)?;
            match species.nstar(level) {
                Ok(ns) if ns >= series.l.value() + 1.0 => {}
                _ => continue,
            }
            let r = radial_matrix_element(species, init, level)?;
            out.push((n, r * r, level_energy(species, level)?));
        }
        Ok(out)
    };
    let alpha = side(i1, channel.final_lj.0)?;
    let beta = side(i2, channel.final_lj.1)?;
    let mut terms = Vec::with_capacity(alpha.len() * beta.len());
    for &(na, ra, ea) in &alpha {
        for &(nb, rb, eb) in &beta {
            let defect = e0 - ea - eb;
            if defect == 0.0 {
                continue;
            }
            terms.push(ChannelTerm {
                n_alpha: na,
                n_beta: nb,
                radial_product: ra * rb,
                defect,
            });
        }
    }
    Ok(terms)
}

/// Channel strength `Σ R²R²/δ` over intermediate n within `±n_window`.
pub fn compute_c6_channel(species: &SpeciesData, channel: &Channel, n_window: u32) -> Result<ChannelSum> {
    if n_window == 0 {
        return Err(Error::InvalidArgument("n_window must be at least 1".into()));
    }
    let terms = channel_terms(species, channel, n_window)?;
    let c6: f64 = terms.iter().map(ChannelTerm::contribution).sum();
    let wide: f64 = channel_terms(species, channel, n_window + 2)?.iter().map(ChannelTerm::contribution).sum();
    let window_change = if wide == 0.0 { 0.0 } else { ((c6 - wide) / wide).abs() };
    Ok(ChannelSum {
        channel: *channel,
        c6,
        terms,
        converged: window_change <= CONVERGENCE_TOL,
        window_change,
    })
}

/// `‖d0·D0(θ,φ)‖₂ / ‖C6·I‖₂`.
pub fn deviation_from_identity(pp: &PairPotential) -> Result<f64> {
    deviation_parts(pp.c6_total, pp.d0_coeff, pp.theta, pp.phi)
}

fn deviation_parts(c6_total: f64, d0_coeff: f64, theta: f64, phi: f64) -> Result<f64> {
    if c6_total == 0.0 {
        return Err(Error::ZeroC6);
    }
    if d0_coeff == 0.0 {
        return Ok(0.0);
    }
    Ok(d0_coeff.abs() * spectral_norm(&d0_closed_form(theta, phi)) / c6_total.abs())
}

/// Full Zeeman-basis interaction of a pair at orientation `(θ, φ)`.
pub fn assemble_vdw(
    species: &SpeciesData,
    pair_type: PairType,
    levels: (RydbergLevel, RydbergLevel),
    theta: f64,
    phi: f64,
    n_window: u32,
) -> Result<PairPotential> {
    let channels = enumerate_channels(pair_type, levels)?;
    let mut warnings = Vec::new();
    if pair_type == PairType::SP && levels.0.n.abs_diff(levels.1.n) < 10 {
        let msg = format!(
            "SP pair {} + {} has |Δn| < 10; first-order dipolar exchange is not negligible and is not included",
            levels.0, levels.1
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mut c6 = [0.0; 4];
    let mut converged = true;
    let mut from_channels = Matrix4c::zeros();
    for ch in &channels {
        let sum = compute_c6_channel(species, ch, n_window)?;
        if !sum.converged {
            let msg = format!(
                "channel ({}) not converged: widening the window by 2 changes C6 by {:.2}%",
                ch.label,
                100.0 * sum.window_change
            );
            log::warn!("{msg}");
            warnings.push(msg);
            converged = false;
        }
        c6[ch.label.index()] = sum.c6;
        from_channels += compute_d_matrix(ch, theta, phi) * Complex64::new(sum.c6, 0.0);
    }
    let c6_total = 2.0 / 27.0 * (c6[0] + 4.0 * c6[1] + 2.0 * (c6[2] + c6[3]));
    let d0_coeff = c6[0] + c6[1] - c6[2] - c6[3];
    let closed = Matrix4c::identity() * Complex64::new(c6_total, 0.0) - d0_closed_form(theta, phi) * Complex64::new(d0_coeff, 0.0);
    let scale = c6.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mismatch = (from_channels - closed).iter().fold(0.0_f64, |m, v| m.max(v.norm())) / scale;
    if mismatch > 1e-10 {
        return Err(Error::ConstructionMismatch(mismatch));
    }
    let deviation = deviation_parts(c6_total, d0_coeff, theta, phi)?;
    Ok(PairPotential {
        pair_type,
        levels,
        c6_channels: c6,
        c6_total,
        d0_coeff,
        theta,
        phi,
        h_matrix: closed,
        deviation,
        converged,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub c6_total: f64,
    pub deviation: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub n: u32,
    pub dn: i32,
    pub outcome: std::result::Result<CellSummary, String>,
}

/// C6 and deviation over a grid of `(n, Δn)`, with `n' = n + Δn` for the
/// second atom. Rows come back n-major; failed cells keep their message.
#[allow(clippy::too_many_arguments)]
pub fn c6_map(
    species: &SpeciesData,
    pair_type: PairType,
    n_range: RangeInclusive<u32>,
    dn_range: RangeInclusive<i32>,
    theta: f64,
    phi: f64,
    n_window: u32,
    exec: Execution,
) -> Vec<MapCell> {
    let cells: Vec<(u32, i32)> = n_range.flat_map(|n| dn_range.clone().map(move |dn| (n, dn))).collect();
    let (s1, s2) = pair_type.initial_series();
    par::map(exec, &cells, |&(n, dn)| {
        let outcome = (|| {
            let n2 = i64::from(n) + i64::from(dn);
            let n2 = u32::try_from(n2).ok().filter(|&v| v > 0).ok_or_else(|| Error::InvalidArgument(format!("n + dn = {n2}")))?;
            let levels = (RydbergLevel::new(n, s1)?, RydbergLevel::new(n2, s2)?);
            let pp = assemble_vdw(species, pair_type, levels, theta, phi, n_window)?;
            Ok::<_, Error>(CellSummary {
                c6_total: pp.c6_total,
                deviation: pp.deviation,
                converged: pp.converged,
            })
        })()
        .map_err(|e| e.to_string());
        MapCell { n, dn, outcome }
    })
}
