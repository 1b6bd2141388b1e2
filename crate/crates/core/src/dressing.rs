//! Rydberg-dressed ground-state potentials.
//!
//! Each atom has ground states `|g_±⟩` and Rydberg states `|r_±⟩`. A drive
//! couples `|g_s⟩ ↔ |r_s⟩` with Rabi frequency `Ω_s`, and in the rotating
//! frame the Rydberg state sits at `−Δ_s`. The auxiliary atom of a data /
//! auxiliary pair carries a single drive.
//!
//! To fourth order in `Ω/Δ` a pair of spins `(μ, ν)` feels the soft-core
//! potential `A/(r⁶ + R_c⁶)` with `A = (Ω_μΩ_ν / 4Δ_μΔ_ν)²·C6` and
//! `R_c⁶ = −C6/(Δ_μ + Δ_ν)`, where the first index refers to atom 1 and the
//! second to atom 2. The core is soft when `C6` and the detunings have
//! opposite signs.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::vdw::{Matrix4c, PairPotential};
use crate::{Error, Result};

/// Largest `|Ω/2Δ|` treated as perturbative without a warning.
pub const EPSILON_WARN: f64 = 0.3;

/// Default ceiling on the vdW deviation from identity.
pub const DEFAULT_DEVIATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    /// Ω, rad/μs.
    pub rabi: f64,
    /// Δ, rad/μs.
    pub detuning: f64,
}

impl LaserDrive {
    pub fn new(rabi: f64, detuning: f64) -> Self {
        LaserDrive { rabi, detuning }
    }

    /// `ε = Ω/2Δ`.
    pub fn epsilon(&self) -> f64 {
        self.rabi / (2.0 * self.detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Plus, Spin::Minus];

    fn index(self) -> usize {
        match self {
            Spin::Plus => 0,
            Spin::Minus => 1,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinPair(pub Spin, pub Spin);

impl fmt::Display for SpinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomDrives {
    pub plus: Option<LaserDrive>,
    pub minus: Option<LaserDrive>,
}

impl AtomDrives {
    /// Two spin states, both dressed.
    pub fn data(plus: LaserDrive, minus: LaserDrive) -> Self {
        AtomDrives {
            plus: Some(plus),
            minus: Some(minus),
        }
    }

    /// One spin state, dressed.
    pub fn auxiliary(drive: LaserDrive) -> Self {
        AtomDrives {
            plus: Some(drive),
            minus: None,
        }
    }

    pub fn get(&self, s: Spin) -> Option<LaserDrive> {
        match s {
            Spin::Plus => self.plus,
            Spin::Minus => self.minus,
        }
    }

    fn driven(&self) -> Vec<(Spin, LaserDrive)> {
        Spin::BOTH.iter().filter_map(|&s| self.get(s).map(|d| (s, d))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDrives {
    pub atom1: AtomDrives,
    pub atom2: AtomDrives,
}

impl PairDrives {
    /// The same drive on every spin state of both atoms.
    pub fn identical(d: LaserDrive) -> Self {
        PairDrives {
            atom1: AtomDrives::data(d, d),
            atom2: AtomDrives::data(d, d),
        }
    }

    fn pairs(&self) -> Vec<(SpinPair, LaserDrive, LaserDrive)> {
        let mut out = Vec::new();
        for (s1, d1) in self.atom1.driven() {
            for (s2, d2) in self.atom2.driven() {
                out.push((SpinPair(s1, s2), d1, d2));
            }
        }
        out
    }
}

/// `V(r) = A/(r⁶ + R_c⁶)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftCore {
    /// rad/μs · μm⁶.
    pub amplitude: f64,
    /// μm⁶.
    pub rc6: f64,
}

impl SoftCore {
    pub fn value(&self, r: f64) -> f64 {
        self.amplitude / (r.powi(6) + self.rc6)
    }

    /// Blockade radius in μm.
    pub fn rc(&self) -> f64 {
        self.rc6.max(0.0).powf(1.0 / 6.0)
    }

    /// Dressed interaction for drives `d1`, `d2` and vdW coefficient `c6`.
    pub fn from_drives(c6: f64, d1: LaserDrive, d2: LaserDrive) -> Self {
        let x = d1.rabi * d2.rabi / (4.0 * d1.detuning * d2.detuning);
        SoftCore {
            amplitude: x * x * c6,
            rc6: -c6 / (d1.detuning + d2.detuning),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential {
    pub pairs: BTreeMap<SpinPair, SoftCore>,
    pub c6_total: f64,
    /// All spin pairs share the same soft core.
    pub state_insensitive: bool,
    pub warnings: Vec<String>,
}

impl EffectivePotential {
    pub fn value(&self, pair: SpinPair, r: f64) -> Option<f64> {
        self.pairs.get(&pair).map(|p| p.value(r))
    }

    /// The common soft core of a state-insensitive potential.
    pub fn scalar(&self) -> Result<SoftCore> {
        if !self.state_insensitive {
            return Err(Error::InvalidArgument("dressed potential depends on the spin pair".into()));
        }
        self.pairs
            .values()
            .next()
            .copied()
            .ok_or_else(|| Error::InvalidArgument("no dressed spin pairs".into()))
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Dressed potentials for a scalar C6 (rad/μs · μm⁶).
pub fn dressed_from_c6(c6: f64, drives: &PairDrives) -> Result<EffectivePotential> {
    let mut warnings = Vec::new();
    let mut pairs = BTreeMap::new();
    for (sp, d1, d2) in drives.pairs() {
        for (atom, d) in [(1, d1), (2, d2)] {
            if d.epsilon().abs() > EPSILON_WARN {
                let msg = format!("atom {atom} spin pair {sp}: |Ω/2Δ| = {:.3} is outside the perturbative regime", d.epsilon().abs());
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
        let core = SoftCore::from_drives(c6, d1, d2);
        if !(core.rc6 >= 0.0) {
            return Err(Error::ResonantDressing {
                pair: sp.to_string(),
                rc6: core.rc6,
            });
        }
        pairs.insert(sp, core);
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("each atom needs at least one drive".into()));
    }
    let first = *pairs.values().next().expect("non-empty");
    let state_insensitive = pairs.values().all(|p| rel_eq(p.amplitude, first.amplitude) && rel_eq(p.rc6, first.rc6));
    Ok(EffectivePotential {
        pairs,
        c6_total: c6,
        state_insensitive,
        warnings,
    })
}

/// Fourth-order dressed potentials for every driven spin pair.
pub fn dressed_potential(pp: &PairPotential, drives: &PairDrives) -> Result<EffectivePotential> {
    dressed_potential_with(pp, drives, DEFAULT_DEVIATION_THRESHOLD)
}

pub fn dressed_potential_with(pp: &PairPotential, drives: &PairDrives, max_deviation: f64) -> Result<EffectivePotential> {
    if pp.deviation > max_deviation {
        return Err(Error::NotStateInsensitive {
            deviation: pp.deviation,
            threshold: max_deviation,
        });
    }
    dressed_from_c6(pp.c6_total, drives)
}

/// Exact dressed ground-state shifts at distance `r` (μm), per spin pair.
///
/// Builds the two-atom Hamiltonian with the full 4×4 interaction on the
/// doubly excited block, selects the eigenstates adiabatically connected to
/// the ground manifold, and reads the spin-pair shifts off the diagonal of
/// the orthonormalized (des Cloizeaux) effective Hamiltonian. The
/// interaction-free result is subtracted, which removes the single-atom
/// light shifts.
pub fn exact_dressed_shift(pp: &PairPotential, drives: &PairDrives, r: f64) -> Result<BTreeMap<SpinPair, f64>> {
    exact_shift_matrix(&pp.h_matrix, drives, r)
}

/// As [`exact_dressed_shift`] for an explicit interaction matrix at unit
/// distance.
pub fn exact_shift_matrix(h: &Matrix4c, drives: &PairDrives, r: f64) -> Result<BTreeMap<SpinPair, f64>> {
    let with = ground_effective(h, drives, r.powi(-6), r)?;
    let without = ground_effective(h, drives, 0.0, r)?;
    Ok(with.into_iter().zip(without).map(|((sp, a), (_, b))| (sp, a - b)).collect())
}

#[derive(Clone, Copy)]
enum Local {
    Ground(Spin),
    Rydberg(Spin),
}

fn ground_effective(h: &Matrix4c, drives: &PairDrives, scale: f64, r: f64) -> Result<Vec<(SpinPair, f64)>> {
    let locals = |a: &AtomDrives| -> Vec<(Local, LaserDrive)> {
        a.driven().into_iter().flat_map(|(s, d)| [(Local::Ground(s), d), (Local::Rydberg(s), d)]).collect()
    };
    let l1 = locals(&drives.atom1);
    let l2 = locals(&drives.atom2);
    if l1.is_empty() || l2.is_empty() {
        return Err(Error::InvalidArgument("each atom needs at least one drive".into()));
    }
    let dim = l1.len() * l2.len();
    let idx = |i: usize, j: usize| i * l2.len() + j;
    let mut ham = DMatrix::<Complex64>::zeros(dim, dim);
    let c = |x: f64| Complex64::new(x, 0.0);
    // single-atom terms
    for (a, locs, other) in [(0, &l1, l2.len()), (1, &l2, l1.len())] {
        for (i, (li, d)) in locs.iter().enumerate() {
            for k in 0..other {
                let p = if a == 0 { idx(i, k) } else { idx(k, i) };
                if let Local::Rydberg(_) = li {
                    ham[(p, p)] += c(-d.detuning);
                    // partner ground state is the entry just before
                    let q = if a == 0 { idx(i - 1, k) } else { idx(k, i - 1) };
                    ham[(p, q)] += c(d.rabi / 2.0);
                    ham[(q, p)] += c(d.rabi / 2.0);
                }
            }
        }
    }
    // interaction on |r r⟩
    if scale != 0.0 {
        for (i, (a, _)) in l1.iter().enumerate() {
            for (j, (b, _)) in l2.iter().enumerate() {
                let (Local::Rydberg(s1), Local::Rydberg(s2)) = (a, b) else { continue };
                for (k, (a2, _)) in l1.iter().enumerate() {
                    for (m, (b2, _)) in l2.iter().enumerate() {
                        let (Local::Rydberg(t1), Local::Rydberg(t2)) = (a2, b2) else { continue };
                        let row = 2 * s1.index() + s2.index();
                        let col = 2 * t1.index() + t2.index();
                        ham[(idx(i, j), idx(k, m))] += h[(row, col)] * scale;
                    }
                }
            }
        }
    }
    let mut ground = Vec::new();
    for (i, (a, _)) in l1.iter().enumerate() {
        for (j, (b, _)) in l2.iter().enumerate() {
            if let (Local::Ground(s1), Local::Ground(s2)) = (a, b) {
                ground.push((SpinPair(*s1, *s2), idx(i, j)));
            }
        }
    }
    let eig = SymmetricEigen::new(ham);
    let ng = ground.len();
    // ground-space weight of every eigenvector
    let mut weights: Vec<(usize, f64)> = (0..dim)
        .map(|k| (k, ground.iter().map(|&(_, g)| eig.eigenvectors[(g, k)].norm_sqr()).sum()))
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1));
    let chosen = &weights[..ng];
    if let Some(&(_, w)) = chosen.iter().find(|&&(_, w)| w < 0.5) {
        return Err(Error::LevelCrossing { r, overlap: w });
    }
    let p = DMatrix::<Complex64>::from_fn(ng, ng, |gi, k| eig.eigenvectors[(ground[gi].1, chosen[k].0)]);
    let svd = p.svd(true, true);
    let s = svd.u.expect("u") * svd.v_t.expect("v_t");
    let e = DMatrix::<Complex64>::from_diagonal(&nalgebra::DVector::from_iterator(ng, chosen.iter().map(|&(k, _)| c(eig.eigenvalues[k]))));
    let heff = &s * e * s.adjoint();
    Ok(ground.iter().enumerate().map(|(gi, &(sp, _))| (sp, heff[(gi, gi)].re)).collect())
}

/// `ε²Γ` for a drive and bare Rydberg decay rate `gamma`.
pub fn effective_decay(drive: &LaserDrive, gamma: f64) -> f64 {
    drive.epsilon().powi(2) * gamma
}

/// `max |V_a(r) − V_b(r)| / mean |V(r)|` over the dressed spin pairs.
pub fn state_insensitivity_error(ep: &EffectivePotential, r: f64) -> f64 {
    let v: Vec<f64> = ep.pairs.values().map(|p| p.value(r)).collect();
    let mean = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / mean
}
