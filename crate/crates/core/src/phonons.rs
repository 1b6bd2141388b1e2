//! Phonon couplings between trapped atoms and chain dynamics.
//!
//! Each atom contributes one motional mode per axis. Data atom `i` and
//! auxiliary atom `j` interact through the dressed soft-core potential;
//! expanding it to second order in the displacements gives a quadratic
//! Hamiltonian in the mode quadratures `q = (a + a†)/√2`, `p = i(a† − a)/√2`.
//! Dynamics are propagated exactly (the Hamiltonian is time independent)
//! through the eigen-decomposition of the stiffness matrix.
//!
//! Frequencies are angular (rad/μs), times in μs, lengths in μm.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dressing::SoftCore;
use crate::par::{self, Execution};
use crate::units::hbar_over_mass;
use crate::{Error, Result};

/// Largest tolerated relative drift of the symplectic form.
pub const SYMPLECTIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    /// Along the data–auxiliary separation.
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(format!("unknown axis '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub mass_amu: f64,
    /// (ω_x, ω_y, ω_z), rad/μs.
    pub omega: [f64; 3],
}

impl TrapConfig {
    pub fn new(mass_amu: f64, omega: [f64; 3]) -> Result<Self> {
        if !(mass_amu > 0.0) || omega.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "trap needs positive mass and frequencies, got M = {mass_amu}, ω = {omega:?}"
            )));
        }
        Ok(TrapConfig { mass_amu, omega })
    }

    pub fn omega(&self, axis: Axis) -> f64 {
        self.omega[axis.index()]
    }

    /// ħ/M in μm²/μs.
    pub fn hbar_over_mass(&self) -> f64 {
        hbar_over_mass(self.mass_amu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    /// Ring of `N` pairs; separations wrap to `min(d, N − d)`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainGeometry {
    pub n_pairs: usize,
    /// Data-chain lattice constant, μm.
    pub x0: f64,
    /// Data–auxiliary separation, μm.
    pub y0: f64,
    pub boundary: Boundary,
}

impl ChainGeometry {
    pub fn new(n_pairs: usize, x0: f64, y0: f64) -> Result<Self> {
        if n_pairs == 0 || !(x0 > 0.0) || !(y0 > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid chain: N = {n_pairs}, x0 = {x0}, y0 = {y0}")));
        }
        Ok(ChainGeometry {
            n_pairs,
            x0,
            y0,
            boundary: Boundary::Open,
        })
    }

    pub fn periodic(mut self) -> Self {
        self.boundary = Boundary::Periodic;
        self
    }

    /// `η = x0/y0`.
    pub fn eta(&self) -> f64 {
        self.x0 / self.y0
    }

    fn separation(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.n_pairs - d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    /// Nearest data–auxiliary coupling G.
    pub g: f64,
    /// Intra-species couplings, zero diagonal.
    pub g_matrix: DMatrix<f64>,
    /// Inter-species couplings, `F_ii = G`.
    pub f_matrix: DMatrix<f64>,
    pub omega_z: f64,
    pub include_counter_rotating: bool,
    geometry: ChainGeometry,
}

impl CouplingModel {
    pub fn n_pairs(&self) -> usize {
        self.g_matrix.nrows()
    }

    pub fn geometry(&self) -> &ChainGeometry {
        &self.geometry
    }

    pub fn with_counter_rotating(mut self, on: bool) -> Self {
        self.include_counter_rotating = on;
        self
    }

    pub fn with_omega(mut self, omega_z: f64) -> Self {
        self.omega_z = omega_z;
        self
    }

    /// Keep inter-species couplings with separation ≤ 1 only and drop the
    /// intra-species ones, as in the derivation of the Bessel solution.
    pub fn truncated_nearest(&self) -> Self {
        let n = self.n_pairs();
        let mut out = self.clone();
        out.g_matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if self.geometry.separation(i, j) > 1 {
                    out.f_matrix[(i, j)] = 0.0;
                }
            }
        }
        out
    }

    /// Potential-energy matrix `W` with `V = qᵀWq`, data modes first.
    fn w_matrix(&self) -> DMatrix<f64> {
        let n = self.n_pairs();
        let mut w = DMatrix::zeros(2 * n, 2 * n);
        for s in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let c = 0.5 * self.g_matrix[(i, j)];
                        w[(s + i, s + i)] += c;
                        w[(s + j, s + j)] += c;
                        w[(s + i, s + j)] -= c;
                        w[(s + j, s + i)] -= c;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let c = self.f_matrix[(i, j)];
                w[(i, i)] += c;
                w[(n + j, n + j)] += c;
                w[(i, n + j)] -= c;
                w[(n + j, i)] -= c;
            }
        }
        w
    }
}

/// Coupling matrices for a chain, with `G_ij = G/(η|i−j|)⁸` and
/// `F_ij = G/(η²|i−j|² + 1)⁴`.
///
/// Intra-species neighbours use the bare power law; any blockade softening
/// at distance `x0` is neglected.
pub fn build_chain_couplings(geom: &ChainGeometry, g: f64, omega_z: f64) -> CouplingModel {
    let n = geom.n_pairs;
    let eta = geom.eta();
    let sep = |i, j| geom.separation(i, j) as f64;
    let g_matrix = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { g / (eta * sep(i, j)).powi(8) });
    let f_matrix = DMatrix::from_fn(n, n, |i, j| g / ((eta * sep(i, j)).powi(2) + 1.0).powi(4));
    CouplingModel {
        g,
        g_matrix,
        f_matrix,
        omega_z,
        include_counter_rotating: true,
        geometry: *geom,
    }
}

/// Phonon coupling along `axis` between two atoms at distance `r0` in the
/// soft-core potential.
///
/// Transverse axes give `3A(ħ/M)/(ω r0⁸ (1+x)²)` with `x = (R_c/r0)⁶`; the
/// longitudinal axis `Y` gives `−3A(ħ/M)(7 − 5x)/(ω r0⁸ (1+x)³)`.
pub fn phonon_coupling_g(core: &SoftCore, r0: f64, trap: &TrapConfig, axis: Axis) -> f64 {
    let x = core.rc6 / r0.powi(6);
    let base = 3.0 * core.amplitude * trap.hbar_over_mass() / (trap.omega(axis) * r0.powi(8));
    match axis {
        Axis::X | Axis::Z => base / (1.0 + x).powi(2),
        Axis::Y => -base * (7.0 - 5.0 * x) / (1.0 + x).powi(3),
    }
}

/// `(1/r0)·√(ħ/Mω)`; the quartic correction scales as its square.
pub fn expansion_validity(r0: f64, trap: &TrapConfig, axis: Axis) -> f64 {
    (trap.hbar_over_mass() / trap.omega(axis)).sqrt() / r0
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OccupancyTrace {
    pub times: Vec<f64>,
    pub nbar_data: Vec<f64>,
    pub nbar_aux: Vec<f64>,
}

impl OccupancyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation of the data occupancy.
    pub fn data_at(&self, t: f64) -> Result<f64> {
        interpolate(&self.times, &self.nbar_data, t)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (first, last) = match (xs.first(), xs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidArgument("empty trace".into())),
    };
    let tol = 1e-12 * last.abs().max(1.0);
    if x < first - tol || x > last + tol {
        return Err(Error::InvalidArgument(format!("t = {x} outside trace [{first}, {last}]")));
    }
    let k = xs.partition_point(|&t| t < x);
    if k == 0 {
        return Ok(ys[0]);
    }
    if k >= xs.len() {
        return Ok(ys[xs.len() - 1]);
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = if x1 == x0 { 0.0 } else { (x - x0) / (x1 - x0) };
    Ok(ys[k - 1] * (1.0 - w) + ys[k] * w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRun {
    pub trace: OccupancyTrace,
    /// Every normal mode has positive stiffness.
    pub stable: bool,
    /// Smallest stiffness eigenvalue over `ω_z` (full model only).
    pub min_stiffness: f64,
    /// Largest relative deviation of the propagator from the symplectic
    /// (or unitary, under the RWA) form.
    pub symplectic_drift: f64,
    /// Per-mode occupancies at the last time, data modes first.
    pub final_modes: Vec<f64>,
}

/// Evolve species-uniform thermal occupancies.
pub fn simulate_quadratic(model: &CouplingModel, nbar_data: f64, nbar_aux: f64, times: &[f64]) -> Result<QuadraticRun> {
    let n = model.n_pairs();
    simulate_quadratic_per_atom(model, &vec![nbar_data; n], &vec![nbar_aux; n], times)
}

pub fn simulate_quadratic_per_atom(model: &CouplingModel, data: &[f64], aux: &[f64], times: &[f64]) -> Result<QuadraticRun> {
    let n = model.n_pairs();
    if data.len() != n || aux.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} occupancies per species")));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("time grid must be finite and non-decreasing".into()));
    }
    let finite = model.g_matrix.iter().chain(model.f_matrix.iter()).all(|x| x.is_finite());
    if !finite || !model.omega_z.is_finite() {
        return Err(Error::InvalidArgument("coupling model has non-finite entries".into()));
    }
    let n0: Vec<f64> = data.iter().chain(aux).copied().collect();
    if model.include_counter_rotating {
        full_dynamics(model, &n0, times)
    } else {
        rwa_dynamics(model, &n0, times)
    }
}

/// Run several models on the same initial state, in parallel when enabled.
pub fn simulate_sweep(models: &[CouplingModel], nbar_data: f64, nbar_aux: f64, times: &[f64], exec: Execution) -> Vec<Result<QuadraticRun>> {
    par::map(exec, models, |m| simulate_quadratic(m, nbar_data, nbar_aux, times))
}

fn species_means(n: usize, modes: &[f64]) -> (f64, f64) {
    let d = modes[..n].iter().sum::<f64>() / n as f64;
    let a = modes[n..].iter().sum::<f64>() / n as f64;
    (d, a)
}

fn check_drift(drift: f64) -> Result<()> {
    if drift > SYMPLECTIC_TOL || drift.is_nan() {
        return Err(Error::SymplecticDrift(drift));
    }
    Ok(())
}

// In the rotating frame the excitation-conserving part is h = −W.
fn rwa_dynamics(model: &CouplingModel, n0: &[f64], times: &[f64]) -> Result<QuadraticRun> {
    let n = model.n_pairs();
    let m = 2 * n;
    let eig = SymmetricEigen::new(-model.w_matrix());
    let v = &eig.eigenvectors;
    let mut trace = OccupancyTrace::default();
    let mut drift: f64 = 0.0;
    let mut modes = n0.to_vec();
    for &t in times {
        let (c, s): (Vec<f64>, Vec<f64>) = eig.eigenvalues.iter().map(|&l| ((l * t).cos(), -(l * t).sin())).unzip();
        // U = V diag(e^{−iλt}) Vᵀ, split into real and imaginary parts
        let vc = DMatrix::from_fn(m, m, |i, k| v[(i, k)] * c[k]);
        let vs = DMatrix::from_fn(m, m, |i, k| v[(i, k)] * s[k]);
        let ur = &vc * v.transpose();
        let ui = &vs * v.transpose();
        let unitarity = ur.transpose() * &ur + ui.transpose() * &ui - DMatrix::identity(m, m);
        drift = drift.max(unitarity.amax());
        for (i, mode) in modes.iter_mut().enumerate() {
            *mode = (0..m).map(|j| (ur[(i, j)].powi(2) + ui[(i, j)].powi(2)) * n0[j]).sum();
        }
        let (d, a) = species_means(n, &modes);
        trace.times.push(t);
        trace.nbar_data.push(d);
        trace.nbar_aux.push(a);
    }
    check_drift(drift)?;
    Ok(QuadraticRun {
        trace,
        stable: true,
        min_stiffness: f64::NAN,
        symplectic_drift: drift,
        final_modes: modes,
    })
}

// H = ½ω pᵀp + ½ qᵀKq with K = ω − 2W, so q̇ = ωp and ṗ = −Kq.
fn full_dynamics(model: &CouplingModel, n0: &[f64], times: &[f64]) -> Result<QuadraticRun> {
    let n = model.n_pairs();
    let m = 2 * n;
    let w = model.omega_z;
    if !(w > 0.0) {
        return Err(Error::InvalidArgument("trap frequency must be positive".into()));
    }
    let k = DMatrix::identity(m, m) * w - model.w_matrix() * 2.0;
    let eig = SymmetricEigen::new(k);
    let v = &eig.eigenvectors;
    let vt = v.transpose();
    let min_stiffness = eig.eigenvalues.min() / w;
    let stable = eig.eigenvalues.iter().all(|&l| l > 0.0);
    if !stable {
        log::warn!("stiffness matrix has a negative eigenvalue ({min_stiffness:.3} ω); motion is unbounded");
    }
    let d0 = DVector::from_iterator(m, n0.iter().map(|x| x + 0.5));
    let mut trace = OccupancyTrace::default();
    let mut drift: f64 = 0.0;
    let mut modes = n0.to_vec();
    for &t in times {
        // per normal mode: [q p](t) = [[cq sq] [sp cp]] [q p](0)
        let mut cq = vec![0.0; m];
        let mut sq = vec![0.0; m];
        let mut sp = vec![0.0; m];
        for (idx, &l) in eig.eigenvalues.iter().enumerate() {
            let (c, s_q, s_p) = if l > 0.0 {
                let om = (w * l).sqrt();
                ((om * t).cos(), w / om * (om * t).sin(), -om / w * (om * t).sin())
            } else if l < 0.0 {
                let ka = (-w * l).sqrt();
                ((ka * t).cosh(), w / ka * (ka * t).sinh(), ka / w * (ka * t).sinh())
            } else {
                (1.0, w * t, 0.0)
            };
            cq[idx] = c;
            sq[idx] = s_q;
            sp[idx] = s_p;
        }
        let block = |f: &[f64]| DMatrix::from_fn(m, m, |i, kk| v[(i, kk)] * f[kk]) * &vt;
        let a = block(&cq);
        let b = block(&sq);
        let c = block(&sp);
        // cp equals cq for this Hamiltonian
        let d = a.clone();
        // Sᵀ J S = J  ⇔  AᵀC, BᵀD symmetric and AᵀD − CᵀB = 1
        let scale = a.amax().max(b.amax()).max(c.amax()).powi(2).max(1.0);
        let e1 = a.transpose() * &c - c.transpose() * &a;
        let e2 = b.transpose() * &d - d.transpose() * &b;
        let e3 = a.transpose() * &d - c.transpose() * &b - DMatrix::identity(m, m);
        drift = drift.max(e1.amax().max(e2.amax()).max(e3.amax()) / scale);
        for (i, mode) in modes.iter_mut().enumerate() {
            let mut qq = 0.0;
            let mut pp = 0.0;
            for j in 0..m {
                qq += (a[(i, j)].powi(2) + b[(i, j)].powi(2)) * d0[j];
                pp += (c[(i, j)].powi(2) + d[(i, j)].powi(2)) * d0[j];
            }
            *mode = 0.5 * (qq + pp) - 0.5;
        }
        let (dm, am) = species_means(n, &modes);
        trace.times.push(t);
        trace.nbar_data.push(dm);
        trace.nbar_aux.push(am);
    }
    check_drift(drift)?;
    Ok(QuadraticRun {
        trace,
        stable,
        min_stiffness,
        symplectic_drift: drift,
        final_modes: modes,
    })
}

/// Mean occupancies of a translation-invariant chain with nearest-neighbour
/// inter-species coupling: `n̄_d = Σ/2 − (n̄_a0 − n̄_d0)/2·J0(4Gt/(1+η²)⁴)·cos 2Gt`.
pub fn analytic_nbar(t: f64, g: f64, eta: f64, n_d0: f64, n_a0: f64) -> (f64, f64) {
    let mean = 0.5 * (n_d0 + n_a0);
    let half = 0.5 * (n_a0 - n_d0);
    let osc = if eta.is_infinite() { 1.0 } else { bessel_j0(4.0 * g * t / (1.0 + eta * eta).powi(4)) } * (2.0 * g * t).cos();
    (mean - half * osc, mean + half * osc)
}

pub fn analytic_trace(times: &[f64], g: f64, eta: f64, n_d0: f64, n_a0: f64) -> OccupancyTrace {
    let (d, a) = times.iter().map(|&t| analytic_nbar(t, g, eta, n_d0, n_a0)).unzip();
    OccupancyTrace {
        times: times.to_vec(),
        nbar_data: d,
        nbar_aux: a,
    }
}

/// Beam-splitter action on the mode operators `(a, d)` of a single pair:
/// `a(t) = cos(gt)a − i sin(gt)d`.
pub fn two_atom_modes(t: f64, g: f64, a: num_complex::Complex64, d: num_complex::Complex64) -> (num_complex::Complex64, num_complex::Complex64) {
    let (s, c) = (g * t).sin_cos();
    let mi = num_complex::Complex64::new(0.0, -s);
    (a * c + d * mi, d * c + a * mi)
}

/// Occupancies `(n_d, n_a)` of a single pair under the beam splitter.
pub fn two_atom_rwa(t: f64, g: f64, n_d: f64, n_a: f64) -> (f64, f64) {
    let c2 = (g * t).cos().powi(2);
    let s2 = 1.0 - c2;
    (c2 * n_d + s2 * n_a, c2 * n_a + s2 * n_d)
}

/// `1 − n̄_d(t_s)/n̄_d(0)`.
pub fn swap_efficiency(trace: &OccupancyTrace, t_s: f64) -> Result<f64> {
    let n0 = *trace.nbar_data.first().ok_or_else(|| Error::InvalidArgument("empty trace".into()))?;
    if n0 == 0.0 {
        return Err(Error::ZeroOccupancy);
    }
    Ok(1.0 - trace.data_at(t_s)? / n0)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(z: f64) -> f64 {
    libm::j0(z)
}

/// Evenly spaced samples on `[0, t_end]`.
pub fn linspace(t_end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect(),
    }
}
