//! Species data, Rydberg-Ritz energies and Coulomb-approximation radial
//! wavefunctions.
//!
//! Radial functions are integrated with Numerov on the square-root grid
//! `ρ = √r`, where the substitution `R(r) = X(ρ) ρ^(-3/2)` turns the radial
//! equation into `X'' = g(ρ) X` with
//! `g = (2L + 1/2)(2L + 3/2)/ρ² + 8ρ²(V(ρ²) - E)`. All states share the
//! grid points `ρ_k = k·h`, so matrix elements are plain sums over a common
//! index range.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::angular::HalfInt;
use crate::keyfile::{self, Row};
use crate::units::{HARTREE_RAD_PER_US, ghz};
use crate::{Error, Result};

const BUNDLED_RB87: &str = include_str!("../data/rb87.species");

/// An `(L, J)` fine-structure series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Series {
    pub l: HalfInt,
    pub j: HalfInt,
}

impl Series {
    pub const S12: Series = Series::new(0, 1);
    pub const P12: Series = Series::new(1, 1);
    pub const P32: Series = Series::new(1, 3);
    pub const D32: Series = Series::new(2, 3);
    pub const D52: Series = Series::new(2, 5);

    /// The series with orbital `l` and total angular momentum `twice_j / 2`.
    pub const fn new(l: i32, twice_j: i32) -> Self {
        Series {
            l: HalfInt::int(l),
            j: HalfInt::from_twice(twice_j),
        }
    }

    pub fn is_valid(self) -> bool {
        self.l.is_integer()
            && self.l.twice() >= 0
            && !self.j.is_integer()
            && (self.j - self.l).abs() == HalfInt::HALF
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const LETTERS: &[u8] = b"SPDFGHIK";
        let l = self.l.twice() / 2;
        let letter = LETTERS.get(l as usize).map(|&c| c as char);
        match letter {
            Some(c) => write!(f, "{c}{}", self.j),
            None => write!(f, "L{l}J{}", self.j),
        }
    }
}

/// A fine-structure level `n L_J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RydbergLevel {
    pub n: u32,
    pub l: HalfInt,
    pub j: HalfInt,
}

impl RydbergLevel {
    pub fn new(n: u32, series: Series) -> Result<Self> {
        if !series.is_valid() {
            return Err(Error::InvalidArgument(format!(
                "(L, J) = ({}, {}) is not a one-electron fine-structure series",
                series.l, series.j
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("principal quantum number must be positive".into()));
        }
        Ok(RydbergLevel {
            n,
            l: series.l,
            j: series.j,
        })
    }

    pub fn series(self) -> Series {
        Series { l: self.l, j: self.j }
    }

    /// The orbital quantum number as an integer.
    pub fn l_int(self) -> i32 {
        self.l.twice() / 2
    }
}

impl fmt::Display for RydbergLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.n, self.series())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZeemanState {
    pub level: RydbergLevel,
    pub mj: HalfInt,
}

impl ZeemanState {
    pub fn new(level: RydbergLevel, mj: HalfInt) -> Result<Self> {
        if mj.abs() > level.j || (level.j - mj).twice() % 2 != 0 {
            return Err(Error::InvalidArgument(format!("m_J = {mj} is not a projection of J = {}", level.j)));
        }
        Ok(ZeemanState { level, mj })
    }
}

/// Rydberg-Ritz coefficients `δ(n) = δ0 + δ2/(n-δ0)² + δ4/(n-δ0)⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectSeries {
    pub d0: f64,
    pub d2: f64,
    pub d4: f64,
}

impl DefectSeries {
    pub fn defect(&self, n: u32) -> f64 {
        let m = f64::from(n) - self.d0;
        self.d0 + self.d2 / (m * m) + self.d4 / (m * m * m * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeRef {
    pub n_ref: u32,
    pub tau_us: f64,
}

/// Radial grid: step `h` in `ρ = √r` and outer radius in a.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    /// Outer radius in Bohr radii. `None` uses `2n(n + 15)`.
    pub outer: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { step: 0.01, outer: None }
    }
}

impl GridSpec {
    fn outer_radius(&self, n: u32) -> f64 {
        self.outer.unwrap_or_else(|| {
            let n = f64::from(n);
            2.0 * n * (n + 15.0)
        })
    }

    fn key(&self) -> (u64, u64) {
        (self.step.to_bits(), self.outer.map_or(0, f64::to_bits))
    }
}

/// `X(ρ_k)` on `ρ_k = k·step`; zero inside the inner stop point.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub step: f64,
    pub x: Vec<f64>,
    /// First index where the solution was retained.
    pub first: usize,
}

impl RadialFunction {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Radius of grid point `k` in a.u.
    pub fn r(&self, k: usize) -> f64 {
        let rho = k as f64 * self.step;
        rho * rho
    }

    /// `R(r_k)`.
    pub fn radial(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let rho = k as f64 * self.step;
        self.x[k] / (rho * rho.sqrt())
    }

    /// Number of sign changes of the retained solution.
    pub fn nodes(&self) -> usize {
        let vals: Vec<f64> = self.x[self.first..].iter().copied().filter(|v| v.abs() > 1e-300).collect();
        vals.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }
}

type CacheKey = (RydbergLevel, (u64, u64));

pub struct SpeciesData {
    name: String,
    mass_amu: f64,
    rydberg_const: f64,
    defect_series: BTreeMap<Series, DefectSeries>,
    lifetime_refs: BTreeMap<Series, LifetimeRef>,
    core_radius_cut: f64,
    cache: RwLock<HashMap<CacheKey, Arc<RadialFunction>>>,
}

impl Clone for SpeciesData {
    fn clone(&self) -> Self {
        SpeciesData {
            name: self.name.clone(),
            mass_amu: self.mass_amu,
            rydberg_const: self.rydberg_const,
            defect_series: self.defect_series.clone(),
            lifetime_refs: self.lifetime_refs.clone(),
            core_radius_cut: self.core_radius_cut,
            cache: RwLock::default(),
        }
    }
}

impl fmt::Debug for SpeciesData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeciesData")
            .field("name", &self.name)
            .field("mass_amu", &self.mass_amu)
            .field("rydberg_const", &self.rydberg_const)
            .field("defect_series", &self.defect_series)
            .field("lifetime_refs", &self.lifetime_refs)
            .field("core_radius_cut", &self.core_radius_cut)
            .finish_non_exhaustive()
    }
}

/// Series every species file must provide.
pub const REQUIRED_SERIES: [Series; 5] = [Series::S12, Series::P12, Series::P32, Series::D32, Series::D52];

impl SpeciesData {
    /// Builds a species, checking the invariants a file load would check.
    /// `rydberg_const` is an angular frequency in rad/μs.
    pub fn new(
        name: impl Into<String>,
        mass_amu: f64,
        rydberg_const: f64,
        defect_series: BTreeMap<Series, DefectSeries>,
        lifetime_refs: BTreeMap<Series, LifetimeRef>,
        core_radius_cut: f64,
    ) -> Result<Self> {
        if !(mass_amu > 0.0) || !(rydberg_const > 0.0) || !(core_radius_cut >= 0.0) {
            return Err(Error::InvalidArgument(
                "mass, Rydberg constant and core radius must be positive".into(),
            ));
        }
        for s in REQUIRED_SERIES {
            if !defect_series.contains_key(&s) {
                return Err(Error::MissingSeries(s.to_string()));
            }
        }
        for (s, d) in &defect_series {
            if !s.is_valid() {
                return Err(Error::InvalidArgument(format!("invalid series (L={}, J={})", s.l, s.j)));
            }
            if !(d.d0 >= 0.0) {
                return Err(Error::InvalidArgument(format!("{s}: quantum defect {} is negative", d.d0)));
            }
        }
        Ok(SpeciesData {
            name: name.into(),
            mass_amu,
            rydberg_const,
            defect_series,
            lifetime_refs,
            core_radius_cut,
            cache: RwLock::default(),
        })
    }

    /// Bundled ⁸⁷Rb data.
    pub fn rb87() -> Self {
        parse_species(BUNDLED_RB87).expect("bundled species file is valid")
    }

    /// Infinite-mass hydrogen: zero defects for L ≤ 3, Ry = 1/2 Hartree.
    pub fn hydrogenic() -> Self {
        let zero = DefectSeries { d0: 0.0, d2: 0.0, d4: 0.0 };
        let mut defects = BTreeMap::new();
        for l in 0..=3 {
            for tj in [2 * l - 1, 2 * l + 1] {
                if tj > 0 {
                    defects.insert(Series::new(l, tj), zero);
                }
            }
        }
        SpeciesData::new("hydrogen", 1.007_825, 0.5 * HARTREE_RAD_PER_US, defects, BTreeMap::new(), 0.0)
            .expect("hydrogenic data is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass_amu
    }

    /// Rydberg constant as an angular frequency (rad/μs).
    pub fn rydberg_const(&self) -> f64 {
        self.rydberg_const
    }

    pub fn core_radius_cut(&self) -> f64 {
        self.core_radius_cut
    }

    pub fn defect_series(&self) -> &BTreeMap<Series, DefectSeries> {
        &self.defect_series
    }

    pub fn lifetime_refs(&self) -> &BTreeMap<Series, LifetimeRef> {
        &self.lifetime_refs
    }

    fn defects(&self, s: Series) -> Result<&DefectSeries> {
        self.defect_series.get(&s).ok_or_else(|| Error::MissingSeries(s.to_string()))
    }

    /// Effective principal quantum number `n - δ(n, L, J)`.
    pub fn nstar(&self, level: RydbergLevel) -> Result<f64> {
        let d = self.defects(level.series())?;
        let n = f64::from(level.n);
        let ns = n - d.defect(level.n);
        if !(n - d.d0 > 0.0) || !(ns > 0.0) || !ns.is_finite() {
            return Err(Error::UnphysicalLevel {
                level: level.to_string(),
                nstar: ns,
            });
        }
        Ok(ns)
    }
}

pub fn parse_species(text: &str) -> Result<SpeciesData> {
    let doc = keyfile::parse(text)?;
    if doc.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "species file is empty".into(),
        });
    }
    let constants = doc.section("constants").ok_or(Error::Parse {
        line: 1,
        msg: "missing [constants] section".into(),
    })?;
    let required = |key: &str| -> Result<&Row> {
        constants.get(key).ok_or(Error::Parse {
            line: constants.line,
            msg: format!("[constants] is missing `{key}`"),
        })
    };
    let mass: f64 = required("mass_amu")?.parse(1)?;
    let ry_ghz: f64 = required("rydberg_const_GHz")?.parse(1)?;
    let core = match constants.get("core_radius_a0") {
        Some(r) => r.parse(1)?,
        None => 0.0,
    };
    let name = constants.get("name").map_or_else(|| "species".to_string(), |r| r.tokens.get(1).cloned().unwrap_or_default());

    let series_of = |row: &Row| -> Result<Series> {
        let l: u32 = row.parse(0)?;
        let j: HalfInt = row.tokens[1].parse().map_err(|e: String| row.error(e))?;
        let s = Series {
            l: HalfInt::int(l as i32),
            j,
        };
        if !s.is_valid() {
            return Err(row.error(format!("J = {j} is incompatible with L = {l}")));
        }
        Ok(s)
    };

    let mut defects = BTreeMap::new();
    if let Some(sec) = doc.section("defects") {
        for row in &sec.rows {
            row.expect_len(5)?;
            let s = series_of(row)?;
            let d = DefectSeries {
                d0: row.parse(2)?,
                d2: row.parse(3)?,
                d4: row.parse(4)?,
            };
            if defects.insert(s, d).is_some() {
                return Err(row.error(format!("duplicate defect series {s}")));
            }
        }
    }
    let mut lifetimes = BTreeMap::new();
    if let Some(sec) = doc.section("lifetimes") {
        for row in &sec.rows {
            row.expect_len(4)?;
            let s = series_of(row)?;
            let lt = LifetimeRef {
                n_ref: row.parse(2)?,
                tau_us: row.parse(3)?,
            };
            if !(lt.tau_us > 0.0) {
                return Err(row.error("lifetime must be positive"));
            }
            if lifetimes.insert(s, lt).is_some() {
                return Err(row.error(format!("duplicate lifetime series {s}")));
            }
        }
    }
    SpeciesData::new(name, mass, ghz(ry_ghz), defects, lifetimes, core)
}

pub fn load_species(path: impl AsRef<Path>) -> Result<SpeciesData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_species(&text)
}

/// Binding energy `-Ry/n*²` as an angular frequency (rad/μs).
pub fn level_energy(species: &SpeciesData, level: RydbergLevel) -> Result<f64> {
    let ns = species.nstar(level)?;
    Ok(-species.rydberg_const / (ns * ns))
}

/// Normalized Coulomb-approximation radial function, memoized per species.
pub fn radial_wavefunction(species: &SpeciesData, level: RydbergLevel, grid: GridSpec) -> Result<Arc<RadialFunction>> {
    let key = (level, grid.key());
    if let Some(f) = species.cache.read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(f));
    }
    let f = Arc::new(integrate_numerov(species, level, grid)?);
    species.cache.write().expect("cache lock").entry(key).or_insert_with(|| Arc::clone(&f));
    Ok(f)
}

fn integrate_numerov(species: &SpeciesData, level: RydbergLevel, grid: GridSpec) -> Result<RadialFunction> {
    let diverged = |detail: String| Error::Divergence {
        level: level.to_string(),
        detail,
    };
    if !(grid.step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {} must be positive", grid.step)));
    }
    let ns = species.nstar(level)?;
    let energy = -species.rydberg_const / HARTREE_RAD_PER_US / (ns * ns);
    let l = f64::from(level.l_int());
    let h = grid.step;
    let rho_max = grid.outer_radius(level.n).sqrt();
    let imax = (rho_max / h) as usize + 1;
    let imin = ((species.core_radius_cut.sqrt() / h) as usize).max(1);
    if imax < imin + 3 {
        return Err(diverged(format!("grid has {imax} points inside the core cut")));
    }

    let centrifugal = (2.0 * l + 0.5) * (2.0 * l + 1.5);
    let g = |k: usize| -> f64 {
        if k == 0 {
            return 0.0;
        }
        let rho = k as f64 * h;
        let r = rho * rho;
        centrifugal / r + 8.0 * r * (-1.0 / r - energy)
    };
    let f: Vec<f64> = (0..=imax).map(|k| 1.0 - h * h * g(k) / 12.0).collect();

    let mut x = vec![0.0; imax + 1];
    x[imax] = 1e-30;
    x[imax - 1] = 1e-30 * (h * g(imax).max(0.0).sqrt()).exp();
    let mut first = imin;
    for i in (imin + 1..imax).rev() {
        x[i - 1] = ((12.0 - 10.0 * f[i]) * x[i] - f[i + 1] * x[i + 1]) / f[i - 1];
        let rho = (i - 1) as f64 * h;
        if rho * rho < ns * ns && g(i - 1) > 0.0 && x[i - 1].abs() > x[i].abs() {
            // growing into the inner forbidden region
            first = i;
            x[..i].iter_mut().for_each(|v| *v = 0.0);
            break;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(diverged("non-finite amplitude".into()));
    }

    let weight: Vec<f64> = (0..=imax)
        .map(|k| {
            let rho = k as f64 * h;
            2.0 * rho * rho * x[k] * x[k]
        })
        .collect();
    let norm = trapezoid(&weight, h);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(diverged(format!("normalization integral {norm:e}")));
    }
    let s = norm.sqrt().recip();
    x.iter_mut().for_each(|v| *v *= s);
    Ok(RadialFunction { step: h, x, first })
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (y[1..n - 1].iter().sum::<f64>() + 0.5 * (y[0] + y[n - 1])),
    }
}

/// `∫ R_a R_b r^power dr` on the shared grid.
pub fn radial_integral(species: &SpeciesData, a: RydbergLevel, b: RydbergLevel, power: i32, grid: GridSpec) -> Result<f64> {
    let fa = radial_wavefunction(species, a, grid)?;
    let fb = radial_wavefunction(species, b, grid)?;
    let m = fa.len().min(fb.len());
    let h = grid.step;
    let y: Vec<f64> = (0..m)
        .map(|k| {
            let rho = k as f64 * h;
            2.0 * rho.powi(2 * power - 2) * (fa.x[k] * fb.x[k])
        })
        .collect();
    Ok(trapezoid(&y, h))
}

/// `∫ R_a R_c r³ dr` in a.u. on the default grid.
pub fn radial_matrix_element(species: &SpeciesData, a: RydbergLevel, c: RydbergLevel) -> Result<f64> {
    radial_matrix_element_on(species, a, c, GridSpec::default())
}

pub fn radial_matrix_element_on(species: &SpeciesData, a: RydbergLevel, c: RydbergLevel, grid: GridSpec) -> Result<f64> {
    if (a.l_int() - c.l_int()).abs() != 1 {
        return Err(Error::InvalidArgument(format!("{a} -> {c} is not dipole allowed (|ΔL| must be 1)")));
    }
    radial_integral(species, a, c, 3, grid)
}

/// Radiative lifetime in μs, scaled from the reference entry as `n*³`.
pub fn lifetime(species: &SpeciesData, level: RydbergLevel) -> Result<f64> {
    let s = level.series();
    let lt = species
        .lifetime_refs
        .get(&s)
        .ok_or_else(|| Error::MissingSeries(format!("{s} lifetime")))?;
    let reference = RydbergLevel { n: lt.n_ref, ..level };
    let ratio = species.nstar(level)? / species.nstar(reference)?;
    Ok(lt.tau_us * ratio.powi(3))
}
