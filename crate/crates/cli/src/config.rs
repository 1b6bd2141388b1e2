//! Run configuration, read from the same sectioned format as species files.
//!
//! Every block is parsed and validated up front, whichever subcommand runs.
//! Frequencies are ordinary frequencies with a unit (`15 kHz` or `15kHz`)
//! and are stored as angular frequencies in rad/μs.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use rydcool::adiabatic::PulseSpec;
use rydcool::dressing::{AtomDrives, LaserDrive, PairDrives};
use rydcool::keyfile::{self, Document, Row, Section};
use rydcool::phonons::Boundary;
use rydcool::units::{ghz, khz, mhz};
use rydcool::vdw::{PairType, DEFAULT_WINDOW};
use rydcool::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` means the bundled Rb-87 data.
    pub species_file: Option<PathBuf>,
    pub c6map: C6MapConfig,
    pub swap: SwapConfig,
    pub pulse: PulseConfig,
    pub dress: DressConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C6MapConfig {
    pub pair_type: PairType,
    pub n: (u32, u32),
    pub dn: (i32, i32),
    pub theta: f64,
    pub phi: f64,
    pub window: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaZ {
    Absolute(f64),
    /// In units of G.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapConfig {
    pub n_pairs: usize,
    pub eta: f64,
    pub g: f64,
    pub omega_z: OmegaZ,
    pub counter_rotating: bool,
    pub boundary: Boundary,
    pub nbar_data: f64,
    pub nbar_aux: f64,
    /// In units of 1/G.
    pub t_end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub spec: PulseSpec,
    pub r0: f64,
    pub rc: f64,
    pub trap: [f64; 3],
    /// `None` refines the grid until the adiabaticity estimate settles.
    pub samples: Option<usize>,
    pub optimize: bool,
    pub max_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// Isotropic C6, rad/μs · μm⁶.
    Scalar(f64),
    Levels { pair_type: PairType, n: (u32, u32), theta: f64, phi: f64, window: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialGrid {
    Microns { min: f64, max: f64, points: usize },
    /// In units of the largest soft-core radius.
    CoreRadii { min: f64, max: f64, points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressConfig {
    pub interaction: Interaction,
    pub drives: PairDrives,
    pub grid: RadialGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        let worked = LaserDrive::new(mhz(100.0), mhz(-200.0));
        RunConfig {
            species_file: None,
            c6map: C6MapConfig {
                pair_type: PairType::SS,
                n: (60, 60),
                dn: (0, 0),
                theta: 0.0,
                phi: 0.0,
                window: DEFAULT_WINDOW,
            },
            swap: SwapConfig {
                n_pairs: 50,
                eta: 1.0,
                g: khz(1.48),
                omega_z: OmegaZ::Ratio(100.0),
                counter_rotating: true,
                boundary: Boundary::Open,
                nbar_data: 20.0,
                nbar_aux: 0.0,
                t_end: FRAC_PI_2,
                points: 101,
            },
            pulse: PulseConfig {
                spec: PulseSpec::gaussian(mhz(34.4), 6.7, 215.9).expect("valid default pulse"),
                r0: 1.93,
                rc: 2.65,
                trap: [khz(15.0), khz(50.0), khz(15.0)],
                samples: None,
                optimize: false,
                max_evaluations: 800,
            },
            dress: DressConfig {
                interaction: Interaction::Scalar(ghz(138.5)),
                drives: PairDrives::identical(worked),
                grid: RadialGrid::CoreRadii { min: 1.5, max: 10.0, points: 20 },
            },
        }
    }
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("species", &["file"]),
    ("c6map", &["pair_type", "n", "dn", "theta_deg", "phi_deg", "window"]),
    (
        "swap",
        &["n_pairs", "eta", "g", "omega_z", "omega_ratio", "model", "boundary", "nbar", "t_end", "points"],
    ),
    ("pulse", &["a_max", "sigma", "t0", "r0", "rc", "trap", "samples", "optimize", "max_evaluations"]),
    (
        "dress",
        &[
            "c6", "levels", "pair_type", "theta_deg", "phi_deg", "window", "drive", "atom1_plus", "atom1_minus", "atom2_plus",
            "atom2_minus", "r", "r_over_rc",
        ],
    ),
];

impl RunConfig {
    /// Reads a config file. A relative species path is taken relative to
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse {
            line: 0,
            msg: format!("{} is not UTF-8", path.display()),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok((Self::parse(&text, base)?, bytes))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let doc = keyfile::parse(text)?;
        check_keys(&doc)?;
        let mut cfg = RunConfig::default();
        if let Some(s) = doc.section("species") {
            if let Some(row) = s.get("file") {
                row.expect_len(2)?;
                cfg.species_file = Some(base.join(&row.tokens[1]));
            }
        }
        if let Some(s) = doc.section("c6map") {
            parse_c6map(s, &mut cfg.c6map)?;
        }
        if let Some(s) = doc.section("swap") {
            parse_swap(s, &mut cfg.swap)?;
        }
        if let Some(s) = doc.section("pulse") {
            parse_pulse(s, &mut cfg.pulse)?;
        }
        if let Some(s) = doc.section("dress") {
            parse_dress(s, &mut cfg.dress)?;
        }
        Ok(cfg)
    }
}

fn check_keys(doc: &Document) -> Result<()> {
    for s in &doc.sections {
        let allowed = SECTIONS.iter().find(|(name, _)| *name == s.name).map(|(_, k)| *k).ok_or(Error::Parse {
            line: s.line,
            msg: format!("unknown section [{}]", s.name),
        })?;
        for (i, row) in s.rows.iter().enumerate() {
            if !allowed.contains(&row.key()) {
                return Err(row.error(format!("unknown key `{}` in [{}]", row.key(), s.name)));
            }
            if s.rows[..i].iter().any(|r| r.key() == row.key()) {
                return Err(row.error(format!("duplicate key `{}`", row.key())));
            }
        }
    }
    Ok(())
}

fn parse_c6map(s: &Section, c: &mut C6MapConfig) -> Result<()> {
    if let Some(row) = s.get("pair_type") {
        row.expect_len(2)?;
        c.pair_type = row.parse(1)?;
    }
    if let Some(row) = s.get("n") {
        c.n = pair(row)?;
        if c.n.0 <= c.n.1 && c.n.0 == 0 {
            return Err(row.error("n must start at 1 or above"));
        }
    }
    if let Some(row) = s.get("dn") {
        c.dn = pair(row)?;
    }
    if let Some(row) = s.get("theta_deg") {
        c.theta = angle(row)?;
    }
    if let Some(row) = s.get("phi_deg") {
        c.phi = angle(row)?;
    }
    if let Some(row) = s.get("window") {
        c.window = window(row)?;
    }
    let nonempty = c.n.0 <= c.n.1 && c.dn.0 <= c.dn.1;
    if nonempty && i64::from(c.n.0) + i64::from(c.dn.0) < 1 {
        return Err(Error::InvalidArgument(format!(
            "[c6map] n = {} with dn = {} gives a second principal quantum number below 1",
            c.n.0, c.dn.0
        )));
    }
    Ok(())
}

fn parse_swap(s: &Section, c: &mut SwapConfig) -> Result<()> {
    if let Some(row) = s.get("n_pairs") {
        row.expect_len(2)?;
        c.n_pairs = row.parse(1)?;
        if c.n_pairs == 0 {
            return Err(row.error("n_pairs must be positive"));
        }
    }
    if let Some(row) = s.get("eta") {
        c.eta = positive(row)?;
    }
    if let Some(row) = s.get("g") {
        c.g = frequencies::<1>(row)?[0];
        if !(c.g > 0.0) {
            return Err(row.error("g must be positive"));
        }
    }
    match (s.get("omega_z"), s.get("omega_ratio")) {
        (Some(row), Some(_)) => return Err(row.error("give either omega_z or omega_ratio, not both")),
        (Some(row), None) => {
            let w = frequencies::<1>(row)?[0];
            if !(w > 0.0) {
                return Err(row.error("omega_z must be positive"));
            }
            c.omega_z = OmegaZ::Absolute(w);
        }
        (None, Some(row)) => c.omega_z = OmegaZ::Ratio(positive(row)?),
        (None, None) => {}
    }
    if let Some(row) = s.get("model") {
        row.expect_len(2)?;
        c.counter_rotating = match row.tokens[1].as_str() {
            "full" => true,
            "rwa" => false,
            other => return Err(row.error(format!("model must be `full` or `rwa`, not `{other}`"))),
        };
    }
    if let Some(row) = s.get("boundary") {
        row.expect_len(2)?;
        c.boundary = match row.tokens[1].as_str() {
            "open" => Boundary::Open,
            "periodic" => Boundary::Periodic,
            other => return Err(row.error(format!("boundary must be `open` or `periodic`, not `{other}`"))),
        };
    }
    if let Some(row) = s.get("nbar") {
        row.expect_len(3)?;
        c.nbar_data = row.parse(1)?;
        c.nbar_aux = row.parse(2)?;
        if !(c.nbar_data >= 0.0 && c.nbar_aux >= 0.0) {
            return Err(row.error("occupancies must be non-negative"));
        }
    }
    if let Some(row) = s.get("t_end") {
        row.expect_len(2)?;
        c.t_end = row.parse(1)?;
        if !(c.t_end >= 0.0 && c.t_end.is_finite()) {
            return Err(row.error(format!("time grid must be non-negative, got t_end = {}", c.t_end)));
        }
    }
    if let Some(row) = s.get("points") {
        c.points = count(row)?;
    }
    Ok(())
}

fn parse_pulse(s: &Section, c: &mut PulseConfig) -> Result<()> {
    let mut a_max = c.spec.a_max;
    let mut sigma = c.spec.sigma;
    let mut t0 = c.spec.t0;
    if let Some(row) = s.get("a_max") {
        a_max = frequencies::<1>(row)?[0];
    }
    if let Some(row) = s.get("sigma") {
        sigma = positive(row)?;
    }
    if let Some(row) = s.get("t0") {
        t0 = positive(row)?;
    }
    c.spec = PulseSpec::gaussian(a_max, sigma, t0)?;
    if let Some(row) = s.get("r0") {
        c.r0 = positive(row)?;
    }
    if let Some(row) = s.get("rc") {
        c.rc = positive(row)?;
    }
    if let Some(row) = s.get("trap") {
        c.trap = frequencies::<3>(row)?;
        if c.trap.iter().any(|w| !(*w > 0.0)) {
            return Err(row.error("trap frequencies must be positive"));
        }
    }
    if let Some(row) = s.get("samples") {
        let n = count(row)?;
        if n < 5 {
            return Err(row.error("samples must be at least 5"));
        }
        c.samples = Some(n);
    }
    if let Some(row) = s.get("optimize") {
        c.optimize = flag(row)?;
    }
    if let Some(row) = s.get("max_evaluations") {
        c.max_evaluations = count(row)?;
    }
    Ok(())
}

fn parse_dress(s: &Section, c: &mut DressConfig) -> Result<()> {
    match (s.get("c6"), s.get("levels")) {
        (Some(row), Some(_)) => return Err(row.error("give either c6 or levels, not both")),
        (Some(row), None) => c.interaction = Interaction::Scalar(frequencies::<1>(row)?[0]),
        (None, Some(row)) => {
            let n = pair::<u32>(row)?;
            if n.0 == 0 || n.1 == 0 {
                return Err(row.error("principal quantum numbers must be positive"));
            }
            let mut pair_type = PairType::SS;
            let (mut theta, mut phi, mut win) = (0.0, 0.0, DEFAULT_WINDOW);
            if let Some(row) = s.get("pair_type") {
                row.expect_len(2)?;
                pair_type = row.parse(1)?;
            }
            if let Some(row) = s.get("theta_deg") {
                theta = angle(row)?;
            }
            if let Some(row) = s.get("phi_deg") {
                phi = angle(row)?;
            }
            if let Some(row) = s.get("window") {
                win = window(row)?;
            }
            c.interaction = Interaction::Levels { pair_type, n, theta, phi, window: win };
        }
        (None, None) => {}
    }
    if let Interaction::Scalar(_) = c.interaction {
        for key in ["pair_type", "theta_deg", "phi_deg", "window"] {
            if let Some(row) = s.get(key) {
                return Err(row.error(format!("`{key}` only applies together with `levels`")));
            }
        }
    }

    let keyed = ["atom1_plus", "atom1_minus", "atom2_plus", "atom2_minus"];
    if let Some(row) = s.get("drive") {
        if let Some(other) = keyed.iter().find_map(|k| s.get(k)) {
            return Err(other.error("per-state drives cannot be combined with `drive`"));
        }
        c.drives = PairDrives::identical(drive(row)?);
    } else if keyed.iter().any(|k| s.get(k).is_some()) {
        let get = |k: &str| s.get(k).map(drive).transpose();
        c.drives = PairDrives {
            atom1: AtomDrives {
                plus: get("atom1_plus")?,
                minus: get("atom1_minus")?,
            },
            atom2: AtomDrives {
                plus: get("atom2_plus")?,
                minus: get("atom2_minus")?,
            },
        };
        for (atom, d) in [(1, c.drives.atom1), (2, c.drives.atom2)] {
            if d.plus.is_none() && d.minus.is_none() {
                return Err(Error::InvalidArgument(format!("[dress] atom {atom} has no drive")));
            }
        }
    }

    match (s.get("r"), s.get("r_over_rc")) {
        (Some(row), Some(_)) => return Err(row.error("give either r or r_over_rc, not both")),
        (Some(row), None) => {
            let (min, max, points) = grid(row)?;
            c.grid = RadialGrid::Microns { min, max, points };
        }
        (None, Some(row)) => {
            let (min, max, points) = grid(row)?;
            c.grid = RadialGrid::CoreRadii { min, max, points };
        }
        (None, None) => {}
    }
    Ok(())
}

fn unit_scale(unit: &str) -> Option<fn(f64) -> f64> {
    match unit.to_ascii_lowercase().as_str() {
        "hz" => Some(|f| khz(f * 1e-3)),
        "khz" => Some(khz),
        "mhz" => Some(mhz),
        "ghz" => Some(ghz),
        _ => None,
    }
}

/// Reads `N` frequencies from the row's values, each either `15kHz` or
/// `15 kHz`.
pub fn frequencies<const N: usize>(row: &Row) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    let mut toks = row.values().iter().peekable();
    for slot in out.iter_mut() {
        let tok = toks
            .next()
            .ok_or_else(|| row.error(format!("`{}` expects {N} frequencies with units", row.key())))?;
        let split = tok.find(|ch: char| ch.is_ascii_alphabetic() && ch != 'e' && ch != 'E').unwrap_or(tok.len());
        let (num, unit) = tok.split_at(split);
        let unit = if unit.is_empty() {
            toks.next()
                .ok_or_else(|| row.error(format!("`{}`: `{tok}` has no unit (Hz, kHz, MHz or GHz)", row.key())))?
                .as_str()
        } else {
            unit
        };
        let value: f64 = num
            .parse()
            .map_err(|_| row.error(format!("`{}`: cannot parse `{num}` as a number", row.key())))?;
        let scale = unit_scale(unit).ok_or_else(|| row.error(format!("`{}`: unknown unit `{unit}`", row.key())))?;
        if !value.is_finite() {
            return Err(row.error(format!("`{}`: `{num}` is not finite", row.key())));
        }
        *slot = scale(value);
    }
    if let Some(extra) = toks.next() {
        return Err(row.error(format!("`{}`: unexpected `{extra}`", row.key())));
    }
    Ok(out)
}

fn drive(row: &Row) -> Result<LaserDrive> {
    let [rabi, detuning] = frequencies::<2>(row)?;
    if detuning == 0.0 {
        return Err(row.error("detuning must be nonzero"));
    }
    Ok(LaserDrive::new(rabi, detuning))
}

fn pair<T: std::str::FromStr>(row: &Row) -> Result<(T, T)> {
    row.expect_len(3)?;
    Ok((row.parse(1)?, row.parse(2)?))
}

fn positive(row: &Row) -> Result<f64> {
    row.expect_len(2)?;
    let v: f64 = row.parse(1)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(row.error(format!("`{}` must be positive, got {v}", row.key())));
    }
    Ok(v)
}

fn count(row: &Row) -> Result<usize> {
    row.expect_len(2)?;
    let v: usize = row.parse(1)?;
    if v == 0 {
        return Err(row.error(format!("`{}` must be positive", row.key())));
    }
    Ok(v)
}

fn window(row: &Row) -> Result<u32> {
    Ok(count(row)? as u32)
}

fn angle(row: &Row) -> Result<f64> {
    row.expect_len(2)?;
    let deg: f64 = row.parse(1)?;
    if !deg.is_finite() {
        return Err(row.error("angle must be finite"));
    }
    Ok(deg.to_radians())
}

fn flag(row: &Row) -> Result<bool> {
    row.expect_len(2)?;
    match row.tokens[1].as_str() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(row.error(format!("`{}` must be true or false, not `{other}`", row.key()))),
    }
}

fn grid(row: &Row) -> Result<(f64, f64, usize)> {
    row.expect_len(4)?;
    let (min, max, points): (f64, f64, usize) = (row.parse(1)?, row.parse(2)?, row.parse(3)?);
    if !(min > 0.0 && max >= min && max.is_finite()) || points == 0 {
        return Err(row.error(format!("`{}` needs 0 < min <= max and at least one point", row.key())));
    }
    if points == 1 && max != min {
        return Err(row.error("a single point needs min = max"));
    }
    Ok((min, max, points))
}
