use std::f64::consts::FRAC_PI_2;

use anyhow::{anyhow, Result};
use rydcool::adiabatic::{adaptive_trajectory, nonadiabaticity, optimize_pulse, trajectory, OptimizeOptions, PulseSpec};
use rydcool::atomdata::{RydbergLevel, SpeciesData};
use rydcool::dressing::{dressed_from_c6, dressed_potential, exact_shift_matrix, Spin, SpinPair};
use rydcool::par::{self, Execution};
use rydcool::phonons::{
    analytic_nbar, build_chain_couplings, linspace, simulate_quadratic, swap_efficiency, Boundary, ChainGeometry, OccupancyTrace,
    TrapConfig,
};
use rydcool::units::{c6_to_ghz_um6, to_khz, to_mhz};
use rydcool::vdw::{assemble_vdw, c6_map, Matrix4c};
use rydcool::Error;
use serde_json::json;

use crate::config::{C6MapConfig, DressConfig, Interaction, OmegaZ, PulseConfig, RadialGrid, SwapConfig};
use crate::output::{Cell, Table};

pub fn c6map(species: &SpeciesData, c: &C6MapConfig, exec: Execution) -> Result<Table> {
    let mut table = Table::new(&["n", "dn", "pair_type", "c6_GHz_um6", "deviation"]);
    let cells = c6_map(species, c.pair_type, c.n.0..=c.n.1, c.dn.0..=c.dn.1, c.theta, c.phi, c.window, exec);
    for cell in cells {
        let s = cell
            .outcome
            .map_err(|msg| anyhow!("cell n = {}, dn = {}: {msg}", cell.n, cell.dn))?;
        if !s.converged {
            log::warn!("cell n = {}, dn = {}: C6 sum not converged in its window", cell.n, cell.dn);
        }
        table.push(vec![
            Cell::Int(cell.n.into()),
            Cell::Int(cell.dn.into()),
            Cell::Text(c.pair_type.to_string()),
            c6_to_ghz_um6(s.c6_total).into(),
            s.deviation.into(),
        ]);
    }
    Ok(table)
}

pub fn swap(c: &SwapConfig) -> Result<Table> {
    let mut geom = ChainGeometry::new(c.n_pairs, c.eta, 1.0)?;
    if c.boundary == Boundary::Periodic {
        geom = geom.periodic();
    }
    let omega_z = match c.omega_z {
        OmegaZ::Absolute(w) => w,
        OmegaZ::Ratio(k) => k * c.g,
    };
    let model = build_chain_couplings(&geom, c.g, omega_z).with_counter_rotating(c.counter_rotating);
    let scaled = linspace(c.t_end, c.points);
    let times: Vec<f64> = scaled.iter().map(|t| t / c.g).collect();
    let run = simulate_quadratic(&model, c.nbar_data, c.nbar_aux, &times)?;
    if !run.stable {
        log::warn!("the chain is dynamically unstable at ω_z/G = {:.3}", omega_z / c.g);
    }

    let mut table = Table::new(&["t_in_units_of_invG", "nbar_data", "nbar_aux"]);
    for ((t, d), a) in scaled.iter().zip(&run.trace.nbar_data).zip(&run.trace.nbar_aux) {
        table.push(vec![(*t).into(), (*d).into(), (*a).into()]);
    }
    let trace = OccupancyTrace {
        times: scaled,
        ..run.trace
    };
    table.note("model", if c.counter_rotating { "full" } else { "rwa" });
    table.note("omega_z_over_G", omega_z / c.g);
    match swap_efficiency(&trace, FRAC_PI_2) {
        Ok(e) => table.note("efficiency_at_ts", e),
        Err(Error::ZeroOccupancy) => table.note("efficiency_at_ts", "undefined (no initial data-atom occupancy)"),
        Err(_) => table.note("efficiency_at_ts", "not evaluated (t_s = pi/2G lies beyond the time grid)"),
    }
    if c.nbar_data > 0.0 {
        let (d, _) = analytic_nbar(FRAC_PI_2, 1.0, c.eta, c.nbar_data, c.nbar_aux);
        table.note("efficiency_infinite_chain", 1.0 - d / c.nbar_data);
    }
    table.note("stable", run.stable);
    table.note("symplectic_drift", run.symplectic_drift);
    Ok(table)
}

pub fn pulse(species: &SpeciesData, c: &PulseConfig) -> Result<Table> {
    let trap = TrapConfig::new(species.mass_amu(), c.trap)?;
    let mut notes = Vec::new();
    let spec = if c.optimize {
        let opts = OptimizeOptions {
            max_evaluations: c.max_evaluations,
            ..OptimizeOptions::default()
        };
        let o = optimize_pulse(&c.spec, &trap, c.r0, c.rc, &opts)?;
        if !o.converged {
            log::warn!("pulse optimizer stopped after {} evaluations without converging", o.evaluations);
        }
        notes.push(("optimized_pulse", pulse_json(&o.pulse)));
        notes.push((
            "optimizer",
            json!({ "converged": o.converged, "evaluations": o.evaluations, "residual": o.residual }),
        ));
        o.pulse
    } else {
        c.spec
    };
    let traj = match c.samples {
        Some(n) => trajectory(&spec, &trap, c.r0, c.rc, &linspace(spec.duration, n))?,
        None => adaptive_trajectory(&spec, &trap, c.r0, c.rc)?,
    };
    let worst = traj.alpha_dot_ratio.iter().flatten().copied().fold(0.0, f64::max);
    let na = match nonadiabaticity(&traj, &trap) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("{e}; reporting the unrefined estimate");
            worst
        }
    };

    let mut table = Table::new(&["t", "y1", "y2", "Gx", "Gy", "Gz", "alpha_dot_ratio"]);
    for i in 0..traj.times.len() {
        let [a, b] = traj.alpha_dot_ratio[i];
        table.push(vec![
            traj.times[i].into(),
            traj.y1_eq[i].into(),
            traj.y2_eq[i].into(),
            to_khz(traj.g_x[i]).into(),
            to_khz(traj.g_y[i]).into(),
            to_khz(traj.g_z[i]).into(),
            a.max(b).into(),
        ]);
    }
    table.note("units", "t us, y um, G/2pi kHz");
    table.note("pulse", pulse_json(&spec));
    for (axis, area) in ["x", "y", "z"].iter().zip(traj.areas()) {
        table.note(format!("area_{axis}_over_half_pi"), area / FRAC_PI_2);
    }
    table.note("nonadiabaticity", na);
    for (k, v) in notes {
        table.note(k, v);
    }
    Ok(table)
}

fn pulse_json(p: &PulseSpec) -> serde_json::Value {
    json!({ "a_max_MHz_um6": to_mhz(p.a_max), "sigma_us": p.sigma, "t0_us": p.t0 })
}

const SPIN_PAIRS: [SpinPair; 4] = [
    SpinPair(Spin::Plus, Spin::Plus),
    SpinPair(Spin::Plus, Spin::Minus),
    SpinPair(Spin::Minus, Spin::Plus),
    SpinPair(Spin::Minus, Spin::Minus),
];

pub fn dress(species: &SpeciesData, c: &DressConfig, exec: Execution) -> Result<Table> {
    let (h, ep) = match c.interaction {
        Interaction::Scalar(c6) => (Matrix4c::from_diagonal_element(c6.into()), dressed_from_c6(c6, &c.drives)?),
        Interaction::Levels {
            pair_type,
            n,
            theta,
            phi,
            window,
        } => {
            let (s1, s2) = pair_type.initial_series();
            let levels = (RydbergLevel::new(n.0, s1)?, RydbergLevel::new(n.1, s2)?);
            let pp = assemble_vdw(species, pair_type, levels, theta, phi, window)?;
            (pp.h_matrix, dressed_potential(&pp, &c.drives)?)
        }
    };
    let rc_max = ep.pairs.values().map(|p| p.rc()).fold(0.0, f64::max);
    let (min, max, points) = match c.grid {
        RadialGrid::Microns { min, max, points } => (min, max, points),
        RadialGrid::CoreRadii { min, max, points } => (min * rc_max, max * rc_max, points),
    };
    let radii: Vec<f64> = linspace(max - min, points).iter().map(|x| min + x).collect();

    let mut table = Table::new(&[
        "r_um", "V_pp_kHz", "V_pm_kHz", "V_mp_kHz", "V_mm_kHz", "exact_pp_kHz", "exact_pm_kHz", "exact_mp_kHz", "exact_mm_kHz",
    ]);
    let mut worst: f64 = 0.0;
    let oracle = par::map(exec, &radii, |&r| exact_shift_matrix(&h, &c.drives, r));
    for (&r, exact) in radii.iter().zip(oracle) {
        let exact = exact?;
        let mut row = vec![Cell::Float(r)];
        row.extend(SPIN_PAIRS.iter().map(|sp| Cell::from(ep.value(*sp, r).map(to_khz))));
        row.extend(SPIN_PAIRS.iter().map(|sp| Cell::from(exact.get(sp).copied().map(to_khz))));
        for sp in &SPIN_PAIRS {
            if let (Some(v), Some(e)) = (ep.value(*sp, r), exact.get(sp)) {
                worst = worst.max(((v - e) / e).abs());
            }
        }
        table.push(row);
    }
    table.note("c6_GHz_um6", c6_to_ghz_um6(ep.c6_total));
    table.note(
        "rc_um",
        serde_json::Value::Object(ep.pairs.iter().map(|(sp, core)| (sp.to_string(), json!(core.rc()))).collect()),
    );
    table.note("state_insensitive", ep.state_insensitive);
    table.note("max_relative_oracle_error", worst);
    Ok(table)
}
