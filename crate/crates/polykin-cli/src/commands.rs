//! The six subcommands. Each one resolves its config block, runs the
//! corresponding library routine, writes CSV/JSON outputs plus a run
//! manifest into the output directory, and reports statistical verdicts
//! (fatal only under `--strict`).

use std::io::Write;
use std::path::Path;

use polykin::dsmc::{self, InitialCondition, SimConfig};
use polykin::functionals;
use polykin::linearized;
use polykin::nonlinear;
use polykin::quadrature::{GridFunction, McConfig};
use polykin::rng::{substream, tag};
use polykin::stats;
use rand::Rng;

use crate::config::Config;
use crate::manifest::fmt_g12;
use crate::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn lib_err(e: polykin::Error) -> CliError {
    match e {
        polykin::Error::InvalidParam { .. } | polykin::Error::InvalidConfig(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numeric(other.to_string()),
    }
}

/// `nu-table`: collision frequency and its envelope ratio over the scan.
pub fn nu_table(cfg: &Config, _seed: u64, out: &Path, _strict: bool) -> Result<(), CliError> {
    let params = cfg.gas_params()?;
    let grid = cfg.phase_grid()?;
    let scan = cfg.scan_states()?;
    let mut csv = String::from("speed,i_energy,nu,equiv_ratio\n");
    for s in &scan {
        let nu = functionals::collision_frequency(&params, s, &grid);
        if !nu.is_finite() {
            return Err(CliError::Numeric(format!(
                "collision frequency diverged at speed {}, I {}",
                s.speed(),
                s.i_energy
            )));
        }
        let envelope = (1.0 + s.speed() + s.i_energy.sqrt()).powf(2.0 - params.alpha());
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g12(s.speed()),
            fmt_g12(s.i_energy),
            fmt_g12(nu),
            fmt_g12(nu / envelope)
        ));
    }
    write_file(&out.join("nu_table.csv"), &csv)
}

/// `kernel-bounds`: the weighted kernel-bound product over the scan.
pub fn kernel_bounds(cfg: &Config, seed: u64, out: &Path, _strict: bool) -> Result<(), CliError> {
    let params = cfg.gas_params()?;
    let grid = cfg.phase_grid()?;
    let scan = cfg.scan_states()?;
    let eps = cfg.f64_or("probe.eps", 0.0)?;
    let m_pow = cfg.f64_or("probe.m", 0.0)?;
    let mc = McConfig::new(cfg.usize_or("mc.samples", 100_000)?, seed);
    let rows = linearized::kernel_bound_probe(&params, eps, m_pow, &scan, &grid, &mc)
        .map_err(lib_err)?;
    let mut csv = String::from("speed,i_energy,bound_product,std_error\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g12(r.state.speed()),
            fmt_g12(r.state.i_energy),
            fmt_g12(r.bound_product),
            fmt_g12(r.std_error)
        ));
    }
    write_file(&out.join("kernel_bounds.csv"), &csv)
}

/// `gain-probe`: the pointwise gain-bound ratio for `√M` and optional
/// random bounded test functions, with the overall sup.
pub fn gain_probe(cfg: &Config, seed: u64, out: &Path, _strict: bool) -> Result<(), CliError> {
    let params = cfg.gas_params()?;
    let grid = cfg.phase_grid()?;
    let scan = cfg.scan_states()?;
    let mc = McConfig::new(cfg.usize_or("mc.samples", 100_000)?, seed);
    let n_random = cfg.usize_or("probe.random_fields", 0)?;

    let mut csv = String::from("field,speed,i_energy,ratio\n");
    let mut sup = 0.0f64;
    let mut probe_one = |name: &str, f: &GridFunction, mc: &McConfig| -> Result<(), CliError> {
        let rows = nonlinear::gain_ratio_table(&params, f, &scan, mc).map_err(lib_err)?;
        for (s, ratio) in rows {
            sup = sup.max(ratio);
            csv.push_str(&format!(
                "{name},{},{},{}\n",
                fmt_g12(s.speed()),
                fmt_g12(s.i_energy),
                fmt_g12(ratio)
            ));
        }
        Ok(())
    };

    let sqrt_m = GridFunction::from_fn(&grid, |s| params.sqrt_maxwellian(s));
    probe_one("sqrt_m", &sqrt_m, &mc)?;
    for k in 0..n_random {
        // Bounded fields: w·f uniform in [-1, 1] per node.
        let mut rng = substream(seed, &[tag::FIELD, k as u64]);
        let values: Vec<f64> = (0..grid.len())
            .map(|idx| rng.random_range(-1.0..1.0) / params.weight(&grid.node(idx)))
            .collect();
        let f = GridFunction::from_values(&grid, values).map_err(lib_err)?;
        let field_mc = McConfig::new(mc.n_samples, seed.wrapping_add(1000 + k as u64));
        probe_one(&format!("random_{k}"), &f, &field_mc)?;
    }

    write_file(&out.join("gain_probe.csv"), &csv)?;
    write_file(
        &out.join("gain_summary.json"),
        &format!("{{\n  \"sup_ratio\": {}\n}}\n", fmt_g12(sup)),
    )
}

/// `entropy-check`: relative entropy vs its split lower bound on constant
/// multiples of `M` and optional random perturbation fields.
pub fn entropy_check(cfg: &Config, seed: u64, out: &Path, strict: bool) -> Result<(), CliError> {
    let params = cfg.gas_params()?;
    let grid = cfg.phase_grid()?;
    let factors = cfg.list_or("entropy.factors", &[1.5, 3.0])?;
    let trials = cfg.usize_or("entropy.random_trials", 0)?;

    let m_fn = GridFunction::from_fn(&grid, |s| params.maxwellian(s));
    let mut csv = String::from("case,relative_entropy,split_lhs,inequality_ok\n");
    let mut all_ok = true;
    let mut emit = |name: &str, f: &GridFunction, csv: &mut String| {
        let ent = functionals::relative_entropy(f, &params);
        let lhs = functionals::entropy_split_lhs(f, &params);
        let ok = lhs <= ent + 1e-12;
        all_ok &= ok;
        csv.push_str(&format!("{name},{},{},{ok}\n", fmt_g12(ent), fmt_g12(lhs)));
    };

    for &c in &factors {
        if c < 0.0 {
            return Err(CliError::Config(format!("entropy.factors entry {c} is negative")));
        }
        emit(&format!("{c}M"), &m_fn.map(|v| c * v), &mut csv);
    }
    for k in 0..trials {
        let mut rng = substream(seed, &[tag::FIELD, k as u64]);
        let values: Vec<f64> = m_fn
            .values()
            .iter()
            .map(|&m| m * (1.0 + rng.random_range(-0.9..5.0)))
            .collect();
        let f = GridFunction::from_values(&grid, values).map_err(lib_err)?;
        emit(&format!("random_{k}"), &f, &mut csv);
    }

    write_file(&out.join("entropy_check.csv"), &csv)?;
    if strict && !all_ok {
        return Err(CliError::StatFailure(
            "entropy split bound violated in at least one case".into(),
        ));
    }
    Ok(())
}

/// `equilibrium-check`: KS statistics of a fresh equilibrium ensemble's
/// marginals against their laws.
pub fn equilibrium_check(cfg: &Config, seed: u64, out: &Path, strict: bool) -> Result<(), CliError> {
    let params = cfg.gas_params()?;
    let n_particles = cfg.usize_or("ensemble.n_particles", 100_000)?;
    let temperature = cfg.f64_or("ensemble.t", 1.0)?;
    let threshold = cfg.f64_or("ensemble.ks_threshold", 0.01)?;
    let sim = SimConfig {
        params,
        n_particles,
        n_cells: 1,
        dt: 1.0,
        t_end: 1.0,
        seed,
        init: InitialCondition::Equilibrium { t: temperature },
        diag_every: 1,
    };
    let ens = dsmc::init_ensemble(&sim).map_err(lib_err)?;

    let sorted_by = |f: &dyn Fn(&dsmc::Particle) -> f64| -> Vec<f64> {
        let mut v: Vec<f64> = ens.particles().iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let delta = params.delta();
    let t = temperature;
    type MarginalCheck<'a> = (&'a str, Vec<f64>, Box<dyn Fn(f64) -> f64>);
    let checks: Vec<MarginalCheck> = vec![
        (
            "speed",
            sorted_by(&|p| p.state.speed()),
            Box::new(move |x| stats::maxwell_speed_cdf(t, x)),
        ),
        (
            "i_energy",
            sorted_by(&|p| p.state.i_energy),
            Box::new(move |x| stats::gamma_cdf(0.5 * delta, 1.0 / t, x)),
        ),
        (
            "vx",
            sorted_by(&|p| p.state.v.x),
            Box::new(move |x| stats::normal_cdf(x / t.sqrt())),
        ),
        (
            "vy",
            sorted_by(&|p| p.state.v.y),
            Box::new(move |x| stats::normal_cdf(x / t.sqrt())),
        ),
        (
            "vz",
            sorted_by(&|p| p.state.v.z),
            Box::new(move |x| stats::normal_cdf(x / t.sqrt())),
        ),
    ];

    let mut csv = String::from("marginal,ks_stat,threshold,pass\n");
    let mut all_ok = true;
    for (name, sorted, cdf) in &checks {
        let d = stats::ks_statistic(sorted, cdf);
        let ok = d < threshold;
        all_ok &= ok;
        csv.push_str(&format!("{name},{},{},{ok}\n", fmt_g12(d), fmt_g12(threshold)));
    }
    write_file(&out.join("equilibrium_check.csv"), &csv)?;
    if strict && !all_ok {
        return Err(CliError::StatFailure(
            "an equilibrium marginal failed its KS threshold".into(),
        ));
    }
    Ok(())
}

/// `simulate`: run the DSMC solver, streaming the diagnostics CSV.
pub fn simulate(cfg: &Config, seed: u64, out: &Path, _strict: bool) -> Result<SimConfig, CliError> {
    let params = cfg.gas_params()?;
    let init = match cfg.get("sim.init").unwrap_or("equilibrium") {
        "equilibrium" => InitialCondition::Equilibrium {
            t: cfg.f64_or("sim.t", 1.0)?,
        },
        "two_temperature" => InitialCondition::TwoTemperature {
            t_kin: cfg.require_f64("sim.t_kin")?,
            t_int: cfg.require_f64("sim.t_int")?,
        },
        "spatial_mode" => InitialCondition::SpatialMode {
            amplitude: cfg.require_f64("sim.amplitude")?,
            t: cfg.f64_or("sim.t", 1.0)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "sim.init = {other} is not one of equilibrium, two_temperature, spatial_mode"
            )))
        }
    };
    let dt = match cfg.get("sim.dt") {
        Some(_) => cfg.require_f64("sim.dt")?,
        None => SimConfig::default_dt(&params, &init),
    };
    let sim = SimConfig {
        params,
        n_particles: cfg.usize_or("sim.n_particles", 100_000)?,
        n_cells: cfg.usize_or("sim.n_cells", 1)?,
        dt,
        t_end: cfg.require_f64("sim.t_end")?,
        seed,
        init,
        diag_every: cfg.usize_or("sim.diag_every", 10)?,
    };
    sim.validate().map_err(lib_err)?;

    let path = out.join("diagnostics.csv");
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", dsmc::DIAGNOSTICS_CSV_HEADER).map_err(|e| CliError::Io(e.to_string()))?;
    let mut io_err: Option<std::io::Error> = None;
    dsmc::run_with(&sim, |r| {
        if io_err.is_some() {
            return;
        }
        if let Err(e) = dsmc::write_diagnostics_row(&mut w, r).and_then(|()| w.flush()) {
            io_err = Some(e);
        }
    })
    .map_err(lib_err)?;
    if let Some(e) = io_err {
        return Err(CliError::Io(e.to_string()));
    }
    Ok(sim)
}

