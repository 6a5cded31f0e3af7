//! Subcommand implementations; each returns the table to print.

use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use bbs_core::ensemble::fugacities_of;
use bbs_core::{
    energy, evolve_periodic, pseudoenergy, soliton_content, Configuration, EnergySpectrum, EnsembleSpec, Gge2tSpec,
    IidSpec,
};
use bbs_measure::{
    measure_cumulants, measure_generalized_correlation, measure_histogram, measure_pseudoenergy_covariance,
    pseudoenergy_predictions, rate_function_curve, sum_rule_check, CurrentLabels, Estimate, Execution,
    MeasurementPlan, Weight,
};
use bbs_measure::transfer::gaussian_curve;
use bbs_tba::transfer::perron_data;
use bbs_tba::{
    build_carrier_matrix, c2_analytic, c2_via_tm, conjectured_f, correlation_matrix, drude_analytic,
    equal_time_variance, flux_jacobian, four_index_correlation, mean_currents, profile, rate, rate_2t_inf, scgf,
    scgf_2t, stationary_current, velocities, Capacity, Fugacities,
};
use nalgebra::DMatrix;
use serde_json::Value;

use crate::args::{Command, ConfigSource, Format, Label, SamplingArgs, StateArgs, WeightArg};
use crate::output::{Cell, Table};

/// Bad user input detected by the front end itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

enum State {
    Product { density: f64 },
    TwoTemperature { beta1: f64, beta_inf: f64 },
}

impl StateArgs {
    fn resolve(&self) -> Result<State> {
        match (self.density, self.fugacity, self.beta1, self.beta_inf) {
            (Some(p), None, None, None) => Ok(State::Product { density: p }),
            (None, Some(z), None, None) => {
                if !(z >= 0.0 && z.is_finite()) {
                    return Err(invalid(format!("fugacity {z} must be finite and non-negative")));
                }
                Ok(State::Product { density: z / (1.0 + z) })
            }
            (None, None, Some(beta1), Some(beta_inf)) => Ok(State::TwoTemperature { beta1, beta_inf }),
            _ => Err(invalid("give one of --density, --fugacity or --beta1 with --beta-inf")),
        }
    }

    fn fugacities(&self) -> Result<Fugacities> {
        Ok(match self.resolve()? {
            State::Product { density } => Fugacities::from_density(density)?,
            State::TwoTemperature { beta1, beta_inf } => {
                let (a, z) = fugacities_of(beta1, beta_inf)?;
                Fugacities::new(a, z)?
            }
        })
    }

    /// Fugacity `z` of a product state.
    fn product_fugacity(&self) -> Result<f64> {
        let f = self.fugacities()?;
        if !f.is_iid() {
            return Err(invalid("this quantity is defined for product states only"));
        }
        Ok(f.z())
    }

    fn ensemble(&self, length: usize, seed: u64) -> Result<EnsembleSpec> {
        Ok(match self.resolve()? {
            State::Product { density } => EnsembleSpec::Iid(IidSpec::new(length, density, seed)?),
            State::TwoTemperature { beta1, beta_inf } => {
                EnsembleSpec::Gge2t(Gge2tSpec::new(length, beta1, beta_inf, seed)?)
            }
        })
    }
}

impl ConfigSource {
    fn configuration(&self) -> Result<Configuration> {
        if let Some(s) = &self.state {
            return Ok(s.parse::<Configuration>()?);
        }
        let length = self.length.ok_or_else(|| invalid("give --state or --length with a stationary state"))?;
        Ok(self.ensemble.ensemble(length, self.seed)?.sample(0))
    }
}

/// `name=start:stop:step`, inclusive of both ends.
pub fn parse_grid(spec: &str) -> Result<(String, Vec<f64>)> {
    let bad = || invalid(format!("grid `{spec}` is not of the form name=start:stop:step"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(invalid(format!("grid `{spec}` needs step > 0 and stop >= start")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(invalid(format!("grid `{spec}` has more than a million points")));
    }
    Ok((name.trim().to_owned(), (0..n).map(|k| start + k as f64 * step).collect()))
}

fn capacity_cell(c: Capacity) -> Cell {
    match c {
        Capacity::Finite(l) => l.into(),
        Capacity::Infinite => "inf".into(),
    }
}

const ESTIMATE_COLUMNS: [&str; 6] = ["name", "params", "estimate", "stderr", "n_samples", "n_excluded"];

fn estimate_row(name: impl Into<String>, params: &str, e: Estimate, used: u64, excluded: u64) -> Vec<Cell> {
    vec![name.into().into(), params.into(), e.value.into(), e.error.into(), used.into(), excluded.into()]
}

fn sampling_plan(s: &SamplingArgs, l: u32, time: u64) -> Result<MeasurementPlan> {
    let ensemble = s.state.ensemble(s.length, s.seed)?;
    let mut plan = MeasurementPlan::new(ensemble, l, time, s.samples);
    plan.allow_wrap = s.allow_wrap;
    if let Some(b) = s.skip_budget {
        plan.skip_budget = b;
    }
    Ok(plan)
}

pub struct RunContext<'a> {
    pub exec: Execution,
    pub format: Format,
    pub manifest: &'a Value,
}

pub fn run(command: &Command, ctx: &RunContext<'_>) -> Result<Table> {
    match command {
        Command::Evolve { source, capacity, steps } => evolve(source, *capacity, *steps),
        Command::Energies { source, max_k } => energies(source, *max_k),
        Command::Tba { state, capacity, truncation } => {
            let f = state.fugacities()?;
            let prof = profile(f.a(), f.z(), *truncation)?;
            let v = velocities(&prof, *capacity);
            let mut t = Table::new(&["k", "rho", "sigma", "y", "velocity"]);
            for k in 0..prof.truncation() {
                t.push(vec![(k + 1).into(), prof.rho[k].into(), prof.sigma[k].into(), prof.y[k].into(), v.v[k].into()]);
            }
            Ok(t)
        }
        Command::Drude { state, capacity } => {
            let f = state.fugacities()?;
            let mut t = Table::new(&["quantity", "value"]);
            t.push(vec!["drude".into(), drude_analytic(f, *capacity)?.into()]);
            t.push(vec!["mean_current".into(), mean_currents(f, *capacity).ball.into()]);
            t.push(vec!["c2".into(), c2_analytic(f, *capacity).into()]);
            if let (true, Capacity::Finite(l)) = (f.is_iid() && f.z() > 0.0, capacity) {
                t.push(vec!["equal_time_variance".into(), equal_time_variance(*l, f.z())?.into()]);
            }
            Ok(t)
        }
        Command::Correlations { state, capacity, m, i, j, matrix, truncation } => {
            let f = state.fugacities()?;
            if *matrix {
                let (Some(l), Some(m)) = (capacity.as_finite(), m.as_finite()) else {
                    return Err(invalid("--matrix needs finite capacities"));
                };
                let prof = profile(f.a(), f.z(), *truncation)?;
                return Ok(matrix_table(&correlation_matrix(&prof, l, m, *truncation)?.entries));
            }
            let mut t = Table::new(&["l", "m", "i", "j", "value"]);
            let value = four_index_correlation(f, *i, *j, *capacity, *m)?;
            t.push(vec![capacity_cell(*capacity), capacity_cell(*m), capacity_cell(*i), capacity_cell(*j), value.into()]);
            Ok(t)
        }
        Command::FluxJacobian { state, capacity, truncation } => {
            let f = state.fugacities()?;
            let prof = profile(f.a(), f.z(), *truncation)?;
            Ok(matrix_table(&flux_jacobian(&prof, *capacity, *truncation)?.entries))
        }
        Command::Ldf { state, capacity, grid } => ldf(state, *capacity, grid),
        Command::Ldf2t { state, capacity, grid, lambda, mu, soliton, ball } => {
            let f = state.fugacities()?;
            let (a, z) = (f.a(), f.z());
            let (name, points) = parse_grid(grid)?;
            let mut t;
            match name.as_str() {
                "lambda" | "mu" => {
                    t = Table::new(&["lambda", "mu", "F", "dF_dlambda", "dF_dmu"]);
                    for x in points {
                        let (lam, m) = if name == "lambda" { (x, *mu) } else { (*lambda, x) };
                        let p = scgf_2t(a, z, *capacity, lam, m)?;
                        t.push(vec![lam.into(), m.into(), p.value.into(), p.gradient.0.into(), p.gradient.1.into()]);
                    }
                }
                "j" | "s" => {
                    if !capacity.is_infinite() {
                        return Err(invalid("the joint rate function is available for capacity inf only"));
                    }
                    t = Table::new(&["ball_current", "soliton_current", "G", "lambda", "mu"]);
                    for x in points {
                        let (jb, js) = if name == "j" {
                            (x, soliton.ok_or_else(|| invalid("a j= grid needs --soliton"))?)
                        } else {
                            (ball.ok_or_else(|| invalid("an s= grid needs --ball"))?, x)
                        };
                        let r = rate_2t_inf(a, z, jb, js)?;
                        t.push(vec![jb.into(), js.into(), r.value.into(), r.lambda.into(), r.mu.into()]);
                    }
                }
                other => return Err(invalid(format!("unknown grid variable `{other}`; use lambda, mu, j or s"))),
            }
            Ok(t)
        }
        Command::TransferMatrix { state, capacity, y, matrix } => {
            let z = state.product_fugacity()?;
            let l = *capacity;
            if *matrix {
                return Ok(matrix_table(&build_carrier_matrix(l, z, *y)?.entries));
            }
            let pd = perron_data(l, z, *y)?;
            let mut t = Table::new(&["quantity", "value"]);
            for (name, v) in [
                ("eigenvalue", pd.eigenvalue),
                ("dlog_y", pd.d_y),
                ("dlog_yy", pd.d_yy),
                ("dlog_zy", pd.d_zy),
                ("equal_time_variance", equal_time_variance(l, z)?),
                ("conjectured_f", conjectured_f(l, z)?),
                ("c2", c2_via_tm(l, z)?),
                ("stationary_current", stationary_current(l, z)?),
            ] {
                t.push(vec![name.into(), v.into()]);
            }
            Ok(t)
        }
        Command::MeasureCumulants { sampling, capacity, time } => {
            let plan = sampling_plan(sampling, *capacity, *time)?;
            let c = measure_cumulants(&plan, &ctx.exec)?;
            let params = format!("l={capacity};t={time};L={}", sampling.length);
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            for (k, e) in c.scaled.iter().enumerate() {
                t.push(estimate_row(format!("c{}", k + 1), &params, *e, c.used, c.skipped));
            }
            Ok(t)
        }
        Command::MeasureHistogram { sampling, capacity, time, theory } => {
            let plan = sampling_plan(sampling, *capacity, *time)?;
            if theory.is_some() {
                sampling.state.product_fugacity().context("--theory")?;
            }
            let h = measure_histogram(&plan, &ctx.exec)?;
            let mut t = Table::new(&["N", "count"]);
            for (&n, &c) in h.counts.bins() {
                t.push(vec![n.into(), c.into()]);
            }
            if let Some(path) = theory {
                write_theory(path, &sampling.state, *capacity, *time, h.mean(), h.variance(), ctx)?;
            }
            Ok(t)
        }
        Command::MeasureCorrelation { sampling, capacity, m, i, j, dyn_capacity, time, inf_proxy } => {
            let mut plan = sampling_plan(sampling, *capacity, *time)?;
            plan.inf_proxy = *inf_proxy;
            plan.dyn_capacity = dyn_capacity.unwrap_or(*capacity);
            let label = |x: Label| match x {
                Label::Size(k) => k,
                Label::Unbounded => *inf_proxy,
            };
            let labels = CurrentLabels { m: m.unwrap_or(*capacity), i: label(*i), j: label(*j) };
            let c = measure_generalized_correlation(&plan, labels, &ctx.exec)?;
            let params = format!(
                "l={capacity};m={};i={};j={};n={};t={time};L={}",
                labels.m, labels.i, labels.j, plan.dyn_capacity, sampling.length
            );
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            t.push(estimate_row("correlation", &params, c.value, c.used, c.skipped));
            Ok(t)
        }
        Command::MeasurePseudoenergy { sampling, i_max } => {
            let plan = sampling_plan(sampling, 1, 0)?;
            let c = measure_pseudoenergy_covariance(&plan, *i_max, &ctx.exec)?;
            let want = pseudoenergy_predictions(&plan, *i_max)?;
            let params = format!("L={}", sampling.length);
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            for i in 1..=*i_max {
                for j in i..=*i_max {
                    t.push(estimate_row(format!("L_cov_eps_{i}_{j}"), &params, c.at(i, j), c.used, c.excluded + c.skipped));
                }
            }
            for (i, w) in want.iter().enumerate() {
                t.push(vec![
                    format!("predicted_L_var_eps_{}", i + 1).into(),
                    params.as_str().into(),
                    (*w).into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]);
            }
            Ok(t)
        }
        Command::SumRuleCheck { sampling, capacity, time, weight } => {
            let plan = sampling_plan(sampling, *capacity, *time)?;
            let w = match weight {
                WeightArg::Abs => Weight::Abs,
                WeightArg::Square => Weight::Square,
            };
            let s = sum_rule_check(&plan, w, &ctx.exec)?;
            let name = match weight {
                WeightArg::Abs => "abs",
                WeightArg::Square => "square",
            };
            let params = format!("l={capacity};t={time};L={};weight={name}", sampling.length);
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            t.push(estimate_row("lhs", &params, s.lhs, s.used, s.skipped));
            t.push(estimate_row("rhs", &params, s.rhs, s.used, s.skipped));
            t.push(estimate_row("difference", &params, s.difference, s.used, s.skipped));
            if w == Weight::Square {
                t.push(estimate_row("drude_estimate", &params, s.drude_estimate(), s.used, s.skipped));
            }
            t.push(vec![
                "z_score".into(),
                params.as_str().into(),
                s.z_score().into(),
                Cell::Empty,
                s.used.into(),
                s.skipped.into(),
            ]);
            Ok(t)
        }
    }
}

fn matrix_table(m: &DMatrix<f64>) -> Table {
    let mut t = Table::new(&["row", "column", "value"]);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.push(vec![(i + 1).into(), (j + 1).into(), m[(i, j)].into()]);
        }
    }
    t
}

fn evolve(source: &ConfigSource, capacity: u32, steps: u64) -> Result<Table> {
    let mut c = source.configuration()?;
    let mut t = Table::new(&["step", "configuration", "carrier_loads"]);
    t.push(vec![0u64.into(), c.to_string().into(), Cell::Empty]);
    for s in 1..=steps {
        let (next, trace) = evolve_periodic(&c, capacity)?;
        let loads: Vec<String> = trace.loads().iter().map(u32::to_string).collect();
        t.push(vec![s.into(), next.to_string().into(), loads.join(" ").into()]);
        c = next;
    }
    Ok(t)
}

fn energies(source: &ConfigSource, max_k: Option<u32>) -> Result<Table> {
    let c = source.configuration()?;
    let mut es: Vec<u64> = Vec::new();
    match max_k {
        Some(k) => {
            for k in 1..=k {
                es.push(energy(&c, k)?);
            }
        }
        None => {
            for k in 1..=c.len() as u32 + 1 {
                let e = energy(&c, k)?;
                let done = e == 0 || es.last() == Some(&e);
                es.push(e);
                if done {
                    break;
                }
            }
        }
    }
    let spec = EnergySpectrum::new(c.len(), es);
    let content = soliton_content(&spec).ok();
    let mut t = Table::new(&["k", "energy", "solitons", "pseudoenergy"]);
    for (k, &e) in spec.energies().iter().enumerate() {
        let k = k + 1;
        let m = content.as_ref().and_then(|m| m.get(k - 1)).map_or(Cell::Empty, |&m| m.into());
        let eps = pseudoenergy(&spec, k).map_or(Cell::Empty, Cell::Real);
        t.push(vec![k.into(), e.into(), m, eps]);
    }
    Ok(t)
}

fn ldf(state: &StateArgs, capacity: Capacity, grid: &str) -> Result<Table> {
    let z = state.product_fugacity()?;
    let (name, points) = parse_grid(grid)?;
    match name.as_str() {
        "j" => {
            let mut t = Table::new(&["j", "G", "lambda"]);
            for j in points {
                let r = rate(z, capacity, j)?;
                t.push(vec![j.into(), r.value.into(), r.multiplier.into()]);
            }
            Ok(t)
        }
        "lambda" => {
            let mut t = Table::new(&["lambda", "F", "dF", "d2F"]);
            for lam in points {
                let p = scgf(z, capacity, lam)?;
                t.push(vec![lam.into(), p.value.into(), p.derivative.into(), p.second.into()]);
            }
            Ok(t)
        }
        other => Err(invalid(format!("unknown grid variable `{other}`; use j or lambda"))),
    }
}

fn write_theory(
    path: &Path,
    state: &StateArgs,
    l: u32,
    time: u64,
    mean: f64,
    variance: f64,
    ctx: &RunContext<'_>,
) -> Result<()> {
    let z = state.product_fugacity()?;
    let theory = rate_function_curve(z, l, time)?;
    let gauss = gaussian_curve(mean, variance, l as u64 * time);
    let mut t = Table::new(&["N", "theory", "gaussian"]);
    for ((n, p), (_, g)) in theory.into_iter().zip(gauss) {
        t.push(vec![n.into(), p.into(), g.into()]);
    }
    t.emit(Some(path), ctx.format, ctx.manifest)
        .with_context(|| format!("writing {}", path.display()))
}
