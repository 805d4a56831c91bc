//! Parameter sweeps over one axis, figure presets and table output.

pub mod config;
pub mod emit;
pub mod presets;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, PolaritonSpec};
use crate::propagator::{self, Solution};
use crate::thermo::{self, ThermoRecord};

pub use config::{load_config, parse_config};
pub use emit::{write_plan_results, write_table, Format};
pub use presets::{figure_presets, preset};

/// Observables that may be listed under `outputs`.
pub const OUTPUT_NAMES: &[&str] = &[
    "E_TLS", "E_pho", "E_int", "E_total", "Qdot_X", "Qdot_P", "Wdot_X", "Wdot_P", "Wbar", "Qbar_irr", "Qdot_irrev",
    "Eff", "S", "Sdot_X", "Sdot_P", "Sdot_dX", "Sdot_dP",
];

/// Default upper limit on m_o when the truncation is allowed to grow.
pub const DEFAULT_MAX_MO: usize = 24;

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    V,
    Chi,
    AX,
    AP,
    /// Γ_P with Γ_X = Γ_P/2.
    GammaPLinked,
    /// A_X = α with A_P = 0.
    AlphaX,
    /// A_P = α with A_X = 0.
    AlphaP,
}

impl Axis {
    pub const ALL: [Axis; 7] =
        [Axis::V, Axis::Chi, Axis::AX, Axis::AP, Axis::GammaPLinked, Axis::AlphaX, Axis::AlphaP];

    pub fn key(self) -> &'static str {
        match self {
            Axis::V => "V",
            Axis::Chi => "chi",
            Axis::AX => "A_X",
            Axis::AP => "A_P",
            Axis::GammaPLinked => "Gamma_P_linked",
            Axis::AlphaX => "alpha_X",
            Axis::AlphaP => "alpha_P",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.key() == s)
    }

    /// `base` with the axis parameter set to `value`.
    pub fn apply(self, base: &PolaritonSpec, value: f64) -> PolaritonSpec {
        let mut s = base.clone();
        match self {
            Axis::V => s.coupling = Complex64::new(value, 0.0),
            Axis::Chi => s.chi = value,
            Axis::AX => s.a_x = value,
            Axis::AP => s.a_p = value,
            Axis::GammaPLinked => {
                s.gamma_p = value;
                s.gamma_x = value / 2.0;
            }
            Axis::AlphaX => {
                s.a_x = value;
                s.a_p = 0.0;
            }
            Axis::AlphaP => {
                s.a_x = 0.0;
                s.a_p = value;
            }
        }
        s
    }
}

/// One series: a base spec swept along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: PolaritonSpec,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub outputs: Vec<String>,
    /// Series tag used in file names, e.g. `chi3e-5`.
    pub label: String,
    pub adaptive_mo: bool,
    pub max_mo: usize,
}

impl SweepConfig {
    pub fn new(base: PolaritonSpec, axis: Axis, values: Vec<f64>) -> Self {
        Self {
            base,
            axis,
            values,
            outputs: OUTPUT_NAMES.iter().map(|s| s.to_string()).collect(),
            label: String::new(),
            adaptive_mo: false,
            max_mo: DEFAULT_MAX_MO,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_outputs(mut self, outputs: &[&str]) -> Self {
        self.outputs = outputs.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidParameter { key, reason } => Error::Validation { key, reason },
            other => other,
        };
        config::check_values(&self.values)?;
        self.base.validate().map_err(wrap)?;
        for &v in &self.values {
            self.axis.apply(&self.base, v).validate().map_err(wrap)?;
        }
        if self.adaptive_mo && self.max_mo < self.base.m_o {
            return Err(Error::Validation { key: "max_mo".into(), reason: "must be ≥ m_o".into() });
        }
        Ok(())
    }

    /// Spec of the `k`-th point.
    pub fn point(&self, k: usize) -> PolaritonSpec {
        self.axis.apply(&self.base, self.values[k])
    }
}

/// A named set of series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub name: String,
    /// Free-form notes carried into output metadata.
    pub notes: String,
    pub series: Vec<SweepConfig>,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        self.series.iter().try_for_each(SweepConfig::validate)
    }

    /// Applies a closure to every series' base spec.
    pub fn map_base(&mut self, f: impl Fn(&mut PolaritonSpec)) {
        for s in &mut self.series {
            f(&mut s.base);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Worker threads; 0 picks the number of logical cores.
    pub workers: usize,
    /// Also solve each point with the direct integrator.
    pub oracle: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 0, oracle: false }
    }
}

/// Direct-integrator comparison for one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleColumns {
    pub e_total_direct: f64,
    /// |E_total − E_total_direct| / |E_total_direct|
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_value: f64,
    pub spec: PolaritonSpec,
    pub record: Option<ThermoRecord>,
    pub oracle: Option<OracleColumns>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub axis: Axis,
    pub label: String,
    pub outputs: Vec<String>,
    pub rows: Vec<Row>,
    pub oracle: bool,
}

impl ResultTable {
    /// Values of one record field over the rows; NaN where a point failed.
    pub fn column(&self, f: impl Fn(&ThermoRecord) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| r.record.as_ref().map(&f).unwrap_or(f64::NAN)).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn oracle_for(solution: &Solution, e_total: f64) -> Result<OracleColumns> {
    let gen = &solution.generators;
    let rho0 = model::gibbs_state(&gen.spectrum, solution.spec.t_env);
    let dt = propagator::default_dt(solution.spec.omega_drive);
    let direct = propagator::stationary_direct(gen, &solution.energy_ops, &rho0, solution.spec.t_final, dt)?;
    let e = thermo::energies(direct.state.matrix(), &solution.energy_ops, &gen.spectrum).e_total;
    Ok(OracleColumns { e_total_direct: e, rel_diff: (e_total - e).abs() / e.abs() })
}

/// Solves one point and evaluates its observables.
pub fn run_point(spec: &PolaritonSpec, adaptive_mo: bool, max_mo: usize, oracle: bool) -> Result<(ThermoRecord, Option<OracleColumns>)> {
    let solution = propagator::solve(spec, adaptive_mo.then_some(max_mo))?;
    let record = thermo::evaluate(&solution)?;
    let oracle = if oracle { Some(oracle_for(&solution, record.e_total)?) } else { None };
    Ok((record, oracle))
}

/// Runs every point of one series. Per-point failures are kept in the
/// table; only a sweep where every point fails is an error.
pub fn run_sweep(cfg: &SweepConfig, opts: RunOptions) -> Result<ResultTable> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .expect("thread pool construction");
    let rows: Vec<Row> = pool.install(|| {
        (0..cfg.values.len())
            .into_par_iter()
            .map(|k| {
                let spec = cfg.point(k);
                let (record, oracle, error) = match run_point(&spec, cfg.adaptive_mo, cfg.max_mo, opts.oracle) {
                    Ok((r, o)) => (Some(r), o, None),
                    Err(e) => (None, None, Some(e.to_string())),
                };
                Row { axis_value: cfg.values[k], spec, record, oracle, error }
            })
            .collect()
    });
    if !rows.is_empty() && rows.iter().all(|r| r.error.is_some()) {
        return Err(Error::AllPointsFailed { first: rows[0].error.clone().unwrap_or_default() });
    }
    Ok(ResultTable { axis: cfg.axis, label: cfg.label.clone(), outputs: cfg.outputs.clone(), rows, oracle: opts.oracle })
}

/// Runs every series of a plan in order.
pub fn run_plan(plan: &SweepPlan, opts: RunOptions) -> Result<Vec<ResultTable>> {
    plan.series.iter().map(|s| run_sweep(s, opts)).collect()
}
