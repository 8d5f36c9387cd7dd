//! Handlers for `bounds`, `exact`, `volume` and `random`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ctbounds::bounds::{compute_bounds, BoundId, BoundsSettings, Orientation};
use ctbounds::capacity::{SolverSettings, DEFAULT_HN_BUDGET};
use ctbounds::exact::{self, count_tables, count_tables_brute};
use ctbounds::random::{marginal_probability_bounds, DistributionSpec};
use ctbounds::volume::{flow_volume_lower_bound, scaling_estimate, uniform_volume_closed_form};
use ctbounds::{Error, LogValue};

use crate::instance::InstanceFile;
use crate::report::{Format, Record, Report};
use crate::{core_exit_code, exit, CliError};

/// Flags shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct Common {
    pub which: Option<Vec<BoundId>>,
    pub orientation: Orientation,
    pub tol: f64,
    pub max_iter: usize,
    pub format: Format,
    pub digits: usize,
    /// Work budget for the exact counters; `None` uses each command's default.
    pub budget: Option<u64>,
    pub hn_budget: u64,
    pub jobs: Option<usize>,
    pub slow: bool,
}

impl Default for Common {
    fn default() -> Self {
        Common {
            which: None,
            orientation: Orientation::Best,
            tol: 1e-10,
            max_iter: 500,
            format: Format::Table,
            digits: 2,
            budget: None,
            hn_budget: DEFAULT_HN_BUDGET,
            jobs: None,
            slow: false,
        }
    }
}

impl Common {
    pub fn solver(&self) -> SolverSettings {
        SolverSettings { tol: self.tol, max_iter: self.max_iter, ..SolverSettings::default() }
    }

    pub fn bounds_settings(&self) -> BoundsSettings {
        BoundsSettings { solver: self.solver(), hn_budget: self.hn_budget, orientation: self.orientation }
    }

    pub fn settings_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("orientation".into(), format!("{:?}", self.orientation).to_lowercase());
        m.insert("tol".into(), self.tol.to_string());
        m.insert("max_iter".into(), self.max_iter.to_string());
        m.insert("digits".into(), self.digits.to_string());
        m.insert("hn_budget".into(), self.hn_budget.to_string());
        if let Some(b) = self.budget {
            m.insert("budget".into(), b.to_string());
        }
        if let Some(w) = &self.which {
            m.insert("which".into(), w.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(","));
        }
        m.insert("slow".into(), self.slow.to_string());
        m
    }
}

/// A finished command: the report to print, its exit code and diagnostics
/// for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
    pub messages: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Outcome {
        Outcome { report, code: exit::OK, messages: Vec::new() }
    }
}

fn case_name(inst: &InstanceFile, path: &Path) -> String {
    inst.name(&path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into()))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

pub fn cmd_bounds(path: &Path, common: &Common) -> Result<Outcome, CliError> {
    let inst = InstanceFile::load(path)?;
    let (marginals, k) = (inst.marginals()?, inst.caps()?);
    let explicit = common.which.is_some();
    let mut which = common.which.clone().unwrap_or_else(|| BoundId::DEFAULT.to_vec());
    if !explicit && k.is_graphical() {
        which.extend([BoundId::GurvitsLb, BoundId::GurvitsUb]);
    }
    let bounds = compute_bounds(&marginals, &k, &which, &common.bounds_settings())?;
    let case = case_name(&inst, path);
    let mut report = Report::new("bounds", common.settings_map(), Some(inst));
    let mut code = exit::OK;
    let mut messages = Vec::new();
    for e in &bounds.entries {
        report.records.push(
            Record::new(&case, e.id.as_str(), e.value, common.digits).valid(e.valid).note(e.note.clone()).seconds(e.seconds),
        );
        if let Some(err) = &e.error {
            messages.push(format!("{}: {err}", e.id));
            // Budget overruns of bounds nobody asked for are reported, not fatal.
            let soft = !explicit && matches!(err, Error::ResourceLimit { .. });
            if code == exit::OK && !soft {
                code = core_exit_code(err);
            }
        }
    }
    Ok(Outcome { report, code, messages })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Dp,
    Brute,
}

pub fn cmd_exact(path: &Path, method: Method, common: &Common) -> Result<Outcome, CliError> {
    let inst = InstanceFile::load(path)?;
    let (marginals, k) = (inst.marginals()?, inst.caps()?);
    let budget = common.budget.unwrap_or(exact::DEFAULT_BUDGET);
    let (res, secs) = timed(|| match method {
        Method::Dp => count_tables(&marginals, &k, budget),
        Method::Brute => count_tables_brute(&marginals, &k),
    });
    let res = res?;
    let case = case_name(&inst, path);
    let mut report = Report::new("exact", common.settings_map(), Some(inst));
    report.records.push(
        Record::new(&case, "exact", res.count.to_logvalue(), common.digits)
            .exact(res.count.to_string())
            .note(format!("{:?}, {} states", res.method, res.states_visited).to_lowercase())
            .seconds(secs),
    );
    Ok(Outcome::ok(report))
}

/// Scale used by the volume scaling oracle.
pub const VOLUME_ORACLE_SCALE: u64 = 2000;

pub fn cmd_volume(path: &Path, closed_form: bool, common: &Common) -> Result<Outcome, CliError> {
    let inst = InstanceFile::load(path)?;
    let (marginals, k) = (inst.marginals()?, inst.caps()?);
    let (bound, secs) = timed(|| flow_volume_lower_bound(&marginals, &k, common.solver()));
    let bound = bound?;
    let case = case_name(&inst, path);
    let d = common.digits;
    let mut report = Report::new("volume", common.settings_map(), Some(inst));
    let note = bound.note.clone().unwrap_or_default();
    report.records.push(Record::new(&case, "volume_lb", bound.value, d).note(note).seconds(secs));
    report.records.push(Record::new(&case, "covolume", bound.covolume, d));
    report.records.push(Record::new(&case, "capacity_part", bound.capacity_part, d));
    report.records.push(Record::new(&case, "prefactor", bound.prefactor, d));
    if closed_form {
        if marginals.is_uniform() && k.is_all_infinity() {
            let v = uniform_volume_closed_form(
                marginals.m() as u64,
                marginals.n() as u64,
                marginals.alpha()[0],
                marginals.beta()[0],
            )?;
            report.records.push(Record::new(&case, "uniform_closed_form", v, d));
        } else {
            report.records.push(
                Record::new(&case, "uniform_closed_form", LogValue::ZERO, d)
                    .valid(false)
                    .note("needs uniform marginals and unbounded cells"),
            );
        }
    }
    let mut messages = Vec::new();
    if common.slow {
        let budget = common.budget.unwrap_or(exact::DEFAULT_BUDGET);
        let (est, secs) = timed(|| scaling_estimate(&marginals, &k, VOLUME_ORACLE_SCALE, budget));
        match est {
            Ok(v) => report.records.push(
                Record::new(&case, "scaling_estimate", v, d)
                    .valid(false)
                    .note(format!("oracle at scale {VOLUME_ORACLE_SCALE}, not a bound"))
                    .seconds(secs),
            ),
            Err(e) => messages.push(format!("scaling estimate skipped: {e}")),
        }
    }
    Ok(Outcome { report, code: exit::OK, messages })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Dist {
    Binomial,
    Poisson,
}

/// Work limit for the exact probability shown next to the bounds.
const RANDOM_ORACLE_BUDGET: u64 = 1_000_000;

pub fn cmd_random(path: &Path, dist: Dist, s: f64, common: &Common) -> Result<Outcome, CliError> {
    let inst = InstanceFile::load(path)?;
    let (marginals, k) = (inst.marginals()?, inst.caps()?);
    let spec = match dist {
        Dist::Binomial => DistributionSpec::binomial(k.clone(), s)?,
        Dist::Poisson => DistributionSpec::poisson(marginals.m(), marginals.n(), s)?,
    };
    let (b, secs) = timed(|| marginal_probability_bounds(&marginals, &spec, common.orientation, common.solver()));
    let b = b?;
    let case = case_name(&inst, path);
    let d = common.digits;
    let mut report = Report::new("random", common.settings_map(), Some(inst));
    report.records.push(Record::new(&case, "ub", b.ub, d).seconds(secs));
    report.records.push(Record::new(&case, "lb", b.lb, d).seconds(secs));
    let budget = common.budget.unwrap_or(RANDOM_ORACLE_BUDGET);
    let mut messages = Vec::new();
    let (oracle, secs) = timed(|| match dist {
        Dist::Binomial => exact::exact_binomial_marginal_probability(&marginals, &k, s, budget)
            .map(|p| (LogValue::from_ln(p.ln), p.exact.map(|r| r.to_string()))),
        Dist::Poisson => {
            exact::exact_poisson_marginal_probability(&marginals, s, budget).map(|ln| (LogValue::from_ln(ln), None))
        }
    });
    match oracle {
        Ok((v, exact)) => {
            let mut rec = Record::new(&case, "exact", v, d).valid(true).seconds(secs).note("exact oracle");
            rec.exact = exact;
            report.records.push(rec);
        }
        Err(e) => messages.push(format!("exact oracle skipped: {e}")),
    }
    Ok(Outcome { report, code: exit::OK, messages })
}
