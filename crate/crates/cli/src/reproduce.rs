//! Recomputes the published comparison tables from embedded fixtures and
//! diffs every computed display string against the printed one.

use std::collections::BTreeMap;
use std::time::Instant;

use ctbounds::bounds::{compute_bounds, independence_heuristic, uniform_bounds_closed_form, BoundId};
use ctbounds::exact::count_tables;
use ctbounds::{CapMatrix, Error, Marginals};
use rayon::prelude::*;
use serde::Deserialize;

use crate::commands::{Common, Outcome};
use crate::report::{Record, Report, Status};
use crate::{exit, CliError};

pub const UNIFORM_FIXTURE: &str = include_str!("../fixtures/uniform_v1.json");
pub const GENERAL_FIXTURE: &str = include_str!("../fixtures/general_v1.json");

/// Exact-count budget used when `--budget` is absent and `--slow` is off.
pub const QUICK_BUDGET: u64 = 2_000_000;
/// Budget with `--slow`, enough for the 4x4 instance with `N = 592`.
pub const SLOW_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    /// Uniform marginals, closed forms.
    Uniform,
    /// Non-uniform marginals, solver-based.
    General,
}

#[derive(Debug, Clone, Deserialize)]
pub struct UniformCase {
    pub case: usize,
    pub m: u64,
    pub n: u64,
    pub s: u64,
    pub t: u64,
    pub expected: BTreeMap<String, String>,
    pub actual: String,
    pub actual_approximate: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GeneralCase {
    pub case: usize,
    #[serde(default)]
    pub label: Option<String>,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
    pub expected: BTreeMap<String, String>,
    /// Expected values for the all-ones cell bounds.
    #[serde(default)]
    pub binary: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub actual: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct Fixture<C> {
    version: u32,
    cases: Vec<C>,
}

fn load<C: for<'de> Deserialize<'de>>(text: &str) -> Vec<C> {
    let f: Fixture<C> = serde_json::from_str(text).expect("embedded fixture parses");
    assert_eq!(f.version, 1, "fixture version");
    f.cases
}

pub fn uniform_cases() -> Vec<UniformCase> {
    load(UNIFORM_FIXTURE)
}

pub fn general_cases() -> Vec<GeneralCase> {
    load(GENERAL_FIXTURE)
}

fn bound_id(key: &str) -> BoundId {
    key.parse().unwrap_or_else(|_| panic!("fixture bound id {key}"))
}

fn exact_budget(common: &Common) -> u64 {
    common.budget.unwrap_or(if common.slow { SLOW_BUDGET } else { QUICK_BUDGET })
}

fn actual_record(case: &str, m: &Marginals, k: &CapMatrix, expected: &str, common: &Common) -> Record {
    let t = Instant::now();
    match count_tables(m, k, exact_budget(common)) {
        Ok(c) => Record::new(case, "actual", c.count.to_logvalue(), common.digits)
            .exact(c.count.to_string())
            .seconds(t.elapsed().as_secs_f64())
            .expect(c.count.to_logvalue(), expected),
        Err(Error::ResourceLimit { budget, .. }) => {
            Record::reference(case, "actual", expected).note(format!("exact count exceeds the budget of {budget} states"))
        }
        Err(e) => Record::reference(case, "actual", expected).note(e.to_string()),
    }
}

pub fn uniform_case_records(c: &UniformCase, common: &Common) -> Result<Vec<Record>, CliError> {
    let name = format!("uniform/{}", c.case);
    let d = common.digits;
    let t = Instant::now();
    let u = uniform_bounds_closed_form(c.m, c.n, c.s, c.t)?;
    let secs = t.elapsed().as_secs_f64();
    let mut out = Vec::new();
    for (key, exp) in &c.expected {
        let id = bound_id(key);
        let marginals = Marginals::uniform(c.m as usize, c.n as usize, c.s, c.t)?;
        let value = match id {
            BoundId::Cti => independence_heuristic(&marginals),
            _ => u.get(id).expect("closed form available"),
        };
        let valid = match id {
            BoundId::Lb1 => u.lb1_valid,
            BoundId::Cti => false,
            _ => true,
        };
        out.push(Record::new(&name, key, value, d).valid(valid).seconds(secs).expect(value, exp));
    }
    if c.actual_approximate {
        out.push(Record::reference(&name, "actual", &c.actual).note("published value is an estimate"));
    } else {
        let m = Marginals::uniform(c.m as usize, c.n as usize, c.s, c.t)?;
        out.push(actual_record(&name, &m, &CapMatrix::infinite(c.m as usize, c.n as usize), &c.actual, common));
    }
    Ok(out)
}

pub fn general_case_records(c: &GeneralCase, common: &Common) -> Result<Vec<Record>, CliError> {
    let name = format!("general/{}", c.case);
    let d = common.digits;
    let marginals = Marginals::new(c.alpha.clone(), c.beta.clone())?;
    let (m, n) = (marginals.m(), marginals.n());
    let mut out = Vec::new();
    let mut run = |k: &CapMatrix, expected: &BTreeMap<String, String>| -> Result<(), CliError> {
        let which: Vec<BoundId> = expected.keys().map(|key| bound_id(key)).collect();
        let report = compute_bounds(&marginals, k, &which, &common.bounds_settings())?;
        for e in &report.entries {
            let mut rec = Record::new(&name, e.id.as_str(), e.value, d).valid(e.valid).note(e.note.clone()).seconds(e.seconds);
            if let Some(exp) = expected.get(e.id.as_str()) {
                rec = rec.expect(e.value, exp);
            }
            out.push(rec);
        }
        Ok(())
    };
    run(&CapMatrix::infinite(m, n), &c.expected)?;
    if let Some(binary) = &c.binary {
        run(&CapMatrix::ones(m, n), binary)?;
    }
    if let Some(actual) = &c.actual {
        out.push(actual_record(&name, &marginals, &CapMatrix::infinite(m, n), actual, common));
    }
    Ok(out)
}

pub fn cmd_reproduce(table: Table, case: Option<usize>, common: &Common) -> Result<Outcome, CliError> {
    let mut settings = common.settings_map();
    settings.insert("table".into(), format!("{table:?}").to_lowercase());
    let mut report = Report::new("reproduce", settings, None);
    let records: Vec<Result<Vec<Record>, CliError>> = match table {
        Table::Uniform => {
            let cases: Vec<UniformCase> = uniform_cases().into_iter().filter(|c| case.is_none_or(|k| k == c.case)).collect();
            check_selection(cases.len(), case)?;
            cases.par_iter().map(|c| uniform_case_records(c, common)).collect()
        }
        Table::General => {
            let cases: Vec<GeneralCase> = general_cases().into_iter().filter(|c| case.is_none_or(|k| k == c.case)).collect();
            check_selection(cases.len(), case)?;
            cases.par_iter().map(|c| general_case_records(c, common)).collect()
        }
    };
    for r in records {
        report.records.extend(r?);
    }
    let messages: Vec<String> = report
        .records
        .iter()
        .filter(|r| r.status == Some(Status::Mismatch))
        .map(|r| format!("mismatch {} {}: computed {}, expected {}", r.case, r.bound, r.display, r.expected.as_deref().unwrap_or("")))
        .collect();
    let code = if messages.is_empty() { exit::OK } else { exit::MISMATCH };
    Ok(Outcome { report, code, messages })
}

fn check_selection(found: usize, case: Option<usize>) -> Result<(), CliError> {
    if found == 0 {
        return Err(CliError::Input(format!("no case {} in this table", case.unwrap_or(0))));
    }
    Ok(())
}
