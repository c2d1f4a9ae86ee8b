//! Running scenarios and rendering their reports as JSON or aligned tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cech::{CapPolicy, StabilizationSummary};
use crate::error::{Error, Result};
use crate::matlis::bidual_pipeline;
use crate::scenario::{CheckKind, CheckSpec, Scenario, SequenceGluing, SheafRef, SheafSpec};
use crate::scheme::{flat_sections_defect_with, witness_in, DoubleGluedScheme, ExactnessReport, QcohSheafOnX, SheafMap};

pub type Table = BTreeMap<i64, i64>;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub tables: BTreeMap<String, Table>,
    pub flags: Vec<String>,
    pub verdict: String,
}

/// Everything a scenario run produced, in scenario order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub window: [i64; 2],
    pub checks: Vec<CheckResult>,
    pub version: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// How a report compares against the scenario's expectations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    AsExpected,
    Mismatch(Vec<String>),
    Inconclusive(Vec<String>),
    Failed(Vec<String>),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::AsExpected => 0,
            Outcome::Mismatch(_) => 1,
            Outcome::Inconclusive(_) => 2,
            Outcome::Failed(_) => 3,
        }
    }
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Errors take precedence, then definite mismatches, then inconclusive checks.
    pub fn outcome(&self, expect: &BTreeMap<String, String>) -> Outcome {
        let names = |v: &str| -> Vec<String> {
            self.checks.iter().filter(|c| c.verdict == v).map(|c| c.name.clone()).collect()
        };
        let failed = names("error");
        if !failed.is_empty() {
            return Outcome::Failed(failed);
        }
        let mismatched: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.verdict != "inconclusive")
            .filter(|c| expect.get(&c.name).is_some_and(|e| *e != c.verdict))
            .map(|c| c.name.clone())
            .collect();
        if !mismatched.is_empty() {
            return Outcome::Mismatch(mismatched);
        }
        let inconclusive = names("inconclusive");
        if !inconclusive.is_empty() {
            return Outcome::Inconclusive(inconclusive);
        }
        Outcome::AsExpected
    }
}

pub fn version_string() -> String {
    format!("qcoh {}", env!("CARGO_PKG_VERSION"))
}

fn table(t: &BTreeMap<i64, usize>) -> Table {
    t.iter().map(|(&d, &v)| (d, v as i64)).collect()
}

fn degrees_flag(key: &str, degrees: &[i64]) -> String {
    let list: Vec<String> = degrees.iter().map(i64::to_string).collect();
    format!("{key}={}", list.join(","))
}

fn nonzero_degrees(t: &BTreeMap<i64, usize>) -> Vec<i64> {
    t.iter().filter(|(_, &v)| v > 0).map(|(&d, _)| d).collect()
}

fn status_flag(status: &StabilizationSummary) -> String {
    status.flag()
}

/// Shared state for running the checks of one scenario.
struct Runner<'a> {
    scenario: &'a Scenario,
    scheme: Arc<DoubleGluedScheme>,
    policy: CapPolicy,
    lo: i64,
    hi: i64,
}

impl Runner<'_> {
    fn sheaf(&self, r: &SheafRef) -> Result<Arc<QcohSheafOnX>> {
        let x = &self.scheme;
        match r {
            SheafRef::Module(m) => Ok(x.glued(m, self.scenario.module(m)?)),
            SheafRef::Sheaf(name) => {
                let spec = self.scenario.sheaves.get(name).ok_or_else(|| Error::UnknownName(name.clone()))?;
                Ok(match spec {
                    SheafSpec::Glue { u, v } if u == v => x.glued(name, self.scenario.module(u)?),
                    SheafSpec::Glue { u, v } => x.glued_pair(name, self.scenario.module(u)?, self.scenario.module(v)?),
                    SheafSpec::DirectImage { module } => x.direct_image_from_u(name, self.scenario.module(module)?),
                })
            }
        }
    }

    fn sequence(&self, f: &str, g: &str, gluing: SequenceGluing) -> Result<(Arc<SheafMap>, Arc<SheafMap>)> {
        let (fd, gd) = (self.scenario.map(f)?, self.scenario.map(g)?);
        let make = |name: &str| -> Result<Arc<QcohSheafOnX>> {
            let m = self.scenario.module(name)?;
            Ok(match gluing {
                SequenceGluing::Glue => self.scheme.glued(name, m),
                SequenceGluing::DirectImage => self.scheme.direct_image_from_u(name, m),
            })
        };
        let (a, b, c) = (make(&fd.source)?, make(&fd.target)?, make(&gd.target)?);
        let fm = SheafMap::new(a, b.clone(), fd.map.clone())?;
        let gm = SheafMap::new(b, c, gd.map.clone())?;
        Ok((fm, gm))
    }

    /// Names of `A`, `B`, `C` in `A -f-> B -g-> C`.
    fn objects(&self, f: &str, g: &str) -> Result<[String; 3]> {
        let (fd, gd) = (self.scenario.map(f)?, self.scenario.map(g)?);
        Ok([fd.source.clone(), fd.target.clone(), gd.target.clone()])
    }

    /// Tables of `A -> B -> C`, with the objects keyed by `names`.
    fn sequence_tables(&self, prefix: &str, names: [&str; 3], r: &ExactnessReport, out: &mut CheckResult) {
        let reserved = ["ker", "homology", "coker"];
        let clash = |i: usize| reserved.contains(&names[i]) || names.iter().enumerate().any(|(j, n)| j != i && *n == names[i]);
        let labels: Vec<String> =
            (0..3).map(|i| if clash(i) { format!("{}#{}", names[i], i + 1) } else { names[i].to_string() }).collect();
        for (name, t) in [
            (labels[0].as_str(), &r.dims_a),
            (labels[1].as_str(), &r.dims_b),
            (labels[2].as_str(), &r.dims_c),
            ("ker", &r.kernel),
            ("homology", &r.homology),
            ("coker", &r.cokernel),
        ] {
            out.tables.insert(format!("{prefix}{name}"), table(t));
        }
        if let Some(cap) = r.cap {
            out.flags.push(format!("{prefix}{}", self.policy.flag(cap)));
        }
        out.flags.push(format!("{prefix}{}", status_flag(&r.status)));
        if !r.composite_zero {
            out.flags.push(format!("{prefix}composite-nonzero"));
        }
        for (key, t) in [("ker", &r.kernel), ("homology", &r.homology), ("coker", &r.cokernel)] {
            let degrees = nonzero_degrees(t);
            if !degrees.is_empty() {
                out.flags.push(degrees_flag(&format!("{prefix}{key}-nonzero-degrees"), &degrees));
            }
        }
    }

    fn run(&self, check: &CheckSpec) -> Result<CheckResult> {
        let (lo, hi) = (self.lo, self.hi);
        let mut out =
            CheckResult { name: check.name.clone(), tables: BTreeMap::new(), flags: Vec::new(), verdict: String::new() };
        let x = &self.scheme;
        match &check.kind {
            CheckKind::Sections { target, open } => {
                let s = self.sheaf(target)?;
                let t = x.sheaf_sections(&s, *open, lo, hi, &self.policy)?;
                out.tables.insert("sections".into(), table(&t.dims));
                out.flags.push(format!("open={open}"));
                if let Some(cap) = t.cap {
                    out.flags.push(self.policy.flag(cap));
                }
                out.flags.push(status_flag(&t.status));
                out.verdict = "computed".into();
            }
            CheckKind::H1 { module } => {
                let m = self.scenario.module(module)?;
                let stable = crate::cech::cech_stable_on(
                    &x.cover(&m),
                    lo,
                    hi,
                    &self.policy,
                    crate::cech::StableOn::H1,
                )?;
                out.tables.insert("H1".into(), table(&stable.table.h1));
                out.flags.extend(stable.flags(&self.policy));
                out.flags.push("cech-signs=(d0 s)_ij=s_j-s_i;(d1 c)_ijk=c_jk-c_ik+c_ij".into());
                let degrees = nonzero_degrees(&stable.table.h1);
                out.verdict = if degrees.is_empty() {
                    "h1-zero-in-window".into()
                } else {
                    out.flags.push(degrees_flag("h1-nonzero-degrees", &degrees));
                    "h1-nonzero".into()
                };
            }
            CheckKind::Obstruction { target } => {
                let s = self.sheaf(target)?;
                let cert = x.flat_quotient_obstruction(&s, lo, hi, &self.policy)?;
                out.tables.insert("sections".into(), table(&cert.sections));
                out.tables.insert("image".into(), table(&cert.image));
                out.tables.insert("codim".into(), table(&cert.codim));
                out.flags.push(self.policy.flag(cert.cap));
                out.flags.push(status_flag(&cert.status));
                out.flags.push(format!("generator-degrees={}:{}", cert.generator_range.0, cert.generator_range.1));
                let degrees = cert.obstructed_degrees();
                out.verdict = if degrees.is_empty() {
                    "no-obstruction-in-window".into()
                } else {
                    out.flags.push(degrees_flag("obstructed-degrees", &degrees));
                    "obstructed".into()
                };
            }
            CheckKind::StarSequence { f, g, gluing, open } => {
                let (fm, gm) = self.sequence(f, g, *gluing)?;
                let r = x.sequence_report(&fm, &gm, *open, lo, hi, &self.policy)?;
                out.flags.push(format!("open={open}"));
                let [a, b, c] = self.objects(f, g)?;
                self.sequence_tables("", [&a, &b, &c], &r, &mut out);
                out.verdict = r.verdict().as_str().into();
            }
            CheckKind::Bidual { f, g, gluing } => {
                let (fm, gm) = self.sequence(f, g, *gluing)?;
                let r = bidual_pipeline(x, &fm, &gm, lo, hi, &self.policy)?;
                let [a, b, c] = self.objects(f, g)?;
                let plus = [format!("{c}+"), format!("{b}+"), format!("{a}+")];
                let plusplus = [format!("{a}++"), format!("{b}++"), format!("{c}++")];
                self.sequence_tables("U+/", [&plus[0], &plus[1], &plus[2]], &r.plus_over_u, &mut out);
                out.flags.push(format!("U+/verdict={}", r.plus_over_u.verdict().as_str()));
                self.sequence_tables("V++/", [&plusplus[0], &plusplus[1], &plusplus[2]], &r.plusplus_over_v, &mut out);
                out.verdict = r.plusplus_over_v.verdict().as_str().into();
            }
            CheckKind::Lemma21 { modules } => {
                let ring_cover = x.cover(&x.structure_module());
                let mut status = StabilizationSummary::default();
                let mut max_cap = 0;
                let mut defective = Vec::new();
                for name in modules {
                    let m = self
                        .scenario
                        .modules
                        .get(name)
                        .ok_or_else(|| Error::UnknownName(name.clone()))?;
                    let t = flat_sections_defect_with(m, &ring_cover, lo, hi, &self.policy)?;
                    status.merge(t.status);
                    max_cap = max_cap.max(t.cap);
                    if modules.len() == 1 {
                        out.tables.insert("tensor".into(), table(&t.tensor));
                        out.tables.insert("sections".into(), table(&t.sections));
                        out.tables.insert("kernel".into(), table(&t.kernel));
                        out.tables.insert("cokernel".into(), table(&t.cokernel));
                    }
                    let degrees = nonzero_degrees(&t.defect);
                    if !degrees.is_empty() {
                        defective.push(format!("{name}@{}", degrees.iter().map(i64::to_string).collect::<Vec<_>>().join(",")));
                    }
                    out.tables.insert(format!("{name}/defect"), table(&t.defect));
                }
                out.flags.push(format!("modules={}", modules.len()));
                out.flags.push(self.policy.flag(max_cap));
                out.flags.push(status_flag(&status));
                out.verdict = if defective.is_empty() {
                    "no-defect-in-window".into()
                } else {
                    out.flags.push(format!("defect-in={}", defective.join(";")));
                    "defect".into()
                };
            }
            CheckKind::NonaffineWitness { module } => {
                let m = self.scenario.module(module)?;
                let stable = crate::cech::cech_stable_on(
                    &x.cover(&m),
                    lo,
                    hi,
                    &self.policy,
                    crate::cech::StableOn::H1,
                )?;
                out.tables.insert("H1".into(), table(&stable.table.h1));
                out.flags.extend(stable.flags(&self.policy));
                match witness_in(&stable) {
                    Some(w) => {
                        out.flags.push(format!("witness={} at degree {}", w.representative, w.degree));
                        out.flags.push(format!("not-a-coboundary={}", w.not_a_coboundary));
                        out.verdict =
                            if w.not_a_coboundary { "witness-found".into() } else { "no-witness-in-window".into() };
                    }
                    None => out.verdict = "no-witness-in-window".into(),
                }
            }
        }
        Ok(out)
    }
}

fn failed(check: &CheckSpec, err: &Error) -> CheckResult {
    let verdict = match err {
        Error::CapExhausted { .. } => "inconclusive",
        _ => "error",
    };
    CheckResult { name: check.name.clone(), tables: BTreeMap::new(), flags: vec![format!("error={err}")], verdict: verdict.into() }
}

/// Runs every check, concurrently, and assembles the results in scenario order.
pub fn run_scenario(s: &Scenario) -> Report {
    let (lo, hi) = s.window;
    let mut policy = CapPolicy::for_window(lo, hi);
    if let Some(cap) = s.den_cap {
        policy = policy.with_initial(cap);
    }
    let runner = Runner { scenario: s, scheme: DoubleGluedScheme::new(s.cover.clone()), policy, lo, hi };
    let checks = std::thread::scope(|scope| {
        let handles: Vec<_> = s.checks.iter().map(|c| scope.spawn(|| runner.run(c))).collect();
        handles
            .into_iter()
            .zip(&s.checks)
            .map(|(h, c)| match h.join() {
                Ok(Ok(r)) => r,
                Ok(Err(e)) => failed(c, &e),
                Err(_) => failed(c, &Error::InvalidInput("internal panic".into())),
            })
            .collect()
    });
    Report { scenario: s.name.clone(), window: [lo, hi], checks, version: version_string() }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => emit_table(r),
    }
}

fn emit_table(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", r.scenario);
    let _ = writeln!(out, "window: {}:{}", r.window[0], r.window[1]);
    let _ = writeln!(out, "version: {}", r.version);
    for c in &r.checks {
        let _ = writeln!(out);
        let _ = writeln!(out, "check: {}", c.name);
        let _ = writeln!(out, "verdict: {}", c.verdict);
        for f in &c.flags {
            let _ = writeln!(out, "flag: {f}");
        }
        if c.tables.is_empty() {
            continue;
        }
        let degrees: Vec<i64> = {
            let mut all: Vec<i64> = c.tables.values().flat_map(|t| t.keys().copied()).collect();
            all.sort_unstable();
            all.dedup();
            all
        };
        let label_width = c.tables.keys().map(|k| k.chars().count()).max().unwrap_or(0).max("degree".len());
        let cell = |t: Option<&i64>| t.map_or_else(|| "-".to_string(), i64::to_string);
        let width = degrees
            .iter()
            .map(|d| d.to_string().len())
            .chain(c.tables.values().flat_map(|t| t.values().map(|v| v.to_string().len())))
            .max()
            .unwrap_or(1);
        let pad = |s: &str, w: usize| format!("{}{s}", " ".repeat(w.saturating_sub(s.chars().count())));
        let mut line = format!("{:<label_width$}", "degree");
        for d in &degrees {
            line.push(' ');
            line.push_str(&pad(&d.to_string(), width));
        }
        let _ = writeln!(out, "{}", line.trim_end());
        for (name, t) in &c.tables {
            let mut line = format!("{}{}", name, " ".repeat(label_width - name.chars().count()));
            for d in &degrees {
                line.push(' ');
                line.push_str(&pad(&cell(t.get(d)), width));
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    }
    out
}

/// Reads the tables back out of the table format.
pub fn parse_table_output(text: &str) -> BTreeMap<String, BTreeMap<String, Table>> {
    let mut out: BTreeMap<String, BTreeMap<String, Table>> = BTreeMap::new();
    let mut check = None::<String>;
    let mut degrees: Vec<i64> = Vec::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("check: ") {
            check = Some(name.to_string());
            out.entry(name.to_string()).or_default();
            degrees.clear();
            continue;
        }
        let Some(c) = &check else { continue };
        if line.starts_with("verdict: ") || line.starts_with("flag: ") || line.trim().is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let Some(label) = words.next() else { continue };
        if label == "degree" {
            degrees = words.filter_map(|w| w.parse().ok()).collect();
            continue;
        }
        let t: Table = degrees
            .iter()
            .zip(words)
            .filter_map(|(&d, w)| w.parse::<i64>().ok().map(|v| (d, v)))
            .collect();
        out.entry(c.clone()).or_default().insert(label.to_string(), t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, parse_scenario, Overrides};

    fn small() -> Overrides {
        Overrides { window: Some((-3, 3)), ..Overrides::default() }
    }

    #[test]
    fn empty_check_scenario() {
        let s = parse_scenario("[ring]\nvars = x, y\n[scheme]\ncover = x; y\n").unwrap();
        let r = run_scenario(&s);
        assert!(r.checks.is_empty());
        let json = emit_report(&r, Format::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["checks"], serde_json::json!([]));
        assert_eq!(r.outcome(&s.expect), Outcome::AsExpected);
    }

    #[test]
    fn h1_punctured_small_window() {
        let s = builtin("h1-punctured", &small()).unwrap();
        let r = run_scenario(&s);
        let h1 = &r.check("h1-structure").unwrap().tables["H1"];
        assert_eq!(h1.get(&-2), Some(&1));
        assert_eq!(h1.get(&-3), Some(&2));
        let w = r.check("witness-structure").unwrap();
        assert!(w.flags.contains(&"witness=x^-1*y^-1 on D(x*y) at degree -2".to_string()), "{:?}", w.flags);
        assert_eq!(r.outcome(&s.expect), Outcome::AsExpected, "{r:#?}");
    }

    #[test]
    fn table_round_trips_json() {
        let s = builtin("sections-star", &small()).unwrap();
        let r = run_scenario(&s);
        let parsed = parse_table_output(&emit_report(&r, Format::Table));
        for c in &r.checks {
            assert_eq!(parsed[&c.name], c.tables);
        }
    }

    #[test]
    fn cap_exhaustion_is_inconclusive() {
        let mut s = builtin("sections-star", &small()).unwrap();
        s.checks.retain(|c| c.name == "star-over-W");
        let check = &s.checks[0];
        let r = failed(check, &Error::CapExhausted { max_cap: 3 });
        assert_eq!(r.verdict, "inconclusive");
        let rep = Report { scenario: s.name.clone(), window: [-3, 3], checks: vec![r], version: version_string() };
        assert_eq!(rep.outcome(&s.expect).exit_code(), 2);
    }

    #[test]
    fn mismatch_is_reported() {
        let mut s = builtin("sections-star", &small()).unwrap();
        s.expect.insert("star-over-U".into(), "not-left-exact".into());
        let r = run_scenario(&s);
        assert_eq!(r.outcome(&s.expect), Outcome::Mismatch(vec!["star-over-U".into()]));
    }

    #[test]
    fn repeated_objects_keep_separate_tables() {
        let text = "[scenario]\nwindow = -1:1\n[ring]\nvars = x, y\n[scheme]\ncover = x; y\n\
                    [map one: R -> R]\nimage = 1\n[map zero: R -> R]\nimage = 0\n\
                    [check s: star-sequence]\nmaps = one, zero\nopen = U\n";
        let r = run_scenario(&parse_scenario(text).unwrap());
        let c = &r.checks[0];
        assert_eq!(c.verdict, "left-exact-not-right-exact");
        for label in ["R#1", "R#2", "R#3", "ker", "homology", "coker"] {
            assert!(c.tables.contains_key(label), "{label}");
        }
    }

    #[test]
    fn buffer_errors_are_error_verdicts() {
        let text = "[scenario]\nwindow = 0:1\n[ring]\nvars = x, y\n[scheme]\ncover = x; y\n\
                    [module M]\ngens = 9\n[sheaf M]\ndirect_image = M\n[check o: obstruction]\nsheaf = M\n";
        let s = parse_scenario(text).unwrap();
        let r = run_scenario(&s);
        assert_eq!(r.checks[0].verdict, "error");
        assert_eq!(r.outcome(&s.expect).exit_code(), 3);
    }
}
