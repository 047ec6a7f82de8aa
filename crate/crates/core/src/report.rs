//! Report assembly behind the command-line subcommands.
//!
//! Every numeric value in a report is tagged `exact`, `rigorous-bound` or
//! `estimate`. Rationals are written as `"p/q"` strings with a decimal
//! rendering alongside that is for reading only.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::analysis;
use crate::catalog::{self, CatalogMap, SampledMap};
use crate::entropy::{self, EntropyBracket, EvidenceRow, Horseshoe, Limits, RateRow};
use crate::error::{Error, Result};
use crate::network::{self, GateProfile, NeuralNet};
use crate::periods::{self, Consistency, PeriodSet};
use crate::pwl::{self, PwlMap};
use crate::rational::{self, Rational};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_FLAGS: i32 = 4;
pub const EXIT_BOUND_VIOLATION: i32 = 5;

/// Process exit code for an error surfaced by a subcommand.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceLimit { .. } => EXIT_RESOURCE,
        Error::MalformedInput(_)
        | Error::NonRationalWeight(_)
        | Error::UnsupportedGate(_)
        | Error::DimensionMismatch(_)
        | Error::UnsortedBreakpoints
        | Error::LengthMismatch { .. }
        | Error::DomainMismatch(_)
        | Error::InvalidInterval(_)
        | Error::ParameterOutOfRange(_) => EXIT_PARSE,
        _ => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rigor {
    Exact,
    RigorousBound,
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tagged<T> {
    pub value: T,
    pub rigor: Rigor,
}

fn tag<T>(value: T, rigor: Rigor) -> Tagged<T> {
    Tagged { value, rigor }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: f64,
    pub rigor: Rigor,
}

fn exact(r: &Rational) -> ExactValue {
    ExactValue { exact: rational::format_rational(r), decimal: rational::to_f64(r), rigor: Rigor::Exact }
}

/// A resolved input: an exact map, a network (analysed as `τ ∘ g`), or a
/// sampled smooth map.
#[derive(Debug, Clone)]
pub enum Input {
    Map { descriptor: String, map: PwlMap },
    Network { descriptor: String, net: NeuralNet, map: PwlMap },
    Sampled { descriptor: String, map: SampledMap },
}

impl Input {
    pub fn descriptor(&self) -> &str {
        match self {
            Input::Map { descriptor, .. } | Input::Network { descriptor, .. } | Input::Sampled { descriptor, .. } => descriptor,
        }
    }

    pub fn pwl(&self) -> Option<&PwlMap> {
        match self {
            Input::Map { map, .. } | Input::Network { map, .. } => Some(map),
            Input::Sampled { .. } => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Input::Map { .. } => "map",
            Input::Network { .. } => "network",
            Input::Sampled { .. } => "sampled",
        }
    }
}

/// Interval on which networks are extracted and clamped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDomain {
    pub a: Rational,
    pub b: Rational,
}

impl Default for NetDomain {
    fn default() -> Self {
        NetDomain { a: rational::int(0), b: rational::int(1) }
    }
}

/// Parses JSON text as either a network (has `"layers"`) or a map file.
pub fn input_from_json(descriptor: &str, text: &str, domain: &NetDomain, limits: Limits) -> Result<Input> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    if value.get("layers").is_some() {
        let net = network::parse_network(text)?;
        let map = network::network_to_pwl(&net, &domain.a, &domain.b, true, Some(limits.max_segments))?;
        Ok(Input::Network { descriptor: descriptor.to_string(), net, map })
    } else {
        Ok(Input::Map { descriptor: descriptor.to_string(), map: pwl::parse_map_json(text)? })
    }
}

/// Resolves a file path or a catalog name.
pub fn load_input(source: &str, domain: &NetDomain, limits: Limits) -> Result<Input> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::MalformedInput(format!("{source}: {e}")))?;
        return input_from_json(source, &text, domain, limits);
    }
    match catalog::resolve(source, limits.max_segments)? {
        CatalogMap::Pwl(map) => Ok(Input::Map { descriptor: source.to_string(), map }),
        CatalogMap::Sampled(map) => Ok(Input::Sampled { descriptor: source.to_string(), map }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputInfo {
    pub kind: &'static str,
    pub descriptor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Tagged<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laps: Option<Tagged<usize>>,
}

fn evidence_columns() -> BTreeMap<&'static str, Rigor> {
    BTreeMap::from([
        ("k", Rigor::Exact),
        ("laps", Rigor::Exact),
        ("upper_bits", Rigor::RigorousBound),
        ("lipschitz_upper_bits", Rigor::RigorousBound),
        ("horseshoe_s", Rigor::Exact),
        ("lower_bits", Rigor::RigorousBound),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketReport {
    pub lower_bits: Tagged<f64>,
    pub upper_bits: Tagged<f64>,
    pub columns: BTreeMap<&'static str, Rigor>,
    pub evidence: Vec<EvidenceRow>,
    pub horseshoes: Vec<Horseshoe>,
}

impl From<&EntropyBracket> for BracketReport {
    fn from(b: &EntropyBracket) -> Self {
        BracketReport {
            lower_bits: tag(b.lower_bits, Rigor::RigorousBound),
            upper_bits: tag(b.upper_bits, Rigor::RigorousBound),
            columns: evidence_columns(),
            evidence: b.evidence.clone(),
            horseshoes: b.horseshoes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub columns: BTreeMap<&'static str, Rigor>,
    pub rows: Vec<RateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxCrossingReport {
    pub count: Tagged<usize>,
    pub witness_x: ExactValue,
    pub witness_y: ExactValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodsReport {
    pub rigor: Rigor,
    #[serde(flatten)]
    pub set: PeriodSet,
    pub sharkovsky: Consistency,
    pub positive_entropy_witness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledRow {
    pub k: usize,
    pub laps: u64,
    pub grid: usize,
    pub rate_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledReport {
    pub rigor: Rigor,
    pub rows: Vec<SampledRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shape {
    pub l: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub laps: Tagged<usize>,
    pub lower_bits: Tagged<f64>,
    pub upper_bits: Tagged<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub shape: Shape,
    pub profile: GateProfile,
    pub entropy_upper_bits: Tagged<f64>,
    /// Exact integer, as a decimal string.
    pub lap_bound: Tagged<String>,
    pub measured: Measured,
    pub lap_bound_satisfied: bool,
    pub entropy_bound_satisfied: bool,
    pub bound_satisfied: bool,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: InputInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_slope_bits: Option<Tagged<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_crossing: Option<MaxCrossingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<PeriodsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<SampledReport>,
    pub resource_limited: bool,
    pub notices: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, u128>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub k_max: usize,
    pub periods: Option<usize>,
    pub limits: Limits,
    pub timings: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { k_max: 8, periods: None, limits: Limits::default(), timings: false }
    }
}

fn notice(err: &Error, what: &str, rows: usize) -> String {
    format!("{what}: stopped after k = {rows} ({err})")
}

struct Clock {
    on: bool,
    marks: BTreeMap<&'static str, u128>,
}

impl Clock {
    fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.on {
            self.marks.insert(name, start.elapsed().as_millis());
        }
        out
    }
}

fn periods_report(f: &PwlMap, up_to: usize, limits: Limits) -> Result<PeriodsReport> {
    let set = periods::minimal_periods(f, up_to, limits)?;
    let sharkovsky = periods::sharkovsky_consistency(&set.periods, set.up_to);
    let positive_entropy_witness = periods::sharkovsky_witness(&set.periods);
    Ok(PeriodsReport { rigor: Rigor::Exact, set, sharkovsky, positive_entropy_witness })
}

pub fn cmd_analyze(input: &Input, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    if opts.k_max == 0 {
        return Err(Error::ParameterOutOfRange("--kmax must be at least 1".into()));
    }
    let mut clock = Clock { on: opts.timings, marks: BTreeMap::new() };
    let mut notices = Vec::new();
    let mut resource_limited = false;
    let mut report = AnalysisReport {
        input: InputInfo { kind: input.kind(), descriptor: input.descriptor().to_string(), segments: None, laps: None },
        bracket: None,
        constant_slope_bits: None,
        rates: None,
        max_crossing: None,
        periods: None,
        bound: None,
        sampled: None,
        resource_limited: false,
        notices: Vec::new(),
        timings_ms: None,
    };

    if let Input::Sampled { map, .. } = input {
        let rows = clock.time("sampled", || sampled_rows(map, opts.k_max, &mut notices));
        report.sampled = Some(SampledReport { rigor: Rigor::Estimate, rows });
        report.notices = notices;
        report.timings_ms = opts.timings.then_some(clock.marks);
        return Ok(report);
    }

    let f = input.pwl().unwrap();
    report.input.segments = Some(tag(f.segment_count(), Rigor::Exact));
    report.input.laps = Some(tag(analysis::lap_count(f).count(), Rigor::Exact));
    if !f.is_self_map() {
        return Err(Error::NotSelfMap);
    }
    let limits = opts.limits;

    let bracket = clock.time("bracket", || entropy::entropy_bracket(f, opts.k_max, limits));
    match bracket {
        Ok(b) => {
            if let Some(e) = &b.truncated {
                resource_limited = true;
                notices.push(notice(e, "entropy bracket", b.evidence.len()));
            }
            report.bracket = Some(BracketReport::from(&b));
        }
        Err(e @ Error::ResourceLimit { .. }) => {
            resource_limited = true;
            notices.push(notice(&e, "entropy bracket", 0));
        }
        Err(e) => return Err(e),
    }
    report.constant_slope_bits = entropy::constant_slope_entropy(f).ok().map(|h| tag(h, Rigor::Exact));

    match clock.time("rates", || entropy::rate_sequences(f, opts.k_max, limits)) {
        Ok(r) => {
            if let Some(e) = &r.truncated {
                resource_limited = true;
                notices.push(notice(e, "rate sequences", r.rows.len()));
            }
            let columns = BTreeMap::from([
                ("k", Rigor::Exact),
                ("max_crossing", Rigor::Exact),
                ("variation", Rigor::Exact),
                ("lipschitz", Rigor::Exact),
                ("crossing_rate", Rigor::Exact),
                ("variation_rate", Rigor::Exact),
                ("lipschitz_rate", Rigor::RigorousBound),
                ("lap_rate", Rigor::RigorousBound),
            ]);
            report.rates = Some(RateReport { columns, rows: r.rows });
        }
        Err(e @ Error::ResourceLimit { .. }) => {
            resource_limited = true;
            notices.push(notice(&e, "rate sequences", 0));
        }
        Err(e) => return Err(e),
    }

    let mc = clock.time("max_crossing", || analysis::max_crossing(f));
    report.max_crossing = Some(MaxCrossingReport {
        count: tag(mc.count, Rigor::Exact),
        witness_x: exact(&mc.witness_x),
        witness_y: exact(&mc.witness_y),
    });

    if let Some(n) = opts.periods {
        match clock.time("periods", || periods_report(f, n, limits)) {
            Ok(p) => {
                if let Some(e) = &p.set.truncated {
                    resource_limited = true;
                    notices.push(notice(e, "periods", p.set.up_to));
                }
                report.periods = Some(p);
            }
            Err(e @ Error::ResourceLimit { .. }) => {
                resource_limited = true;
                notices.push(notice(&e, "periods", 0));
            }
            Err(e) => return Err(e),
        }
    }

    if let Input::Network { net, .. } = input {
        let measured = report.bracket.as_ref().map(|b| (b.lower_bits.value, b.upper_bits.value));
        report.bound = Some(bound_report(net, f, measured, Vec::new()));
    }

    report.resource_limited = resource_limited;
    report.notices = notices;
    report.timings_ms = opts.timings.then_some(clock.marks);
    Ok(report)
}

fn sampled_rows(map: &SampledMap, k_max: usize, notices: &mut Vec<String>) -> Vec<SampledRow> {
    let mut rows = Vec::new();
    for k in 1..=k_max {
        match catalog::sampled_lap_count(map, k, catalog::DEFAULT_GRID, catalog::DEFAULT_REFINEMENTS) {
            Ok(est) => rows.push(SampledRow {
                k,
                laps: est.laps,
                grid: est.grid,
                rate_bits: rational::log2_u64(est.laps) / k as f64,
            }),
            Err(e) => {
                notices.push(format!("sampled laps: stopped at k = {k} ({e})"));
                break;
            }
        }
    }
    rows
}

fn bound_report(net: &NeuralNet, clamped: &PwlMap, measured: Option<(f64, f64)>, mut notices: Vec<String>) -> BoundReport {
    let (l, m) = net.shape();
    if net.depth() == 0 {
        notices.push("network has no gate layers; bounds evaluated at l = 1".into());
    }
    let profile = net.profile();
    let b = network::entropy_upper_bound_thm1(l, m, profile);
    let lap_bound = network::lap_bound_thm1(l, m, profile);
    let laps = analysis::lap_count(clamped).count();
    let (lower, upper) = measured.unwrap_or((0.0, f64::INFINITY));
    let lap_ok = num_bigint::BigUint::from(laps) <= lap_bound;
    let entropy_ok = lower <= b;
    BoundReport {
        shape: Shape { l, m },
        profile,
        entropy_upper_bits: tag(b, Rigor::RigorousBound),
        lap_bound: tag(lap_bound.to_string(), Rigor::RigorousBound),
        measured: Measured {
            laps: tag(laps, Rigor::Exact),
            lower_bits: tag(lower, Rigor::RigorousBound),
            upper_bits: tag(upper, Rigor::RigorousBound),
        },
        lap_bound_satisfied: lap_ok,
        entropy_bound_satisfied: entropy_ok,
        bound_satisfied: lap_ok && entropy_ok,
        notices,
    }
}

/// Structure-parameter bounds of a network against its measured `τ ∘ g`.
pub fn cmd_bound_check(net: &NeuralNet, domain: &NetDomain, k_max: usize, limits: Limits) -> Result<BoundReport> {
    if k_max == 0 {
        return Err(Error::ParameterOutOfRange("--kmax must be at least 1".into()));
    }
    let clamped = network::network_to_pwl(net, &domain.a, &domain.b, true, Some(limits.max_segments))?;
    let mut notices = Vec::new();
    let bracket = entropy::entropy_bracket(&clamped, k_max, limits)?;
    if let Some(e) = &bracket.truncated {
        notices.push(notice(e, "entropy bracket", bracket.evidence.len()));
    }
    Ok(bound_report(net, &clamped, Some((bracket.lower_bits, bracket.upper_bits)), notices))
}

/// Where the entropy for a width certificate comes from.
#[derive(Debug, Clone)]
pub enum EntropySource<'a> {
    Given(f64),
    Target { input: &'a Input, k_max: usize, limits: Limits },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthCertificate {
    pub l: usize,
    pub k: usize,
    pub profile: GateProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub given_h_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_bits: Option<[f64; 2]>,
    /// From the rigorous lower entropy bound (or the supplied value).
    pub conservative_m_min: Tagged<f64>,
    /// From the upper entropy bound; absent when `h` was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimistic_m_min: Option<Tagged<f64>>,
}

pub fn cmd_width_cert(source: EntropySource<'_>, l: usize, profile: GateProfile, k: usize) -> Result<WidthCertificate> {
    match source {
        EntropySource::Given(h) => Ok(WidthCertificate {
            l,
            k,
            profile,
            target: None,
            given_h_bits: Some(h),
            bracket_bits: None,
            conservative_m_min: tag(network::width_lower_bound_thm2(h, l, profile, k)?, Rigor::RigorousBound),
            optimistic_m_min: None,
        }),
        EntropySource::Target { input, k_max, limits } => {
            let f = input.pwl().ok_or_else(|| {
                Error::MalformedInput("width certificates need an exact map target or an explicit entropy".into())
            })?;
            let b = entropy::entropy_bracket(f, k_max, limits)?;
            let conservative = network::width_lower_bound_thm2(b.lower_bits, l, profile, k)?;
            let optimistic = network::width_lower_bound_thm2(b.upper_bits, l, profile, k).ok();
            Ok(WidthCertificate {
                l,
                k,
                profile,
                target: Some(input.descriptor().to_string()),
                given_h_bits: None,
                bracket_bits: Some([b.lower_bits, b.upper_bits]),
                conservative_m_min: tag(conservative, Rigor::RigorousBound),
                optimistic_m_min: optimistic.map(|m| tag(m, Rigor::Estimate)),
            })
        }
    }
}

pub fn cmd_periods(input: &Input, up_to: usize, limits: Limits) -> Result<PeriodsReport> {
    let f = input
        .pwl()
        .ok_or_else(|| Error::MalformedInput("periods need an exact piecewise-linear map".into()))?;
    if up_to == 0 {
        return Err(Error::ParameterOutOfRange("--periods must be at least 1".into()));
    }
    periods_report(f, up_to, limits)
}

/// `k,laps,upper_bits,horseshoe_s,lower_bits`, one row per completed k.
pub fn evidence_csv(rows: &[EvidenceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "laps", "upper_bits", "horseshoe_s", "lower_bits"]).unwrap();
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.laps.to_string(),
            r.upper_bits.to_string(),
            r.horseshoe_s.map(|s| s.to_string()).unwrap_or_default(),
            r.lower_bits.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(with = "rational::as_string")]
    pub alpha: Rational,
    pub lower_bits: f64,
    pub upper_bits: f64,
    /// `max(0, log2 α)`, for plotting against the bracket.
    pub reference_bits: f64,
}

pub fn default_sweep_alphas() -> Vec<Rational> {
    ["1/2", "1", "5/4", "3/2", "7/4", "2"].iter().map(|a| rational::parse_rational(a).unwrap()).collect()
}

/// Entropy brackets of `tent(α)` over a grid of slopes.
pub fn tent_sweep(alphas: &[Rational], k_max: usize, limits: Limits) -> Result<(Vec<SweepRow>, Vec<String>)> {
    let mut notices = Vec::new();
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let b = entropy::entropy_bracket(&catalog::tent(alpha)?, k_max, limits)?;
        if let Some(e) = &b.truncated {
            notices.push(notice(e, &format!("tent:{}", rational::format_rational(alpha)), b.evidence.len()));
        }
        rows.push(SweepRow {
            alpha: alpha.clone(),
            lower_bits: b.lower_bits,
            upper_bits: b.upper_bits,
            reference_bits: rational::log2_abs(alpha).max(0.0),
        });
    }
    Ok((rows, notices))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "lower_bits", "upper_bits", "reference_bits"]).unwrap();
    for r in rows {
        w.write_record([
            rational::format_rational(&r.alpha),
            r.lower_bits.to_string(),
            r.upper_bits.to_string(),
            r.reference_bits.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Files written by an export, with their contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Export {
    pub files: Vec<(String, String)>,
    pub notices: Vec<String>,
    pub resource_limited: bool,
}

pub fn cmd_export_plot(input: &Input, k_max: usize, limits: Limits) -> Result<Export> {
    let f = input
        .pwl()
        .ok_or_else(|| Error::MalformedInput("plot export needs an exact piecewise-linear map".into()))?;
    let b = entropy::entropy_bracket(f, k_max, limits)?;
    let mut notices = Vec::new();
    if let Some(e) = &b.truncated {
        notices.push(notice(e, "entropy bracket", b.evidence.len()));
    }
    Ok(Export {
        files: vec![("evidence.csv".into(), evidence_csv(&b.evidence))],
        resource_limited: b.truncated.is_some(),
        notices,
    })
}

pub fn cmd_export_sweep(alphas: &[Rational], k_max: usize, limits: Limits) -> Result<Export> {
    let (rows, notices) = tent_sweep(alphas, k_max, limits)?;
    Ok(Export {
        files: vec![("tent_entropy.csv".into(), sweep_csv(&rows))],
        resource_limited: !notices.is_empty(),
        notices,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent_input(alpha: &str) -> Input {
        load_input(&format!("tent:{alpha}"), &NetDomain::default(), Limits::default()).unwrap()
    }

    #[test]
    fn analyze_tent() {
        let r = cmd_analyze(&tent_input("2"), &AnalyzeOptions { k_max: 6, ..Default::default() }).unwrap();
        let b = r.bracket.as_ref().unwrap();
        assert_eq!((b.lower_bits.value, b.upper_bits.value), (1.0, 1.0));
        assert_eq!(b.evidence.len(), 6);
        assert!(!r.resource_limited);
        assert!(r.timings_ms.is_none());
    }

    #[test]
    fn analyze_is_byte_stable() {
        let opts = AnalyzeOptions { k_max: 5, periods: Some(4), ..Default::default() };
        let a = to_json(&cmd_analyze(&tent_input("3/2"), &opts).unwrap());
        let b = to_json(&cmd_analyze(&tent_input("3/2"), &opts).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn analyze_reports_resource_limit() {
        let opts = AnalyzeOptions { k_max: 10, limits: Limits::with_max_segments(64), ..Default::default() };
        let r = cmd_analyze(&tent_input("2"), &opts).unwrap();
        assert!(r.resource_limited);
        assert_eq!(r.bracket.unwrap().evidence.len(), 6);
        assert!(!r.notices.is_empty());
    }

    #[test]
    fn analyze_logistic_is_an_estimate() {
        let input = load_input("logistic:4", &NetDomain::default(), Limits::default()).unwrap();
        let r = cmd_analyze(&input, &AnalyzeOptions { k_max: 3, ..Default::default() }).unwrap();
        let s = r.sampled.unwrap();
        assert_eq!(s.rigor, Rigor::Estimate);
        assert_eq!(s.rows.iter().map(|r| r.laps).collect::<Vec<_>>(), vec![2, 4, 8]);
        assert!(r.bracket.is_none());
    }

    #[test]
    fn network_input_is_clamped_and_bounded() {
        let net = network::compile_tent_power(3).unwrap();
        let input =
            input_from_json("net.json", &network::network_to_json(&net), &NetDomain::default(), Limits::default()).unwrap();
        let r = cmd_analyze(&input, &AnalyzeOptions { k_max: 5, ..Default::default() }).unwrap();
        let b = r.bracket.unwrap();
        assert_eq!((b.lower_bits.value, b.upper_bits.value), (3.0, 3.0));
        let bound = r.bound.unwrap();
        assert_eq!(bound.entropy_upper_bits.value, 6.0);
        assert!(bound.bound_satisfied);
    }

    #[test]
    fn bound_check_examples() {
        let r = cmd_bound_check(&network::compile_tent_power(1).unwrap(), &NetDomain::default(), 4, Limits::default()).unwrap();
        assert_eq!(r.measured.laps.value, 2);
        assert_eq!(r.lap_bound.value, "8");
        assert_eq!((r.measured.lower_bits.value, r.entropy_upper_bits.value), (1.0, 2.0));
        assert!(r.bound_satisfied);
        let r = cmd_bound_check(&network::random_relu_network(2, 3, 7), &NetDomain::default(), 3, Limits::default()).unwrap();
        assert!(r.bound_satisfied);
        let id = network::parse_network(r#"{"layers":[{"weights":[["1"]],"biases":["0"],"gate":"identity"}]}"#).unwrap();
        let r = cmd_bound_check(&id, &NetDomain::default(), 3, Limits::default()).unwrap();
        assert_eq!(r.measured.laps.value, 1);
        assert_eq!(r.measured.lower_bits.value, 0.0);
        assert!(r.bound_satisfied);
    }

    #[test]
    fn width_cert_examples() {
        let c = cmd_width_cert(
            EntropySource::Target { input: &tent_input("2"), k_max: 6, limits: Limits::default() },
            2,
            GateProfile::RELU,
            20,
        )
        .unwrap();
        assert_eq!(c.conservative_m_min.value, 16.0);
        let c = cmd_width_cert(EntropySource::Given(1.0), 1, GateProfile::RELU, 1).unwrap();
        assert!((c.conservative_m_min.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let id = load_input("identity", &NetDomain::default(), Limits::default()).unwrap();
        let e = cmd_width_cert(EntropySource::Target { input: &id, k_max: 4, limits: Limits::default() }, 1, GateProfile::RELU, 1);
        assert!(matches!(e, Err(Error::NonPositiveEntropy(_))));
    }

    #[test]
    fn evidence_csv_shape() {
        let b = entropy::entropy_bracket(&catalog::tent(&rational::int(2)).unwrap(), 3, Limits::default()).unwrap();
        let csv = evidence_csv(&b.evidence);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,laps,upper_bits,horseshoe_s,lower_bits");
        assert_eq!(lines[1], "1,2,1,2,1");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn sweep_brackets_contain_reference() {
        let (rows, _) = tent_sweep(&default_sweep_alphas(), 12, Limits::default()).unwrap();
        for r in rows {
            assert!(r.lower_bits <= r.reference_bits + 1e-12 && r.reference_bits <= r.upper_bits + 1e-12, "{r:?}");
        }
    }

    #[test]
    fn periods_report_witness() {
        let p = cmd_periods(&tent_input("2"), 6, Limits::default()).unwrap();
        assert_eq!(p.positive_entropy_witness, Some(3));
        assert!(p.sharkovsky.is_consistent());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::ResourceLimit { limit: 1 }), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::MalformedInput("x".into())), EXIT_PARSE);
        assert_eq!(exit_code(&Error::NonPositiveEntropy(0.0)), 1);
    }
}
