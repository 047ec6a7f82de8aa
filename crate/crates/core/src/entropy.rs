//! Rigorous entropy brackets for PWL self-maps.
//!
//! Upper bounds come from lap numbers of iterates (`h ≤ log2 c(f^k) / k` for
//! every `k`) and from Lipschitz constants of iterates
//! (`h ≤ max(0, log2 L(f^k)) / k`). Lower bounds come from exactly verified
//! horseshoes of iterates (`h ≥ log2 s / k`). All values are in bits.

use serde::Serialize;

use crate::analysis::{self, lap_count};
use crate::error::{Error, Result};
use crate::pwl::PwlMap;
use crate::rational::{self, log2_u64, Rational};

pub const DEFAULT_MAX_SEGMENTS: usize = 5_000_000;

/// Ceiling on `f^k` sizes and on the horseshoe candidate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_segments: usize,
    /// Critical values kept as horseshoe interval endpoints; larger sets are
    /// thinned to evenly spaced representatives.
    pub max_horseshoe_endpoints: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_segments: DEFAULT_MAX_SEGMENTS, max_horseshoe_endpoints: 64 }
    }
}

impl Limits {
    pub fn with_max_segments(max_segments: usize) -> Self {
        Limits { max_segments, ..Limits::default() }
    }
}

/// Iterates `f^1, f^2, ...` from a self-map, stopping at the segment ceiling.
pub struct Iterates<'a> {
    f: &'a PwlMap,
    current: Option<PwlMap>,
    k: usize,
    limit: usize,
    exhausted: Option<Error>,
}

impl<'a> Iterates<'a> {
    pub fn new(f: &'a PwlMap, limits: Limits) -> Result<Self> {
        if !f.is_self_map() {
            return Err(Error::NotSelfMap);
        }
        Ok(Iterates { f, current: None, k: 0, limit: limits.max_segments, exhausted: None })
    }

    /// The error that stopped iteration, if any.
    pub fn stopped_by(&self) -> Option<&Error> {
        self.exhausted.as_ref()
    }
}

impl Iterator for Iterates<'_> {
    type Item = (usize, PwlMap);

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted.is_some() {
            return None;
        }
        let next = match &self.current {
            None if self.f.segment_count() > self.limit => Err(Error::ResourceLimit { limit: self.limit }),
            None => Ok(self.f.clone()),
            Some(prev) => self.f.compose_bounded(prev, Some(self.limit)),
        };
        match next {
            Ok(m) => {
                self.k += 1;
                self.current = Some(m.clone());
                Some((self.k, m))
            }
            Err(e) => {
                self.exhausted = Some(e);
                None
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LapRow {
    pub k: usize,
    pub laps: u64,
    pub upper_bits: f64,
}

/// Per-k lap numbers; `truncated` is set when the ceiling stopped the run early.
#[derive(Debug, Clone, PartialEq)]
pub struct LapSequence {
    pub rows: Vec<LapRow>,
    pub truncated: Option<Error>,
}

pub fn lap_upper_sequence(f: &PwlMap, k_max: usize, limits: Limits) -> Result<LapSequence> {
    check_k(k_max)?;
    let mut it = Iterates::new(f, limits)?;
    let rows: Vec<LapRow> = it
        .by_ref()
        .take(k_max)
        .map(|(k, fk)| {
            let laps = analysis::lap_number(&fk);
            LapRow { k, laps, upper_bits: log2_u64(laps) / k as f64 }
        })
        .collect();
    finish(rows, it.stopped_by().cloned()).map(|(rows, truncated)| LapSequence { rows, truncated })
}

fn check_k(k_max: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::ParameterOutOfRange("k_max must be at least 1".into()));
    }
    Ok(())
}

fn finish<T>(rows: Vec<T>, stop: Option<Error>) -> Result<(Vec<T>, Option<Error>)> {
    match stop {
        Some(e) if rows.is_empty() => Err(e),
        stop => Ok((rows, stop)),
    }
}

/// An interval `J` split into `s` pieces whose closures each `f^k`-cover `J`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Horseshoe {
    pub k: usize,
    #[serde(with = "rational::vec_as_string")]
    pub interval: Vec<Rational>,
    /// Piece boundaries `u = p_0 < p_1 < ... < p_s = v`.
    #[serde(with = "rational::vec_as_string")]
    pub partition: Vec<Rational>,
    pub s: usize,
}

impl Horseshoe {
    pub fn lower_bits(&self) -> f64 {
        log2_u64(self.s as u64) / self.k as f64
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.partition.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// Exact check against `fk = f^k`: the pieces tile `J` and the image of
    /// each piece contains `J`.
    pub fn verify(&self, fk: &PwlMap) -> bool {
        let (u, v) = (&self.interval[0], &self.interval[1]);
        if self.partition.first() != Some(u) || self.partition.last() != Some(v) || self.s < 2 {
            return false;
        }
        if self.partition.len() != self.s + 1 || self.partition.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        self.pieces().all(|(a, b)| match fk.restrict(a, b) {
            Ok(piece) => {
                let (lo, hi) = piece.value_range();
                &lo <= u && &hi >= v
            }
            Err(_) => false,
        })
    }
}

fn thin(values: Vec<Rational>, cap: usize) -> Vec<Rational> {
    if values.len() <= cap || cap < 2 {
        return values;
    }
    let n = values.len();
    (0..cap).map(|i| values[i * (n - 1) / (cap - 1)].clone()).collect()
}

/// Best horseshoe of an already computed iterate `fk = f^k`.
pub(crate) fn horseshoe_of_iterate(fk: &PwlMap, k: usize, limits: Limits) -> Option<Horseshoe> {
    let laps = lap_count(fk);
    let ends: Vec<Rational> = laps.pieces.iter().map(|l| l.hi.clone()).collect();
    let candidates = thin(analysis::critical_values(fk, &laps), limits.max_horseshoe_endpoints);
    let mut best: Option<(usize, &Rational, &Rational)> = None;
    for (i, u) in candidates.iter().enumerate() {
        for v in &candidates[i + 1..] {
            // Laps meeting the open interval (u, v) bound the achievable s.
            let first = ends.partition_point(|e| e <= u);
            let last = ends.partition_point(|e| e < v);
            let bound = last.min(ends.len() - 1) + 1 - first;
            if bound < 2 || best.is_some_and(|(s, _, _)| bound <= s) {
                continue;
            }
            let Ok(restricted) = fk.restrict(u, v) else { continue };
            let s = analysis::crossing_number(&restricted, u, v);
            if s >= 2 && best.is_none_or(|(b, _, _)| s > b) {
                best = Some((s, u, v));
            }
        }
    }
    let (s, u, v) = best?;
    let restricted = fk.restrict(u, v).ok()?;
    let report = analysis::crossing_count(&restricted, u, v).ok()?;
    debug_assert_eq!(report.count, s);
    // Piece i runs from the end of covering i-1 to the end of covering i.
    let mut partition = vec![u.clone()];
    for (c, d) in report.witnesses.iter().take(s - 1) {
        partition.push(c.clone().max(d.clone()));
    }
    partition.push(v.clone());
    let shoe = Horseshoe { k, interval: vec![u.clone(), v.clone()], partition, s };
    shoe.verify(fk).then_some(shoe)
}

pub fn horseshoe_search(f: &PwlMap, k: usize, limits: Limits) -> Result<Option<Horseshoe>> {
    let fk = f.iterate_bounded(k, Some(limits.max_segments))?;
    Ok(horseshoe_of_iterate(&fk, k, limits))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceRow {
    pub k: usize,
    pub laps: u64,
    pub upper_bits: f64,
    pub lipschitz_upper_bits: f64,
    pub horseshoe_s: Option<usize>,
    pub lower_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyBracket {
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub evidence: Vec<EvidenceRow>,
    #[serde(skip)]
    pub horseshoes: Vec<Horseshoe>,
    #[serde(skip)]
    pub truncated: Option<Error>,
}

impl EntropyBracket {
    pub fn contains(&self, h: f64, tol: f64) -> bool {
        self.lower_bits - tol <= h && h <= self.upper_bits + tol
    }
}

pub fn entropy_bracket(f: &PwlMap, k_max: usize, limits: Limits) -> Result<EntropyBracket> {
    check_k(k_max)?;
    let mut it = Iterates::new(f, limits)?;
    let mut evidence = Vec::new();
    let mut horseshoes = Vec::new();
    for (k, fk) in it.by_ref().take(k_max) {
        let laps = analysis::lap_number(&fk);
        let lip = rational::log2_abs(&analysis::lipschitz(&fk)).max(0.0) / k as f64;
        let shoe = horseshoe_of_iterate(&fk, k, limits);
        evidence.push(EvidenceRow {
            k,
            laps,
            upper_bits: log2_u64(laps) / k as f64,
            lipschitz_upper_bits: lip,
            horseshoe_s: shoe.as_ref().map(|h| h.s),
            lower_bits: shoe.as_ref().map_or(0.0, Horseshoe::lower_bits),
        });
        horseshoes.extend(shoe);
    }
    let (evidence, truncated) = finish(evidence, it.stopped_by().cloned())?;
    let upper_bits = evidence
        .iter()
        .flat_map(|r| [r.upper_bits, r.lipschitz_upper_bits])
        .fold(f64::INFINITY, f64::min);
    let lower_bits = evidence.iter().map(|r| r.lower_bits).fold(0.0, f64::max);
    Ok(EntropyBracket { lower_bits, upper_bits, evidence, horseshoes, truncated })
}

/// `max(0, log2 s)` for maps whose segments all have slope `±s`, `s ≠ 0`.
pub fn constant_slope_entropy(f: &PwlMap) -> Result<f64> {
    let mut slopes = f.slopes().map(|s| num_traits::Signed::abs(&s));
    let s = slopes.next().unwrap();
    if num_traits::Zero::is_zero(&s) || slopes.any(|t| t != s) {
        return Err(Error::NotConstantSlope);
    }
    Ok(rational::log2_abs(&s).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub k: usize,
    pub max_crossing: usize,
    #[serde(with = "rational::as_string")]
    pub variation: Rational,
    #[serde(with = "rational::as_string")]
    pub lipschitz: Rational,
    pub crossing_rate: f64,
    pub variation_rate: f64,
    pub lipschitz_rate: f64,
    pub lap_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSequences {
    pub rows: Vec<RateRow>,
    #[serde(skip)]
    pub truncated: Option<Error>,
}

fn rate(log2: f64, k: usize) -> f64 {
    log2.max(0.0) / k as f64
}

/// Crossing, variation and Lipschitz growth rates of `f^k`, each reported
/// as `max(0, log2(·)) / k`.
pub fn rate_sequences(f: &PwlMap, k_max: usize, limits: Limits) -> Result<RateSequences> {
    check_k(k_max)?;
    let mut it = Iterates::new(f, limits)?;
    let rows: Vec<RateRow> = it
        .by_ref()
        .take(k_max)
        .map(|(k, fk)| {
            let c = analysis::max_crossing(&fk).count;
            let var = analysis::variation(&fk);
            let lip = analysis::lipschitz(&fk);
            RateRow {
                k,
                max_crossing: c,
                crossing_rate: if c == 0 { 0.0 } else { rate(log2_u64(c as u64), k) },
                variation_rate: rate(rational::log2_abs(&var), k),
                lipschitz_rate: rate(rational::log2_abs(&lip), k),
                lap_rate: rate(log2_u64(analysis::lap_number(&fk)), k),
                variation: var,
                lipschitz: lip,
            }
        })
        .collect();
    finish(rows, it.stopped_by().cloned()).map(|(rows, truncated)| RateSequences { rows, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn tent(alpha: Rational) -> PwlMap {
        PwlMap::new(int(0), int(1), vec![int(0), ratio(1, 2), int(1)], vec![int(0), alpha / int(2), int(0)]).unwrap()
    }

    fn zigzag(m: i64) -> PwlMap {
        let xs = (0..=m).map(|i| ratio(i, m)).collect();
        let ys = (0..=m).map(|i| int(i % 2)).collect();
        PwlMap::new(int(0), int(1), xs, ys).unwrap()
    }

    fn id() -> PwlMap {
        PwlMap::identity(int(0), int(1)).unwrap()
    }

    #[test]
    fn lap_sequence_examples() {
        let s = lap_upper_sequence(&tent(int(2)), 6, Limits::default()).unwrap();
        let laps: Vec<u64> = s.rows.iter().map(|r| r.laps).collect();
        assert_eq!(laps, vec![2, 4, 8, 16, 32, 64]);
        assert!(s.rows.iter().all(|r| r.upper_bits == 1.0));
        let s = lap_upper_sequence(&id(), 5, Limits::default()).unwrap();
        assert!(s.rows.iter().all(|r| r.laps == 1 && r.upper_bits == 0.0));
        let s = lap_upper_sequence(&tent(ratio(3, 2)), 10, Limits::default()).unwrap();
        let u10 = s.rows[9].upper_bits;
        let h = 1.5f64.log2();
        assert!(h <= u10 && u10 <= h + 0.25, "{u10}");
    }

    #[test]
    fn lap_sequence_truncates_at_ceiling() {
        let s = lap_upper_sequence(&tent(int(2)), 10, Limits::with_max_segments(100)).unwrap();
        assert_eq!(s.rows.len(), 6);
        assert_eq!(s.truncated, Some(Error::ResourceLimit { limit: 100 }));
        let err = lap_upper_sequence(&zigzag(8), 3, Limits::with_max_segments(4)).unwrap_err();
        assert_eq!(err, Error::ResourceLimit { limit: 4 });
    }

    #[test]
    fn horseshoe_examples() {
        let h = horseshoe_search(&tent(int(2)), 1, Limits::default()).unwrap().unwrap();
        assert_eq!(h.s, 2);
        assert_eq!(h.interval, vec![int(0), int(1)]);
        assert_eq!(h.partition, vec![int(0), ratio(1, 2), int(1)]);
        assert!(horseshoe_search(&id(), 1, Limits::default()).unwrap().is_none());
        assert_eq!(horseshoe_search(&zigzag(4), 1, Limits::default()).unwrap().unwrap().s, 4);
    }

    #[test]
    fn horseshoe_verify_rejects_bad_partition() {
        let t2 = tent(int(2));
        let bad = Horseshoe { k: 1, interval: vec![int(0), int(1)], partition: vec![int(0), ratio(1, 4), int(1)], s: 2 };
        assert!(!bad.verify(&t2));
    }

    #[test]
    fn bracket_examples() {
        let b = entropy_bracket(&tent(int(2)), 6, Limits::default()).unwrap();
        assert_eq!((b.lower_bits, b.upper_bits), (1.0, 1.0));
        let b = entropy_bracket(&id(), 6, Limits::default()).unwrap();
        assert_eq!((b.lower_bits, b.upper_bits), (0.0, 0.0));
        let b = entropy_bracket(&tent(ratio(3, 2)), 20, Limits::default()).unwrap();
        let h = 1.5f64.log2();
        assert!((b.upper_bits - h).abs() < 0.1);
        assert!(b.lower_bits <= b.upper_bits && b.lower_bits > 0.0);
    }

    #[test]
    fn bracket_upper_running_min_is_nonincreasing() {
        let b = entropy_bracket(&tent(ratio(7, 4)), 12, Limits::default()).unwrap();
        let mut best = f64::INFINITY;
        for r in &b.evidence {
            let next = best.min(r.upper_bits);
            assert!(next <= best);
            best = next;
        }
    }

    #[test]
    fn constant_slope_examples() {
        assert_eq!(constant_slope_entropy(&tent(int(2))).unwrap(), 1.0);
        assert_eq!(constant_slope_entropy(&tent(ratio(1, 2))).unwrap(), 0.0);
        assert_eq!(constant_slope_entropy(&zigzag(8)).unwrap(), 3.0);
        let b = entropy_bracket(&zigzag(8), 2, Limits::default()).unwrap();
        assert_eq!((b.lower_bits, b.upper_bits), (3.0, 3.0));
        let flat = PwlMap::new(int(0), int(1), vec![int(0), ratio(1, 2), int(1)], vec![int(0), int(1), int(1)]).unwrap();
        assert_eq!(constant_slope_entropy(&flat), Err(Error::NotConstantSlope));
    }

    #[test]
    fn rate_examples() {
        let r = rate_sequences(&tent(int(2)), 8, Limits::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.crossing_rate, 1.0);
            assert_eq!(row.lipschitz_rate, 1.0);
            assert_eq!(row.variation_rate, 1.0);
        }
        let r = rate_sequences(&id(), 4, Limits::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.crossing_rate == 0.0 && row.variation_rate == 0.0 && row.lipschitz_rate == 0.0));
    }
}
