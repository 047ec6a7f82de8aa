//! Periodic orbits of PWL self-maps and the Sharkovsky ordering.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::entropy::{Iterates, Limits};
use crate::error::{Error, Result};
use crate::pwl::PwlMap;
use crate::rational::{self, Rational};

/// Fixed points of some iterate `f^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicPoints {
    /// Isolated fixed points, ascending.
    pub points: Vec<Rational>,
    /// Maximal segments on which `f^n` is the identity.
    pub continua: Vec<(Rational, Rational)>,
}

fn fixed_points_of(g: &PwlMap) -> PeriodicPoints {
    let xs = g.breakpoints();
    let ys = g.values();
    let mut points: Vec<Rational> = Vec::new();
    let mut continua: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..g.segment_count() {
        let (x0, x1) = (&xs[i], &xs[i + 1]);
        let slope = g.slope(i);
        let intercept = &ys[i] - &slope * x0;
        if slope.is_one() {
            if intercept.is_zero() {
                match continua.last_mut() {
                    Some((_, hi)) if hi == x0 => *hi = x1.clone(),
                    _ => continua.push((x0.clone(), x1.clone())),
                }
            }
            continue;
        }
        let x = &intercept / (Rational::one() - &slope);
        if &x >= x0 && &x <= x1 && points.last() != Some(&x) {
            points.push(x);
        }
    }
    points.retain(|p| !continua.iter().any(|(a, b)| p >= a && p <= b));
    PeriodicPoints { points, continua }
}

pub fn periodic_points(f: &PwlMap, n: usize, limits: Limits) -> Result<PeriodicPoints> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("period must be at least 1".into()));
    }
    let g = f.iterate_bounded(n, Some(limits.max_segments))?;
    Ok(fixed_points_of(&g))
}

/// Smallest `p ≥ 1` with `f^p(x) = x`, searching up to `bound`.
fn orbit_period(f: &PwlMap, x: &Rational, bound: usize) -> Option<(usize, Vec<Rational>)> {
    let mut orbit = vec![x.clone()];
    let mut cur = x.clone();
    for p in 1..=bound {
        cur = f.eval(&cur).ok()?;
        if &cur == x {
            return Some((p, orbit));
        }
        orbit.push(cur.clone());
    }
    None
}

/// Orbit listed from its smallest element.
fn normalize_cycle(mut cycle: Vec<Rational>) -> Vec<Rational> {
    let start = cycle.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap();
    cycle.rotate_left(start);
    cycle
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSet {
    pub up_to: usize,
    pub periods: BTreeSet<usize>,
    #[serde(serialize_with = "serialize_cycles")]
    pub cycles: BTreeMap<usize, Vec<Vec<Rational>>>,
    pub continuum_flags: BTreeSet<usize>,
    #[serde(skip)]
    pub truncated: Option<Error>,
}

fn serialize_cycles<S: serde::Serializer>(
    cycles: &BTreeMap<usize, Vec<Vec<Rational>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let text: BTreeMap<usize, Vec<Vec<String>>> = cycles
        .iter()
        .map(|(n, cs)| (*n, cs.iter().map(|c| c.iter().map(rational::format_rational).collect()).collect()))
        .collect();
    text.serialize(s)
}

impl PeriodSet {
    /// Re-checks every stored cycle by exact evaluation.
    pub fn verify(&self, f: &PwlMap) -> bool {
        self.cycles.iter().all(|(&n, cs)| {
            cs.iter().all(|c| {
                c.len() == n && orbit_period(f, &c[0], n).is_some_and(|(p, orbit)| p == n && orbit == *c)
            })
        })
    }
}

/// Periods `n ≤ up_to` with an exact cycle of minimal period `n`.
///
/// Isolated fixed points of `f^n` are kept when their orbit under `f`
/// closes after exactly `n` steps. Segments where `f^n` is the identity are
/// flagged; their midpoint is tested as a representative orbit.
pub fn minimal_periods(f: &PwlMap, up_to: usize, limits: Limits) -> Result<PeriodSet> {
    let mut set = PeriodSet {
        up_to,
        periods: BTreeSet::new(),
        cycles: BTreeMap::new(),
        continuum_flags: BTreeSet::new(),
        truncated: None,
    };
    let mut it = Iterates::new(f, limits)?;
    for (n, g) in it.by_ref().take(up_to) {
        let fixed = fixed_points_of(&g);
        let mut seen: BTreeSet<Rational> = BTreeSet::new();
        let mut cycles = Vec::new();
        let mut candidates = fixed.points.clone();
        if !fixed.continua.is_empty() {
            set.continuum_flags.insert(n);
            candidates.extend(fixed.continua.iter().map(|(a, b)| (a + b) / rational::int(2)));
        }
        for x in candidates {
            if seen.contains(&x) {
                continue;
            }
            if let Some((p, orbit)) = orbit_period(f, &x, n) {
                if p == n {
                    seen.extend(orbit.iter().cloned());
                    cycles.push(normalize_cycle(orbit));
                }
            }
        }
        if !cycles.is_empty() {
            cycles.sort();
            set.periods.insert(n);
            set.cycles.insert(n, cycles);
        }
    }
    set.truncated = it.stopped_by().cloned();
    match set.truncated {
        Some(e) if set.periods.is_empty() && set.continuum_flags.is_empty() => Err(e),
        _ => Ok(set),
    }
}

fn sharkovsky_key(n: u64) -> (u8, i64, u64) {
    let e = n.trailing_zeros();
    let odd = n >> e;
    if odd == 1 {
        (1, -(e as i64), 0)
    } else {
        (0, e as i64, odd)
    }
}

/// `p ⊳ q`: `p` strictly precedes `q` in the Sharkovsky ordering.
pub fn sharkovsky_less(p: u64, q: u64) -> bool {
    assert!(p >= 1 && q >= 1, "Sharkovsky ordering is defined on positive integers");
    sharkovsky_key(p) < sharkovsky_key(q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Consistency {
    /// `(p, q)` with `p` present, `p ⊳ q`, `q ≤ up_to`, and `q` missing.
    pub violations: Vec<(u64, u64)>,
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn sharkovsky_consistency(periods: &BTreeSet<usize>, up_to: usize) -> Consistency {
    let mut violations = Vec::new();
    for &p in periods {
        for q in 1..=up_to {
            if !periods.contains(&q) && sharkovsky_less(p as u64, q as u64) {
                violations.push((p as u64, q as u64));
            }
        }
    }
    Consistency { violations }
}

/// Sharkovsky-greatest found period that is not a power of two.
pub fn positive_entropy_witness(f: &PwlMap, up_to: usize, limits: Limits) -> Result<Option<usize>> {
    Ok(sharkovsky_witness(&minimal_periods(f, up_to, limits)?.periods))
}

pub fn sharkovsky_witness(periods: &BTreeSet<usize>) -> Option<usize> {
    periods.iter().copied().filter(|p| !p.is_power_of_two()).min_by_key(|&p| sharkovsky_key(p as u64))
}
