//! Lap numbers, variation, Lipschitz constants and crossing counts.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pwl::PwlMap;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
    /// Only for a map that is constant on its whole domain.
    FlatMerged,
}

/// One maximal interval of monotonicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lap {
    pub lo: Rational,
    pub hi: Rational,
    pub direction: Direction,
    pub(crate) first: usize,
    pub(crate) last: usize,
}

impl Lap {
    /// Image of the lap as `(min, max)`, read off the endpoint values.
    pub fn image<'a>(&self, f: &'a PwlMap) -> (&'a Rational, &'a Rational) {
        let (a, b) = (&f.values()[self.first], &f.values()[self.last]);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LapDecomposition {
    pub pieces: Vec<Lap>,
}

impl LapDecomposition {
    pub fn count(&self) -> usize {
        self.pieces.len()
    }
}

/// Minimal monotone partition. Flat segments never change the running
/// direction; a strict conflict closes the current lap at the start of the
/// conflicting segment.
pub fn lap_count(f: &PwlMap) -> LapDecomposition {
    let xs = f.breakpoints();
    let ys = f.values();
    let mut pieces = Vec::new();
    let mut state: Option<Direction> = None;
    let mut start = 0;
    for i in 0..f.segment_count() {
        let dir = match ys[i].cmp(&ys[i + 1]) {
            Ordering::Less => Direction::Up,
            Ordering::Greater => Direction::Down,
            Ordering::Equal => continue,
        };
        match state {
            None => state = Some(dir),
            Some(s) if s != dir => {
                pieces.push(Lap { lo: xs[start].clone(), hi: xs[i].clone(), direction: s, first: start, last: i });
                start = i;
                state = Some(dir);
            }
            Some(_) => {}
        }
    }
    let last = xs.len() - 1;
    pieces.push(Lap {
        lo: xs[start].clone(),
        hi: xs[last].clone(),
        direction: state.unwrap_or(Direction::FlatMerged),
        first: start,
        last,
    });
    LapDecomposition { pieces }
}

/// Lap number only, without materializing the pieces.
pub fn lap_number(f: &PwlMap) -> u64 {
    let ys = f.values();
    let mut count = 1;
    let mut state = Ordering::Equal;
    for w in ys.windows(2) {
        let dir = w[0].cmp(&w[1]);
        if dir == Ordering::Equal {
            continue;
        }
        if state != Ordering::Equal && state != dir {
            count += 1;
        }
        state = dir;
    }
    count
}

/// Total variation `Σ |y_{i+1} - y_i|`.
pub fn variation(f: &PwlMap) -> Rational {
    f.values().windows(2).map(|w| (&w[1] - &w[0]).abs()).fold(Rational::zero(), |a, b| a + b)
}

/// Largest absolute segment slope.
pub fn lipschitz(f: &PwlMap) -> Rational {
    f.slopes().map(|s| s.abs()).max().unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossingReport {
    #[serde(with = "rational::as_string")]
    pub x: Rational,
    #[serde(with = "rational::as_string")]
    pub y: Rational,
    pub count: usize,
    /// `(c_i, d_i)` with `f(c_i) = x` and `f(d_i) = y`, in domain order.
    #[serde(skip)]
    pub witnesses: Vec<(Rational, Rational)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Level {
    X,
    Y,
}

/// Walks the level sets `f⁻¹{x}` and `f⁻¹{y}` left to right and counts
/// label changes; each change is one subinterval mapped onto `[x, y]`.
fn transitions(f: &PwlMap, x: &Rational, y: &Rational, witnesses: Option<&mut Vec<(Rational, Rational)>>) -> usize {
    let xs = f.breakpoints();
    let ys = f.values();
    let mut last: Option<(Level, usize, Option<Rational>)> = None;
    let mut count = 0;
    let want = witnesses.is_some();
    let mut out = witnesses;
    let mut visit = |label: Level, seg: usize, pos: Option<Rational>| {
        if let Some((prev, _, prev_pos)) = &last {
            if *prev != label {
                count += 1;
                if let Some(w) = out.as_deref_mut() {
                    let (p, q) = (prev_pos.clone().unwrap(), pos.clone().unwrap());
                    w.push(if *prev == Level::X { (p, q) } else { (q, p) });
                }
            }
        }
        last = Some((label, seg, pos));
    };
    let point = |i: usize, level: &Rational| -> Option<Rational> {
        if !want {
            return None;
        }
        let (x0, x1, y0, y1) = (&xs[i], &xs[i + 1], &ys[i], &ys[i + 1]);
        Some(if level == y0 {
            x0.clone()
        } else if level == y1 {
            x1.clone()
        } else {
            x0 + (level - y0) * (x1 - x0) / (y1 - y0)
        })
    };
    for i in 0..f.segment_count() {
        let (y0, y1) = (&ys[i], &ys[i + 1]);
        let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        let hit_x = lo <= x && x <= hi;
        let hit_y = lo <= y && y <= hi;
        if y0 == y1 {
            if hit_x {
                visit(Level::X, i, want.then(|| xs[i].clone()));
            } else if hit_y {
                visit(Level::Y, i, want.then(|| xs[i].clone()));
            }
            continue;
        }
        if y0 < y1 {
            if hit_x {
                visit(Level::X, i, point(i, x));
            }
            if hit_y {
                visit(Level::Y, i, point(i, y));
            }
        } else {
            if hit_y {
                visit(Level::Y, i, point(i, y));
            }
            if hit_x {
                visit(Level::X, i, point(i, x));
            }
        }
    }
    count
}

/// Maximal number of ordered disjoint-interior pairs `(c_i, d_i)` with
/// `f(c_i) = x`, `f(d_i) = y`.
pub fn crossing_count(f: &PwlMap, x: &Rational, y: &Rational) -> Result<CrossingReport> {
    if x >= y {
        return Err(Error::InvalidInterval(format!(
            "crossing interval needs x < y, got [{}, {}]",
            rational::format_rational(x),
            rational::format_rational(y)
        )));
    }
    let mut witnesses = Vec::new();
    let count = transitions(f, x, y, Some(&mut witnesses));
    Ok(CrossingReport { x: x.clone(), y: y.clone(), count, witnesses })
}

/// Count-only variant used in inner loops.
pub(crate) fn crossing_number(f: &PwlMap, x: &Rational, y: &Rational) -> usize {
    transitions(f, x, y, None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxCrossing {
    pub count: usize,
    #[serde(with = "rational::as_string")]
    pub witness_x: Rational,
    #[serde(with = "rational::as_string")]
    pub witness_y: Rational,
}

/// Sorted distinct values at lap endpoints.
pub fn critical_values(f: &PwlMap, laps: &LapDecomposition) -> Vec<Rational> {
    let ys = f.values();
    let mut w: Vec<Rational> = laps.pieces.iter().flat_map(|l| [ys[l.first].clone(), ys[l.last].clone()]).collect();
    w.sort();
    w.dedup();
    w
}

/// `C(f)`: the maximal crossing count over all value intervals.
///
/// Shrinking `[x, y]` never lowers the count, and the count is constant on
/// intervals strictly inside one gap between adjacent critical values, where
/// it equals the number of laps whose image spans the gap. The maximum is
/// therefore found by a sweep over gaps; the reported witness is the widest
/// critical-value pair when that pair already achieves it, otherwise the
/// middle-third pair of the best gap.
pub fn max_crossing(f: &PwlMap) -> MaxCrossing {
    let laps = lap_count(f);
    let w = critical_values(f, &laps);
    if w.len() < 2 {
        return MaxCrossing { count: 0, witness_x: f.lo().clone(), witness_y: f.hi().clone() };
    }
    let mut diff = vec![0i64; w.len()];
    for lap in &laps.pieces {
        let (a, b) = lap.image(f);
        let ia = w.binary_search(a).unwrap();
        let ib = w.binary_search(b).unwrap();
        if ia < ib {
            diff[ia] += 1;
            diff[ib] -= 1;
        }
    }
    let mut best = (0i64, 0usize);
    let mut run = 0i64;
    for (g, d) in diff.iter().take(w.len() - 1).enumerate() {
        run += d;
        if run > best.0 {
            best = (run, g);
        }
    }
    let target = best.0 as usize;
    let (first, last) = (&w[0], &w[w.len() - 1]);
    if crossing_number(f, first, last) == target {
        return MaxCrossing { count: target, witness_x: first.clone(), witness_y: last.clone() };
    }
    let (lo, hi) = (&w[best.1], &w[best.1 + 1]);
    let third = (hi - lo) / Rational::from_integer(3.into());
    let x = lo + &third;
    let y = &x + &third;
    let count = crossing_number(f, &x, &y);
    debug_assert_eq!(count, target);
    MaxCrossing { count, witness_x: x, witness_y: y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn tent(alpha: Rational) -> PwlMap {
        PwlMap::new(int(0), int(1), vec![int(0), ratio(1, 2), int(1)], vec![int(0), alpha / int(2), int(0)]).unwrap()
    }

    fn id() -> PwlMap {
        PwlMap::identity(int(0), int(1)).unwrap()
    }

    #[test]
    fn lap_examples() {
        assert_eq!(lap_count(&id()).count(), 1);
        for a in [ratio(1, 2), int(1), ratio(3, 2), int(2)] {
            assert_eq!(lap_count(&tent(a)).count(), 2);
        }
        let c = PwlMap::constant(int(0), int(1), ratio(1, 3)).unwrap();
        let d = lap_count(&c);
        assert_eq!(d.count(), 1);
        assert_eq!(d.pieces[0].direction, Direction::FlatMerged);
    }

    /// Sign changes of consecutive differences on exact breakpoints.
    fn sign_change_oracle(f: &PwlMap) -> u64 {
        let signs: Vec<i32> = f
            .values()
            .windows(2)
            .map(|w| match w[0].cmp(&w[1]) {
                Ordering::Less => 1,
                Ordering::Greater => -1,
                Ordering::Equal => 0,
            })
            .filter(|&s| s != 0)
            .collect();
        1 + signs.windows(2).filter(|p| p[0] != p[1]).count() as u64
    }

    #[test]
    fn tent_power_laps() {
        let t2 = tent(int(2));
        let mut f = t2.clone();
        for k in 1..=12u32 {
            assert_eq!(lap_count(&f).count() as u64, 2u64.pow(k));
            assert_eq!(lap_number(&f), sign_change_oracle(&f));
            f = t2.compose(&f).unwrap();
        }
    }

    #[test]
    fn flats_merge_into_previous_lap() {
        let f = PwlMap::new(
            int(0),
            int(1),
            vec![int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)],
            vec![int(0), ratio(1, 2), ratio(1, 2), int(1), int(0)],
        )
        .unwrap();
        let d = lap_count(&f);
        assert_eq!(d.count(), 2);
        assert_eq!(d.pieces[0].hi, ratio(3, 4));
        assert_eq!(lap_number(&f), 2);
    }

    #[test]
    fn variation_and_lipschitz() {
        assert_eq!(variation(&id()), int(1));
        assert_eq!(variation(&tent(int(2))), int(2));
        assert_eq!(lipschitz(&id()), int(1));
        assert_eq!(lipschitz(&tent(ratio(3, 2))), ratio(3, 2));
        let t2 = tent(int(2));
        let mut f = t2.clone();
        for k in 1..=10u32 {
            let p = Rational::from_integer((1i64 << k).into());
            assert_eq!(variation(&f), p);
            assert_eq!(lipschitz(&f), p);
            f = t2.compose(&f).unwrap();
        }
    }

    /// Brute-force f-covering search: chains of breakpoint subintervals whose
    /// image is exactly `[x, y]`, counted greedily left to right.
    fn covering_oracle(f: &PwlMap, x: &Rational, y: &Rational) -> usize {
        let xs = f.breakpoints();
        let mut fine: Vec<Rational> = xs.to_vec();
        for i in 0..f.segment_count() {
            let (y0, y1) = (&f.values()[i], &f.values()[i + 1]);
            for level in [x, y] {
                let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
                if lo < level && level < hi {
                    fine.push(&xs[i] + (level - y0) * (&xs[i + 1] - &xs[i]) / (y1 - y0));
                }
            }
        }
        fine.sort();
        fine.dedup();
        let vals: Vec<Rational> = fine.iter().map(|p| f.eval(p).unwrap()).collect();
        let mut count = 0;
        let mut start = 0;
        'outer: while start < fine.len() {
            for end in start + 1..fine.len() {
                let seg = &vals[start..=end];
                let lo = seg.iter().min().unwrap();
                let hi = seg.iter().max().unwrap();
                if lo <= x && hi >= y {
                    count += 1;
                    start = end;
                    continue 'outer;
                }
            }
            break;
        }
        count
    }

    #[test]
    fn crossing_examples() {
        let t2 = tent(int(2));
        assert_eq!(crossing_count(&t2, &int(0), &int(1)).unwrap().count, 2);
        assert_eq!(covering_oracle(&t2, &int(0), &int(1)), 2);
        let t32 = tent(ratio(3, 2));
        assert_eq!(crossing_count(&t32, &int(0), &int(1)).unwrap().count, 0);
        assert_eq!(crossing_count(&t32, &int(0), &ratio(3, 4)).unwrap().count, 2);
        assert_eq!(covering_oracle(&t32, &int(0), &ratio(3, 4)), 2);
        assert!(crossing_count(&t2, &int(1), &int(1)).is_err());
    }

    #[test]
    fn crossing_witnesses_hit_levels() {
        let f = tent(int(2)).iterate(3).unwrap();
        let (x, y) = (ratio(1, 5), ratio(2, 3));
        let r = crossing_count(&f, &x, &y).unwrap();
        assert_eq!(r.count, 8);
        assert_eq!(r.count, covering_oracle(&f, &x, &y));
        for (c, d) in &r.witnesses {
            assert_eq!(f.eval(c).unwrap(), x);
            assert_eq!(f.eval(d).unwrap(), y);
        }
        for pair in r.witnesses.windows(2) {
            assert!(pair[0].0.clone().max(pair[0].1.clone()) <= pair[1].0.clone().min(pair[1].1.clone()));
        }
    }

    #[test]
    fn crossing_with_flat_levels() {
        // Up to 1/2, flat, up to 1, down to 0.
        let f = PwlMap::new(
            int(0),
            int(1),
            vec![int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)],
            vec![int(0), ratio(1, 2), ratio(1, 2), int(1), int(0)],
        )
        .unwrap();
        assert_eq!(crossing_count(&f, &int(0), &ratio(1, 2)).unwrap().count, 2);
        assert_eq!(covering_oracle(&f, &int(0), &ratio(1, 2)), 2);
        assert_eq!(crossing_count(&f, &ratio(1, 2), &int(1)).unwrap().count, 2);
    }

    #[test]
    fn max_crossing_examples() {
        let m = max_crossing(&id());
        assert_eq!(m.count, 1);
        let m = max_crossing(&tent(int(2)));
        assert_eq!((m.count, m.witness_x.clone(), m.witness_y.clone()), (2, int(0), int(1)));
        let t2 = tent(int(2));
        for k in 1..=8u32 {
            assert_eq!(max_crossing(&t2.iterate(k as usize).unwrap()).count, 2usize.pow(k));
        }
        let c = PwlMap::constant(int(0), int(1), int(0)).unwrap();
        assert_eq!(max_crossing(&c).count, 0);
    }

    #[test]
    fn max_crossing_uses_gap_interior_when_needed() {
        // Two humps of different heights: the widest pair is crossed twice,
        // but the lower band is crossed four times.
        let f = PwlMap::new(
            int(0),
            int(1),
            vec![int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)],
            vec![int(0), int(1), int(0), ratio(1, 2), int(0)],
        )
        .unwrap();
        let m = max_crossing(&f);
        assert_eq!(m.count, 4);
        assert_eq!(crossing_count(&f, &m.witness_x, &m.witness_y).unwrap().count, 4);
        assert_eq!(crossing_count(&f, &int(0), &int(1)).unwrap().count, 2);
    }
}
