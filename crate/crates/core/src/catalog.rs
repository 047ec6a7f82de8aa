//! Named example maps: tent and zigzag families, a finite staircase with
//! growing entropy per block, and the sampled logistic family.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::pwl::PwlMap;
use crate::rational::{self, format_rational, int, ratio, Rational};

/// `t_α(x) = αx` on `[0, 1/2]`, `α(1 - x)` on `[1/2, 1]`, for `0 ≤ α ≤ 2`.
pub fn tent(alpha: &Rational) -> Result<PwlMap> {
    if alpha < &int(0) || alpha > &int(2) {
        return Err(Error::ParameterOutOfRange(format!("tent slope {} not in [0, 2]", format_rational(alpha))));
    }
    PwlMap::new(int(0), int(1), vec![int(0), ratio(1, 2), int(1)], vec![int(0), alpha / int(2), int(0)])
}

/// `m` laps of slope `±m`, each onto `[0, 1]`, starting upward at 0.
pub fn zigzag(laps: usize) -> Result<PwlMap> {
    if laps == 0 {
        return Err(Error::ParameterOutOfRange("zigzag needs at least one lap".into()));
    }
    let m = laps as i64;
    let xs = (0..=m).map(|i| ratio(i, m)).collect();
    let ys = (0..=m).map(|i| int(i % 2)).collect();
    PwlMap::new(int(0), int(1), xs, ys)
}

/// Truncated staircase on `[0, 1]`.
///
/// Block `B_n = [2^-n, 2^-(n-1)]` carries an affine copy of `g^n` with
/// `g = zigzag(base_laps)`, and `[0, 2^-N]` is the identity. Interior block
/// ends must be fixed points for continuity; when `g^n(1) ≠ 1` (even
/// `base_laps`) the copy occupies the left three quarters of the block and
/// an increasing connector joins it to the fixed right end.
pub fn staircase(blocks: usize, base_laps: usize, max_segments: usize) -> Result<PwlMap> {
    if blocks == 0 || base_laps < 2 {
        return Err(Error::ParameterOutOfRange("staircase needs N ≥ 1 and base_laps ≥ 2".into()));
    }
    let total: u128 = (1..=blocks as u32).map(|n| (base_laps as u128).saturating_pow(n)).sum();
    if total > max_segments as u128 {
        return Err(Error::ResourceLimit { limit: max_segments });
    }
    let g = zigzag(base_laps)?;
    let two = int(2);
    let mut xs = vec![int(0)];
    let mut ys = vec![int(0)];
    for n in (1..=blocks).rev() {
        let lo = Rational::one() / rational::Rational::from_integer(BigInt::from(2).pow(n as u32));
        let hi = &lo * &two;
        let width = &hi - &lo;
        let gn = g.iterate(n)?;
        let needs_connector = n > 1 && gn.values().last() != Some(&Rational::one());
        let scale = if needs_connector { &width * ratio(3, 4) } else { width.clone() };
        for (x, y) in gn.breakpoints().iter().zip(gn.values()) {
            xs.push(&lo + &scale * x);
            ys.push(&lo + &scale * y);
        }
        if needs_connector {
            xs.push(hi.clone());
            ys.push(hi.clone());
        }
    }
    // Block starts coincide with the previous block's end.
    let mut px = Vec::with_capacity(xs.len());
    let mut py = Vec::with_capacity(ys.len());
    for (x, y) in xs.into_iter().zip(ys) {
        if px.last() == Some(&x) {
            continue;
        }
        px.push(x);
        py.push(y);
    }
    PwlMap::new(int(0), int(1), px, py)
}

/// Logistic map `β x (1 - x)` on `[0, 1]`, evaluated exactly per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledMap {
    pub beta: Rational,
}

pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_REFINEMENTS: usize = 8;

pub fn logistic(beta: &Rational) -> Result<SampledMap> {
    if beta < &int(0) || beta > &int(4) {
        return Err(Error::ParameterOutOfRange(format!("logistic parameter {} not in [0, 4]", format_rational(beta))));
    }
    Ok(SampledMap { beta: beta.clone() })
}

impl SampledMap {
    pub fn eval(&self, x: &Rational) -> Rational {
        &self.beta * x * (Rational::one() - x)
    }

    pub fn descriptor(&self) -> String {
        format!("logistic:{}", format_rational(&self.beta))
    }

    /// Numerators of `f^k(i / grid)` over one shared denominator.
    ///
    /// With `x = p/q`, `f(x) = β_n p (q - p) / (β_d q²)`, so every sample
    /// keeps a common denominator and comparisons reduce to numerators.
    fn sample_numerators(&self, k: usize, grid: usize) -> Vec<BigInt> {
        let (bn, bd) = (self.beta.numer().clone(), self.beta.denom().clone());
        let mut q = BigInt::from(grid);
        let mut ps: Vec<BigInt> = (0..=grid).map(BigInt::from).collect();
        for _ in 0..k {
            for p in ps.iter_mut() {
                let rest = &q - &*p;
                *p = &bn * &*p * rest;
            }
            q = &bd * &q * &q;
        }
        ps
    }
}

/// Strict local extrema of a sampled sequence plus one; plateaus are
/// skipped.
fn sampled_laps(values: &[BigInt]) -> u64 {
    let mut laps = 1;
    let mut dir = Ordering::Equal;
    for w in values.windows(2) {
        let d = w[0].cmp(&w[1]);
        if d == Ordering::Equal {
            continue;
        }
        if dir != Ordering::Equal && d != dir {
            laps += 1;
        }
        dir = d;
    }
    laps
}

/// Non-rigorous lap estimate for the sampled map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LapEstimate {
    pub laps: u64,
    pub grid: usize,
}

/// Doubles the grid until the same count is read at three consecutive
/// resolutions.
pub fn sampled_lap_count(map: &SampledMap, k: usize, grid: usize, max_refinements: usize) -> Result<LapEstimate> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("iterate order must be at least 1".into()));
    }
    if grid < DEFAULT_GRID {
        return Err(Error::ParameterOutOfRange(format!("grid {grid} below the minimum of {DEFAULT_GRID}")));
    }
    let mut readings: Vec<u64> = Vec::new();
    let mut g = grid;
    for _ in 0..=max_refinements {
        readings.push(sampled_laps(&map.sample_numerators(k, g)));
        if let [.., a, b, c] = readings[..] {
            if a == b && b == c {
                return Ok(LapEstimate { laps: c, grid: g });
            }
        }
        g *= 2;
    }
    Err(Error::NoConvergence { refinements: max_refinements })
}

/// A catalog entry resolved from its name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogMap {
    Pwl(PwlMap),
    Sampled(SampledMap),
}

/// Resolves names like `tent:3/2`, `zigzag:8`, `staircase:3:8`,
/// `logistic:4`, `identity`.
pub fn resolve(name: &str, max_segments: usize) -> Result<CatalogMap> {
    let parts: Vec<&str> = name.split(':').collect();
    let count = |s: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| Error::MalformedInput(format!("expected a positive integer, got {s:?}")))
    };
    match parts.as_slice() {
        ["identity"] => Ok(CatalogMap::Pwl(PwlMap::identity(int(0), int(1))?)),
        ["tent", a] => Ok(CatalogMap::Pwl(tent(&rational::parse_rational(a)?)?)),
        ["zigzag", m] => Ok(CatalogMap::Pwl(zigzag(count(m)?)?)),
        ["staircase", n, m] => Ok(CatalogMap::Pwl(staircase(count(n)?, count(m)?, max_segments)?)),
        ["logistic", b] => Ok(CatalogMap::Sampled(logistic(&rational::parse_rational(b)?)?)),
        _ => Err(Error::MalformedInput(format!("unknown catalog map {name:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lap_count;
    use crate::entropy::{constant_slope_entropy, entropy_bracket, horseshoe_search, Limits};

    #[test]
    fn tent_examples() {
        assert_eq!(tent(&int(2)).unwrap().eval(&ratio(1, 2)).unwrap(), int(1));
        assert_eq!(tent(&ratio(3, 2)).unwrap().eval(&ratio(1, 2)).unwrap(), ratio(3, 4));
        let b = entropy_bracket(&tent(&ratio(1, 2)).unwrap(), 8, Limits::default()).unwrap();
        assert_eq!((b.lower_bits, b.upper_bits), (0.0, 0.0));
        assert!(tent(&ratio(5, 2)).is_err());
        assert!(tent(&int(-1)).is_err());
    }

    #[test]
    fn zigzag_examples() {
        assert_eq!(constant_slope_entropy(&zigzag(8).unwrap()).unwrap(), 3.0);
        let z1 = zigzag(1).unwrap();
        assert_eq!(z1, PwlMap::identity(int(0), int(1)).unwrap());
        assert_eq!(constant_slope_entropy(&z1).unwrap(), 0.0);
        assert_eq!(horseshoe_search(&zigzag(4).unwrap(), 1, Limits::default()).unwrap().unwrap().s, 4);
        assert!(zigzag(0).is_err());
    }

    #[test]
    fn staircase_is_a_continuous_self_map() {
        for (n, m) in [(1, 8), (2, 2), (3, 8), (3, 3)] {
            let f = staircase(n, m, 1_000_000).unwrap();
            assert!(f.is_self_map());
            // Block ends are fixed.
            for j in 0..n {
                let p = Rational::one() / Rational::from_integer(BigInt::from(2).pow(j as u32));
                assert_eq!(f.eval(&p).unwrap() == p, j > 0 || m % 2 == 1, "n={n} m={m} j={j}");
            }
        }
    }

    #[test]
    fn staircase_one_block_is_a_zigzag_copy() {
        let f = staircase(1, 8, 1000).unwrap();
        assert_eq!(lap_count(&f).count(), 8);
        let b = entropy_bracket(&f, 3, Limits::default()).unwrap();
        assert!((b.lower_bits - 3.0).abs() <= 0.01 && (b.upper_bits - 3.0).abs() <= 0.01);
        let b = entropy_bracket(&staircase(1, 2, 1000).unwrap(), 4, Limits::default()).unwrap();
        assert_eq!((b.lower_bits, b.upper_bits), (1.0, 1.0));
    }

    #[test]
    fn staircase_respects_ceiling() {
        assert_eq!(staircase(4, 8, 1000), Err(Error::ResourceLimit { limit: 1000 }));
    }

    #[test]
    fn logistic_examples() {
        let f = logistic(&int(4)).unwrap();
        assert_eq!(f.eval(&ratio(1, 2)), int(1));
        assert_eq!(f.eval(&ratio(1, 4)), ratio(3, 4));
        assert_eq!(logistic(&int(2)).unwrap().eval(&ratio(1, 2)), ratio(1, 2));
        assert!(logistic(&int(5)).is_err());
    }

    #[test]
    fn sampled_numerators_match_exact_eval() {
        let f = logistic(&ratio(7, 2)).unwrap();
        let grid = 1000;
        let ps = f.sample_numerators(2, grid);
        let mut q = BigInt::from(grid);
        for _ in 0..2 {
            q = BigInt::from(2) * &q * &q;
        }
        for i in [0usize, 1, 333, 500, 999, 1000] {
            let x = ratio(i as i64, grid as i64);
            let exact = f.eval(&f.eval(&x));
            assert_eq!(Rational::new(ps[i].clone(), q.clone()), exact);
        }
    }

    #[test]
    fn sampled_lap_examples() {
        let f = logistic(&int(4)).unwrap();
        assert_eq!(sampled_lap_count(&f, 1, 1000, 8).unwrap().laps, 2);
        assert_eq!(sampled_lap_count(&f, 3, 1000, 8).unwrap().laps, 8);
        let g = logistic(&int(2)).unwrap();
        assert_eq!(sampled_lap_count(&g, 1, 1000, 8).unwrap().laps, 2);
        for k in 1..=5 {
            assert!(sampled_lap_count(&g, k, 1000, 8).unwrap().laps <= 2);
        }
        assert!(sampled_lap_count(&f, 1, 10, 8).is_err());
    }

    #[test]
    fn resolve_names() {
        assert!(matches!(resolve("tent:3/2", 1000), Ok(CatalogMap::Pwl(_))));
        assert!(matches!(resolve("logistic:4", 1000), Ok(CatalogMap::Sampled(_))));
        assert!(matches!(resolve("staircase:2:3", 1000), Ok(CatalogMap::Pwl(_))));
        assert!(resolve("tent:0.5", 1000).is_err());
        assert!(resolve("spiral:2", 1000).is_err());
    }
}
