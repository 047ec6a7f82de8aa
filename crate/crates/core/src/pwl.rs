//! Exact continuous piecewise-linear maps on a compact interval.
//!
//! A [`PwlMap`] is stored as its graph vertices `(x_i, y_i)`; between two
//! consecutive breakpoints the map is the affine interpolant. Every map
//! handed out by this module is canonical: no interior breakpoint sits on a
//! straight line through its neighbours.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwlMap {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    self_map: bool,
}

/// Accumulates graph vertices left to right, dropping collinear interior
/// points as it goes.
struct Builder {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    limit: Option<usize>,
}

impl Builder {
    fn with_capacity(n: usize, limit: Option<usize>) -> Self {
        Builder { xs: Vec::with_capacity(n), ys: Vec::with_capacity(n), limit }
    }

    fn push(&mut self, x: Rational, y: Rational) -> Result<()> {
        let n = self.xs.len();
        if n > 0 && self.xs[n - 1] == x {
            debug_assert_eq!(self.ys[n - 1], y, "discontinuity at {x}");
            return Ok(());
        }
        if n >= 2 {
            let (x0, y0) = (&self.xs[n - 2], &self.ys[n - 2]);
            let (x1, y1) = (&self.xs[n - 1], &self.ys[n - 1]);
            if (y1 - y0) * (&x - x1) == (&y - y1) * (x1 - x0) {
                self.xs[n - 1] = x;
                self.ys[n - 1] = y;
                return Ok(());
            }
        }
        self.xs.push(x);
        self.ys.push(y);
        if let Some(limit) = self.limit {
            if self.xs.len() > limit + 1 {
                return Err(Error::ResourceLimit { limit });
            }
        }
        Ok(())
    }

    fn finish(self) -> PwlMap {
        PwlMap::from_canonical(self.xs, self.ys)
    }
}

fn interpolate(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, x: &Rational) -> Rational {
    if x == x0 {
        return y0.clone();
    }
    if x == x1 {
        return y1.clone();
    }
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

/// Point on the segment `(x0,y0)-(x1,y1)` where it takes value `level`.
fn solve_level(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, level: &Rational) -> Rational {
    if level == y0 {
        return x0.clone();
    }
    if level == y1 {
        return x1.clone();
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

impl PwlMap {
    /// Builds a map on `[lo, hi]` from its graph vertices.
    pub fn new(lo: Rational, hi: Rational, breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::LengthMismatch { breakpoints: breakpoints.len(), values: values.len() });
        }
        if lo >= hi {
            return Err(Error::InvalidInterval(format!(
                "domain [{}, {}] is empty or degenerate",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        if breakpoints.len() < 2 {
            return Err(Error::DomainMismatch("at least the two domain endpoints are required".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedBreakpoints);
        }
        if breakpoints[0] != lo || breakpoints[breakpoints.len() - 1] != hi {
            return Err(Error::DomainMismatch(format!(
                "breakpoints span [{}, {}] but the domain is [{}, {}]",
                format_rational(&breakpoints[0]),
                format_rational(&breakpoints[breakpoints.len() - 1]),
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        let mut b = Builder::with_capacity(breakpoints.len(), None);
        for (x, y) in breakpoints.into_iter().zip(values) {
            b.push(x, y)?;
        }
        Ok(b.finish())
    }

    fn from_canonical(xs: Vec<Rational>, ys: Vec<Rational>) -> Self {
        let (lo, hi) = (&xs[0], &xs[xs.len() - 1]);
        let self_map = ys.iter().all(|y| y >= lo && y <= hi);
        PwlMap { xs, ys, self_map }
    }

    pub fn identity(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(lo.clone(), hi.clone(), vec![lo.clone(), hi.clone()], vec![lo, hi])
    }

    pub fn constant(lo: Rational, hi: Rational, value: Rational) -> Result<Self> {
        Self::new(lo.clone(), hi.clone(), vec![lo, hi], vec![value.clone(), value])
    }

    /// Affine map `slope * x + intercept` on `[lo, hi]`.
    pub fn affine(lo: Rational, hi: Rational, slope: &Rational, intercept: &Rational) -> Result<Self> {
        let ylo = slope * &lo + intercept;
        let yhi = slope * &hi + intercept;
        Self::new(lo.clone(), hi.clone(), vec![lo, hi], vec![ylo, yhi])
    }

    pub fn lo(&self) -> &Rational {
        &self.xs[0]
    }

    pub fn hi(&self) -> &Rational {
        &self.xs[self.xs.len() - 1]
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.ys
    }

    pub fn segment_count(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn is_self_map(&self) -> bool {
        self.self_map
    }

    pub fn domain_width(&self) -> Rational {
        self.hi() - self.lo()
    }

    /// Exact `(min, max)` of the map over its domain.
    pub fn value_range(&self) -> (Rational, Rational) {
        let min = self.ys.iter().min().unwrap().clone();
        let max = self.ys.iter().max().unwrap().clone();
        (min, max)
    }

    pub fn slope(&self, segment: usize) -> Rational {
        (&self.ys[segment + 1] - &self.ys[segment]) / (&self.xs[segment + 1] - &self.xs[segment])
    }

    pub fn slopes(&self) -> impl Iterator<Item = Rational> + '_ {
        (0..self.segment_count()).map(|i| self.slope(i))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    /// Index of the segment containing `x` (the left one at interior breakpoints).
    fn segment_of(&self, x: &Rational) -> usize {
        let i = self.xs.partition_point(|b| b < x);
        i.saturating_sub(1).min(self.segment_count() - 1)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain(x.clone()));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &Rational) -> Rational {
        let i = self.segment_of(x);
        interpolate(&self.xs[i], &self.ys[i], &self.xs[i + 1], &self.ys[i + 1], x)
    }

    /// Evaluates at an ascending list of points with a single sweep.
    pub(crate) fn eval_sorted(&self, points: &[Rational]) -> Vec<Rational> {
        let mut seg = 0;
        let last = self.segment_count() - 1;
        points
            .iter()
            .map(|x| {
                while seg < last && &self.xs[seg + 1] < x {
                    seg += 1;
                }
                interpolate(&self.xs[seg], &self.ys[seg], &self.xs[seg + 1], &self.ys[seg + 1], x)
            })
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PwlMap) -> Result<PwlMap> {
        self.compose_bounded(inner, None)
    }

    /// `self ∘ inner`, failing with [`Error::ResourceLimit`] once the result
    /// would exceed `max_segments` segments.
    pub fn compose_bounded(&self, inner: &PwlMap, max_segments: Option<usize>) -> Result<PwlMap> {
        let (rlo, rhi) = inner.value_range();
        if &rlo < self.lo() || &rhi > self.hi() {
            return Err(Error::RangeEscapesDomain { lo: format_rational(&rlo), hi: format_rational(&rhi) });
        }
        let mut b = Builder::with_capacity(inner.xs.len(), max_segments);
        let outer_vals = self.eval_points(&inner.ys);
        for ((xw, yw), v0) in inner.xs.windows(2).zip(inner.ys.windows(2)).zip(&outer_vals) {
            let (x0, x1) = (&xw[0], &xw[1]);
            let (y0, y1) = (&yw[0], &yw[1]);
            b.push(x0.clone(), v0.clone())?;
            match y0.cmp(y1) {
                Ordering::Equal => {}
                Ordering::Less => {
                    let start = self.xs.partition_point(|z| z <= y0);
                    let end = self.xs.partition_point(|z| z < y1);
                    for j in start..end {
                        b.push(solve_level(x0, y0, x1, y1, &self.xs[j]), self.ys[j].clone())?;
                    }
                }
                Ordering::Greater => {
                    let start = self.xs.partition_point(|z| z <= y1);
                    let end = self.xs.partition_point(|z| z < y0);
                    for j in (start..end).rev() {
                        b.push(solve_level(x0, y0, x1, y1, &self.xs[j]), self.ys[j].clone())?;
                    }
                }
            }
        }
        let n = inner.xs.len() - 1;
        b.push(inner.xs[n].clone(), outer_vals[n].clone())?;
        Ok(b.finish())
    }

    fn eval_points(&self, points: &[Rational]) -> Vec<Rational> {
        points.iter().map(|y| self.eval_unchecked(y)).collect()
    }

    /// `f^k` by repeated composition.
    pub fn iterate(&self, k: usize) -> Result<PwlMap> {
        self.iterate_bounded(k, None)
    }

    pub fn iterate_bounded(&self, k: usize, max_segments: Option<usize>) -> Result<PwlMap> {
        if k == 0 {
            return Err(Error::ParameterOutOfRange("iterate order must be at least 1".into()));
        }
        if !self.self_map {
            return Err(Error::NotSelfMap);
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = self.compose_bounded(&acc, max_segments)?;
        }
        Ok(acc)
    }

    /// `τ ∘ f` where `τ` saturates values to `[a, b]`.
    pub fn clamp(&self, a: &Rational, b: &Rational) -> Result<PwlMap> {
        if a >= b {
            return Err(Error::InvalidInterval(format!(
                "clamp range [{}, {}] is empty",
                format_rational(a),
                format_rational(b)
            )));
        }
        let clip = |y: &Rational| -> Rational {
            if y < a {
                a.clone()
            } else if y > b {
                b.clone()
            } else {
                y.clone()
            }
        };
        let mut out = Builder::with_capacity(self.xs.len(), None);
        for i in 0..self.segment_count() {
            let (x0, x1, y0, y1) = (&self.xs[i], &self.xs[i + 1], &self.ys[i], &self.ys[i + 1]);
            out.push(x0.clone(), clip(y0))?;
            let mut cuts: Vec<Rational> = [a, b]
                .into_iter()
                .filter(|l| (y0 < *l && *l < y1) || (y1 < *l && *l < y0))
                .map(|l| solve_level(x0, y0, x1, y1, l))
                .collect();
            cuts.sort();
            for x in cuts {
                let y = interpolate(x0, y0, x1, y1, &x);
                out.push(x, clip(&y))?;
            }
        }
        let n = self.segment_count();
        out.push(self.xs[n].clone(), clip(&self.ys[n]))?;
        Ok(out.finish())
    }

    /// `phi ∘ f ∘ phi⁻¹`, a map on the target interval of `phi`.
    pub fn conjugate(&self, phi: &Homeomorphism) -> Result<PwlMap> {
        if phi.map.lo() != self.lo() || phi.map.hi() != self.hi() {
            return Err(Error::NotBijective("homeomorphism domain differs from the map's domain".into()));
        }
        let inv = phi.inverse();
        phi.map.compose(&self.compose(&inv)?)
    }

    /// Exact sup-norm of `self - other`.
    pub fn linf_distance(&self, other: &PwlMap) -> Result<Rational> {
        if self.lo() != other.lo() || self.hi() != other.hi() {
            return Err(Error::DomainMismatch("maps have different domains".into()));
        }
        let pts = merge_breakpoints(&[self, other]);
        let a = self.eval_sorted(&pts);
        let b = other.eval_sorted(&pts);
        Ok(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).max().unwrap())
    }

    /// Restriction to the subinterval `[lo, hi]` of the domain.
    pub fn restrict(&self, lo: &Rational, hi: &Rational) -> Result<PwlMap> {
        if lo >= hi || lo < self.lo() || hi > self.hi() {
            return Err(Error::InvalidInterval(format!(
                "[{}, {}] is not a nondegenerate subinterval of the domain",
                format_rational(lo),
                format_rational(hi)
            )));
        }
        let start = self.xs.partition_point(|x| x <= lo);
        let end = self.xs.partition_point(|x| x < hi);
        let mut xs = Vec::with_capacity(end - start + 2);
        let mut ys = Vec::with_capacity(end - start + 2);
        xs.push(lo.clone());
        ys.push(self.eval_unchecked(lo));
        for j in start..end {
            xs.push(self.xs[j].clone());
            ys.push(self.ys[j].clone());
        }
        xs.push(hi.clone());
        ys.push(self.eval_unchecked(hi));
        Ok(Self::from_canonical(xs, ys))
    }

    /// `bias + Σ coef_i · f_i` over maps sharing one domain.
    pub fn affine_combination(terms: &[(Rational, &PwlMap)], bias: &Rational, lo: &Rational, hi: &Rational) -> Result<PwlMap> {
        for (_, f) in terms {
            if f.lo() != lo || f.hi() != hi {
                return Err(Error::DomainMismatch("summands have different domains".into()));
            }
        }
        let maps: Vec<&PwlMap> = terms.iter().filter(|(c, _)| !c.is_zero()).map(|(_, f)| *f).collect();
        let pts = if maps.is_empty() { vec![lo.clone(), hi.clone()] } else { merge_breakpoints(&maps) };
        let mut acc = vec![bias.clone(); pts.len()];
        for (c, f) in terms.iter().filter(|(c, _)| !c.is_zero()) {
            for (a, v) in acc.iter_mut().zip(f.eval_sorted(&pts)) {
                *a += c * v;
            }
        }
        let mut b = Builder::with_capacity(pts.len(), None);
        for (x, y) in pts.into_iter().zip(acc) {
            b.push(x, y)?;
        }
        Ok(b.finish())
    }

    /// Pointwise maximum of two maps on the same domain.
    pub fn pointwise_max(&self, other: &PwlMap) -> Result<PwlMap> {
        if self.lo() != other.lo() || self.hi() != other.hi() {
            return Err(Error::DomainMismatch("maps have different domains".into()));
        }
        let pts = merge_breakpoints(&[self, other]);
        let a = self.eval_sorted(&pts);
        let c = other.eval_sorted(&pts);
        let mut b = Builder::with_capacity(pts.len(), None);
        for i in 0..pts.len() {
            b.push(pts[i].clone(), a[i].clone().max(c[i].clone()))?;
            if i + 1 < pts.len() {
                let d0 = &a[i] - &c[i];
                let d1 = &a[i + 1] - &c[i + 1];
                if rational::sign(&d0) * rational::sign(&d1) == num_bigint::Sign::Minus {
                    // Crossing of the two affine pieces.
                    let x = &pts[i] + &d0 * (&pts[i + 1] - &pts[i]) / (&d0 - &d1);
                    let y = interpolate(&pts[i], &a[i], &pts[i + 1], &a[i + 1], &x);
                    b.push(x, y)?;
                }
            }
        }
        Ok(b.finish())
    }

    /// `max(self, 0)`.
    pub fn relu(&self) -> Result<PwlMap> {
        let zero = PwlMap::constant(self.lo().clone(), self.hi().clone(), Rational::zero())?;
        self.pointwise_max(&zero)
    }
}

/// Sorted union of the breakpoints of maps sharing one domain.
pub(crate) fn merge_breakpoints(maps: &[&PwlMap]) -> Vec<Rational> {
    let mut pts: Vec<Rational> = maps.iter().flat_map(|m| m.xs.iter().cloned()).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// A strictly monotone PWL bijection between two intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homeomorphism {
    map: PwlMap,
}

impl Homeomorphism {
    pub fn new(map: PwlMap) -> Result<Self> {
        let ys = map.values();
        let up = ys.windows(2).all(|w| w[0] < w[1]);
        let down = ys.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::NotBijective("values are not strictly monotone".into()));
        }
        Ok(Homeomorphism { map })
    }

    /// The increasing affine bijection `[lo, hi] -> [target_lo, target_hi]`.
    pub fn affine(lo: Rational, hi: Rational, target_lo: Rational, target_hi: Rational) -> Result<Self> {
        Self::new(PwlMap::new(lo.clone(), hi.clone(), vec![lo, hi], vec![target_lo, target_hi])?)
    }

    pub fn map(&self) -> &PwlMap {
        &self.map
    }

    pub fn target(&self) -> (Rational, Rational) {
        self.map.value_range()
    }

    pub fn inverse(&self) -> PwlMap {
        let mut pairs: Vec<(Rational, Rational)> =
            self.map.ys.iter().cloned().zip(self.map.xs.iter().cloned()).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (xs, ys): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        PwlMap::from_canonical(xs, ys)
    }
}

/// JSON map file: `{"domain":["0","1"],"breakpoints":[...],"values":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(with = "rational::vec_as_string")]
    pub domain: Vec<Rational>,
    #[serde(with = "rational::vec_as_string")]
    pub breakpoints: Vec<Rational>,
    #[serde(with = "rational::vec_as_string")]
    pub values: Vec<Rational>,
}

impl MapFile {
    pub fn into_map(self) -> Result<PwlMap> {
        if self.domain.len() != 2 {
            return Err(Error::MalformedInput("domain must have exactly two entries".into()));
        }
        let mut d = self.domain.into_iter();
        let (lo, hi) = (d.next().unwrap(), d.next().unwrap());
        PwlMap::new(lo, hi, self.breakpoints, self.values)
    }
}

impl From<&PwlMap> for MapFile {
    fn from(f: &PwlMap) -> Self {
        MapFile { domain: vec![f.lo().clone(), f.hi().clone()], breakpoints: f.xs.clone(), values: f.ys.clone() }
    }
}

pub fn parse_map_json(text: &str) -> Result<PwlMap> {
    let file: MapFile = serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    file.into_map()
}
