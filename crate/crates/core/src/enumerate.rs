//! Exhaustive enumeration of `(S, D)`-integral points of `PGL_n(Q)` with
//! `H_lambda <= B`.
//!
//! Every counted matrix satisfies `s_1(M) <= B^((n-1)/(n lambda_min))`, since
//! each simple-root factor of the height is at least 1, the top elementary
//! divisor is at least `|det|^(1/(n-1))` and the bottom singular value at most
//! `(|det|/s_1)^(1/(n-1))`. Rows and columns therefore lie in a Euclidean ball
//! of that radius, and so do all entries.
//!
//! Two search strategies share one acceptance predicate:
//! * [`enumerate_bounded`] walks rows drawn from the ball, pruning on the
//!   largest eigenvalue of the partial Gram matrix;
//! * [`enumerate_pgl2_columns`] walks first columns of a `2 x 2` matrix and
//!   solves `ad - bc = u` for the second column over the admissible
//!   determinants `u`.
//!
//! Work is split into contiguous blocks of the outer search list, processed in
//! parallel, and merged by summation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heights::{
    global_height_with_tol, integrality_delta, is_normalized, PointRep, DEFAULT_ARCH_TOL,
};
use crate::picard::{format_rational, BoundarySelection, DivisorVector};
use crate::place::{normalize_places, Place};

pub const DEFAULT_GUARD: f64 = 1e-9;
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;

/// Slack on floating bounds; keeps every search region a superset.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CountQuery {
    pub n: usize,
    pub lam: DivisorVector,
    pub sel: BoundarySelection,
    pub places: Vec<Place>,
    pub thresholds: Vec<f64>,
}

impl CountQuery {
    pub fn new(
        n: usize,
        lam: DivisorVector,
        sel: BoundarySelection,
        places: &[Place],
        thresholds: Vec<f64>,
    ) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!(
                "enumeration supports PGL_2 and PGL_3, got n = {n}"
            )));
        }
        if lam.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: lam.len(),
            });
        }
        if sel.rank() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: sel.rank(),
            });
        }
        lam.require_effective_interior()?;
        if thresholds.is_empty() {
            return Err(Error::InvalidQuery("no thresholds".into()));
        }
        if thresholds.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::InvalidQuery("thresholds must be finite and positive".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidQuery("thresholds must be strictly increasing".into()));
        }
        Ok(Self {
            n,
            lam,
            sel,
            places: normalize_places(places)?,
            thresholds,
        })
    }

    pub fn max_threshold(&self) -> f64 {
        *self.thresholds.last().expect("validated nonempty")
    }

    fn lambda_min(&self) -> f64 {
        self.lam
            .to_f64()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Upper bound on the largest singular value of any counted matrix.
    pub fn sigma_bound(&self) -> f64 {
        let n = self.n as f64;
        self.max_threshold()
            .max(1.0)
            .powf((n - 1.0) / (n * self.lambda_min()))
    }

    /// Squared radius of the integer ball holding every row and column.
    fn radius_sq(&self) -> i64 {
        let s = self.sigma_bound();
        (s * s * (1.0 + BOUND_SLACK)).floor() as i64
    }
}

#[derive(Clone, Debug)]
pub struct EnumOptions {
    pub budget: u64,
    pub guard: f64,
    pub arch_tol: f64,
    pub list_points: bool,
    /// Number of contiguous blocks the outer search list is split into.
    pub blocks: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            guard: DEFAULT_GUARD,
            arch_tol: DEFAULT_ARCH_TOL,
            list_points: false,
            blocks: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountedPoint {
    pub entries: Vec<i64>,
    pub height: f64,
    /// Per simple root: exact finite part (as a string) and archimedean factor.
    pub per_divisor: Vec<(String, f64)>,
    pub delta: bool,
    /// True when the height lies within the guard band of some threshold.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub flagged: Vec<u64>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<Vec<CountedPoint>>,
}

impl CountSeries {
    pub fn rows(&self) -> impl Iterator<Item = (f64, u64, u64)> + '_ {
        self.thresholds
            .iter()
            .zip(&self.counts)
            .zip(&self.flagged)
            .map(|((b, n), f)| (*b, *n, *f))
    }

    pub fn count_at(&self, b: f64) -> Option<u64> {
        self.thresholds
            .iter()
            .position(|&t| t == b)
            .map(|i| self.counts[i])
    }
}

/// Entry bound `E`: every counted matrix has all `|entries| <= E`.
pub fn entry_bound(query: &CountQuery) -> u64 {
    (query.sigma_bound() * (1.0 + BOUND_SLACK)).floor() as u64
}

fn near(h: f64, b: f64, guard: f64) -> bool {
    (h - b).abs() <= guard * b.max(1.0)
}

struct Acceptor<'a> {
    query: &'a CountQuery,
    opts: &'a EnumOptions,
}

struct Hit {
    height: f64,
    point: Option<CountedPoint>,
}

impl Acceptor<'_> {
    /// The shared acceptance predicate: normalized, primitive, nonsingular,
    /// integral, and height within the largest threshold (guard included).
    fn accept(&self, entries: &[i64]) -> Result<Option<Hit>> {
        if !is_normalized(entries) {
            return Ok(None);
        }
        let Ok(point) = PointRep::new(self.query.n, entries.to_vec()) else {
            return Ok(None);
        };
        let delta = integrality_delta(&point, &self.query.sel, &self.query.places)?;
        if !delta {
            return Ok(None);
        }
        let hv = global_height_with_tol(&point, &self.query.lam, self.opts.arch_tol)?;
        let h = hv.total();
        let bmax = self.query.max_threshold();
        if !(h <= bmax || near(h, bmax, self.opts.guard)) {
            return Ok(None);
        }
        let point = self.opts.list_points.then(|| CountedPoint {
            entries: entries.to_vec(),
            height: h,
            per_divisor: hv
                .per_divisor
                .iter()
                .map(|d| (format_rational(&d.finite.clone().into()), d.arch))
                .collect(),
            delta,
            flagged: self
                .query
                .thresholds
                .iter()
                .any(|&b| near(h, b, self.opts.guard)),
        });
        Ok(Some(Hit { height: h, point }))
    }
}

#[derive(Default)]
struct Tally {
    counts: Vec<u64>,
    flagged: Vec<u64>,
    points: Vec<CountedPoint>,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            flagged: vec![0; k],
            points: Vec::new(),
        }
    }

    fn add(&mut self, hit: Hit, thresholds: &[f64], guard: f64) {
        for (i, &b) in thresholds.iter().enumerate() {
            let close = near(hit.height, b, guard);
            if hit.height <= b || close {
                self.counts[i] += 1;
            }
            if close {
                self.flagged[i] += 1;
            }
        }
        if let Some(p) = hit.point {
            self.points.push(p);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (a, b) in self.flagged.iter_mut().zip(other.flagged) {
            *a += b;
        }
        self.points.extend(other.points);
        self
    }
}

fn run_blocks<T, F>(
    query: &CountQuery,
    opts: &EnumOptions,
    outer: &[T],
    start: Instant,
    visit: F,
) -> Result<CountSeries>
where
    T: Sync,
    F: Fn(&T, &Acceptor<'_>, &mut Tally) -> Result<()> + Sync,
{
    let k = query.thresholds.len();
    let acceptor = Acceptor { query, opts };
    let block = outer.len().div_ceil(opts.blocks.max(1)).max(1);
    let tally = outer
        .par_chunks(block)
        .map(|chunk| {
            let mut t = Tally::new(k);
            for item in chunk {
                visit(item, &acceptor, &mut t)?;
            }
            Ok::<Tally, Error>(t)
        })
        .try_reduce(|| Tally::new(k), |a, b| Ok(a.merge(b)))?;

    let points = opts.list_points.then(|| {
        let mut p = tally.points;
        p.sort_by(|a, b| a.entries.cmp(&b.entries));
        p
    });
    Ok(CountSeries {
        thresholds: query.thresholds.clone(),
        counts: tally.counts,
        flagged: tally.flagged,
        seconds: start.elapsed().as_secs_f64(),
        points,
    })
}

/// All nonzero integer vectors of length `dim` with squared norm at most
/// `r2`, in lexicographic order.
pub fn ball_vectors(dim: usize, r2: i64) -> Vec<Vec<i64>> {
    fn rec(dim: usize, r2: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == dim {
            if cur.iter().any(|&x| x != 0) {
                out.push(cur.clone());
            }
            return;
        }
        let r = (r2 as f64).sqrt().floor() as i64 + 1;
        for x in -r..=r {
            if x * x <= r2 {
                cur.push(x);
                rec(dim, r2 - x * x, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(dim, r2.max(0), &mut Vec::with_capacity(dim), &mut out);
    out
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of the Gram matrix of two vectors.
fn gram2_top(r1: &[i64], r2: &[i64]) -> f64 {
    let a = dot(r1, r1) as f64;
    let d = dot(r2, r2) as f64;
    let b = dot(r1, r2) as f64;
    0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b * b).sqrt())
}

/// Estimated inner-loop iterations of the row strategy.
pub fn estimate_rows_work(query: &CountQuery) -> u64 {
    let r2 = query.radius_sq() as f64;
    let n = query.n as i32;
    // volume of the n-ball of radius sqrt(r2), plus boundary slack
    let r = r2.sqrt() + 1.0;
    let vol = match query.n {
        2 => std::f64::consts::PI * r * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
        _ => (2.0 * r + 1.0).powi(n),
    };
    (0.5 * vol * vol.powi(n - 1)).min(u64::MAX as f64) as u64
}

fn check_budget(estimate: u64, opts: &EnumOptions) -> Result<()> {
    if estimate > opts.budget {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: opts.budget,
        });
    }
    Ok(())
}

/// General enumerator: builds matrices row by row from the ball of radius
/// `s_1` bound, pruning partial matrices whose Gram matrix already exceeds it.
pub fn enumerate_bounded(query: &CountQuery, opts: &EnumOptions) -> Result<CountSeries> {
    check_budget(estimate_rows_work(query), opts)?;
    let start = Instant::now();
    let n = query.n;
    let r2 = query.radius_sq();
    // Gram eigenvalues are not integers: compare with sigma^2, not its floor
    let top_limit = query.sigma_bound().powi(2) * (1.0 + BOUND_SLACK);
    let rows = ball_vectors(n, r2);
    let firsts: Vec<&Vec<i64>> = rows.iter().filter(|r| first_nonzero_positive(r)).collect();

    run_blocks(query, opts, &firsts, start, |r1, acc, tally| {
        let mut m = vec![0i64; n * n];
        m[..n].copy_from_slice(r1);
        for r2v in &rows {
            if gram2_top(r1, r2v) > top_limit {
                continue;
            }
            m[n..2 * n].copy_from_slice(r2v);
            if n == 2 {
                if m[0] * m[3] == m[1] * m[2] {
                    continue;
                }
                if let Some(hit) = acc.accept(&m)? {
                    tally.add(hit, &query.thresholds, opts.guard);
                }
                continue;
            }
            for r3v in &rows {
                if gram2_top(r1, r3v) > top_limit || gram2_top(r2v, r3v) > top_limit {
                    continue;
                }
                m[2 * n..].copy_from_slice(r3v);
                if let Some(hit) = acc.accept(&m)? {
                    tally.add(hit, &query.thresholds, opts.guard);
                }
            }
        }
        Ok(())
    })
}

/// Admissible determinants for the column strategy: S-units when the single
/// boundary root is in `A_D`, every nonzero integer otherwise; bounded by
/// `|det| = s_1 s_2 <= s_1^2`.
fn admissible_determinants(query: &CountQuery) -> Vec<i64> {
    let limit = query.radius_sq();
    let mut dets: Vec<i64> = if query.sel.is_empty() {
        (1..=limit).collect()
    } else {
        let mut units = vec![1i64];
        for p in query.places.iter().filter_map(|p| p.prime()) {
            let p = p as i64;
            let mut next = Vec::new();
            for &u in &units {
                let mut v = u;
                while let Some(w) = v.checked_mul(p).filter(|&w| w <= limit) {
                    next.push(w);
                    v = w;
                }
            }
            units.extend(next);
        }
        units.retain(|&u| u <= limit);
        units
    };
    dets.sort_unstable();
    dets.iter().flat_map(|&u| [u, -u]).collect()
}

pub fn estimate_columns_work(query: &CountQuery) -> u64 {
    let r = (query.radius_sq() as f64).sqrt() + 1.0;
    let cols = std::f64::consts::PI * r * r;
    (cols * admissible_determinants(query).len() as f64 * 4.0) as u64
}

/// Column-solve enumerator for `PGL_2`. For each first column `(a, c)` and
/// admissible determinant `u` divisible by `g = gcd(a, c)`, the solutions of
/// `a d - c b = u` are `(b, d) = (b0, d0) + k (a/g, c/g)`, and the Frobenius
/// bound `a^2 + b^2 + c^2 + d^2 <= X + u^2 / X` (equivalent to `s_1^2 <= X`)
/// cuts `k` to an interval.
pub fn enumerate_pgl2_columns(query: &CountQuery, opts: &EnumOptions) -> Result<CountSeries> {
    if query.n != 2 {
        return Err(Error::Unsupported("the column strategy is PGL_2 only".into()));
    }
    check_budget(estimate_columns_work(query), opts)?;
    let start = Instant::now();
    let r2 = query.radius_sq();
    let x = query.sigma_bound().powi(2) * (1.0 + BOUND_SLACK);
    let dets = admissible_determinants(query);
    let columns = ball_vectors(2, r2);

    run_blocks(query, opts, &columns, start, |col, acc, tally| {
        let (a, c) = (col[0], col[1]);
        let g = num_integer::gcd(a, c);
        let (a1, c1) = (a / g, c / g);
        // a1 * s + c1 * t = 1
        let eg = num_integer::Integer::extended_gcd(&a1, &c1);
        let (s, t) = if eg.gcd < 0 { (-eg.x, -eg.y) } else { (eg.x, eg.y) };
        let w2 = (a1 * a1 + c1 * c1) as f64;
        for &u in &dets {
            if u % g != 0 {
                continue;
            }
            let u1 = u / g;
            // a1 d - c1 b = u1  =>  d0 = s u1, b0 = -t u1
            let (b0, d0) = (-t * u1, s * u1);
            let uf = u as f64;
            let fmax = x + uf * uf / x;
            let rest = fmax - (a * a + c * c) as f64;
            if rest < 0.0 {
                continue;
            }
            let vw = (b0 * a1 + d0 * c1) as f64;
            let v2 = (b0 * b0 + d0 * d0) as f64;
            let disc = vw * vw - w2 * (v2 - rest);
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let lo = ((-vw - sq) / w2).floor() as i64 - 1;
            let hi = ((-vw + sq) / w2).ceil() as i64 + 1;
            let fmax_int = (fmax * (1.0 + BOUND_SLACK)).floor() as i64;
            for k in lo..=hi {
                let b = b0 + k * a1;
                let d = d0 + k * c1;
                if a * a + b * b + c * c + d * d > fmax_int {
                    continue;
                }
                if let Some(hit) = acc.accept(&[a, b, c, d])? {
                    tally.add(hit, &query.thresholds, opts.guard);
                }
            }
        }
        Ok(())
    })
}

/// The `PGL_2` integral case with `lambda = D_alpha`, `A_D = {alpha}`: the
/// determinant of every counted matrix is an S-unit.
pub fn enumerate_sl2_specialized(
    thresholds: Vec<f64>,
    places: &[Place],
    opts: &EnumOptions,
) -> Result<CountSeries> {
    if thresholds.iter().all(|&b| b < 1.0) {
        // heights are at least 1
        let k = thresholds.len();
        return Ok(CountSeries {
            thresholds,
            counts: vec![0; k],
            flagged: vec![0; k],
            seconds: 0.0,
            points: opts.list_points.then(Vec::new),
        });
    }
    let query = CountQuery::new(
        2,
        DivisorVector::from_ints(&[1]),
        BoundarySelection::full(1),
        places,
        thresholds,
    )?;
    enumerate_pgl2_columns(&query, opts)
}

/// Picks the column strategy for `PGL_2` and the row strategy otherwise.
pub fn enumerate_auto(query: &CountQuery, opts: &EnumOptions) -> Result<CountSeries> {
    if query.n == 2 {
        enumerate_pgl2_columns(query, opts)
    } else {
        enumerate_bounded(query, opts)
    }
}

pub fn estimate_work(query: &CountQuery) -> u64 {
    if query.n == 2 {
        estimate_columns_work(query)
    } else {
        estimate_rows_work(query)
    }
}

/// Largest singular value bound in terms of a height: used by callers who
/// want to size a search without building a query.
pub fn sigma_bound_for(n: usize, lambda_min: f64, b: f64) -> f64 {
    let n = n as f64;
    b.max(1.0).powf((n - 1.0) / (n * lambda_min))
}
