//! Local height integrals for the trivial character and their Euler products.
//!
//! A local factor is a sum over Cartan cells `t(a)`, `a` in `N^orbits`, of
//! `q^(-<s lambda, a>) vol(K t(a) K)`. With the modular approximation
//! `vol ~ q^(<kappa, a>)` the sum factors into geometric series; for `PGL_2`
//! the true volume of `K diag(1, p^m) K` is the number of sublattices of
//! `Z_p^2` with elementary divisors `(1, p^m)`, which we count exactly.
//!
//! Everything is evaluated on real `s` in `f64`, accumulating logarithms with
//! `ln_1p` and compensated summation so that products over thousands of primes
//! keep close to full relative precision.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::diagram_action::DiagramAction;
use crate::error::{Error, Result};
use crate::exponents::a_of_lambda;
use crate::picard::{BoundarySelection, DivisorVector};
use crate::place::is_prime;

pub const DEFAULT_DEPTH: u32 = 64;

/// Exponent data of one diagram-automorphism orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitExponent {
    /// Smallest member, 1-based; names the orbit in diagnostics.
    pub label: usize,
    pub kappa: i64,
    pub lambda: f64,
    pub size: usize,
    pub in_d: bool,
}

impl OrbitExponent {
    /// `(s lambda - kappa) l`: the per-cell decay exponent.
    pub fn margin(&self, s: f64) -> f64 {
        (s * self.lambda - self.kappa as f64) * self.size as f64
    }
}

fn orbit_exponents(
    da: &DiagramAction,
    lam: &DivisorVector,
    sel: &BoundarySelection,
) -> Result<Vec<OrbitExponent>> {
    lam.check_action(da)?;
    sel.check_orbit_stable(da)?;
    let kappa = da.root_system().kappa();
    let lf = lam.to_f64();
    Ok(da
        .orbits()
        .iter()
        .map(|orb| {
            let i = orb[0];
            OrbitExponent {
                label: i + 1,
                kappa: kappa[i],
                lambda: lf[i],
                size: orb.len(),
                in_d: sel.contains(i),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerFactorSpec {
    pub q: u64,
    pub orbits: Vec<OrbitExponent>,
    pub depth: u32,
}

impl EulerFactorSpec {
    pub fn new(q: u64, orbits: Vec<OrbitExponent>, depth: u32) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::InvalidQuery(format!("q = {q} is not prime")));
        }
        if depth == 0 {
            return Err(Error::InvalidQuery("truncation depth must be at least 1".into()));
        }
        if orbits.is_empty() {
            return Err(Error::InvalidQuery("no orbits".into()));
        }
        Ok(Self { q, orbits, depth })
    }

    pub fn from_action(
        da: &DiagramAction,
        lam: &DivisorVector,
        sel: &BoundarySelection,
        q: u64,
        depth: u32,
    ) -> Result<Self> {
        Self::new(q, orbit_exponents(da, lam, sel)?, depth)
    }

    /// `PGL_2` (type `A_1`) with `lambda = (lam)`.
    pub fn pgl2(q: u64, lam: f64, depth: u32) -> Result<Self> {
        Self::new(
            q,
            vec![OrbitExponent {
                label: 1,
                kappa: 1,
                lambda: lam,
                size: 1,
                in_d: false,
            }],
            depth,
        )
    }

    fn check_convergent(&self, s: f64) -> Result<()> {
        for o in &self.orbits {
            let m = o.margin(s);
            if !(m > 0.0) {
                return Err(Error::Divergent {
                    s,
                    orbit: o.label,
                    margin: m,
                });
            }
        }
        Ok(())
    }

    fn is_pgl2(&self) -> bool {
        self.orbits.len() == 1 && self.orbits[0].kappa == 1 && self.orbits[0].size == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFactorValue {
    pub value: f64,
    pub ln_value: f64,
    /// Upper bound on the omitted tail; zero for closed forms.
    pub tail_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub closed_form: Option<String>,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// `-ln(1 - q^(-e))`, accurate for small `q^(-e)`.
fn neg_ln_one_minus(q: f64, e: f64) -> f64 {
    -(-(-e * q.ln()).exp()).ln_1p()
}

/// `prod over orbits (1 - q^(-(s lambda - kappa) l))^(-1)`.
pub fn geometric_local_factor(spec: &EulerFactorSpec, s: f64) -> Result<LocalFactorValue> {
    spec.check_convergent(s)?;
    let q = spec.q as f64;
    let mut ln = CompensatedSum::default();
    let mut forms = Vec::new();
    for o in &spec.orbits {
        let e = o.margin(s);
        ln.add(neg_ln_one_minus(q, e));
        forms.push(format!("(1 - {}^(-{}))^(-1)", spec.q, e));
    }
    let ln_value = ln.value();
    Ok(LocalFactorValue {
        value: ln_value.exp(),
        ln_value,
        tail_bound: 0.0,
        closed_form: Some(forms.join(" * ")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeModel {
    Modular,
    ExactPgl2,
}

/// Number of sublattices `L` of `Z_p^2` with `Z_p^2 / L` cyclic of order
/// `p^m`, counted over Hermite normal forms `[[p^i, b], [0, p^(m-i)]]` with
/// `0 <= b < p^(m-i)`; the quotient is cyclic iff `gcd(p^i, b, p^(m-i)) = 1`.
pub fn cyclic_sublattice_count(p: u64, m: u32) -> BigUint {
    let pb = BigUint::from(p);
    let mut total = BigUint::from(0u32);
    for i in 0..=m {
        let d = pb.pow(m - i);
        if i == 0 || i == m {
            // p^0 = 1 makes every b admissible; d = 1 leaves only b = 0
            total += d;
        } else {
            // b ranges over residues mod p^(m-i) prime to p
            total += &d - &d / &pb;
        }
    }
    total
}

fn big_ln(x: &BigUint) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v.ln(),
        _ => {
            let shift = x.bits().saturating_sub(64);
            (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// Truncated cell sum of the local integral at depth `spec.depth` per
/// coordinate. The sum over the box `[0, depth]^orbits` of a product of
/// per-coordinate terms is the product of the per-coordinate sums.
pub fn cell_sum_local_integral(
    spec: &EulerFactorSpec,
    s: f64,
    model: VolumeModel,
) -> Result<LocalFactorValue> {
    spec.check_convergent(s)?;
    let q = spec.q as f64;
    let depth = spec.depth;
    match model {
        VolumeModel::Modular => {
            let mut truncated = 1.0;
            let mut with_tail = 1.0;
            for o in &spec.orbits {
                let e = o.margin(s);
                let mut sum = CompensatedSum::default();
                for a in 0..=depth {
                    sum.add((-(a as f64) * e * q.ln()).exp());
                }
                let r = (-e * q.ln()).exp();
                let tail = (-((depth + 1) as f64) * e * q.ln()).exp() / (1.0 - r);
                truncated *= sum.value();
                with_tail *= sum.value() + tail;
            }
            Ok(LocalFactorValue {
                value: truncated,
                ln_value: truncated.ln(),
                tail_bound: with_tail - truncated,
                closed_form: None,
            })
        }
        VolumeModel::ExactPgl2 => {
            if !spec.is_pgl2() {
                return Err(Error::Unsupported(
                    "exact cell volumes are implemented for PGL_2 only".into(),
                ));
            }
            let sl = s * spec.orbits[0].lambda;
            let mut sum = CompensatedSum::default();
            let mut last = 0.0;
            for m in 0..=depth {
                let vol = cyclic_sublattice_count(spec.q, m);
                last = (big_ln(&vol) - m as f64 * sl * q.ln()).exp();
                sum.add(last);
            }
            // for m >= 1 consecutive terms have ratio q^(1 - s lambda)
            let r = (q.ln() * (1.0 - sl)).exp();
            let value = sum.value();
            Ok(LocalFactorValue {
                value,
                ln_value: value.ln(),
                tail_bound: last * r / (1.0 - r),
                closed_form: None,
            })
        }
    }
}

/// Closed form of the exact `PGL_2` factor: `(1 + q^(-x)) / (1 - q^(1-x))`
/// with `x = s lambda`.
pub fn exact_pgl2_factor(q: u64, x: f64) -> f64 {
    let q = q as f64;
    (1.0 + q.powf(-x)) / (1.0 - q.powf(1.0 - x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeCorrection {
    /// `|exact - modular|`.
    pub correction: f64,
    /// `modular - 1`.
    pub modular_tail: f64,
    /// Smallest `C` with `correction <= C q^(-1) modular_tail`.
    pub c: f64,
    pub exact: f64,
    pub modular: f64,
}

/// Difference between the exact and modular `PGL_2` local integrals. The
/// difference is summed cell by cell from the exact volume differences, so it
/// is free of cancellation. Requires `s lambda > kappa`, where both series
/// converge.
pub fn volume_correction_bound(spec: &EulerFactorSpec, s: f64) -> Result<VolumeCorrection> {
    if !spec.is_pgl2() {
        return Err(Error::Unsupported(
            "the volume correction is implemented for PGL_2 only".into(),
        ));
    }
    spec.check_convergent(s)?;
    let exact = cell_sum_local_integral(spec, s, VolumeModel::ExactPgl2)?;
    let modular = cell_sum_local_integral(spec, s, VolumeModel::Modular)?;
    let q = spec.q as f64;
    let sl = s * spec.orbits[0].lambda;
    let pb = BigUint::from(spec.q);
    let mut corr = CompensatedSum::default();
    let mut mtail = CompensatedSum::default();
    for m in 1..=spec.depth {
        let scale = -(m as f64) * sl * q.ln();
        let diff = cyclic_sublattice_count(spec.q, m) - pb.pow(m);
        corr.add((big_ln(&diff) + scale).exp());
        mtail.add((m as f64 * q.ln() + scale).exp());
    }
    let correction = corr.value();
    let modular_tail = mtail.value();
    Ok(VolumeCorrection {
        correction,
        modular_tail,
        c: if modular_tail > 0.0 {
            correction * q / modular_tail
        } else {
            0.0
        },
        exact: exact.value,
        modular: modular.value,
    })
}

/// Orbit data plus the predicted pole for a global Euler product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaTemplate {
    pub orbits: Vec<OrbitExponent>,
    pub a: f64,
    pub a_exact: String,
}

impl ZetaTemplate {
    pub fn new(da: &DiagramAction, lam: &DivisorVector, sel: &BoundarySelection) -> Result<Self> {
        let av = a_of_lambda(da.root_system(), sel, lam)?;
        Ok(Self {
            orbits: orbit_exponents(da, lam, sel)?,
            a: rational_f64(&av.a),
            a_exact: crate::picard::format_rational(&av.a),
        })
    }

    /// Orbits surviving the integrality indicator: those off `A_D`.
    fn active(&self, delta_on: bool) -> Vec<OrbitExponent> {
        self.orbits
            .iter()
            .filter(|o| !(delta_on && o.in_d))
            .cloned()
            .collect()
    }
}

fn rational_f64(r: &BigRational) -> f64 {
    if r.denom().is_one() {
        r.numer().to_f64().unwrap_or(f64::NAN)
    } else {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductRow {
    pub p: u64,
    pub local: f64,
    pub running: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalProduct {
    pub s: f64,
    pub cutoff: u64,
    pub value: f64,
    pub ln_value: f64,
    pub rows: Vec<ProductRow>,
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    primal::Primes::all()
        .take_while(|&p| p as u64 <= n)
        .map(|p| p as u64)
        .collect()
}

/// Product of the modular-model local factors over primes `p <= cutoff`,
/// in ascending order.
pub fn truncated_global_product(
    template: &ZetaTemplate,
    cutoff: u64,
    s: f64,
    delta_on: bool,
) -> Result<GlobalProduct> {
    if !(s > template.a) {
        return Err(Error::LeftOfPole { s, a: template.a });
    }
    let active = template.active(delta_on);
    let mut ln = CompensatedSum::default();
    let mut rows = Vec::new();
    for p in primes_up_to(cutoff) {
        let local = if active.is_empty() {
            0.0
        } else {
            let spec = EulerFactorSpec::new(p, active.clone(), 1)?;
            geometric_local_factor(&spec, s)?.ln_value
        };
        ln.add(local);
        rows.push(ProductRow {
            p,
            local: local.exp(),
            running: ln.value().exp(),
        });
    }
    Ok(GlobalProduct {
        s,
        cutoff,
        value: ln.value().exp(),
        ln_value: ln.value(),
        rows,
    })
}

/// `ln prod_{p > P} (1 - p^(-e))^(-1) ~ sum_{p > P} p^(-e) ~ E_1((e - 1) ln P)`
/// by the prime number theorem; valid for `e > 1`.
pub fn prime_tail_estimate(cutoff: u64, e: f64) -> f64 {
    let x = (e - 1.0) * (cutoff as f64).ln();
    statrs::function::exponential::integral(x, 1).unwrap_or(f64::INFINITY)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleProbeRow {
    pub s: f64,
    pub product: f64,
    /// `(s - a)` times the truncated product.
    pub scaled: f64,
    /// `(s - a)` times the product completed by the prime tail estimate.
    pub scaled_completed: f64,
}

pub fn pole_probe(
    template: &ZetaTemplate,
    cutoff: u64,
    s_grid: &[f64],
    delta_on: bool,
) -> Result<Vec<PoleProbeRow>> {
    let active = template.active(delta_on);
    s_grid
        .iter()
        .map(|&s| {
            let g = truncated_global_product(template, cutoff, s, delta_on)?;
            let tail: f64 = active
                .iter()
                .map(|o| prime_tail_estimate(cutoff, o.margin(s)))
                .sum();
            Ok(PoleProbeRow {
                s,
                product: g.value,
                scaled: (s - template.a) * g.value,
                scaled_completed: (s - template.a) * (g.ln_value + tail).exp(),
            })
        })
        .collect()
}
