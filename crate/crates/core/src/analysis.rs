//! `L_p`, weak-`L_p` and `H_p` quasi-norms of sampled functions, and
//! p-atoms.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dyadic::DyadicInterval;
use crate::error::{DslabError, Result};
use crate::means::martingale_maximal;
use crate::scalar::{exact_root, format_rational, ln_abs_rational, pow2_rational, rational_to_f64, Radical, Scalar};
use crate::transforms::SampledFunction;

/// Exponent sizes above which the exact path is abandoned for floats.
const MAX_EXACT_EXPONENT: u32 = 64;

/// A quasi-norm value: exact `r^(1/k)` or a float.
#[derive(Debug, Clone)]
pub enum NormValue {
    Exact(Radical),
    Float(f64),
}

impl NormValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            NormValue::Exact(r) => r.to_f64(),
            NormValue::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Radical> {
        match self {
            NormValue::Exact(r) => Some(r),
            NormValue::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NormValue::Exact(_))
    }

    /// `self / other`, exact when both are.
    pub fn ratio(&self, other: &NormValue) -> Result<NormValue> {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => Ok(NormValue::Exact(a.div(b)?)),
            _ => {
                let d = other.to_f64();
                if d == 0.0 {
                    return Err(DslabError::domain("ratio by a zero norm"));
                }
                Ok(NormValue::Float(self.to_f64() / d))
            }
        }
    }
}

impl PartialEq for NormValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for NormValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Exact(r) => write!(f, "{r}"),
            NormValue::Float(v) => write!(f, "{v}"),
        }
    }
}

fn split_exponent(p: &BigRational) -> Result<(u32, u32)> {
    if !p.is_positive() {
        return Err(DslabError::domain(format!(
            "exponent p = {} must be positive",
            format_rational(p)
        )));
    }
    let a = p.numer().to_u32();
    let b = p.denom().to_u32();
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(DslabError::domain("exponent p has an oversized numerator or denominator")),
    }
}

/// Nonzero levels of `|f|` with their measures, ascending by level.
fn exact_distribution(values: &[BigRational], resolution: u32) -> Vec<(BigRational, BigRational)> {
    let mut counts: BTreeMap<BigRational, u64> = BTreeMap::new();
    for v in values {
        if !v.is_zero() {
            *counts.entry(v.abs()).or_default() += 1;
        }
    }
    let cell = pow2_rational(-(resolution as i64));
    counts
        .into_iter()
        .map(|(v, c)| (v, &cell * BigRational::from_integer(BigInt::from(c))))
        .collect()
}

fn float_distribution(values: &[f64], resolution: u32) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v != 0.0).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let cell = (-(resolution as f64)).exp2();
    let mut out: Vec<(f64, f64)> = vec![];
    for v in sorted {
        match out.last_mut() {
            Some((level, m)) if *level == v => *m += cell,
            _ => out.push((v, cell)),
        }
    }
    out
}

fn exact_values<S: Scalar>(f: &SampledFunction<S>) -> Option<Vec<BigRational>> {
    f.values().iter().map(|v| v.to_rational()).collect()
}

/// `‖f‖_p = (∫ |f|^p dμ)^{1/p}`.
///
/// Exact when the values are rational and the distinct terms `μ_i |v_i|^p`
/// are rational multiples of one another; otherwise a float.
pub fn lp_norm<S: Scalar>(f: &SampledFunction<S>, p: &BigRational) -> Result<NormValue> {
    let (a, b) = split_exponent(p)?;
    if let Some(values) = exact_values(f) {
        let dist = exact_distribution(&values, f.resolution());
        if dist.is_empty() {
            return Ok(NormValue::Exact(Radical::from_rational(BigRational::zero())?));
        }
        if a <= MAX_EXACT_EXPONENT && b <= MAX_EXACT_EXPONENT {
            if let Some(r) = exact_lp(&dist, a, b)? {
                return Ok(NormValue::Exact(r));
            }
        }
        let pf = rational_to_f64(p);
        let logs: Vec<f64> = dist
            .iter()
            .map(|(v, m)| ln_abs_rational(m) + pf * ln_abs_rational(v))
            .collect();
        return Ok(NormValue::Float((log_sum_exp(&logs) / pf).exp()));
    }
    let pf = rational_to_f64(p);
    let dist = float_distribution(&f.to_float().into_values(), f.resolution());
    if dist.is_empty() {
        return Ok(NormValue::Float(0.0));
    }
    let logs: Vec<f64> = dist.iter().map(|(v, m)| m.ln() + pf * v.ln()).collect();
    Ok(NormValue::Float((log_sum_exp(&logs) / pf).exp()))
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// With `p = a/b` and terms `T_i = μ_i v_i^{a/b}`: if every `T_i^b / T_0^b`
/// is a perfect `b`-th power `r_i^b`, then
/// `‖f‖_p = (T_0 Σ r_i)^{b/a} = ((Σ r_i)^b T_0^b)^{1/a}`.
fn exact_lp(dist: &[(BigRational, BigRational)], a: u32, b: u32) -> Result<Option<Radical>> {
    let powered: Vec<BigRational> = dist
        .iter()
        .map(|(v, m)| num_traits::pow(m.clone(), b as usize) * num_traits::pow(v.clone(), a as usize))
        .collect();
    let base = &powered[0];
    let mut sum = BigRational::zero();
    for t in &powered {
        match exact_root(&(t / base), b) {
            Some(r) => sum += r,
            None => return Ok(None),
        }
    }
    Radical::new(num_traits::pow(sum, b as usize) * base, a).map(Some)
}

/// `‖f‖_{L_{p,∞}} = sup_{λ>0} λ μ(|f| > λ)^{1/p}`.
///
/// The supremum is approached as `λ` rises to a value level `v`, where the
/// tail measure is `μ(|f| ≥ v)`; it is the maximum over levels.
pub fn weak_lp_norm<S: Scalar>(f: &SampledFunction<S>, p: &BigRational) -> Result<NormValue> {
    let (a, b) = split_exponent(p)?;
    if let Some(values) = exact_values(f) {
        let dist = exact_distribution(&values, f.resolution());
        if a <= MAX_EXACT_EXPONENT && b <= MAX_EXACT_EXPONENT {
            // candidates λ^a μ^b share the root index a
            let mut tail = BigRational::zero();
            let mut best = BigRational::zero();
            for (v, m) in dist.iter().rev() {
                tail += m;
                let cand = num_traits::pow(v.clone(), a as usize) * num_traits::pow(tail.clone(), b as usize);
                if cand > best {
                    best = cand;
                }
            }
            return Ok(NormValue::Exact(Radical::new(best, a)?));
        }
        let pf = rational_to_f64(p);
        let mut tail = BigRational::zero();
        let mut best = f64::NEG_INFINITY;
        for (v, m) in dist.iter().rev() {
            tail += m;
            best = best.max(ln_abs_rational(v) + ln_abs_rational(&tail) / pf);
        }
        return Ok(NormValue::Float(if dist.is_empty() { 0.0 } else { best.exp() }));
    }
    let pf = rational_to_f64(p);
    let dist = float_distribution(&f.to_float().into_values(), f.resolution());
    let mut tail = 0.0;
    let mut best = 0.0f64;
    for (v, m) in dist.iter().rev() {
        tail += m;
        best = best.max(v * tail.powf(1.0 / pf));
    }
    Ok(NormValue::Float(best))
}

/// `‖f‖_{H_p} = ‖f^*‖_p` with `f^*` the martingale maximal function.
pub fn hardy_norm<S: Scalar>(f: &SampledFunction<S>, p: &BigRational) -> Result<NormValue> {
    lp_norm(&martingale_maximal(f)?, p)
}

/// Shape of a constructed atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomProfile {
    /// `+c` on the left half of `I`, `-c` on the right half.
    Haar,
}

/// A function supported on `interval` with mean zero and
/// `sup |data| ≤ μ(interval)^{-1/p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PAtom<S> {
    pub p: BigRational,
    pub interval: DyadicInterval,
    pub data: SampledFunction<S>,
}

/// Builds an atom on `interval` at `resolution`.
///
/// The Haar amplitude is the largest power of two not exceeding
/// `μ(I)^{-1/p} = 2^{rank/p}`; it equals the bound when `rank/p` is an
/// integer.
pub fn make_atom<S: Scalar>(
    p: &BigRational,
    interval: &DyadicInterval,
    resolution: u32,
    profile: AtomProfile,
) -> Result<PAtom<S>> {
    split_exponent(p)?;
    if *p > BigRational::one() {
        return Err(DslabError::domain("atoms need 0 < p ≤ 1"));
    }
    let cells = interval.cells(resolution)?;
    match profile {
        AtomProfile::Haar => {
            if interval.rank() >= resolution {
                return Err(DslabError::domain(
                    "a Haar atom needs an interval that splits at this resolution",
                ));
            }
        }
    }
    let exponent = (BigRational::from_integer(BigInt::from(interval.rank())) / p).floor();
    let exponent = exponent
        .to_integer()
        .to_i64()
        .ok_or_else(|| DslabError::domain("atom amplitude too large"))?;
    let amp = S::pow2(exponent);
    let half = cells.start + cells.len() / 2;
    let data = SampledFunction::from_fn(resolution, |c| {
        if !cells.contains(&c) {
            S::zero()
        } else if c < half {
            amp.clone()
        } else {
            -amp.clone()
        }
    })?;
    let atom = PAtom {
        p: p.clone(),
        interval: *interval,
        data,
    };
    validate_atom(&atom)?;
    Ok(atom)
}

/// Checks support, zero mean and the sup-norm bound.
pub fn validate_atom<S: Scalar>(atom: &PAtom<S>) -> Result<()> {
    let (a, b) = split_exponent(&atom.p)?;
    if atom.p > BigRational::one() {
        return Err(DslabError::domain("atoms need 0 < p ≤ 1"));
    }
    let resolution = atom.data.resolution();
    let cells = atom.interval.cells(resolution)?;
    for (c, v) in atom.data.values().iter().enumerate() {
        if !cells.contains(&c) && !v.is_zero() {
            return Err(DslabError::domain(format!("atom is nonzero outside its interval at cell {c}")));
        }
    }
    let mean = atom.data.mean();
    let mean_ok = match mean.to_rational() {
        Some(m) => m.is_zero(),
        None => mean.as_f64().abs() <= 1e-12 * atom.data.values().iter().map(|v| v.as_f64().abs()).fold(1.0, f64::max),
    };
    if !mean_ok {
        return Err(DslabError::domain("atom does not have mean zero"));
    }
    // |v| ≤ 2^{rank/p}  ⟺  |v|^a ≤ 2^{rank·b}
    let rank = atom.interval.rank();
    let bound = pow2_rational(rank as i64 * b as i64);
    for v in atom.data.values() {
        let ok = match v.to_rational() {
            Some(r) => num_traits::pow(r.abs(), a as usize) <= bound,
            None => v.as_f64().abs() <= (rank as f64 / rational_to_f64(&atom.p)).exp2() * (1.0 + 1e-12),
        };
        if !ok {
            return Err(DslabError::domain("atom exceeds μ(I)^{-1/p}"));
        }
    }
    Ok(())
}
