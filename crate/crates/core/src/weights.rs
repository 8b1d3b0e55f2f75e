//! Nörlund weight sequences `{q_k}`, their partial sums `Q_n`, the named
//! presets, and empirical checks of the growth conditions placed on them.

use std::fmt;
use std::path::Path;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{DslabError, Result};
use crate::kernels::cesaro_coefficient;
use crate::scalar::{format_rational, parse_rational, rational_to_f64, Scalar, Surd};

/// How a weight sequence is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// `q_k = 1`.
    Constant,
    /// `q_k = A_k^{α-1}`, the (C,α) weights.
    Cesaro { alpha: BigRational },
    /// `q_k = k^{α-1}` for `k ≥ 1`, `q_0 = 1`.
    Power { alpha: BigRational },
    /// `q_k = max(1, log^{(β)}(k+1))^α` with `log^{(β)}` the β-fold iterated
    /// natural logarithm.
    Log { alpha: BigRational, beta: u32 },
    /// An explicit finite list.
    Custom { label: String, values: Vec<BigRational> },
}

/// Exactness class of the generated values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRepr {
    Rational,
    /// Rational combinations of square roots (e.g. `k^{-1/2}`).
    Surd,
    Float,
}

/// Declared monotonicity. A constant sequence is both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monotonicity {
    pub non_increasing: bool,
    pub non_decreasing: bool,
}

impl Monotonicity {
    const CONSTANT: Monotonicity = Monotonicity {
        non_increasing: true,
        non_decreasing: true,
    };
    const DECREASING: Monotonicity = Monotonicity {
        non_increasing: true,
        non_decreasing: false,
    };
    const INCREASING: Monotonicity = Monotonicity {
        non_increasing: false,
        non_decreasing: true,
    };
    const NONE: Monotonicity = Monotonicity {
        non_increasing: false,
        non_decreasing: false,
    };

    pub fn label(&self) -> &'static str {
        match (self.non_increasing, self.non_decreasing) {
            (true, true) => "constant",
            (true, false) => "non_increasing",
            (false, true) => "non_decreasing",
            (false, false) => "none",
        }
    }
}

#[derive(Debug, Clone)]
enum Values {
    Rational(Vec<BigRational>),
    Surd(Vec<Surd>),
    Float(Vec<f64>),
}

#[derive(Debug)]
struct Cache {
    q: Values,
    /// `big_q[n] = Q_n`, starting with `Q_0 = 0`.
    big_q: Values,
}

/// Weights `q_0, q_1, …` with cached values and partial sums
/// `Q_n = Σ_{k<n} q_k`.
///
/// The cache only grows; concurrent extensions compute identical values.
#[derive(Debug)]
pub struct WeightSequence {
    rule: WeightRule,
    repr: WeightRepr,
    monotonicity: Monotonicity,
    cache: RwLock<Cache>,
}

impl Clone for WeightSequence {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("weight cache poisoned");
        WeightSequence {
            rule: self.rule.clone(),
            repr: self.repr,
            monotonicity: self.monotonicity,
            cache: RwLock::new(Cache {
                q: cache.q.clone(),
                big_q: cache.big_q.clone(),
            }),
        }
    }
}

impl PartialEq for WeightSequence {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl WeightSequence {
    fn from_rule(rule: WeightRule) -> Result<Self> {
        let (repr, monotonicity) = match &rule {
            WeightRule::Constant => (WeightRepr::Rational, Monotonicity::CONSTANT),
            WeightRule::Cesaro { alpha } => {
                if !alpha.is_positive() {
                    return Err(DslabError::domain("cesaro weights need α > 0"));
                }
                let mono = if alpha.is_one() {
                    Monotonicity::CONSTANT
                } else if *alpha < BigRational::one() {
                    Monotonicity::DECREASING
                } else {
                    Monotonicity::INCREASING
                };
                (WeightRepr::Rational, mono)
            }
            WeightRule::Power { alpha } => {
                if !alpha.is_positive() || *alpha > BigRational::one() {
                    return Err(DslabError::domain("power weights need 0 < α ≤ 1"));
                }
                let exponent = alpha - BigRational::one();
                let repr = if exponent.is_integer() {
                    WeightRepr::Rational
                } else if *exponent.denom() == BigInt::from(2) {
                    WeightRepr::Surd
                } else {
                    WeightRepr::Float
                };
                let mono = if alpha.is_one() {
                    Monotonicity::CONSTANT
                } else {
                    Monotonicity::DECREASING
                };
                (repr, mono)
            }
            WeightRule::Log { alpha, beta } => {
                if alpha.is_negative() || *beta == 0 {
                    return Err(DslabError::domain("log weights need α ≥ 0 and β ≥ 1"));
                }
                let mono = if alpha.is_zero() {
                    Monotonicity::CONSTANT
                } else {
                    Monotonicity::INCREASING
                };
                (WeightRepr::Float, mono)
            }
            WeightRule::Custom { values, .. } => {
                if values.is_empty() {
                    return Err(DslabError::domain("custom weights are empty"));
                }
                if !values[0].is_positive() {
                    return Err(DslabError::domain("q_0 must be positive"));
                }
                if values.iter().any(|v| v.is_negative()) {
                    return Err(DslabError::domain("weights must be nonnegative"));
                }
                let non_increasing = values.windows(2).all(|w| w[1] <= w[0]);
                let non_decreasing = values.windows(2).all(|w| w[1] >= w[0]);
                let mono = match (non_increasing, non_decreasing) {
                    (true, true) => Monotonicity::CONSTANT,
                    (true, false) => Monotonicity::DECREASING,
                    (false, true) => Monotonicity::INCREASING,
                    (false, false) => Monotonicity::NONE,
                };
                (WeightRepr::Rational, mono)
            }
        };
        let empty = match repr {
            WeightRepr::Rational => (
                Values::Rational(vec![]),
                Values::Rational(vec![BigRational::zero()]),
            ),
            WeightRepr::Surd => (Values::Surd(vec![]), Values::Surd(vec![Surd::zero()])),
            WeightRepr::Float => (Values::Float(vec![]), Values::Float(vec![0.0])),
        };
        Ok(WeightSequence {
            rule,
            repr,
            monotonicity,
            cache: RwLock::new(Cache {
                q: empty.0,
                big_q: empty.1,
            }),
        })
    }

    pub fn constant() -> Self {
        Self::from_rule(WeightRule::Constant).expect("constant weights are valid")
    }

    pub fn cesaro(alpha: BigRational) -> Result<Self> {
        Self::from_rule(WeightRule::Cesaro { alpha })
    }

    pub fn power(alpha: BigRational) -> Result<Self> {
        Self::from_rule(WeightRule::Power { alpha })
    }

    pub fn log(alpha: BigRational, beta: u32) -> Result<Self> {
        Self::from_rule(WeightRule::Log { alpha, beta })
    }

    pub fn custom(label: impl Into<String>, values: Vec<BigRational>) -> Result<Self> {
        Self::from_rule(WeightRule::Custom {
            label: label.into(),
            values,
        })
    }

    /// One rational per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Self::custom(format!("custom:{}", path.display()), values)
    }

    /// Parses a preset string: `constant`, `cesaro:α`, `power:α`,
    /// `log:α:β`, `custom:file`.
    pub fn preset(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let mut parts = spec.splitn(2, ':');
        let name = parts.next().unwrap_or_default();
        let rest = parts.next();
        let need = |what: &str| {
            rest.ok_or_else(|| DslabError::parse(format!("preset {name:?} needs {what}")))
        };
        match name {
            "constant" | "fejer" => {
                if rest.is_some() {
                    return Err(DslabError::parse("constant preset takes no parameters"));
                }
                Ok(Self::constant())
            }
            "cesaro" => Self::cesaro(parse_rational(need("α")?)?),
            "power" => Self::power(parse_rational(need("α")?)?),
            "log" => {
                let (a, b) = need("α:β")?
                    .split_once(':')
                    .ok_or_else(|| DslabError::parse("log preset is log:α:β"))?;
                let beta: u32 = b
                    .trim()
                    .parse()
                    .map_err(|_| DslabError::parse(format!("bad β {b:?}")))?;
                Self::log(parse_rational(a)?, beta)
            }
            "custom" => Self::from_file(Path::new(need("a file path")?)),
            other => Err(DslabError::parse(format!("unknown weight preset {other:?}"))),
        }
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn repr(&self) -> WeightRepr {
        self.repr
    }

    pub fn is_exact(&self) -> bool {
        self.repr != WeightRepr::Float
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    /// Canonical preset text; also the cache key for derived kernels.
    pub fn label(&self) -> String {
        match &self.rule {
            WeightRule::Constant => "constant".into(),
            WeightRule::Cesaro { alpha } => format!("cesaro:{}", format_rational(alpha)),
            WeightRule::Power { alpha } => format!("power:{}", format_rational(alpha)),
            WeightRule::Log { alpha, beta } => format!("log:{}:{beta}", format_rational(alpha)),
            WeightRule::Custom { label, .. } => label.clone(),
        }
    }

    /// Largest index that can be generated, if the sequence is finite.
    pub fn available(&self) -> Option<usize> {
        match &self.rule {
            WeightRule::Custom { values, .. } => Some(values.len()),
            _ => None,
        }
    }

    fn generate_rational(&self, k: usize) -> BigRational {
        match &self.rule {
            WeightRule::Constant => BigRational::one(),
            WeightRule::Cesaro { alpha } => {
                cesaro_coefficient(&(alpha - BigRational::one()), k as u64)
                    .expect("α > 0 keeps α-1 admissible")
            }
            WeightRule::Power { alpha } => {
                if k == 0 {
                    return BigRational::one();
                }
                let e = (alpha - BigRational::one()).to_integer();
                let e = e.to_i32().expect("integer exponent is 0 here");
                let base = BigRational::from_integer(BigInt::from(k));
                if e >= 0 {
                    num_traits::pow(base, e as usize)
                } else {
                    num_traits::pow(base.recip(), (-e) as usize)
                }
            }
            WeightRule::Custom { values, .. } => values[k].clone(),
            WeightRule::Log { .. } => unreachable!("log weights are float-only"),
        }
    }

    fn generate_surd(&self, k: usize) -> Surd {
        match &self.rule {
            WeightRule::Power { alpha } if k > 0 => {
                // k^{α-1} = k^{j} · k^{-1/2} with j = α - 1/2
                let j = alpha - rational(1, 2);
                let j = j.to_integer().to_i32().expect("small exponent");
                let kk = BigRational::from_integer(BigInt::from(k));
                let factor = if j >= 0 {
                    num_traits::pow(kk, j as usize)
                } else {
                    num_traits::pow(kk.recip(), (-j) as usize)
                };
                Surd::inv_sqrt(k as u64).scale(&factor)
            }
            _ => Surd::from_rational(self.generate_rational(k)),
        }
    }

    fn generate_float(&self, k: usize) -> f64 {
        match &self.rule {
            WeightRule::Log { alpha, beta } => {
                let mut x = (k + 1) as f64;
                for _ in 0..*beta {
                    x = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
                }
                let base = if x.is_finite() { x.max(1.0) } else { 1.0 };
                base.powf(rational_to_f64(alpha))
            }
            WeightRule::Power { alpha } if k > 0 => {
                (k as f64).powf(rational_to_f64(&(alpha - BigRational::one())))
            }
            _ => rational_to_f64(&self.generate_rational(k)),
        }
    }

    /// Makes `q_0 … q_{upto-1}` and `Q_0 … Q_upto` available.
    pub fn ensure(&self, upto: usize) -> Result<()> {
        if let Some(limit) = self.available() {
            if upto > limit {
                return Err(DslabError::domain(format!(
                    "{} defines only {limit} weights, {upto} requested",
                    self.label()
                )));
            }
        }
        if self.cached_len() >= upto {
            return Ok(());
        }
        let mut cache = self.cache.write().expect("weight cache poisoned");
        let Cache { q, big_q } = &mut *cache;
        match (q, big_q) {
            (Values::Rational(q), Values::Rational(big_q)) => {
                for k in q.len()..upto {
                    let v = match (&self.rule, k) {
                        // A_k^{α-1} = A_{k-1}^{α-1} (α-1+k)/k
                        (WeightRule::Cesaro { alpha }, 1..) => {
                            let kk = BigRational::from_integer(BigInt::from(k));
                            &q[k - 1] * (alpha - BigRational::one() + &kk) / kk
                        }
                        _ => self.generate_rational(k),
                    };
                    big_q.push(&big_q[k] + &v);
                    q.push(v);
                }
            }
            (Values::Surd(q), Values::Surd(big_q)) => {
                for k in q.len()..upto {
                    let v = self.generate_surd(k);
                    big_q.push(big_q[k].add(&v));
                    q.push(v);
                }
            }
            (Values::Float(q), Values::Float(big_q)) => {
                for k in q.len()..upto {
                    let v = self.generate_float(k);
                    big_q.push(big_q[k] + v);
                    q.push(v);
                }
            }
            _ => unreachable!("cache representations always agree"),
        }
        Ok(())
    }

    fn cached_len(&self) -> usize {
        match &self.cache.read().expect("weight cache poisoned").q {
            Values::Rational(v) => v.len(),
            Values::Surd(v) => v.len(),
            Values::Float(v) => v.len(),
        }
    }

    fn mode_error(&self) -> DslabError {
        DslabError::mode(format!(
            "{} weights are not exact rationals (representation {:?})",
            self.label(),
            self.repr
        ))
    }

    /// `q_k` as an exact rational.
    pub fn q_rational(&self, k: usize) -> Result<BigRational> {
        self.ensure(k + 1)?;
        match &self.cache.read().expect("weight cache poisoned").q {
            Values::Rational(v) => Ok(v[k].clone()),
            Values::Surd(v) => v[k].as_rational().ok_or_else(|| self.mode_error()),
            Values::Float(_) => Err(self.mode_error()),
        }
    }

    /// `Q_n` as an exact rational.
    pub fn big_q_rational(&self, n: usize) -> Result<BigRational> {
        self.ensure(n)?;
        match &self.cache.read().expect("weight cache poisoned").big_q {
            Values::Rational(v) => Ok(v[n].clone()),
            Values::Surd(v) => v[n].as_rational().ok_or_else(|| self.mode_error()),
            Values::Float(_) => Err(self.mode_error()),
        }
    }

    /// `q_k` as a surd; available for rational and surd sequences.
    pub fn q_surd(&self, k: usize) -> Result<Surd> {
        self.ensure(k + 1)?;
        match &self.cache.read().expect("weight cache poisoned").q {
            Values::Rational(v) => Ok(Surd::from_rational(v[k].clone())),
            Values::Surd(v) => Ok(v[k].clone()),
            Values::Float(_) => Err(self.mode_error()),
        }
    }

    pub fn q_f64(&self, k: usize) -> Result<f64> {
        self.ensure(k + 1)?;
        Ok(match &self.cache.read().expect("weight cache poisoned").q {
            Values::Rational(v) => rational_to_f64(&v[k]),
            Values::Surd(v) => v[k].to_f64(),
            Values::Float(v) => v[k],
        })
    }

    pub fn big_q_f64(&self, n: usize) -> Result<f64> {
        self.ensure(n)?;
        Ok(match &self.cache.read().expect("weight cache poisoned").big_q {
            Values::Rational(v) => rational_to_f64(&v[n]),
            Values::Surd(v) => v[n].to_f64(),
            Values::Float(v) => v[n],
        })
    }

    /// `q_k` in the scalar type `S` (exact mode requires rational weights).
    pub fn q<S: Scalar>(&self, k: usize) -> Result<S> {
        match self.q_rational(k) {
            Ok(r) => Ok(S::from_rational(&r)),
            Err(e) => S::from_float(self.q_f64(k)?).ok_or(e),
        }
    }

    pub fn big_q<S: Scalar>(&self, n: usize) -> Result<S> {
        match self.big_q_rational(n) {
            Ok(r) => Ok(S::from_rational(&r)),
            Err(e) => S::from_float(self.big_q_f64(n)?).ok_or(e),
        }
    }

    /// `q_0 … q_{len-1}` in `S`.
    pub fn q_vec<S: Scalar>(&self, len: usize) -> Result<Vec<S>> {
        self.ensure(len)?;
        (0..len).map(|k| self.q::<S>(k)).collect()
    }

    /// `Q_0 … Q_len` in `S`.
    pub fn big_q_vec<S: Scalar>(&self, len: usize) -> Result<Vec<S>> {
        self.ensure(len)?;
        (0..=len).map(|n| self.big_q::<S>(n)).collect()
    }

    /// `q_{n-1} / Q_n` etc. without overflowing on huge rationals.
    fn ratio_f64(&self, num: Result<BigRational>, den: Result<BigRational>, fallback: (f64, f64)) -> f64 {
        match (num, den) {
            (Ok(a), Ok(b)) if !b.is_zero() => rational_to_f64(&(a / b)),
            _ => fallback.0 / fallback.1,
        }
    }

    /// Checks the cached values against the declared monotonicity.
    pub fn monotonicity_holds(&self, upto: usize) -> Result<bool> {
        self.ensure(upto)?;
        let mut ok = true;
        for k in 1..upto {
            let a = match (self.q_rational(k - 1), self.q_rational(k)) {
                (Ok(a), Ok(b)) => a.cmp(&b),
                _ => {
                    let (a, b) = (self.q_f64(k - 1)?, self.q_f64(k)?);
                    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
                }
            };
            if self.monotonicity.non_increasing && a == std::cmp::Ordering::Less {
                ok = false;
            }
            if self.monotonicity.non_decreasing && a == std::cmp::Ordering::Greater {
                ok = false;
            }
        }
        Ok(ok)
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Growth conditions that the summability results place on `{q_k}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// `q_{n-1} / Q_n → 0`: the method is regular.
    Regular,
    /// `q_0 n / Q_n = O(1)`.
    LinearMass,
    /// `q_0 / Q_n ≥ 1/n`.
    MassBelowLinear,
    /// `q_0 n^α / Q_n = O(1)`.
    PowerMass { alpha: BigRational },
    /// `(q_n - q_{n+1}) / n^{α-2} = O(1)`.
    PowerDecrement { alpha: BigRational },
    /// `q_0 / Q_n ≥ c / n^α` for some `c > 0`.
    PowerMassLower { alpha: BigRational },
    /// `limsup q_0 n^α / Q_n = ∞`.
    PowerMassUnbounded { alpha: BigRational },
    /// `q_0 / Q_n ≥ c / n^α` and `q_n - q_{n+1} ≥ c n^{α-2}`.
    CesaroType { alpha: BigRational },
}

impl Condition {
    pub fn id(&self) -> &'static str {
        match self {
            Condition::Regular => "regular",
            Condition::LinearMass => "linear_mass",
            Condition::MassBelowLinear => "mass_below_linear",
            Condition::PowerMass { .. } => "power_mass",
            Condition::PowerDecrement { .. } => "power_decrement",
            Condition::PowerMassLower { .. } => "power_mass_lower",
            Condition::PowerMassUnbounded { .. } => "power_mass_unbounded",
            Condition::CesaroType { .. } => "cesaro_type",
        }
    }

    pub fn alpha(&self) -> Option<&BigRational> {
        match self {
            Condition::PowerMass { alpha }
            | Condition::PowerDecrement { alpha }
            | Condition::PowerMassLower { alpha }
            | Condition::PowerMassUnbounded { alpha }
            | Condition::CesaroType { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Parses an identifier; `alpha` is required by the power-type checks.
    pub fn parse(id: &str, alpha: Option<BigRational>) -> Result<Self> {
        let need = || {
            alpha
                .clone()
                .ok_or_else(|| DslabError::parse(format!("condition {id} needs --alpha")))
        };
        Ok(match id {
            "regular" => Condition::Regular,
            "linear_mass" => Condition::LinearMass,
            "mass_below_linear" => Condition::MassBelowLinear,
            "power_mass" => Condition::PowerMass { alpha: need()? },
            "power_decrement" => Condition::PowerDecrement { alpha: need()? },
            "power_mass_lower" => Condition::PowerMassLower { alpha: need()? },
            "power_mass_unbounded" => Condition::PowerMassUnbounded { alpha: need()? },
            "cesaro_type" => Condition::CesaroType { alpha: need()? },
            other => return Err(DslabError::parse(format!("unknown condition {other:?}"))),
        })
    }

    pub const IDS: [&'static str; 8] = [
        "regular",
        "linear_mass",
        "mass_below_linear",
        "power_mass",
        "power_decrement",
        "power_mass_lower",
        "power_mass_unbounded",
        "cesaro_type",
    ];
}

/// Empirical verdict on a condition. Nothing here is a proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionVerdict {
    HoldsEmpirically,
    FailsAt(u64),
    Inconclusive,
}

impl fmt::Display for ConditionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionVerdict::HoldsEmpirically => f.write_str("holds_empirically"),
            ConditionVerdict::FailsAt(n) => write!(f, "fails_at({n})"),
            ConditionVerdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    pub weights: String,
    /// `(n, quantity)` over the dyadic grid `2, 4, …, n_max`. For
    /// [`Condition::CesaroType`] the second inequality's witnesses are in
    /// `secondary`.
    pub witnesses: Vec<(u64, f64)>,
    pub secondary: Vec<(u64, f64)>,
    pub verdict: ConditionVerdict,
    /// Empirical infimum of the witness, reported for lower-bound checks.
    pub infimum: Option<f64>,
    pub notes: Vec<String>,
}

/// Shape of a positive witness sequence over the top half of a dyadic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    /// Decays at least like a power of `n`.
    Vanishing,
    /// Settles: increments shrink.
    Converging,
    /// Grows at least logarithmically: positive, non-shrinking increments.
    Diverging,
    Erratic,
}

/// Classifies the top half (at least three points) of `w`.
///
/// On a dyadic grid a witness `~ n^{-ε}` has ratios `2^{-ε}`, `~ log n`
/// has constant increments, and a convergent one has shrinking increments.
pub fn classify_trend(w: &[f64]) -> Trend {
    let take = (w.len() / 2).max(3).min(w.len());
    let tail = &w[w.len() - take..];
    if tail.len() < 2 {
        return Trend::Erratic;
    }
    let diffs: Vec<f64> = tail.windows(2).map(|p| p[1] - p[0]).collect();
    let tol = 1e-12 * tail.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if diffs.iter().all(|d| d.abs() <= tol) {
        return Trend::Converging;
    }
    if tail.iter().all(|v| *v > 0.0)
        && diffs.iter().all(|d| *d < 0.0)
        && tail.windows(2).all(|p| p[1] / p[0] <= 0.9)
    {
        return Trend::Vanishing;
    }
    if diffs.iter().all(|d| *d > 0.0) && diffs.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-9)) {
        return Trend::Diverging;
    }
    let shrinking = diffs.windows(2).all(|p| p[1].abs() <= p[0].abs() * (1.0 + 1e-9));
    let same_sign = diffs.iter().all(|d| *d >= -tol) || diffs.iter().all(|d| *d <= tol);
    if shrinking && same_sign && diffs.last().unwrap().abs() <= diffs[0].abs() / 2.0 + tol {
        return Trend::Converging;
    }
    Trend::Erratic
}

fn dyadic_grid(n_max: u64) -> Vec<u64> {
    let mut grid = vec![];
    let mut n = 2u64;
    while n <= n_max {
        grid.push(n);
        n *= 2;
    }
    grid
}

fn witness_power_mass(q: &WeightSequence, n: u64, alpha: f64) -> Result<f64> {
    let q0_over_qn = q.ratio_f64(
        q.q_rational(0),
        q.big_q_rational(n as usize),
        (q.q_f64(0)?, q.big_q_f64(n as usize)?),
    );
    Ok(q0_over_qn * (n as f64).powf(alpha))
}

fn witness_decrement(q: &WeightSequence, n: u64, alpha: f64) -> Result<f64> {
    let k = n as usize;
    let diff = match (q.q_rational(k), q.q_rational(k + 1)) {
        (Ok(a), Ok(b)) => rational_to_f64(&(a - b)),
        _ => q.q_f64(k)? - q.q_f64(k + 1)?,
    };
    Ok(diff * (n as f64).powf(2.0 - alpha))
}

fn lower_bound_verdict(w: &[(u64, f64)]) -> ConditionVerdict {
    let values: Vec<f64> = w.iter().map(|p| p.1).collect();
    match classify_trend(&values) {
        Trend::Vanishing => ConditionVerdict::FailsAt(w.last().unwrap().0),
        Trend::Converging | Trend::Diverging => {
            if values.iter().all(|v| *v > 0.0) {
                ConditionVerdict::HoldsEmpirically
            } else {
                ConditionVerdict::FailsAt(w.iter().find(|p| p.1 <= 0.0).unwrap().0)
            }
        }
        Trend::Erratic => ConditionVerdict::Inconclusive,
    }
}

fn infimum(w: &[(u64, f64)]) -> Option<f64> {
    w.iter().map(|p| p.1).reduce(f64::min)
}

/// Evaluates a condition on the dyadic grid `n = 2, 4, …, n_max`.
pub fn check_condition(
    q: &WeightSequence,
    condition: &Condition,
    n_max: u64,
) -> Result<ConditionReport> {
    if n_max < 8 {
        return Err(DslabError::domain("condition checks need n_max ≥ 8"));
    }
    let grid = dyadic_grid(n_max);
    q.ensure(n_max as usize + 2)?;
    let alpha = condition.alpha().map(rational_to_f64);
    let mut notes = vec!["verdicts are empirical classifications of finite data".to_string()];
    let mut secondary = vec![];
    let mut inf = None;

    let (witnesses, verdict) = match condition {
        Condition::Regular => {
            let w: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| {
                    let k = n as usize;
                    Ok((
                        n,
                        q.ratio_f64(
                            q.q_rational(k - 1),
                            q.big_q_rational(k),
                            (q.q_f64(k - 1)?, q.big_q_f64(k)?),
                        ),
                    ))
                })
                .collect::<Result<_>>()?;
            let values: Vec<f64> = w.iter().map(|p| p.1).collect();
            let verdict = match classify_trend(&values) {
                Trend::Vanishing => ConditionVerdict::HoldsEmpirically,
                Trend::Diverging => ConditionVerdict::FailsAt(*grid.last().unwrap()),
                Trend::Converging if values.iter().all(|v| *v > 0.0) => {
                    notes.push("witness settles at a positive level or decays slowly".into());
                    ConditionVerdict::Inconclusive
                }
                _ => ConditionVerdict::Inconclusive,
            };
            (w, verdict)
        }
        Condition::LinearMass | Condition::PowerMass { .. } | Condition::PowerDecrement { .. } => {
            let w: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| {
                    let v = match condition {
                        Condition::LinearMass => witness_power_mass(q, n, 1.0)?,
                        Condition::PowerMass { .. } => witness_power_mass(q, n, alpha.unwrap())?,
                        _ => witness_decrement(q, n, alpha.unwrap())?,
                    };
                    Ok((n, v))
                })
                .collect::<Result<_>>()?;
            let values: Vec<f64> = w.iter().map(|p| p.1.abs()).collect();
            let verdict = match classify_trend(&values) {
                Trend::Vanishing | Trend::Converging => ConditionVerdict::HoldsEmpirically,
                Trend::Diverging => ConditionVerdict::FailsAt(*grid.last().unwrap()),
                Trend::Erratic => {
                    if values.windows(2).all(|p| p[1] <= p[0]) {
                        ConditionVerdict::HoldsEmpirically
                    } else {
                        ConditionVerdict::Inconclusive
                    }
                }
            };
            (w, verdict)
        }
        Condition::MassBelowLinear => {
            // exact per-n test of Q_n ≤ n q_0 where possible
            let mut first_failure = None;
            let mut w = vec![];
            for &n in &grid {
                let k = n as usize;
                let ok = match (q.q_rational(0), q.big_q_rational(k)) {
                    (Ok(q0), Ok(qn)) => q0 * BigRational::from_integer(BigInt::from(n)) >= qn,
                    _ => q.q_f64(0)? * n as f64 >= q.big_q_f64(k)? * (1.0 - 1e-12),
                };
                if !ok && first_failure.is_none() {
                    first_failure = Some(n);
                }
                w.push((n, witness_power_mass(q, n, 1.0)?));
            }
            let mono = q.monotonicity();
            if mono.non_decreasing && !mono.non_increasing {
                notes.push(
                    "for non-decreasing q, Q_n ≥ n q_0 always; the inequality forces q to be constant"
                        .into(),
                );
            }
            inf = infimum(&w);
            let verdict = match first_failure {
                Some(n) => ConditionVerdict::FailsAt(n),
                None => ConditionVerdict::HoldsEmpirically,
            };
            (w, verdict)
        }
        Condition::PowerMassLower { .. } => {
            let w: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| Ok((n, witness_power_mass(q, n, alpha.unwrap())?)))
                .collect::<Result<_>>()?;
            inf = infimum(&w);
            let verdict = lower_bound_verdict(&w);
            (w, verdict)
        }
        Condition::PowerMassUnbounded { .. } => {
            let w: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| Ok((n, witness_power_mass(q, n, alpha.unwrap())?)))
                .collect::<Result<_>>()?;
            let values: Vec<f64> = w.iter().map(|p| p.1).collect();
            let verdict = match classify_trend(&values) {
                Trend::Diverging => ConditionVerdict::HoldsEmpirically,
                Trend::Vanishing | Trend::Converging => {
                    ConditionVerdict::FailsAt(*grid.last().unwrap())
                }
                Trend::Erratic => ConditionVerdict::Inconclusive,
            };
            (w, verdict)
        }
        Condition::CesaroType { .. } => {
            let a = alpha.unwrap();
            let w: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| Ok((n, witness_power_mass(q, n, a)?)))
                .collect::<Result<_>>()?;
            secondary = grid
                .iter()
                .map(|&n| Ok((n, witness_decrement(q, n, a)?)))
                .collect::<Result<_>>()?;
            inf = match (infimum(&w), infimum(&secondary)) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            };
            let verdict = match (lower_bound_verdict(&w), lower_bound_verdict(&secondary)) {
                (ConditionVerdict::HoldsEmpirically, ConditionVerdict::HoldsEmpirically) => {
                    ConditionVerdict::HoldsEmpirically
                }
                (ConditionVerdict::FailsAt(n), _) | (_, ConditionVerdict::FailsAt(n)) => {
                    ConditionVerdict::FailsAt(n)
                }
                _ => ConditionVerdict::Inconclusive,
            };
            (w, verdict)
        }
    };
    Ok(ConditionReport {
        condition: condition.clone(),
        weights: q.label(),
        witnesses,
        secondary,
        verdict,
        infimum: inf,
        notes,
    })
}

/// Coefficients `c_j` with `t_n = Σ_j c_j σ_j`, where `σ_j` is the Fejér
/// mean `(1/j) Σ_{k=1}^{j} S_k`. Zero coefficients are dropped.
///
/// `c_j = (q_{n-j} - q_{n-j-1}) j / Q_n` for `j < n` and `c_n = q_0 n / Q_n`.
pub fn abel_decompose<S: Scalar>(q: &WeightSequence, n: usize) -> Result<Vec<(S, usize)>> {
    if n == 0 {
        return Err(DslabError::domain("Abel decomposition needs n ≥ 1"));
    }
    let big_q: S = q.big_q(n)?;
    if big_q.is_zero() {
        return Err(DslabError::DegenerateWeights { n });
    }
    let mut out = vec![];
    for j in 1..n {
        let diff = q.q::<S>(n - j)? - q.q::<S>(n - j - 1)?;
        let c = diff * S::from_u64(j as u64) / big_q.clone();
        if !c.is_zero() {
            out.push((c, j));
        }
    }
    let last = q.q::<S>(0)? * S::from_u64(n as u64) / big_q;
    if !last.is_zero() {
        out.push((last, n));
    }
    Ok(out)
}

/// `Σ_{j=1}^{n-1} (q_{n-j} - q_{n-j-1}) j + q_0 n`; equals `Q_n` exactly.
pub fn abel_mass<S: Scalar>(q: &WeightSequence, n: usize) -> Result<S> {
    let mut acc = S::zero();
    for j in 1..n {
        acc += &((q.q::<S>(n - j)? - q.q::<S>(n - j - 1)?) * S::from_u64(j as u64));
    }
    acc += &(q.q::<S>(0)? * S::from_u64(n as u64));
    Ok(acc)
}
