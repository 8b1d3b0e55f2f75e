//! Dirichlet, Fejér, Cesàro and Nörlund kernels sampled on `G`, and the
//! Cesàro numbers `A_n^α`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::dyadic::check_resolution;
use crate::error::{DslabError, Result};
use crate::scalar::{format_rational, NumericMode, Scalar};
use crate::systems::SystemId;
use crate::transforms::{bit_reverse_permute, inverse_transform, CoefficientVector, SampledFunction};
use crate::weights::WeightSequence;

fn check_alpha(alpha: &BigRational) -> Result<()> {
    if alpha.is_integer() && alpha.is_negative() {
        return Err(DslabError::domain(format!(
            "A_n^α is undefined for α = {}",
            format_rational(alpha)
        )));
    }
    Ok(())
}

/// `A_n^α = (α+1)(α+2)…(α+n) / n!`, with `A_0^α = 1`.
pub fn cesaro_coefficient(alpha: &BigRational, n: u64) -> Result<BigRational> {
    check_alpha(alpha)?;
    let mut acc = BigRational::one();
    for j in 1..=n {
        let j = BigRational::from_integer(BigInt::from(j));
        acc = acc * (alpha + &j) / j;
    }
    Ok(acc)
}

/// Table `A_0^α … A_n^α`, built by the recurrence `A_k = A_{k-1}(α+k)/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroCoefficients {
    alpha: BigRational,
    table: Vec<BigRational>,
}

impl CesaroCoefficients {
    pub fn new(alpha: BigRational, n: usize) -> Result<Self> {
        check_alpha(&alpha)?;
        let mut table = Vec::with_capacity(n + 1);
        table.push(BigRational::one());
        for k in 1..=n {
            let kk = BigRational::from_integer(BigInt::from(k));
            let next = &table[k - 1] * (&alpha + &kk) / kk;
            table.push(next);
        }
        Ok(CesaroCoefficients { alpha, table })
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&BigRational> {
        self.table.get(k)
    }

    pub fn table(&self) -> &[BigRational] {
        &self.table
    }
}

/// What a [`Kernel`] was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum KernelConstruction {
    Dirichlet { n: u64 },
    Fejer { n: u64 },
    /// The (C,α) kernel: Nörlund with `q_k = A_k^{α-1}`.
    Cesaro { n: u64, alpha: BigRational },
    /// Nörlund with the weight sequence named by `weights`.
    Norlund { n: u64, weights: String },
}

impl KernelConstruction {
    pub fn n(&self) -> u64 {
        match self {
            KernelConstruction::Dirichlet { n }
            | KernelConstruction::Fejer { n }
            | KernelConstruction::Cesaro { n, .. }
            | KernelConstruction::Norlund { n, .. } => *n,
        }
    }
}

impl fmt::Display for KernelConstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelConstruction::Dirichlet { n } => write!(f, "dirichlet({n})"),
            KernelConstruction::Fejer { n } => write!(f, "fejer({n})"),
            KernelConstruction::Cesaro { n, alpha } => {
                write!(f, "cesaro({n},{})", format_rational(alpha))
            }
            KernelConstruction::Norlund { n, weights } => write!(f, "norlund({n},{weights})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<S> {
    pub construction: KernelConstruction,
    pub system: SystemId,
    pub data: SampledFunction<S>,
}

impl<S: Scalar> Kernel<S> {
    pub fn resolution(&self) -> u32 {
        self.data.resolution()
    }

    pub fn values(&self) -> &[S] {
        self.data.values()
    }
}

fn check_index(name: &str, n: u64, resolution: u32) -> Result<()> {
    check_resolution(resolution)?;
    if n > 1u64 << resolution {
        let needed = 64 - (n - 1).leading_zeros();
        return Err(DslabError::resolution(format!("{name}_{n}"), needed, resolution));
    }
    Ok(())
}

fn fwht_i64(data: &mut [i64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (data[j], data[j + h]);
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `Σ_{i<len} c_i ψ_i` for integer coefficients, in cell order.
fn synthesize_i64(system: SystemId, resolution: u32, coeff: impl Fn(u64) -> i64, len: u64) -> Vec<i64> {
    let size = 1usize << resolution;
    let mut data = vec![0i64; size];
    for i in 0..len {
        data[system.paley_index(i) as usize] = coeff(i);
    }
    bit_reverse_permute(&mut data, resolution);
    fwht_i64(&mut data);
    data
}

/// Values of `D_n^ψ = Σ_{i<n} ψ_i` as integers, in cell order.
pub fn dirichlet_values(n: u64, system: SystemId, resolution: u32) -> Result<Vec<i64>> {
    check_index("D", n, resolution)?;
    Ok(synthesize_i64(system, resolution, |_| 1, n))
}

/// Values of `n K_n^ψ = Σ_{k=1}^n D_k^ψ` as integers, in cell order.
pub fn fejer_sum_values(n: u64, system: SystemId, resolution: u32) -> Result<Vec<i64>> {
    check_index("K", n, resolution)?;
    Ok(synthesize_i64(system, resolution, |i| (n - i) as i64, n))
}

fn from_i64<S: Scalar>(resolution: u32, values: Vec<i64>) -> SampledFunction<S> {
    SampledFunction::from_fn(resolution, |i| S::from_i64(values[i])).expect("length matches")
}

/// `D_n^ψ := Σ_{i=0}^{n-1} ψ_i`.
pub fn dirichlet_kernel<S: Scalar>(n: u64, system: SystemId, resolution: u32) -> Result<Kernel<S>> {
    let values = dirichlet_values(n, system, resolution)?;
    Ok(Kernel {
        construction: KernelConstruction::Dirichlet { n },
        system,
        data: from_i64(resolution, values),
    })
}

/// `K_n^ψ := (1/n) Σ_{k=1}^n D_k^ψ`.
pub fn fejer_kernel<S: Scalar>(n: u64, system: SystemId, resolution: u32) -> Result<Kernel<S>> {
    if n == 0 {
        return Err(DslabError::domain("K_0 is undefined"));
    }
    let values = fejer_sum_values(n, system, resolution)?;
    let denom = S::from_u64(n);
    let data = from_i64::<S>(resolution, values).map(|v| v.clone() / denom.clone());
    Ok(Kernel {
        construction: KernelConstruction::Fejer { n },
        system,
        data,
    })
}

/// Coefficients of `F_n` in the system's own ordering:
/// `F_n = Σ_{i<n} (Q_{n-i} / Q_n) ψ_i`.
pub fn norlund_multiplier<S: Scalar>(q: &WeightSequence, n: u64) -> Result<Vec<S>> {
    let n_us = n as usize;
    let big_q: Vec<S> = q.big_q_vec(n_us)?;
    let total = big_q[n_us].clone();
    if total.is_zero() {
        return Err(DslabError::DegenerateWeights { n: n_us });
    }
    Ok((0..n_us)
        .map(|i| big_q[n_us - i].clone() / total.clone())
        .collect())
}

fn norlund_data<S: Scalar>(
    q: &WeightSequence,
    n: u64,
    system: SystemId,
    resolution: u32,
) -> Result<SampledFunction<S>> {
    if n == 0 {
        return Err(DslabError::domain("F_0 is undefined"));
    }
    check_index("F", n, resolution)?;
    let mut coeffs = norlund_multiplier::<S>(q, n)?;
    coeffs.resize(1usize << resolution, S::zero());
    Ok(inverse_transform(&CoefficientVector::new(system, resolution, coeffs)?))
}

/// `F_n^ψ = (1/Q_n) Σ_{k=1}^n q_{n-k} D_k^ψ`.
pub fn norlund_kernel<S: Scalar>(
    n: u64,
    q: &WeightSequence,
    system: SystemId,
    resolution: u32,
) -> Result<Kernel<S>> {
    Ok(Kernel {
        construction: KernelConstruction::Norlund {
            n,
            weights: q.label(),
        },
        system,
        data: norlund_data(q, n, system, resolution)?,
    })
}

/// `K_n^{α,ψ}`: the Nörlund kernel for `q_k = A_k^{α-1}`, normalised by
/// `Q_n = Σ_{k<n} A_k^{α-1}`.
pub fn cesaro_kernel<S: Scalar>(
    n: u64,
    alpha: &BigRational,
    system: SystemId,
    resolution: u32,
) -> Result<Kernel<S>> {
    let q = WeightSequence::cesaro(alpha.clone())?;
    Ok(Kernel {
        construction: KernelConstruction::Cesaro {
            n,
            alpha: alpha.clone(),
        },
        system,
        data: norlund_data(&q, n, system, resolution)?,
    })
}

type CacheKey = (KernelConstruction, SystemId, u32, NumericMode);

/// Memoises kernels by construction, system, resolution and numeric mode.
///
/// Safe to share across threads. Concurrent misses may build the same
/// kernel twice; the last insert wins and the values are identical.
#[derive(Debug, Default)]
pub struct KernelCache<S> {
    map: RwLock<HashMap<CacheKey, Arc<Kernel<S>>>>,
}

impl<S: Scalar> KernelCache<S> {
    pub fn new() -> Self {
        KernelCache {
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("kernel cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_build(
        &self,
        construction: KernelConstruction,
        system: SystemId,
        resolution: u32,
        build: impl FnOnce() -> Result<Kernel<S>>,
    ) -> Result<Arc<Kernel<S>>> {
        let key = (construction, system, resolution, S::MODE);
        if let Some(k) = self.map.read().expect("kernel cache poisoned").get(&key) {
            return Ok(k.clone());
        }
        let kernel = Arc::new(build()?);
        self.map
            .write()
            .expect("kernel cache poisoned")
            .insert(key, kernel.clone());
        Ok(kernel)
    }

    pub fn dirichlet(&self, n: u64, system: SystemId, resolution: u32) -> Result<Arc<Kernel<S>>> {
        self.get_or_build(KernelConstruction::Dirichlet { n }, system, resolution, || {
            dirichlet_kernel(n, system, resolution)
        })
    }

    pub fn fejer(&self, n: u64, system: SystemId, resolution: u32) -> Result<Arc<Kernel<S>>> {
        self.get_or_build(KernelConstruction::Fejer { n }, system, resolution, || {
            fejer_kernel(n, system, resolution)
        })
    }

    pub fn norlund(
        &self,
        n: u64,
        q: &WeightSequence,
        system: SystemId,
        resolution: u32,
    ) -> Result<Arc<Kernel<S>>> {
        let construction = KernelConstruction::Norlund {
            n,
            weights: q.label(),
        };
        self.get_or_build(construction, system, resolution, || {
            norlund_kernel(n, q, system, resolution)
        })
    }
}
