//! Summability means of Walsh–Fourier partial sums and their truncated
//! maximal operators.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{DslabError, Result};
use crate::kernels::{cesaro_kernel, dirichlet_kernel, dirichlet_values, fejer_kernel, norlund_kernel};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::systems::SystemId;
use crate::transforms::{
    apply_multiplier, convolve, forward_transform, inverse_transform, partial_sum, SampledFunction,
};
use crate::weights::WeightSequence;

/// A summability method `Σ_k a_k S_k f`.
#[derive(Debug, Clone)]
pub enum MeanKind {
    /// `t_n = (1/Q_n) Σ_{k=1}^n q_{n-k} S_k f`.
    Norlund(Arc<WeightSequence>),
    /// `(1/n) Σ_{k=1}^n S_k f`, i.e. Nörlund with `q ≡ 1`.
    Fejer,
    /// `σ_n = (1/n) Σ_{k=0}^{n-1} S_k f`.
    FejerPrinted,
    /// Nörlund with `q_k = A_k^{α-1}`.
    Cesaro(BigRational),
    /// `R_n = (1/l_n) Σ_{k=1}^{n-1} S_k f / k`.
    Riesz,
    /// `L_n = (1/l_n) Σ_{k=1}^{n-1} S_k f / (n-k)`.
    NorlundLog,
    /// `S_n f` itself.
    PartialSum,
}

impl MeanKind {
    pub fn norlund(q: WeightSequence) -> Self {
        MeanKind::Norlund(Arc::new(q))
    }

    /// Parses `fejer`, `fejer_printed`, `cesaro:α`, `riesz`, `norlund_log`,
    /// `partial_sum` or `norlund:<weight preset>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(preset) = text.strip_prefix("norlund:") {
            return Ok(MeanKind::norlund(WeightSequence::preset(preset)?));
        }
        if let Some(alpha) = text.strip_prefix("cesaro:") {
            let alpha = parse_rational(alpha)?;
            // validates α
            WeightSequence::cesaro(alpha.clone())?;
            return Ok(MeanKind::Cesaro(alpha));
        }
        match text {
            "fejer" => Ok(MeanKind::Fejer),
            "fejer_printed" => Ok(MeanKind::FejerPrinted),
            "riesz" => Ok(MeanKind::Riesz),
            "norlund_log" => Ok(MeanKind::NorlundLog),
            "partial_sum" => Ok(MeanKind::PartialSum),
            other => Err(DslabError::parse(format!("unknown mean {other:?}"))),
        }
    }

    /// Smallest index for which the mean is defined.
    pub fn min_index(&self) -> u64 {
        match self {
            MeanKind::Riesz | MeanKind::NorlundLog => 2,
            _ => 1,
        }
    }
}

impl PartialEq for MeanKind {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanKind::Norlund(q) => write!(f, "norlund:{}", q.label()),
            MeanKind::Fejer => f.write_str("fejer"),
            MeanKind::FejerPrinted => f.write_str("fejer_printed"),
            MeanKind::Cesaro(a) => write!(f, "cesaro:{}", format_rational(a)),
            MeanKind::Riesz => f.write_str("riesz"),
            MeanKind::NorlundLog => f.write_str("norlund_log"),
            MeanKind::PartialSum => f.write_str("partial_sum"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanId {
    pub kind: MeanKind,
    pub system: SystemId,
}

impl MeanId {
    pub fn new(kind: MeanKind, system: SystemId) -> Self {
        MeanId { kind, system }
    }
}

impl fmt::Display for MeanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.kind, self.system)
    }
}

/// How [`apply_mean`] evaluates the mean. All paths agree exactly in
/// rational mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanPath {
    /// Weighted sum of the partial sums `S_k f`, one transform per `k`.
    PartialSums,
    /// Coefficients of `f` scaled by the summed weights (default).
    #[default]
    Multiplier,
    /// `f ∗ K` with `K = Σ a_k D_k` summed from Dirichlet kernels.
    KernelConvolution,
}

/// `l_n = Σ_{k=1}^{n-1} 1/k`.
pub fn log_normaliser<S: Scalar>(n: u64) -> S {
    let mut acc = S::zero();
    for k in 1..n {
        acc += &(S::one() / S::from_u64(k));
    }
    acc
}

/// Weights `a_0 … a_n` with `mean_n f = Σ_k a_k S_k f`.
pub fn partial_sum_weights<S: Scalar>(kind: &MeanKind, n: u64) -> Result<Vec<S>> {
    if n < kind.min_index() {
        return Err(DslabError::domain(format!(
            "{kind} needs n ≥ {}, got {n}",
            kind.min_index()
        )));
    }
    let len = n as usize + 1;
    let mut a = vec![S::zero(); len];
    match kind {
        MeanKind::Norlund(q) => norlund_weights(q, n, &mut a)?,
        MeanKind::Cesaro(alpha) => norlund_weights(&WeightSequence::cesaro(alpha.clone())?, n, &mut a)?,
        MeanKind::Fejer => {
            let w = S::one() / S::from_u64(n);
            a[1..].iter_mut().for_each(|v| *v = w.clone());
        }
        MeanKind::FejerPrinted => {
            let w = S::one() / S::from_u64(n);
            a[..n as usize].iter_mut().for_each(|v| *v = w.clone());
        }
        MeanKind::Riesz => {
            let l = log_normaliser::<S>(n);
            for k in 1..n {
                a[k as usize] = S::one() / (S::from_u64(k) * &l);
            }
        }
        MeanKind::NorlundLog => {
            let l = log_normaliser::<S>(n);
            for k in 1..n {
                a[k as usize] = S::one() / (S::from_u64(n - k) * &l);
            }
        }
        MeanKind::PartialSum => a[n as usize] = S::one(),
    }
    Ok(a)
}

fn norlund_weights<S: Scalar>(q: &WeightSequence, n: u64, a: &mut [S]) -> Result<()> {
    let total: S = q.big_q(n as usize)?;
    if total.is_zero() {
        return Err(DslabError::DegenerateWeights { n: n as usize });
    }
    for k in 1..=n {
        a[k as usize] = q.q::<S>((n - k) as usize)? / total.clone();
    }
    Ok(())
}

/// Coefficient multiplier `m_i = Σ_{k>i} a_k` for `i < n`.
pub fn mean_multiplier<S: Scalar>(kind: &MeanKind, n: u64) -> Result<Vec<S>> {
    let a = partial_sum_weights::<S>(kind, n)?;
    let mut m = vec![S::zero(); n as usize];
    let mut acc = S::zero();
    for i in (0..n as usize).rev() {
        acc += &a[i + 1];
        m[i] = acc.clone();
    }
    Ok(m)
}

fn check_n(n: u64, f_resolution: u32) -> Result<()> {
    if n > 1u64 << f_resolution {
        return Err(DslabError::resolution(
            format!("mean of index {n}"),
            64 - (n - 1).leading_zeros(),
            f_resolution,
        ));
    }
    Ok(())
}

/// Applies the mean `m` of index `n` to `f`.
pub fn apply_mean<S: Scalar>(m: &MeanId, n: u64, f: &SampledFunction<S>) -> Result<SampledFunction<S>> {
    apply_mean_with(m, n, f, MeanPath::Multiplier)
}

pub fn apply_mean_with<S: Scalar>(
    m: &MeanId,
    n: u64,
    f: &SampledFunction<S>,
    path: MeanPath,
) -> Result<SampledFunction<S>> {
    check_n(n, f.resolution())?;
    match path {
        MeanPath::Multiplier => {
            let multiplier = mean_multiplier::<S>(&m.kind, n)?;
            let c = forward_transform(f, m.system);
            Ok(inverse_transform(&apply_multiplier(&c, &multiplier)))
        }
        MeanPath::PartialSums => {
            let a = partial_sum_weights::<S>(&m.kind, n)?;
            let mut acc = SampledFunction::zeros(f.resolution())?;
            for (k, w) in a.iter().enumerate() {
                if k == 0 || w.is_zero() {
                    continue;
                }
                let s = partial_sum(f, k as u64, m.system)?;
                acc = acc.add(&s.scale(w))?;
            }
            Ok(acc)
        }
        MeanPath::KernelConvolution => {
            let kernel = mean_kernel::<S>(m, n, f.resolution())?;
            convolve(f, &kernel)
        }
    }
}

/// `Σ_k a_k D_k` summed directly from Dirichlet kernel values.
pub fn mean_kernel<S: Scalar>(m: &MeanId, n: u64, resolution: u32) -> Result<SampledFunction<S>> {
    check_n(n, resolution)?;
    let a = partial_sum_weights::<S>(&m.kind, n)?;
    let mut acc = vec![S::zero(); 1usize << resolution];
    for (k, w) in a.iter().enumerate() {
        if k == 0 || w.is_zero() {
            continue;
        }
        let d = dirichlet_values(k as u64, m.system, resolution)?;
        for (slot, v) in acc.iter_mut().zip(d) {
            if v != 0 {
                *slot += &(S::from_i64(v) * w);
            }
        }
    }
    SampledFunction::new(resolution, acc)
}

/// Kernel by name: `dirichlet`, `fejer`, `cesaro:α`, `norlund` (with
/// `weights`) or any mean accepted by [`MeanKind::parse`].
pub fn named_kernel<S: Scalar>(
    kind: &str,
    n: u64,
    system: SystemId,
    resolution: u32,
    weights: Option<&WeightSequence>,
) -> Result<SampledFunction<S>> {
    match kind {
        "dirichlet" => Ok(dirichlet_kernel::<S>(n, system, resolution)?.data),
        "fejer" => Ok(fejer_kernel::<S>(n, system, resolution)?.data),
        "norlund" => {
            let q = weights.ok_or_else(|| DslabError::parse("the norlund kernel needs weights"))?;
            Ok(norlund_kernel::<S>(n, q, system, resolution)?.data)
        }
        other => match other.strip_prefix("cesaro:") {
            Some(alpha) => Ok(cesaro_kernel::<S>(n, &parse_rational(alpha)?, system, resolution)?.data),
            None => mean_kernel::<S>(&MeanId::new(MeanKind::parse(other)?, system), n, resolution),
        },
    }
}

/// Truncated maximal operator `max_{n ≤ n_max} |mean_n f|`, pointwise.
///
/// Indices below the mean's first admissible index are skipped. The
/// per-index means are evaluated in parallel.
pub fn maximal_operator<S: Scalar>(
    m: &MeanId,
    f: &SampledFunction<S>,
    n_max: u64,
) -> Result<SampledFunction<S>> {
    check_n(n_max, f.resolution())?;
    let start = m.kind.min_index();
    if n_max < start {
        return Err(DslabError::domain(format!("{} needs n_max ≥ {start}", m.kind)));
    }
    let parts: Vec<SampledFunction<S>> = (start..=n_max)
        .into_par_iter()
        .map(|n| apply_mean(m, n, f).map(|g| g.abs()))
        .collect::<Result<_>>()?;
    let mut it = parts.into_iter();
    let first = it.next().expect("non-empty range");
    it.try_fold(first, |acc, g| acc.max(&g))
}

/// `f^*(x) = max_{0 ≤ k ≤ N} |average of f over I_k(x)|`.
pub fn martingale_maximal<S: Scalar>(f: &SampledFunction<S>) -> Result<SampledFunction<S>> {
    let mut out = f.abs();
    for rank in 0..f.resolution() {
        out = out.max(&f.block_average(rank)?.abs())?;
    }
    Ok(out)
}
