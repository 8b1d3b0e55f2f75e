//! Sampled functions, the fast Walsh–Paley transform and partial sums.

use num_rational::BigRational;

use crate::dyadic::{check_resolution, DyadicInterval};
use crate::error::{DslabError, Result};
use crate::scalar::{NumericMode, Scalar};
use crate::systems::{lower_bit_reverse, SystemId};

/// A function on `G` that is constant on every rank-`resolution` interval,
/// stored as one value per cell (`x_0` most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<S> {
    resolution: u32,
    values: Vec<S>,
}

pub type ExactFunction = SampledFunction<BigRational>;
pub type FloatFunction = SampledFunction<f64>;

impl<S: Scalar> SampledFunction<S> {
    pub fn new(resolution: u32, values: Vec<S>) -> Result<Self> {
        check_resolution(resolution)?;
        if values.len() != 1usize << resolution {
            return Err(DslabError::domain(format!(
                "expected {} values at resolution {resolution}, got {}",
                1usize << resolution,
                values.len()
            )));
        }
        Ok(SampledFunction { resolution, values })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        Self::constant(resolution, S::zero())
    }

    pub fn constant(resolution: u32, c: S) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(SampledFunction {
            resolution,
            values: vec![c; 1usize << resolution],
        })
    }

    pub fn from_fn(resolution: u32, f: impl FnMut(usize) -> S) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(SampledFunction {
            resolution,
            values: (0..1usize << resolution).map(f).collect(),
        })
    }

    pub fn from_i64(resolution: u32, values: &[i64]) -> Result<Self> {
        Self::new(resolution, values.iter().map(|&v| S::from_i64(v)).collect())
    }

    /// `1_I` at the given resolution.
    pub fn indicator(interval: &DyadicInterval, resolution: u32) -> Result<Self> {
        let cells = interval.cells(resolution)?;
        Self::from_fn(resolution, |c| {
            if cells.contains(&c) {
                S::one()
            } else {
                S::zero()
            }
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mode(&self) -> NumericMode {
        S::MODE
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn value(&self, cell: usize) -> &S {
        &self.values[cell]
    }

    /// `∫_G f dμ`.
    pub fn mean(&self) -> S {
        let mut acc = S::zero();
        for v in &self.values {
            acc += v;
        }
        acc / S::pow2(self.resolution as i64)
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        SampledFunction {
            resolution: self.resolution,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.magnitude())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.resolution != other.resolution {
            return Err(DslabError::domain("functions at different resolutions"));
        }
        Ok(SampledFunction {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() * b)
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| if b > a { b.clone() } else { a.clone() })
    }

    pub fn mode_eq(&self, other: &Self) -> bool {
        self.resolution == other.resolution
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.mode_eq(b))
    }

    /// Re-samples the same function at a finer resolution.
    pub fn refine(&self, resolution: u32) -> Result<Self> {
        if resolution < self.resolution {
            return Err(DslabError::domain("refine cannot lower the resolution"));
        }
        check_resolution(resolution)?;
        let shift = resolution - self.resolution;
        Self::from_fn(resolution, |c| self.values[c >> shift].clone())
    }

    pub fn to_float(&self) -> FloatFunction {
        SampledFunction {
            resolution: self.resolution,
            values: self.values.iter().map(|v| v.as_f64()).collect(),
        }
    }

    /// `S_{2^rank} f`: the average of `f` over each rank-`rank` interval.
    pub fn block_average(&self, rank: u32) -> Result<Self> {
        if rank > self.resolution {
            return Err(DslabError::resolution("block average", rank, self.resolution));
        }
        let width = 1usize << (self.resolution - rank);
        let denom = S::from_u64(width as u64);
        let mut values = Vec::with_capacity(self.values.len());
        for block in self.values.chunks(width) {
            let mut acc = S::zero();
            for v in block {
                acc += v;
            }
            let avg = acc / denom.clone();
            values.extend(std::iter::repeat_n(avg, width));
        }
        Ok(SampledFunction {
            resolution: self.resolution,
            values,
        })
    }
}

/// Fourier coefficients `f̂^ψ(0..2^N)` with respect to one system.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<S> {
    system: SystemId,
    resolution: u32,
    coeffs: Vec<S>,
}

impl<S: Scalar> CoefficientVector<S> {
    pub fn new(system: SystemId, resolution: u32, coeffs: Vec<S>) -> Result<Self> {
        check_resolution(resolution)?;
        if coeffs.len() != 1usize << resolution {
            return Err(DslabError::domain(format!(
                "expected {} coefficients at resolution {resolution}, got {}",
                1usize << resolution,
                coeffs.len()
            )));
        }
        Ok(CoefficientVector {
            system,
            resolution,
            coeffs,
        })
    }

    pub fn unit(system: SystemId, resolution: u32, index: usize) -> Result<Self> {
        let mut coeffs = vec![S::zero(); 1usize << resolution];
        *coeffs
            .get_mut(index)
            .ok_or_else(|| DslabError::domain("unit index out of range"))? = S::one();
        Self::new(system, resolution, coeffs)
    }

    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn get(&self, i: usize) -> &S {
        &self.coeffs[i]
    }

    /// Re-expresses the same function in the other system.
    pub fn to_system(&self, system: SystemId) -> Self {
        if system == self.system {
            return self.clone();
        }
        let paley = self.to_paley_order();
        let coeffs = match system {
            SystemId::WalshPaley => paley,
            SystemId::WalshKaczmarz => from_paley_order(&paley, system),
        };
        CoefficientVector {
            system,
            resolution: self.resolution,
            coeffs,
        }
    }

    fn to_paley_order(&self) -> Vec<S> {
        match self.system {
            SystemId::WalshPaley => self.coeffs.clone(),
            SystemId::WalshKaczmarz => {
                let mut out = vec![S::zero(); self.coeffs.len()];
                for (n, c) in self.coeffs.iter().enumerate() {
                    out[kaczmarz_to_paley(n)] = c.clone();
                }
                out
            }
        }
    }
}

fn kaczmarz_to_paley(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        lower_bit_reverse(n as u64).expect("n >= 1") as usize
    }
}

fn from_paley_order<S: Scalar>(paley: &[S], system: SystemId) -> Vec<S> {
    match system {
        SystemId::WalshPaley => paley.to_vec(),
        // lower_bit_reverse is an involution, so the same table permutes back
        SystemId::WalshKaczmarz => (0..paley.len())
            .map(|n| paley[kaczmarz_to_paley(n)].clone())
            .collect(),
    }
}

/// Unnormalised in-place Walsh–Hadamard butterfly in natural (Hadamard)
/// order: `out[i] = Σ_x data[x] (-1)^{popcount(i & x)}`.
pub fn fwht_in_place<S: Scalar>(data: &mut [S]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for j in block..block + h {
                let a = data[j].clone();
                let b = data[j + h].clone();
                data[j] = a.clone() + b.clone();
                data[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Applies the bit-reversal permutation on `resolution` bits in place.
pub fn bit_reverse_permute<T>(data: &mut [T], resolution: u32) {
    if resolution == 0 {
        return;
    }
    for i in 0..data.len() {
        let j = (i as u64).reverse_bits() >> (64 - resolution);
        let j = j as usize;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// `f̂^ψ(i) = 2^{-N} Σ_x f(x) ψ_i(x)` for `i < 2^N`.
pub fn forward_transform<S: Scalar>(
    f: &SampledFunction<S>,
    system: SystemId,
) -> CoefficientVector<S> {
    let resolution = f.resolution();
    let mut data = f.values().to_vec();
    fwht_in_place(&mut data);
    // Hadamard index of w_n is the N-bit reversal of n.
    bit_reverse_permute(&mut data, resolution);
    let norm = S::pow2(resolution as i64);
    let paley: Vec<S> = data.into_iter().map(|v| v / norm.clone()).collect();
    CoefficientVector {
        system,
        resolution,
        coeffs: from_paley_order(&paley, system),
    }
}

/// `f = Σ_i c_i ψ_i`.
pub fn inverse_transform<S: Scalar>(c: &CoefficientVector<S>) -> SampledFunction<S> {
    let resolution = c.resolution();
    let mut data = c.to_paley_order();
    bit_reverse_permute(&mut data, resolution);
    fwht_in_place(&mut data);
    SampledFunction {
        resolution,
        values: data,
    }
}

/// `S_M^ψ f = Σ_{i<M} f̂^ψ(i) ψ_i`.
pub fn partial_sum<S: Scalar>(
    f: &SampledFunction<S>,
    m: u64,
    system: SystemId,
) -> Result<SampledFunction<S>> {
    let size = 1u64 << f.resolution();
    if m > size {
        return Err(DslabError::resolution(
            format!("S_{m}"),
            64 - (m - 1).leading_zeros(),
            f.resolution(),
        ));
    }
    let c = forward_transform(f, system);
    Ok(inverse_transform(&truncate(&c, m as usize)))
}

/// Keeps the first `m` coefficients (in the vector's own ordering).
pub fn truncate<S: Scalar>(c: &CoefficientVector<S>, m: usize) -> CoefficientVector<S> {
    let coeffs = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, v)| if i < m { v.clone() } else { S::zero() })
        .collect();
    CoefficientVector {
        system: c.system(),
        resolution: c.resolution(),
        coeffs,
    }
}

/// Multiplies coefficient `i` by `multiplier[i]` (missing entries count as 0).
pub fn apply_multiplier<S: Scalar>(
    c: &CoefficientVector<S>,
    multiplier: &[S],
) -> CoefficientVector<S> {
    let coeffs = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, v)| match multiplier.get(i) {
            Some(m) => v.clone() * m,
            None => S::zero(),
        })
        .collect();
    CoefficientVector {
        system: c.system(),
        resolution: c.resolution(),
        coeffs,
    }
}

/// Group convolution `(f ∗ g)(x) = ∫_G f(x + t) g(t) dμ(t)`, computed through
/// Walsh–Paley coefficients (every Walsh function is a character of `G`).
pub fn convolve<S: Scalar>(
    f: &SampledFunction<S>,
    g: &SampledFunction<S>,
) -> Result<SampledFunction<S>> {
    if f.resolution() != g.resolution() {
        return Err(DslabError::domain("functions at different resolutions"));
    }
    let cf = forward_transform(f, SystemId::WalshPaley);
    let cg = forward_transform(g, SystemId::WalshPaley);
    Ok(inverse_transform(&apply_multiplier(&cf, cg.coeffs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicPoint;
    use crate::systems::system_values;
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn system_fn(system: SystemId, n: u64, resolution: u32) -> ExactFunction {
        let v: Vec<i64> = system_values(system, n, resolution)
            .unwrap()
            .into_iter()
            .map(|x| x as i64)
            .collect();
        SampledFunction::from_i64(resolution, &v).unwrap()
    }

    fn rational_vec(raw: &[(i64, i64)]) -> Vec<Q> {
        raw.iter().map(|&(n, d)| q(n, d)).collect()
    }

    #[test]
    fn constant_has_single_coefficient() {
        let f = ExactFunction::constant(4, Q::one()).unwrap();
        for system in SystemId::ALL {
            let c = forward_transform(&f, system);
            assert_eq!(c.get(0), &Q::one());
            assert!(c.coeffs()[1..].iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn walsh_function_is_unit_vector() {
        let f = system_fn(SystemId::WalshPaley, 5, 3);
        let c = forward_transform(&f, SystemId::WalshPaley);
        for (i, v) in c.coeffs().iter().enumerate() {
            assert_eq!(*v, if i == 5 { Q::one() } else { Q::zero() });
        }
    }

    #[test]
    fn kaczmarz_unit_vectors() {
        for n in 0..32u64 {
            let f = system_fn(SystemId::WalshKaczmarz, n, 5);
            let c = forward_transform(&f, SystemId::WalshKaczmarz);
            for (i, v) in c.coeffs().iter().enumerate() {
                assert_eq!(*v, if i as u64 == n { Q::one() } else { Q::zero() });
            }
        }
    }

    #[test]
    fn unit_coefficient_inverts_to_constant() {
        let c = CoefficientVector::<Q>::unit(SystemId::WalshPaley, 3, 0).unwrap();
        let f = inverse_transform(&c);
        assert!(f.values().iter().all(|v| v.is_one()));
    }

    #[test]
    fn leading_ones_invert_to_dirichlet_closed_form() {
        for system in SystemId::ALL {
            for n in 0..=4u32 {
                let mut coeffs = vec![Q::zero(); 16];
                for c in coeffs.iter_mut().take(1 << n) {
                    *c = Q::one();
                }
                let f = inverse_transform(&CoefficientVector::new(system, 4, coeffs).unwrap());
                let width = 1usize << (4 - n);
                for (cell, v) in f.values().iter().enumerate() {
                    let expected = if cell < width { Q::from_integer((1i64 << n).into()) } else { Q::zero() };
                    assert_eq!(*v, expected);
                }
            }
        }
    }

    #[test]
    fn partial_sums_of_walsh_functions() {
        let resolution = 4;
        for system in SystemId::ALL {
            for j in 0..16u64 {
                let f = system_fn(system, j, resolution);
                for m in 0..=16u64 {
                    let s = partial_sum(&f, m, system).unwrap();
                    if j < m {
                        assert_eq!(s, f);
                    } else {
                        assert!(s.values().iter().all(|v| v.is_zero()));
                    }
                }
            }
        }
    }

    #[test]
    fn dyadic_partial_sums_are_block_averages() {
        let values: Vec<Q> = (0..32).map(|i| q((i * 7 % 11) - 5, 1 + i % 3)).collect();
        let f = ExactFunction::new(5, values).unwrap();
        for system in SystemId::ALL {
            for k in 0..=5 {
                assert_eq!(
                    partial_sum(&f, 1 << k, system).unwrap(),
                    f.block_average(k).unwrap()
                );
            }
            assert!(partial_sum(&f, 0, system).unwrap().values().iter().all(|v| v.is_zero()));
        }
        assert!(matches!(
            partial_sum(&f, 33, SystemId::WalshPaley),
            Err(DslabError::Resolution { .. })
        ));
    }

    #[test]
    fn kaczmarz_counterexample_coefficients() {
        // f_n = D_{2^{n+1}} - D_{2^n} has κ-coefficients 1 on [2^n, 2^{n+1})
        for n in 0..4u32 {
            let resolution = n + 2;
            let f = ExactFunction::from_fn(resolution, |cell| {
                let d = |m: u32| {
                    if cell < 1usize << (resolution - m) {
                        1i64 << m
                    } else {
                        0
                    }
                };
                Q::from_integer((d(n + 1) - d(n)).into())
            })
            .unwrap();
            let c = forward_transform(&f, SystemId::WalshKaczmarz);
            for (i, v) in c.coeffs().iter().enumerate() {
                let inside = (1usize << n..1usize << (n + 1)).contains(&i);
                assert_eq!(*v, if inside { Q::one() } else { Q::zero() });
            }
            // S_{2^n+1} f_n = κ_{2^n}
            let s = partial_sum(&f, (1 << n) + 1, SystemId::WalshKaczmarz).unwrap();
            assert_eq!(s, system_fn(SystemId::WalshKaczmarz, 1 << n, resolution));
        }
    }

    #[test]
    fn convolution_with_dirichlet_is_block_average() {
        let values: Vec<Q> = (0..16).map(|i| q(i * i - 20, 3)).collect();
        let f = ExactFunction::new(4, values).unwrap();
        let d4 = ExactFunction::from_fn(4, |c| if c < 4 { Q::from_integer(4.into()) } else { Q::zero() }).unwrap();
        assert_eq!(convolve(&f, &d4).unwrap(), f.block_average(2).unwrap());
    }

    #[test]
    fn refine_keeps_coefficients() {
        let f = ExactFunction::from_i64(2, &[1, -2, 3, 5]).unwrap();
        let g = f.refine(5).unwrap();
        let cf = forward_transform(&f, SystemId::WalshPaley);
        let cg = forward_transform(&g, SystemId::WalshPaley);
        assert_eq!(&cg.coeffs()[..4], cf.coeffs());
        assert!(cg.coeffs()[4..].iter().all(|v| v.is_zero()));
        let x = DyadicPoint::from_bits(&[1, 0, 1, 1, 0]).unwrap();
        assert_eq!(g.value(x.cell() as usize), f.value(2));
    }

    fn arb_function(resolution: u32) -> impl Strategy<Value = ExactFunction> {
        prop::collection::vec((-20i64..20, 1i64..6), 1usize << resolution)
            .prop_map(move |raw| ExactFunction::new(resolution, rational_vec(&raw)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn round_trip_is_identity(f in arb_function(6)) {
            for system in SystemId::ALL {
                let c = forward_transform(&f, system);
                prop_assert_eq!(&inverse_transform(&c), &f);
            }
        }

        #[test]
        fn parseval(f in arb_function(5)) {
            let energy = f.values().iter().fold(Q::zero(), |acc, v| acc + v * v)
                / Q::from_integer(32.into());
            for system in SystemId::ALL {
                let c = forward_transform(&f, system);
                let sum = c.coeffs().iter().fold(Q::zero(), |acc, v| acc + v * v);
                prop_assert_eq!(&sum, &energy);
            }
        }

        #[test]
        fn linearity(f in arb_function(4), g in arb_function(4), a in (-5i64..5, 1i64..4), b in (-5i64..5, 1i64..4)) {
            let (a, b) = (q(a.0, a.1), q(b.0, b.1));
            let combo = f.scale(&a).add(&g.scale(&b)).unwrap();
            for system in SystemId::ALL {
                let lhs = forward_transform(&combo, system);
                let cf = forward_transform(&f, system);
                let cg = forward_transform(&g, system);
                for i in 0..16 {
                    prop_assert_eq!(lhs.get(i).clone(), cf.get(i) * &a + cg.get(i) * &b);
                }
            }
        }

        #[test]
        fn system_change_matches_direct_transform(f in arb_function(5)) {
            let paley = forward_transform(&f, SystemId::WalshPaley);
            let kacz = forward_transform(&f, SystemId::WalshKaczmarz);
            prop_assert_eq!(paley.to_system(SystemId::WalshKaczmarz), kacz.clone());
            prop_assert_eq!(kacz.to_system(SystemId::WalshPaley), paley);
        }

        #[test]
        fn float_round_trip(raw in prop::collection::vec(-1.0e3f64..1.0e3, 256)) {
            let f = FloatFunction::new(8, raw).unwrap();
            let back = inverse_transform(&forward_transform(&f, SystemId::WalshKaczmarz));
            prop_assert!(back.mode_eq(&f));
        }
    }
}
