//! Rademacher, Walsh–Paley and Walsh–Kaczmarz functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::{bit_length, DyadicPoint};
use crate::error::{DslabError, Result};

/// Which orthonormal system a kernel or mean is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    WalshPaley,
    WalshKaczmarz,
}

impl SystemId {
    pub const ALL: [SystemId; 2] = [SystemId::WalshPaley, SystemId::WalshKaczmarz];

    pub fn short(&self) -> &'static str {
        match self {
            SystemId::WalshPaley => "w",
            SystemId::WalshKaczmarz => "k",
        }
    }

    /// Evaluates `ψ_n(x)` from the defining product formula.
    pub fn eval(&self, n: u64, x: &DyadicPoint) -> Result<i8> {
        match self {
            SystemId::WalshPaley => walsh_eval(n, x),
            SystemId::WalshKaczmarz => kaczmarz_eval(n, x),
        }
    }

    /// Index of the Walsh–Paley function equal to `ψ_n`.
    pub fn paley_index(&self, n: u64) -> u64 {
        match self {
            SystemId::WalshPaley => n,
            SystemId::WalshKaczmarz => {
                if n == 0 {
                    0
                } else {
                    lower_bit_reverse(n).expect("n >= 1")
                }
            }
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemId::WalshPaley => f.write_str("walsh_paley"),
            SystemId::WalshKaczmarz => f.write_str("walsh_kaczmarz"),
        }
    }
}

impl FromStr for SystemId {
    type Err = DslabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "w" | "walsh" | "paley" | "walsh_paley" | "walsh-paley" => Ok(SystemId::WalshPaley),
            "k" | "kappa" | "kaczmarz" | "walsh_kaczmarz" | "walsh-kaczmarz" => {
                Ok(SystemId::WalshKaczmarz)
            }
            other => Err(DslabError::parse(format!("unknown system {other:?}"))),
        }
    }
}

fn needs_bits(what: String, k: u32, x: &DyadicPoint) -> Result<u8> {
    x.bit(k)
        .ok_or_else(|| DslabError::resolution(what, k + 1, x.resolution()))
}

/// `r_k(x) = (-1)^{x_k}`.
pub fn rademacher_eval(k: u32, x: &DyadicPoint) -> Result<i8> {
    let b = needs_bits(format!("r_{k}"), k, x)?;
    Ok(if b == 0 { 1 } else { -1 })
}

/// `w_n(x) = Π_k r_k(x)^{n_k}`.
pub fn walsh_eval(n: u64, x: &DyadicPoint) -> Result<i8> {
    if n == 0 {
        return Ok(1);
    }
    let top = bit_length(n)?;
    if top >= x.resolution() {
        return Err(DslabError::resolution(format!("w_{n}"), top + 1, x.resolution()));
    }
    let mut v = 1i8;
    for k in 0..=top {
        if (n >> k) & 1 == 1 {
            v *= rademacher_eval(k, x)?;
        }
    }
    Ok(v)
}

/// `κ_n(x) = r_{|n|}(x) · Π_{k<|n|} r_{|n|-1-k}(x)^{n_k}`, with `κ_0 = 1`.
pub fn kaczmarz_eval(n: u64, x: &DyadicPoint) -> Result<i8> {
    if n == 0 {
        return Ok(1);
    }
    let top = bit_length(n)?;
    if top >= x.resolution() {
        return Err(DslabError::resolution(format!("κ_{n}"), top + 1, x.resolution()));
    }
    let mut v = rademacher_eval(top, x)?;
    for k in 0..top {
        if (n >> k) & 1 == 1 {
            v *= rademacher_eval(top - 1 - k, x)?;
        }
    }
    Ok(v)
}

/// Keeps the leading bit of `n` and reverses the `|n|` bits below it.
///
/// `κ_n = w_{lower_bit_reverse(n)}` as functions; the map is an involution
/// on each block `[2^m, 2^{m+1})`.
pub fn lower_bit_reverse(n: u64) -> Result<u64> {
    let top = bit_length(n)?;
    let low = n - (1 << top);
    let reversed = if top == 0 {
        0
    } else {
        low.reverse_bits() >> (64 - top)
    };
    Ok((1 << top) | reversed)
}

/// Cell mask `m` with `w_n(cell) = (-1)^{popcount(m & cell)}`.
pub(crate) fn paley_mask(n: u64, resolution: u32) -> u64 {
    if resolution == 0 {
        return 0;
    }
    n.reverse_bits() >> (64 - resolution)
}

/// All values of `ψ_n` at resolution `resolution`, in cell order, through
/// the parity fast path. Agrees with [`SystemId::eval`] (property-tested).
pub fn system_values(system: SystemId, n: u64, resolution: u32) -> Result<Vec<i8>> {
    if n != 0 {
        let top = bit_length(n)?;
        if top >= resolution {
            return Err(DslabError::resolution(
                format!("{}_{n}", system.short()),
                top + 1,
                resolution,
            ));
        }
    }
    let mask = paley_mask(system.paley_index(n), resolution);
    Ok((0..1u64 << resolution)
        .map(|cell| if (mask & cell).count_ones().is_multiple_of(2) { 1 } else { -1 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(bits: &[u8]) -> DyadicPoint {
        DyadicPoint::from_bits(bits).unwrap()
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(rademacher_eval(0, &DyadicPoint::zero(3).unwrap()).unwrap(), 1);
        let e1 = DyadicPoint::unit(1, 3).unwrap();
        assert_eq!(rademacher_eval(1, &e1).unwrap(), -1);
        assert_eq!(rademacher_eval(2, &e1).unwrap(), 1);
        assert!(matches!(
            rademacher_eval(3, &e1),
            Err(DslabError::Resolution { .. })
        ));
    }

    #[test]
    fn walsh_examples() {
        for cell in 0..8 {
            let x = DyadicPoint::from_cell(cell, 3).unwrap();
            assert_eq!(walsh_eval(0, &x).unwrap(), 1);
        }
        assert_eq!(walsh_eval(3, &pt(&[1, 1, 0])).unwrap(), 1);
        assert_eq!(walsh_eval(2, &DyadicPoint::unit(1, 3).unwrap()).unwrap(), -1);
        assert!(walsh_eval(8, &pt(&[0, 0, 0])).is_err());
    }

    #[test]
    fn kaczmarz_powers_of_two_are_rademacher() {
        for m in 0..6u32 {
            for cell in 0..64 {
                let x = DyadicPoint::from_cell(cell, 6).unwrap();
                assert_eq!(
                    kaczmarz_eval(1 << m, &x).unwrap(),
                    rademacher_eval(m, &x).unwrap()
                );
                assert_eq!(walsh_eval(1 << m, &x).unwrap(), rademacher_eval(m, &x).unwrap());
            }
        }
    }

    #[test]
    fn kaczmarz_small_indices_brute_force() {
        // κ_n = w_n for n < 4 and κ_5 = w_6, over all 16 points.
        for cell in 0..16 {
            let x = DyadicPoint::from_cell(cell, 4).unwrap();
            for n in 0..4 {
                assert_eq!(kaczmarz_eval(n, &x).unwrap(), walsh_eval(n, &x).unwrap());
            }
            assert_eq!(kaczmarz_eval(5, &x).unwrap(), walsh_eval(6, &x).unwrap());
        }
    }

    #[test]
    fn lower_bit_reverse_examples() {
        assert_eq!(lower_bit_reverse(5).unwrap(), 6);
        assert_eq!(lower_bit_reverse(1).unwrap(), 1);
        for m in 0..20 {
            assert_eq!(lower_bit_reverse(1 << m).unwrap(), 1 << m);
        }
        assert!(lower_bit_reverse(0).is_err());
        for n in 1..=(1u64 << 12) {
            let r = lower_bit_reverse(n).unwrap();
            assert_eq!(lower_bit_reverse(r).unwrap(), n);
            assert_eq!(bit_length(r).unwrap(), bit_length(n).unwrap());
        }
    }

    #[test]
    fn kaczmarz_blocks_permute_walsh_blocks() {
        // for each block m ≤ 8, κ_n over the block equals w over the block
        // as a set of functions, realised by lower_bit_reverse.
        let resolution = 9;
        for m in 0..=8u32 {
            let mut seen = vec![false; 1 << m];
            for n in (1u64 << m)..(1u64 << (m + 1)) {
                let kappa = system_values(SystemId::WalshKaczmarz, n, resolution).unwrap();
                let j = lower_bit_reverse(n).unwrap();
                let walsh = system_values(SystemId::WalshPaley, j, resolution).unwrap();
                assert_eq!(kappa, walsh);
                seen[(j - (1 << m)) as usize] = true;
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn orthonormality_both_systems() {
        let resolution = 5;
        for system in SystemId::ALL {
            let table: Vec<Vec<i8>> = (0..32)
                .map(|n| system_values(system, n, resolution).unwrap())
                .collect();
            for m in 0..32 {
                for n in 0..32 {
                    let dot: i64 = table[m]
                        .iter()
                        .zip(&table[n])
                        .map(|(a, b)| (*a as i64) * (*b as i64))
                        .sum();
                    assert_eq!(dot, if m == n { 32 } else { 0 }, "{system} {m} {n}");
                }
            }
        }
    }

    #[test]
    fn system_id_parsing() {
        assert_eq!("w".parse::<SystemId>().unwrap(), SystemId::WalshPaley);
        assert_eq!("kaczmarz".parse::<SystemId>().unwrap(), SystemId::WalshKaczmarz);
        assert!("sequency".parse::<SystemId>().is_err());
    }

    proptest! {
        #[test]
        fn fast_path_matches_direct_formula(resolution in 1u32..10, raw_n in any::<u64>(), raw_cell in any::<u64>()) {
            let n = raw_n & ((1u64 << resolution) - 1);
            let cell = raw_cell & ((1u64 << resolution) - 1);
            let x = DyadicPoint::from_cell(cell, resolution).unwrap();
            for system in SystemId::ALL {
                let fast = system_values(system, n, resolution).unwrap()[cell as usize];
                prop_assert_eq!(fast, system.eval(n, &x).unwrap());
            }
        }
    }
}
