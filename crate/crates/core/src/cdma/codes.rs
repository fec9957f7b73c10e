//! Gold spreading codes.

use crate::{Error, Result};

/// A ±1 signature sequence assigned to one user.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    pub chips: Vec<f64>,
    pub user_index: usize,
}

impl SpreadingCode {
    /// Build a code from ±1 chips. Any other chip value is rejected.
    pub fn new(chips: Vec<f64>, user_index: usize) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::Dimension("spreading code has no chips".into()));
        }
        if chips.iter().any(|&c| c != 1.0 && c != -1.0) {
            return Err(Error::Dimension("spreading code chips must be +1 or -1".into()));
        }
        Ok(Self { chips, user_index })
    }

    /// Processing gain N.
    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }
}

/// Feedback taps `c_j` of `x^n + sum_j c_j x^j` for the preferred pairs we
/// ship. The recurrence is `a[k+n] = sum_j c_j a[k+j] (mod 2)`.
fn preferred_pair(degree: u32) -> Option<(&'static [usize], &'static [usize])> {
    match degree {
        // x^5 + x^2 + 1 and x^5 + x^4 + x^3 + x^2 + 1
        5 => Some((&[0, 2], &[0, 2, 3, 4])),
        _ => None,
    }
}

/// One period of the maximal-length sequence for the given feedback taps,
/// started from the state `0...01`.
fn m_sequence(degree: usize, taps: &[usize]) -> Vec<u8> {
    let period = (1usize << degree) - 1;
    let mut seq = vec![0u8; period + degree];
    seq[degree - 1] = 1;
    for k in 0..period {
        seq[k + degree] = taps.iter().fold(0u8, |acc, &j| acc ^ seq[k + j]);
    }
    seq.truncate(period);
    seq
}

fn to_chips(bits: impl Iterator<Item = u8>) -> Vec<f64> {
    bits.map(|b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Gold family of degree `degree`: the two m-sequences of a preferred pair
/// followed by `u xor T^k v` for every cyclic shift `k`, giving `2^n + 1`
/// codes of length `2^n - 1`. Bit 0 maps to chip +1, bit 1 to chip -1.
pub fn gold_family(degree: u32) -> Result<Vec<SpreadingCode>> {
    let (taps_u, taps_v) = preferred_pair(degree).ok_or(Error::UnsupportedDegree(degree))?;
    let n = degree as usize;
    let u = m_sequence(n, taps_u);
    let v = m_sequence(n, taps_v);
    let period = u.len();

    let mut family = Vec::with_capacity(period + 2);
    family.push(to_chips(u.iter().copied()));
    family.push(to_chips(v.iter().copied()));
    for shift in 0..period {
        family.push(to_chips((0..period).map(|i| u[i] ^ v[(i + shift) % period])));
    }
    Ok(family
        .into_iter()
        .enumerate()
        .map(|(user_index, chips)| SpreadingCode { chips, user_index })
        .collect())
}
