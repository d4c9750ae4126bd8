//! Maximal-length (m-sequence) PN chips from a linear feedback shift register.

use crate::error::{domain, Result};

/// Feedback taps for register degrees 3..=16, indexed by `degree - 3`. Bit
/// `k` set means stage `k + 1` feeds the parity.
const TAPS: [u32; 14] = [
    0x6, 0xc, 0x14, 0x30, 0x60, 0xb8, 0x110, 0x240, 0x500, 0x829, 0x100d, 0x2015, 0x6000, 0xd008,
];

/// Smallest supported register degree.
pub const MIN_DEGREE: u32 = 3;
/// Largest supported register degree.
pub const MAX_DEGREE: u32 = 16;

/// Shift register producing one m-sequence bit per step.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    taps: u32,
    mask: u32,
}

impl Lfsr {
    /// Register of the given degree started from `seed` (masked to the
    /// register width). A zero state never leaves zero, so it is rejected.
    pub fn new(degree: u32, seed: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
            return Err(domain(format!(
                "register degree {degree} outside supported range {MIN_DEGREE}..={MAX_DEGREE}"
            )));
        }
        let mask = (1u32 << degree) - 1;
        let state = seed & mask;
        if state == 0 {
            return Err(domain(format!("PN seed {seed:#x} leaves the register all-zero")));
        }
        Ok(Self { state, taps: TAPS[(degree - MIN_DEGREE) as usize], mask })
    }

    pub fn period(&self) -> usize {
        self.mask as usize
    }

    pub fn next_bit(&mut self) -> u8 {
        let b = ((self.state & self.taps).count_ones() & 1) as u8;
        self.state = ((self.state << 1) | b as u32) & self.mask;
        b
    }
}

/// Register degree used for a sequence of `length` chips: the smallest
/// degree whose period covers the length (cycling past the largest one).
pub fn degree_for_length(length: usize) -> u32 {
    (MIN_DEGREE..=MAX_DEGREE)
        .find(|&m| (1usize << m) - 1 >= length)
        .unwrap_or(MAX_DEGREE)
}

/// PN chip sequence of `length` chips, bit 0 -> +1 and bit 1 -> -1.
pub fn gen_pn(length: usize, seed: u32) -> Result<Vec<f64>> {
    if length < 7 {
        return Err(domain(format!("PN length must be at least 7, got {length}")));
    }
    let mut reg = Lfsr::new(degree_for_length(length), seed)?;
    Ok((0..length).map(|_| if reg.next_bit() == 0 { 1.0 } else { -1.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_autocorr(c: &[f64], lag: usize) -> f64 {
        let n = c.len();
        (0..n).map(|i| c[i] * c[(i + lag) % n]).sum()
    }

    #[test]
    fn three_stage_sequence_by_hand() {
        // State 001 with taps on stages 2 and 3: outputs 0,1,1,1,0,0,1.
        let c = gen_pn(7, 1).unwrap();
        assert_eq!(c, vec![1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0]);
        assert_eq!(periodic_autocorr(&c, 0), 7.0);
        for lag in 1..7 {
            assert_eq!(periodic_autocorr(&c, lag), -1.0);
        }
    }

    #[test]
    fn every_degree_is_maximal() {
        for m in MIN_DEGREE..=MAX_DEGREE {
            let mut r = Lfsr::new(m, 1).unwrap();
            let start = r.state;
            let mut period = 0;
            loop {
                r.next_bit();
                period += 1;
                if r.state == start {
                    break;
                }
            }
            assert_eq!(period, (1usize << m) - 1, "degree {m}");
        }
    }

    #[test]
    fn m_sequence_autocorrelation_two_valued() {
        for m in [4u32, 5, 7] {
            let n = (1usize << m) - 1;
            let c = gen_pn(n, 0x5).unwrap();
            assert_eq!(periodic_autocorr(&c, 0), n as f64);
            for lag in 1..n {
                assert_eq!(periodic_autocorr(&c, lag), -1.0, "m={m} lag={lag}");
            }
        }
    }

    #[test]
    fn seeds_and_lengths() {
        assert!(gen_pn(7, 0).is_err());
        assert!(gen_pn(7, 8).is_err()); // masks to zero in a 3-stage register
        assert!(gen_pn(6, 1).is_err());
        assert_eq!(gen_pn(31, 9).unwrap(), gen_pn(31, 9).unwrap());
        assert_ne!(gen_pn(31, 9).unwrap(), gen_pn(31, 10).unwrap());
        assert_eq!(degree_for_length(7), 3);
        assert_eq!(degree_for_length(8), 4);
        let c = gen_pn(100, 3).unwrap();
        assert!(c.iter().all(|&x| x == 1.0 || x == -1.0));
    }
}
