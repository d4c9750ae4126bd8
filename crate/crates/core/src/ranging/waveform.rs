//! Pulse-shaped PN waveform and its derivative with respect to delay.
//!
//! Each chip is a flat-topped pulse whose edges are smooth ramps of length
//! `rolloff * T_b`. Consecutive chips overlap on the ramps and the rising and
//! falling edges sum to one there, so a run of equal chips is flat. Time is
//! measured in samples throughout: sample `k` (0-based) of a slot with delay
//! `tau` sees `sum_c chip_c * g(k - c * T_b / T_S - tau)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Chip pulse family. Both shapes are normalized to unit energy per chip
/// duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseShape {
    /// Half-cosine ramps. The pulse is C1: its second derivative jumps at
    /// the ramp ends.
    RaisedCosine { rolloff: f64 },
    /// Ramps `u - sin(2 pi u) / (2 pi)`, whose slope is a Hann window. The
    /// pulse is C2, which keeps finite differences accurate on short ramps.
    SmoothEdge { rolloff: f64 },
}

impl Default for PulseShape {
    fn default() -> Self {
        PulseShape::RaisedCosine { rolloff: 0.5 }
    }
}

impl PulseShape {
    pub fn rolloff(&self) -> f64 {
        match *self {
            PulseShape::RaisedCosine { rolloff } | PulseShape::SmoothEdge { rolloff } => rolloff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.rolloff();
        if !(b > 0.0 && b <= 1.0) {
            return Err(domain(format!("pulse rolloff must lie in (0, 1], got {b}")));
        }
        Ok(())
    }

    /// Rising edge `r(u)` on `[0, 1]` with its first two derivatives.
    fn edge(&self, u: f64) -> (f64, f64, f64) {
        use std::f64::consts::PI;
        match self {
            PulseShape::RaisedCosine { .. } => {
                let (s, c) = (PI * u).sin_cos();
                (0.5 * (1.0 - c), 0.5 * PI * s, 0.5 * PI * PI * c)
            }
            PulseShape::SmoothEdge { .. } => {
                let (s, c) = (2.0 * PI * u).sin_cos();
                (u - s / (2.0 * PI), 1.0 - c, 2.0 * PI * s)
            }
        }
    }

    /// `integral_0^1 r(u)^2 du`.
    fn edge_energy(&self) -> f64 {
        match self {
            PulseShape::RaisedCosine { .. } => 3.0 / 8.0,
            PulseShape::SmoothEdge { .. } => {
                1.0 / 3.0 + 5.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI)
            }
        }
    }

    /// Peak amplitude giving unit energy per chip duration.
    fn amplitude(&self) -> f64 {
        let b = self.rolloff();
        1.0 / (1.0 - b + 2.0 * b * self.edge_energy()).sqrt()
    }
}

/// A PN chip sequence with its timing and pulse shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PnWaveform {
    chips: Vec<f64>,
    t_b: f64,
    t_s: f64,
    shape: PulseShape,
    chip_samples: f64,
    amplitude: f64,
}

/// Sampled waveform and its delay derivative (per sample of delay).
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub s: Vec<f64>,
    pub s_dot: Vec<f64>,
}

impl PnWaveform {
    pub fn new(chips: Vec<f64>, t_b: f64, t_s: f64, shape: PulseShape) -> Result<Self> {
        if chips.is_empty() {
            return Err(domain("waveform has no chips (zero energy)"));
        }
        if chips.iter().any(|c| !c.is_finite()) {
            return Err(domain("chip values must be finite"));
        }
        if !(t_s > 0.0 && t_b.is_finite()) {
            return Err(domain(format!("sampling interval must be positive, got {t_s}")));
        }
        if t_s > t_b / 2.0 {
            return Err(domain(format!(
                "sampling interval {t_s} s exceeds half the chip duration {t_b} s (aliasing)"
            )));
        }
        shape.validate()?;
        Ok(Self { chip_samples: t_b / t_s, amplitude: shape.amplitude(), chips, t_b, t_s, shape })
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    /// Chip duration in samples.
    pub fn chip_samples(&self) -> f64 {
        self.chip_samples
    }

    /// Length of the nonzero part of the waveform, in samples.
    pub fn support_samples(&self) -> f64 {
        (self.chips.len() as f64 + self.shape.rolloff()) * self.chip_samples
    }

    /// Single chip pulse at time `t` (samples) with its first and second
    /// time derivatives.
    pub fn pulse(&self, t: f64) -> (f64, f64, f64) {
        let tc = self.chip_samples;
        let ramp = self.shape.rolloff() * tc;
        let a = self.amplitude;
        if !(t >= 0.0) || t >= tc + ramp {
            (0.0, 0.0, 0.0)
        } else if t < ramp {
            let (r, r1, r2) = self.shape.edge(t / ramp);
            (a * r, a * r1 / ramp, a * r2 / (ramp * ramp))
        } else if t < tc {
            (a, 0.0, 0.0)
        } else {
            let (r, r1, r2) = self.shape.edge((t - tc) / ramp);
            (a * (1.0 - r), -a * r1 / ramp, -a * r2 / (ramp * ramp))
        }
    }

    /// Visits every (sample index, chip, pulse time) triple with the sample
    /// inside the chip's support.
    fn for_each_tap(&self, q: usize, delay: f64, mut f: impl FnMut(usize, f64, f64)) {
        let span = (1.0 + self.shape.rolloff()) * self.chip_samples;
        for (c, &chip) in self.chips.iter().enumerate() {
            let start = c as f64 * self.chip_samples + delay;
            let first = start.ceil().max(0.0);
            let last = (start + span).ceil().min(q as f64);
            let mut k = first;
            while k < last {
                f(k as usize, chip, k - start);
                k += 1.0;
            }
        }
    }

    fn check(q: usize, delay: f64, pr: f64) -> Result<()> {
        if q == 0 {
            return Err(domain("slot length must be at least 1"));
        }
        if !delay.is_finite() {
            return Err(domain("delay must be finite"));
        }
        if !(pr >= 0.0 && pr.is_finite()) {
            return Err(domain(format!("received power must be finite and >= 0, got {pr}")));
        }
        Ok(())
    }

    /// Samples `q` points of `sqrt(pr) * s(k - delay)` and its derivative
    /// with respect to `delay`. Parts of the waveform outside the slot are
    /// cut off.
    pub fn synth(&self, q: usize, delay: f64, pr: f64) -> Result<Synthesis> {
        Self::check(q, delay, pr)?;
        let amp = pr.sqrt();
        let mut s = vec![0.0; q];
        let mut s_dot = vec![0.0; q];
        self.for_each_tap(q, delay, |k, chip, t| {
            let (g, g1, _) = self.pulse(t);
            s[k] += amp * chip * g;
            s_dot[k] -= amp * chip * g1;
        });
        Ok(Synthesis { s, s_dot })
    }

    /// Second derivative with respect to delay. Diagnostic only.
    pub fn second_derivative(&self, q: usize, delay: f64, pr: f64) -> Result<Vec<f64>> {
        Self::check(q, delay, pr)?;
        let amp = pr.sqrt();
        let mut out = vec![0.0; q];
        self.for_each_tap(q, delay, |k, chip, t| {
            out[k] += amp * chip * self.pulse(t).2;
        });
        Ok(out)
    }
}

/// One-shot synthesis with the default pulse at an integer delay.
pub fn synth_waveform(
    chips: &[f64],
    t_b: f64,
    t_s: f64,
    q: usize,
    delay: usize,
    pr: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = PnWaveform::new(chips.to_vec(), t_b, t_s, PulseShape::default())?;
    let out = w.synth(q, delay as f64, pr)?;
    Ok((out.s, out.s_dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranging::pn::gen_pn;
    use approx::assert_relative_eq;

    fn wave(tb_samples: f64, shape: PulseShape) -> PnWaveform {
        PnWaveform::new(gen_pn(7, 1).unwrap(), tb_samples * 1e-4, 1e-4, shape).unwrap()
    }

    #[test]
    fn unit_energy_per_chip() {
        for shape in [
            PulseShape::RaisedCosine { rolloff: 0.5 },
            PulseShape::RaisedCosine { rolloff: 1.0 },
            PulseShape::SmoothEdge { rolloff: 0.3 },
        ] {
            let w = wave(16.0, shape);
            // Midpoint rule on a fine grid, independent of the closed form.
            let n = 400_000;
            let span = 16.0 * (1.0 + shape.rolloff());
            let h = span / n as f64;
            let e: f64 = (0..n).map(|i| w.pulse((i as f64 + 0.5) * h).0.powi(2)).sum::<f64>() * h;
            assert_relative_eq!(e / 16.0, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn overlapping_edges_form_partition_of_unity() {
        let w = wave(10.0, PulseShape::RaisedCosine { rolloff: 0.5 });
        let a = w.pulse(7.0).0; // flat top
        for t in [10.0, 11.3, 12.7, 14.9] {
            let sum = w.pulse(t).0 + w.pulse(t - 10.0).0;
            assert_relative_eq!(sum, a, max_relative = 1e-14);
        }
    }

    #[test]
    fn delay_shifts_samples() {
        let w = wave(8.0, PulseShape::default());
        let a = w.synth(128, 0.0, 1.0).unwrap();
        let b = w.synth(128, 5.0, 1.0).unwrap();
        for k in 0..128 {
            let expect = if k >= 5 { a.s[k - 5] } else { 0.0 };
            assert_eq!(b.s[k], expect);
        }
    }

    #[test]
    fn power_scales_amplitude() {
        let w = wave(8.0, PulseShape::default());
        let a = w.synth(96, 3.0, 1.0).unwrap();
        let b = w.synth(96, 3.0, 4.0).unwrap();
        for k in 0..96 {
            assert_relative_eq!(b.s[k], 2.0 * a.s[k]);
            assert_relative_eq!(b.s_dot[k], 2.0 * a.s_dot[k]);
        }
    }

    #[test]
    fn rejects_bad_timing() {
        assert!(PnWaveform::new(vec![], 1e-3, 1e-4, PulseShape::default()).is_err());
        assert!(PnWaveform::new(vec![1.0], 1e-4, 1e-4, PulseShape::default()).is_err());
        assert!(PnWaveform::new(vec![1.0], 1e-3, 1e-4, PulseShape::RaisedCosine { rolloff: 0.0 }).is_err());
        assert!(synth_waveform(&[], 1e-3, 1e-4, 16, 0, 1.0).is_err());
    }

    /// Derivative against a central difference with step 1e-4 samples. The
    /// raised-cosine pulse has curvature jumps at its ramp ends, where a
    /// central difference straddling the kink errs by about
    /// `pi^2 h / (8 R^2)` of the peak per chip edge, and two edges meet at
    /// every sign change. Its configurations therefore keep ramps of at
    /// least 24 samples. The C2 shape has no such limit.
    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-4;
        let matrix = [
            (48.0, PulseShape::RaisedCosine { rolloff: 0.5 }, 5.0),
            (32.0, PulseShape::RaisedCosine { rolloff: 0.75 }, 0.0),
            (24.0, PulseShape::RaisedCosine { rolloff: 1.0 }, 7.25),
            (4.0, PulseShape::SmoothEdge { rolloff: 0.5 }, 3.0),
            (8.0, PulseShape::SmoothEdge { rolloff: 0.25 }, 1.5),
            (16.0, PulseShape::SmoothEdge { rolloff: 1.0 }, 9.0),
        ];
        for (tb, shape, delay) in matrix {
            let w = wave(tb, shape);
            let q = (w.support_samples() + delay + 4.0) as usize;
            let base = w.synth(q, delay, 2.0).unwrap();
            let plus = w.synth(q, delay + h, 2.0).unwrap();
            let minus = w.synth(q, delay - h, 2.0).unwrap();
            let peak = base.s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for k in 0..q {
                let fd = (plus.s[k] - minus.s[k]) / (2.0 * h);
                let err = (fd - base.s_dot[k]).abs();
                assert!(err <= 1e-6 * peak, "tb={tb} {shape:?} k={k}: {err:e}");
            }
        }
    }

    #[test]
    fn second_derivative_matches_finite_difference_on_smooth_pulse() {
        let w = wave(8.0, PulseShape::SmoothEdge { rolloff: 0.5 });
        let h = 1e-4;
        let d2 = w.second_derivative(80, 2.0, 1.0).unwrap();
        let plus = w.synth(80, 2.0 + h, 1.0).unwrap();
        let minus = w.synth(80, 2.0 - h, 1.0).unwrap();
        for k in 0..80 {
            let fd = (plus.s_dot[k] - minus.s_dot[k]) / (2.0 * h);
            // Third-derivative jumps at the ramp ends leave O(h) error.
            assert!((fd - d2[k]).abs() < 1e-4, "k={k}: {fd} vs {}", d2[k]);
        }
    }
}
