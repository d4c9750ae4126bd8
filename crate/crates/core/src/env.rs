//! Acoustic environment: absorption, pathloss, ambient-noise PSD and the
//! colored-noise covariance that the ToA estimator whitens against.
//!
//! Frequencies are in kHz unless a name says otherwise. Distances are in
//! meters; the absorption coefficient is the usual dB/km figure, so pathloss
//! applies it to `d / 1000`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::units::db_to_linear;

/// Number of Simpson intervals used when inverting the noise PSD.
pub const PSD_QUADRATURE_INTERVALS: usize = 4096;

/// Diagonal loading applied when the Toeplitz factorization fails.
pub const COVARIANCE_JITTER: f64 = 1e-10;

/// Channel constants for the spreading/absorption pathloss and the ambient
/// noise PSD `N1 - zeta * 10 log10(f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcousticParams {
    /// Spreading factor.
    pub nu: f64,
    /// Noise PSD constant (dB re uPa^2/Hz).
    pub n1: f64,
    /// Noise PSD decay constant.
    pub zeta: f64,
    pub band_lo_khz: f64,
    pub band_hi_khz: f64,
    /// Frequency at which the reporting-channel pathloss is evaluated.
    pub carrier_khz: f64,
}

impl Default for AcousticParams {
    fn default() -> Self {
        Self {
            nu: 1.5,
            n1: 50.0,
            zeta: 1.8,
            band_lo_khz: 1.0,
            band_hi_khz: 100.0,
            carrier_khz: 10.0,
        }
    }
}

impl AcousticParams {
    /// Checks the band and carrier constraints. Error messages name the
    /// offending field.
    pub fn validate(&self) -> Result<()> {
        self.validate_band()?;
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(domain(format!("nu must be positive, got {}", self.nu)));
        }
        if !self.zeta.is_finite() || !self.n1.is_finite() {
            return Err(domain("n1 and zeta must be finite"));
        }
        if !(self.band_lo_khz..=self.band_hi_khz).contains(&self.carrier_khz) {
            return Err(domain(format!(
                "carrier_khz = {} must lie within [band_lo_khz, band_hi_khz] = [{}, {}]",
                self.carrier_khz, self.band_lo_khz, self.band_hi_khz
            )));
        }
        Ok(())
    }

    fn validate_band(&self) -> Result<()> {
        let (lo, hi) = (self.band_lo_khz, self.band_hi_khz);
        if !(1.0..=100.0).contains(&lo) {
            return Err(domain(format!(
                "band_lo_khz = {lo} outside the 1-100 kHz validity range of the noise model"
            )));
        }
        if !(1.0..=100.0).contains(&hi) {
            return Err(domain(format!(
                "band_hi_khz = {hi} outside the 1-100 kHz validity range of the noise model"
            )));
        }
        if lo >= hi {
            return Err(domain(format!(
                "degenerate band: band_lo_khz = {lo} must be below band_hi_khz = {hi}"
            )));
        }
        Ok(())
    }
}

/// Thorp-style absorption coefficient in dB/km.
pub fn absorption_db_per_km(f_khz: f64) -> Result<f64> {
    if !(f_khz > 0.0) {
        return Err(domain(format!("frequency must be positive, got {f_khz} kHz")));
    }
    let f2 = f_khz * f_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Pathloss in dB for a path of `d_m` meters.
pub fn pathloss_db(d_m: f64, f_khz: f64, nu: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(domain(format!("distance must be positive, got {d_m} m")));
    }
    Ok(nu * 10.0 * d_m.log10() + d_m / 1000.0 * absorption_db_per_km(f_khz)?)
}

/// Pathloss as a linear power ratio.
pub fn pathloss_linear(d_m: f64, f_khz: f64, nu: f64) -> Result<f64> {
    pathloss_db(d_m, f_khz, nu).map(db_to_linear)
}

/// Ambient noise PSD in dB re uPa^2/Hz.
pub fn noise_psd_db(f_khz: f64, params: &AcousticParams) -> Result<f64> {
    if !(params.band_lo_khz..=params.band_hi_khz).contains(&f_khz) {
        return Err(domain(format!(
            "frequency {f_khz} kHz outside the PSD band [{}, {}] kHz",
            params.band_lo_khz, params.band_hi_khz
        )));
    }
    Ok(params.n1 - params.zeta * 10.0 * f_khz.log10())
}

/// Normalized noise autocorrelation `R[l] = R(l T_S) / R(0)` for
/// `l = 0..max_lag`, obtained by cosine-transforming the linear PSD over the
/// band with composite Simpson.
pub fn noise_autocorrelation(
    params: &AcousticParams,
    sample_interval: f64,
    max_lag: usize,
) -> Result<Vec<f64>> {
    params.validate_band()?;
    if !(sample_interval > 0.0) {
        return Err(domain(format!(
            "sample interval must be positive, got {sample_interval}"
        )));
    }
    if max_lag == 0 {
        return Err(domain("max_lag must be at least 1"));
    }
    let n = PSD_QUADRATURE_INTERVALS;
    let lo = params.band_lo_khz;
    let h_khz = (params.band_hi_khz - lo) / n as f64;
    // Simpson weights times the linear PSD, computed once.
    let mut weighted = Vec::with_capacity(n + 1);
    let mut freqs_hz = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let f = if k == n { params.band_hi_khz } else { lo + k as f64 * h_khz };
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weighted.push(w * db_to_linear(noise_psd_db(f, params)?));
        freqs_hz.push(f * 1e3);
    }
    let r0: f64 = weighted.iter().sum();
    let mut out = Vec::with_capacity(max_lag);
    out.push(1.0);
    for lag in 1..max_lag {
        let tau = lag as f64 * sample_interval;
        let acc: f64 = weighted
            .iter()
            .zip(&freqs_hz)
            .map(|(w, f)| w * (2.0 * std::f64::consts::PI * f * tau).cos())
            .sum();
        out.push(acc / r0);
    }
    Ok(out)
}

/// Noise covariance `C = sigma2 * C_norm` where `C_norm` is the symmetric
/// Toeplitz matrix of a normalized autocorrelation sequence.
///
/// The lower-triangular Cholesky factor `L` of `C_norm` is stored once and
/// serves both for whitening (`L^-1 v`) and for sampling (`sigma L g`).
#[derive(Debug, Clone)]
pub struct NoiseCovariance {
    q: usize,
    autocorr: Vec<f64>,
    sigma2: f64,
    /// Row-major lower triangle of `L`.
    factor: Vec<f64>,
    jitter: f64,
    white: bool,
}

/// Builds the covariance of a `q`-sample slot from a normalized
/// autocorrelation sequence.
pub fn build_covariance(autocorr: &[f64], q: usize, sigma2: f64) -> Result<NoiseCovariance> {
    if q == 0 {
        return Err(domain("covariance dimension must be at least 1"));
    }
    if autocorr.len() < q {
        return Err(domain(format!(
            "autocorrelation has {} lags, need at least q = {q}",
            autocorr.len()
        )));
    }
    if autocorr[0] != 1.0 {
        return Err(domain(format!(
            "autocorrelation must be normalized (R[0] = 1), got {}",
            autocorr[0]
        )));
    }
    check_sigma2(sigma2)?;
    let autocorr = autocorr[..q].to_vec();
    let white = autocorr[1..].iter().all(|&r| r == 0.0);
    let (factor, jitter) = if white {
        let mut f = vec![0.0; q * q];
        for i in 0..q {
            f[i * q + i] = 1.0;
        }
        (f, 0.0)
    } else {
        let toeplitz = DMatrix::from_fn(q, q, |i, j| autocorr[i.abs_diff(j)]);
        let (l, jitter) = match nalgebra::Cholesky::new(toeplitz.clone()) {
            Some(c) => (c.l(), 0.0),
            None => {
                let loaded = toeplitz + DMatrix::identity(q, q) * COVARIANCE_JITTER;
                match nalgebra::Cholesky::new(loaded) {
                    Some(c) => (c.l(), COVARIANCE_JITTER),
                    None => {
                        return Err(Error::IllConditioned(format!(
                            "Toeplitz matrix of order {q} is not positive definite even with \
                             jitter {COVARIANCE_JITTER:e}"
                        )))
                    }
                }
            }
        };
        let mut f = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..=i {
                f[i * q + j] = l[(i, j)];
            }
        }
        (f, jitter)
    };
    Ok(NoiseCovariance { q, autocorr, sigma2, factor, jitter, white })
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(domain(format!("noise power must be finite and >= 0, got {sigma2}")));
    }
    Ok(())
}

impl NoiseCovariance {
    /// White noise of power `sigma2` over `q` samples.
    pub fn white(q: usize, sigma2: f64) -> Result<Self> {
        let mut r = vec![0.0; q.max(1)];
        r[0] = 1.0;
        build_covariance(&r, q, sigma2)
    }

    /// Colored ambient noise sampled every `sample_interval` seconds.
    pub fn from_params(
        params: &AcousticParams,
        sample_interval: f64,
        q: usize,
        sigma2: f64,
    ) -> Result<Self> {
        let r = noise_autocorrelation(params, sample_interval, q)?;
        build_covariance(&r, q, sigma2)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn autocorr(&self) -> &[f64] {
        &self.autocorr
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Diagonal loading that was needed to factor the matrix (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_white(&self) -> bool {
        self.white
    }

    /// Same correlation structure with a different noise power.
    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(Self { sigma2, ..self.clone() })
    }

    /// The normalized Toeplitz matrix `C_norm`.
    pub fn normalized_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.q, self.q, |i, j| self.autocorr[i.abs_diff(j)])
    }

    /// The lower-triangular factor `L` with `L L^T = C_norm` (plus jitter).
    pub fn factor(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.q, self.q, |i, j| if j <= i { self.factor[i * self.q + j] } else { 0.0 })
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.q {
            return Err(crate::error::contract(format!(
                "vector length {} does not match covariance dimension {}",
                v.len(),
                self.q
            )));
        }
        Ok(())
    }

    /// Whitening transform `L^-1 v` by forward substitution.
    pub fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        if self.white {
            return Ok(v.to_vec());
        }
        let q = self.q;
        let mut x = vec![0.0; q];
        for i in 0..q {
            let row = &self.factor[i * q..i * q + i + 1];
            let acc: f64 = row[..i].iter().zip(&x[..i]).map(|(l, xj)| l * xj).sum();
            x[i] = (v[i] - acc) / row[i];
        }
        Ok(x)
    }

    /// Quadratic form `v^T C_norm^-1 v`, evaluated through the factor.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        Ok(self.whiten(v)?.iter().map(|x| x * x).sum())
    }

    /// Draws one slot of noise, `sigma L g` with `g` i.i.d. standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let q = self.q;
        let g: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        let sigma = self.sigma2.sqrt();
        if self.white {
            return g.into_iter().map(|x| sigma * x).collect();
        }
        (0..q)
            .map(|i| {
                let row = &self.factor[i * q..i * q + i + 1];
                sigma * row.iter().zip(&g).map(|(l, x)| l * x).sum::<f64>()
            })
            .collect()
    }
}

/// Draws one slot of colored noise with covariance `cov`.
pub fn sample_colored_noise<R: Rng + ?Sized>(cov: &NoiseCovariance, rng: &mut R) -> Vec<f64> {
    cov.sample(rng)
}
