//! Ramsey observables and spectral analysis of echo series.

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::OverlapSeries;

/// Default revival threshold on `|I|`.
pub const REVIVAL_THRESHOLD: f64 = 0.5;

/// `P₁(g) = (1 + Re I) / 2`.
pub fn ramsey_p1(series: &OverlapSeries) -> Vec<f64> {
    series.values.iter().map(|z| 0.5 * (1.0 + z.re)).collect()
}

/// `P₂(g) = (1 + Im I) / 2`, measured after the phase gate `|e⟩ → -i|e⟩`.
pub fn ramsey_p2(series: &OverlapSeries) -> Vec<f64> {
    series.values.iter().map(|z| 0.5 * (1.0 + z.im)).collect()
}

/// Recovers `I = (2P₁ - 1) + i (2P₂ - 1)`.
pub fn reconstruct(p1: &[f64], p2: &[f64]) -> Result<Vec<Complex64>> {
    if p1.len() != p2.len() {
        return Err(Error::Invalid("probability series of different length".into()));
    }
    Ok(p1.iter().zip(p2).map(|(a, b)| Complex64::new(2.0 * a - 1.0, 2.0 * b - 1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "none" | "rect" | "rectangular" => Ok(Window::None),
            "hann" => Ok(Window::Hann),
            _ => Err(Error::Invalid(format!("unknown window {text:?}"))),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::None => "none",
            Window::Hann => "hann",
        })
    }
}

/// One-sided discrete Fourier transform of `|I(t)|`.
///
/// Magnitudes are `|Σ_n w_n |I(t_n)| e^{-2πikn/N}|`, unnormalized, for
/// `k = 0 … N/2`; the DC bin is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequencies `2πk / (N Δt)` in units of `ν_x`, ascending.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub window: Window,
    /// Number of time samples transformed.
    pub samples: usize,
}

impl Spectrum {
    /// Spacing of the frequency grid.
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Frequency of the largest local maximum of the magnitudes strictly
    /// inside `(lo, hi)`.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let m = &self.magnitudes;
        (1..m.len())
            .filter(|&k| m[k] > m[k - 1] && (k + 1 == m.len() || m[k] >= m[k + 1]))
            .filter(|&k| self.frequencies[k] > lo && self.frequencies[k] < hi)
            .max_by(|&a, &b| m[a].total_cmp(&m[b]))
            .map(|k| self.frequencies[k])
    }

    /// Largest local maximum above the DC bin.
    pub fn dominant_peak(&self) -> Option<f64> {
        self.peak_in(0.0, f64::INFINITY)
    }

    /// `(1/N) Σ_k |X_k|²` over the full two-sided spectrum, which equals
    /// the windowed signal energy by Parseval's theorem.
    pub fn power(&self) -> f64 {
        let n = self.samples;
        let mut total = 0.0;
        for (k, m) in self.magnitudes.iter().enumerate() {
            let twice = k != 0 && !(n % 2 == 0 && k == n / 2);
            total += if twice { 2.0 } else { 1.0 } * m * m;
        }
        total / n as f64
    }
}

/// Checks that `times` is uniformly spaced and returns the step.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Invalid("at least two time samples are required".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Invalid("time grid must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::Invalid(format!("non-uniform time grid near t = {}", w[0])));
        }
    }
    Ok(dt)
}

/// Fourier spectrum of `|I(t)|`. Fails on a non-uniform grid.
pub fn spectrum(series: &OverlapSeries, window: Window) -> Result<Spectrum> {
    let dt = uniform_step(&series.times)?;
    let n = series.len();
    let w = window.weights(n);
    let mut buf: Vec<Complex64> =
        series.values.iter().zip(&w).map(|(z, w)| Complex64::new(z.norm() * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let df = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    Ok(Spectrum {
        frequencies: (0..half).map(|k| k as f64 * df).collect(),
        magnitudes: buf[..half].iter().map(|z| z.norm()).collect(),
        window,
        samples: n,
    })
}

/// Windowed signal energy `Σ (w_n |I_n|)²`, the Parseval partner of
/// [`Spectrum::power`].
pub fn signal_power(series: &OverlapSeries, window: Window) -> f64 {
    let w = window.weights(series.len());
    series.values.iter().zip(&w).map(|(z, w)| (z.norm() * w).powi(2)).sum()
}

/// Times of local maxima of `|I|` above `threshold`, excluding the first
/// sample. Rises smaller than `1e-9` count as flat.
pub fn revival_times(series: &OverlapSeries, threshold: f64) -> Result<Vec<f64>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Invalid(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let a = series.moduli();
    let mut out = Vec::new();
    for k in 1..a.len().saturating_sub(1) {
        if a[k] > threshold && a[k] > a[k - 1] + 1e-9 && a[k] + 1e-9 >= a[k + 1] {
            out.push(series.times[k]);
        }
    }
    Ok(out)
}

/// Revival spacing `2π / ω*`, where `ω*` is the strongest spectral peak
/// of `|I|` below `band` (units of `ν_x`).
pub fn revival_spacing(series: &OverlapSeries, band: f64) -> Result<Option<f64>> {
    let spec = spectrum(series, Window::None)?;
    Ok(spec.peak_in(0.0, band).map(|f| 2.0 * std::f64::consts::PI / f))
}

/// Largest `|I|` on `[t0, t1]`.
pub fn max_modulus_between(series: &OverlapSeries, t0: f64, t1: f64) -> Option<f64> {
    series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(_, z)| z.norm())
        .max_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{time_grid, EchoMetadata};
    use approx::assert_relative_eq;

    fn series(times: Vec<f64>, f: impl Fn(f64) -> Complex64) -> OverlapSeries {
        let values = times.iter().map(|&t| f(t)).collect();
        OverlapSeries { times, values, metadata: EchoMetadata::default() }
    }

    #[test]
    fn probabilities() {
        let s = series(vec![0.0, 1.0, 2.0], |t| match t as i32 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        });
        assert_eq!(ramsey_p1(&s), vec![1.0, 0.0, 0.5]);
        assert_eq!(ramsey_p2(&s), vec![0.5, 0.5, 1.0]);
    }

    #[test]
    fn round_trip() {
        let s = series(time_grid(10.0, 50), |t| Complex64::from_polar(0.9 * (-0.01 * t).exp(), 1.3 * t));
        let back = reconstruct(&ramsey_p1(&s), &ramsey_p2(&s)).unwrap();
        for (a, b) in back.iter().zip(&s.values) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(reconstruct(&[0.1], &[]).is_err());
    }

    #[test]
    fn constant_modulus_has_dc_only() {
        let s = series(time_grid(20.0, 256), |t| Complex64::from_polar(1.0, 0.4 * t));
        let spec = spectrum(&s, Window::None).unwrap();
        assert_relative_eq!(spec.magnitudes[0], 256.0, max_relative = 1e-12);
        assert!(spec.magnitudes[1..].iter().all(|m| *m < 1e-9));
        assert!(revival_times(&s, 0.99).unwrap().is_empty());
    }

    #[test]
    fn sinusoid_calibration() {
        let n = 1024;
        let dt = 0.05;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let w0 = 2.0 * std::f64::consts::PI * 37.0 / (n as f64 * dt);
        let s = series(times, |t| Complex64::new(0.5 + 0.3 * (w0 * t).cos(), 0.0));
        for window in [Window::None, Window::Hann] {
            let spec = spectrum(&s, window).unwrap();
            assert_relative_eq!(spec.dominant_peak().unwrap(), w0, max_relative = 1e-12);
            assert_relative_eq!(spec.power(), signal_power(&s, window), max_relative = 1e-8);
        }
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let s = series(vec![0.0, 1.0, 2.5], |_| Complex64::new(1.0, 0.0));
        assert!(matches!(spectrum(&s, Window::None), Err(Error::Invalid(_))));
    }

    #[test]
    fn revivals_of_periodic_signal() {
        let s = series(time_grid(30.0, 3001), |t| Complex64::new((0.5 + 0.5 * (t).cos()).max(0.0), 0.0));
        let r = revival_times(&s, 0.5).unwrap();
        assert_eq!(r.len(), 4);
        for (k, t) in r.iter().enumerate() {
            assert!((t - 2.0 * std::f64::consts::PI * (k + 1) as f64).abs() < 0.011);
        }
        assert!(revival_times(&s, 1.0).is_err());
    }
}
