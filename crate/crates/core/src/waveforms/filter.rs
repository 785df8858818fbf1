use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::WaveformParams;
use crate::error::{Error, Result};
use crate::primitives::UnitaryFft;

/// Circular GFDM prototype filter and its decimated frequency response.
#[derive(Debug, Clone)]
pub struct PrototypeFilter {
    m: usize,
    delta: usize,
    g: Vec<f64>,
    g_delta: Vec<f64>,
    g_delta_freq: Vec<Complex64>,
    gain: f64,
    response: Vec<Complex64>,
}

impl PrototypeFilter {
    /// Time-domain pulse over one period `N = M * K`, unit energy.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `g` decimated by `K / delta`, length `M * delta`.
    pub fn g_delta(&self) -> &[f64] {
        &self.g_delta
    }

    /// Unitary `M*delta`-point DFT of [`g_delta`](Self::g_delta).
    pub fn g_delta_freq(&self) -> &[Complex64] {
        &self.g_delta_freq
    }

    /// Factor `sqrt(N / delta)` that makes the frequency-domain modulator
    /// match the time-domain one and preserve symbol energy.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Diagonal of `G^(delta)` as used by the modem: `gain * g_delta_freq`.
    ///
    /// Entry `i` weights frequency offset `i` (for `i < M*delta/2`) or
    /// `i - M*delta` (upper half) from the subcarrier centre.
    pub fn response(&self) -> &[Complex64] {
        &self.response
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> usize {
        self.delta
    }
}

/// Raised-cosine spectrum at `nu` (cycles per symbol).
pub fn raised_cosine_spectrum(nu: f64, alpha: f64) -> f64 {
    let nu = nu.abs();
    let lo = (1.0 - alpha) / 2.0;
    let hi = (1.0 + alpha) / 2.0;
    if nu <= lo {
        1.0
    } else if nu >= hi {
        0.0
    } else {
        0.5 * (1.0 + (PI / alpha * (nu - lo)).cos())
    }
}

/// Closed-form root-raised-cosine pulse at `t` symbol periods.
///
/// The removable singularities at `t = 0` and `|t| = 1/(4 alpha)` are
/// evaluated by their limits.
pub fn rrc_pulse(t: f64, alpha: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if t.abs() < EPS {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    if ((4.0 * alpha * t).abs() - 1.0).abs() < EPS {
        let x = PI / (4.0 * alpha);
        return alpha * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * x.sin() + (1.0 - 2.0 / PI) * x.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

/// Periodized RRC prototype on the `N`-grid with unit energy.
///
/// The pulse is synthesized from its spectrum: the `N`-point DFT of the
/// infinitely periodized, sampled closed form equals the RRC spectrum sampled
/// at `nu = f / M`, which is exactly zero outside `|nu| < (1 + alpha) / 2`.
pub fn rrc_prototype(params: &WaveformParams) -> Result<PrototypeFilter> {
    let alpha = params.alpha;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("roll-off {alpha} outside (0, 1]")));
    }
    let (m, k, delta) = (params.m, params.k, params.delta);
    let n = m * k;
    if delta == 0 || k % delta != 0 {
        return Err(Error::Parameter(format!("delta={delta} must divide K={k}")));
    }

    let mut spec: Vec<Complex64> = (0..n)
        .map(|f| {
            let signed = if 2 * f >= n { f as f64 - n as f64 } else { f as f64 };
            Complex64::new(raised_cosine_spectrum(signed / m as f64, alpha).sqrt(), 0.0)
        })
        .collect();
    UnitaryFft::new(n).inverse_inplace(&mut spec);
    let mut g: Vec<f64> = spec.iter().map(|z| z.re).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.iter_mut().for_each(|x| *x /= norm);

    let md = m * delta;
    let step = k / delta;
    let g_delta: Vec<f64> = (0..md).map(|i| g[i * step]).collect();
    let g_delta_freq =
        UnitaryFft::new(md).forward(&g_delta.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
    let gain = (n as f64 / delta as f64).sqrt();
    let response = g_delta_freq.iter().map(|z| z * gain).collect();

    Ok(PrototypeFilter {
        m,
        delta,
        g,
        g_delta,
        g_delta_freq,
        gain,
        response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveforms::System;

    fn params(k: usize, m: usize, alpha: f64) -> WaveformParams {
        WaveformParams::new(System::Gfdm, k, m, alpha, 4, 8).unwrap()
    }

    fn spectrum_n(f: &PrototypeFilter) -> Vec<Complex64> {
        let x: Vec<Complex64> = f.g().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        UnitaryFft::new(x.len()).forward(&x)
    }

    #[test]
    fn unit_energy() {
        for alpha in [0.1, 0.2, 0.5, 1.0] {
            let f = rrc_prototype(&params(128, 5, alpha)).unwrap();
            let e: f64 = f.g().iter().map(|x| x * x).sum();
            assert!((e - 1.0).abs() < 1e-12, "alpha={alpha}");
        }
    }

    #[test]
    fn support_fits_delta_window() {
        let p = params(128, 5, 0.5);
        let f = rrc_prototype(&p).unwrap();
        let spec = spectrum_n(&f);
        let n = p.n();
        let nonzero: Vec<usize> = (0..n).filter(|&i| spec[i].norm() > 1e-6).collect();
        assert!(nonzero.len() <= p.m * p.delta);
        for i in nonzero {
            let signed = if 2 * i >= n { i as i64 - n as i64 } else { i as i64 };
            assert!(signed.abs() < p.m as i64, "bin {signed} outside the delta window");
        }
        let big = f.g_delta_freq().iter().filter(|z| z.norm() > 1e-6).count();
        assert!(big <= p.m * p.delta);
    }

    #[test]
    fn decimated_response_aliases_exactly() {
        // W_{M delta} g^delta = sqrt(delta/K) * (W_N g) on the centred window
        let p = params(16, 5, 0.3);
        let f = rrc_prototype(&p).unwrap();
        let spec = spectrum_n(&f);
        let n = p.n();
        let md = p.m * p.delta;
        for i in 0..md {
            let off = if i < md / 2 { i as i64 } else { i as i64 - md as i64 };
            let bin = off.rem_euclid(n as i64) as usize;
            let want = spec[bin] * (p.delta as f64 / p.k as f64).sqrt();
            assert!((f.g_delta_freq()[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn nyquist_power_complementary() {
        let p = params(128, 5, 0.5);
        let f = rrc_prototype(&p).unwrap();
        let r = f.response();
        for i in 0..p.m {
            let s = r[i].norm_sqr() + r[i + p.m].norm_sqr();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(r[p.m].norm() < 1e-12);
        assert!((r[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smaller_rolloff_has_less_out_of_band_energy() {
        let oob = |alpha: f64| {
            let p = params(128, 5, alpha);
            let spec = spectrum_n(&rrc_prototype(&p).unwrap());
            let n = p.n();
            (0..n)
                .filter(|&i| {
                    let signed = if 2 * i >= n { i as f64 - n as f64 } else { i as f64 };
                    (signed / p.m as f64).abs() > 0.5
                })
                .map(|i| spec[i].norm_sqr())
                .sum::<f64>()
        };
        let narrow = oob(0.1);
        let wide = oob(0.5);
        assert!(narrow < wide, "{narrow} vs {wide}");
    }

    #[test]
    fn matches_periodized_closed_form() {
        // independent route: sum shifted copies of the closed-form pulse
        let p = params(16, 5, 0.5);
        let f = rrc_prototype(&p).unwrap();
        let n = p.n() as f64;
        let k = p.k as f64;
        let periods = 4000;
        let mut g: Vec<f64> = (0..p.n())
            .map(|i| {
                (-periods..=periods)
                    .map(|r| rrc_pulse((i as f64 + r as f64 * n) / k, p.alpha))
                    .sum::<f64>()
            })
            .collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        g.iter_mut().for_each(|x| *x /= norm);
        let err = g.iter().zip(f.g()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "max deviation {err}");
    }

    #[test]
    fn closed_form_limits_are_continuous() {
        for alpha in [0.1, 0.25, 0.5] {
            let t0 = 1.0 / (4.0 * alpha);
            let near = rrc_pulse(t0 + 1e-6, alpha);
            assert!((rrc_pulse(t0, alpha) - near).abs() < 1e-4);
            assert!((rrc_pulse(0.0, alpha) - rrc_pulse(1e-6, alpha)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_invalid_rolloff() {
        let mut p = params(16, 5, 0.5);
        p.alpha = 0.0;
        assert!(matches!(rrc_prototype(&p), Err(Error::Parameter(_))));
    }
}
