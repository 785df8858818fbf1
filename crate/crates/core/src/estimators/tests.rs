use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::*;
use crate::channel::{
    approx_pilot_covariance, complex_normal, draw_channel_with, true_pilot_covariance, ChannelSpec, CovarianceKind,
    CovarianceMatrix, DelayModel,
};
use crate::rng::{trial_rng, Stream};
use crate::waveforms::{pilot_sequence, System, WaveformParams};

fn params() -> WaveformParams {
    WaveformParams::new(System::Gfdm, 128, 5, 0.5, 4, 8).unwrap()
}

fn ones(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); n]
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sq_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Pilot-domain observation of one channel draw.
fn observe(p: &WaveformParams, spec: &ChannelSpec, noise_var: f64, trial: u64) -> (Vec<Complex64>, PilotObservation) {
    let real = draw_channel_with(spec, p.grid_size(), &mut trial_rng(5, Stream::Channel, trial)).unwrap();
    let h: Vec<Complex64> = p.pilot_bins.iter().map(|&b| real.freq_response[b]).collect();
    let x = pilot_sequence(p.n_pilots(), 3);
    let mut rng = trial_rng(5, Stream::Noise, trial);
    let y = h
        .iter()
        .zip(&x)
        .map(|(hh, xx)| hh * xx + complex_normal(&mut rng) * noise_var.sqrt())
        .collect();
    (h, PilotObservation::new(y, x, noise_var).unwrap())
}

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    &a * a.adjoint() + DMatrix::identity(n, n) * Complex64::new(0.1, 0.0)
}

#[test]
fn estimator_labels_round_trip() {
    for k in EstimatorKind::ALL {
        assert_eq!(k.label().parse::<EstimatorKind>().unwrap(), k);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, format!("\"{}\"", k.label()));
    }
    assert_eq!("ALMMSE_BEM".parse::<EstimatorKind>().unwrap(), EstimatorKind::AlmmseBem);
    assert!("mmse".parse::<EstimatorKind>().is_err());
}

#[test]
fn observation_contract() {
    assert!(matches!(
        PilotObservation::new(ones(2), vec![Complex64::new(1.0, 0.0), Complex64::default()], 0.1),
        Err(Error::SingularPilot(1))
    ));
    assert!(PilotObservation::new(ones(2), vec![Complex64::new(2.0, 0.0); 2], 0.1).is_err());
    assert!(PilotObservation::new(ones(2), ones(3), 0.1).is_err());
    let o = PilotObservation::from_snr(ones(2), ones(2), 10.0).unwrap();
    assert!((o.noise_variance - 0.1).abs() < 1e-15);
}

#[test]
fn ls_inverts_pilots_exactly() {
    let h = vec![
        Complex64::new(0.3, -0.2),
        Complex64::new(-1.0, 0.5),
        Complex64::new(0.0, 2.0),
    ];
    let o = PilotObservation::new(h.clone(), ones(3), 0.0).unwrap();
    assert_eq!(ls_estimate(&o).unwrap().h_pilot, h);

    let x: Vec<Complex64> = (0..3).map(|i| Complex64::from_polar(1.0, 0.7 * i as f64)).collect();
    let y: Vec<Complex64> = h.iter().zip(&x).map(|(a, b)| a * b).collect();
    let o = PilotObservation::new(y, x, 0.0).unwrap();
    assert!(max_abs_diff(&ls_estimate(&o).unwrap().h_pilot, &h) < 1e-15);
}

#[test]
fn ls_error_equals_noise_variance_and_is_unbiased() {
    let p = params();
    let spec = ChannelSpec::reference(8).unwrap();
    let s2 = 0.05;
    let (mut err, mut bias) = (0.0, vec![Complex64::default(); 32]);
    let trials = 10_000;
    for t in 0..trials {
        let (h, o) = observe(&p, &spec, s2, t);
        let est = ls_estimate(&o).unwrap().h_pilot;
        err += sq_err(&est, &h) / 32.0;
        for (b, (e, hh)) in bias.iter_mut().zip(est.iter().zip(&h)) {
            *b += e - hh;
        }
    }
    let mse = err / trials as f64;
    assert!((mse - s2).abs() < 0.05 * s2, "{mse}");
    let worst = bias.iter().map(|b| b.norm() / trials as f64).fold(0.0, f64::max);
    assert!(worst < 4.0 * (s2 / trials as f64).sqrt(), "{worst}");
}

#[test]
fn ls_ensemble_covariance_matches_true_covariance() {
    let p = params();
    for model in [DelayModel::BandLimited, DelayModel::ExactFrequency] {
        let spec = ChannelSpec::reference(8).unwrap().with_delay_model(model);
        let r = true_pilot_covariance(&spec, &p).unwrap();
        let mut acc = DMatrix::<Complex64>::zeros(32, 32);
        let trials = 10_000;
        for t in 0..trials {
            let (_, o) = observe(&p, &spec, 0.0, t);
            let h = nalgebra::DVector::from_vec(ls_estimate(&o).unwrap().h_pilot);
            acc += &h * h.adjoint();
        }
        acc /= Complex64::new(trials as f64, 0.0);
        let worst = (&acc - r.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 0.05, "{model:?}: {worst}");
    }
}

#[test]
fn lmmse_limits() {
    let p = params();
    let spec = ChannelSpec::reference(8).unwrap();
    let r = true_pilot_covariance(&spec, &p).unwrap();
    // the multipath prior has rank <= 8, so the limit is taken on responses
    // the prior can produce
    for t in 0..10 {
        let (_, o) = observe(&p, &spec, 0.0, t);
        let o = PilotObservation::new(o.y_p, o.x_p, 1e-12).unwrap();
        let ls = ls_estimate(&o).unwrap().h_pilot;
        let lm = lmmse_estimate(&o, &r).unwrap().h_pilot;
        let rel = sq_err(&lm, &ls).sqrt() / ls.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(rel < 1e-6, "{rel}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let full_rank = CovarianceMatrix::new(random_psd(32, &mut rng), CovarianceKind::TruePdp).unwrap();
    let (_, o) = observe(&p, &spec, 1e-12, 0);
    let ls = ls_estimate(&o).unwrap().h_pilot;
    let lm = lmmse_estimate(&o, &full_rank).unwrap().h_pilot;
    let rel = sq_err(&lm, &ls).sqrt() / ls.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(rel < 1e-6, "{rel}");

    let eye = CovarianceMatrix::new(DMatrix::identity(4, 4), CovarianceKind::TruePdp).unwrap();
    let y = vec![
        Complex64::new(2.0, -4.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, 3.0),
        Complex64::new(-2.0, 0.0),
    ];
    let o = PilotObservation::from_snr(y.clone(), ones(4), 1.0).unwrap();
    let got = lmmse_estimate(&o, &eye).unwrap().h_pilot;
    let half: Vec<Complex64> = y.iter().map(|z| z / 2.0).collect();
    assert!(max_abs_diff(&got, &half) < 1e-14);
}

#[test]
fn ce_basis_structure() {
    let b = ce_basis(32, 18, 4, 128, GridKind::Pilot).unwrap();
    let m = b.matrix();
    assert!(m
        .column(0)
        .iter()
        .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    let gram = m.adjoint() * m;
    let defect = (gram - DMatrix::identity(18, 18) * Complex64::new(32.0, 0.0))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(defect < 1e-10, "{defect}");
    // integer delay 2 is column t=3 (index 2)
    for q in 0..32 {
        let h = Complex64::from_polar(1.0, -2.0 * PI * 4.0 * q as f64 * 2.0 / 128.0);
        assert!((m[(q, 2)] - h).norm() < 1e-12);
    }
    assert!(matches!(
        ce_basis(8, 9, 4, 128, GridKind::Pilot),
        Err(Error::InvalidDimension(_))
    ));
}

#[test]
fn lp_basis_structure() {
    let b = lp_basis(33, 5, 33, GridKind::Pilot).unwrap();
    let m = b.matrix();
    assert!(m.iter().all(|z| z.im == 0.0));
    for q in 0..33 {
        assert_eq!(m[(q, 0)].re, 1.0);
        assert!((m[(q, 1)].re - (-1.0 + 2.0 * q as f64 / 32.0)).abs() < 1e-15);
    }
    // Rodrigues oracle: (1/8) d^2/dq^2 (q^2 - 1)^2 = (12 q^2 - 4) / 8
    assert!((m[(16, 2)].re - (-0.5)).abs() < 1e-15);
    for q in [0usize, 7, 20] {
        let x = m[(q, 1)].re;
        assert!((m[(q, 2)].re - (12.0 * x * x - 4.0) / 8.0).abs() < 1e-13);
    }
    assert!(lp_basis(4, 5, 4, GridKind::Pilot).is_err());
}

#[test]
fn designs_share_pilot_rows_and_lp_is_orthonormal_real() {
    let p = params();
    for kind in [BasisKind::Ce, BasisKind::Lp] {
        let d = BemDesign::new(&p, 18, kind).unwrap();
        for (q, &b) in p.pilot_bins.iter().enumerate() {
            for t in 0..18 {
                assert_eq!(d.full[(b, t)], d.pilot.matrix()[(q, t)]);
            }
        }
    }
    let lp = BemDesign::new(&p, 18, BasisKind::Lp).unwrap();
    let m = lp.pilot.matrix();
    assert!(m.iter().all(|z| z.im == 0.0));
    let defect = (m.adjoint() * m - DMatrix::identity(18, 18))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(defect < 1e-10);
    assert!(lp.pilot.condition_number() < 1.0 + 1e-8);
}

#[test]
fn ls_bem_projection_cases() {
    let p = params();
    let d = BemDesign::new(&p, 18, BasisKind::Ce).unwrap();
    let b = &d.pilot;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a: Vec<Complex64> = (0..18).map(|_| complex_normal(&mut rng)).collect();
    let h = (b.matrix() * nalgebra::DVector::from_vec(a.clone()))
        .as_slice()
        .to_vec();
    let o = PilotObservation::new(h.clone(), ones(32), 0.0).unwrap();
    let est = ls_bem_estimate(&o, b).unwrap();
    assert!(max_abs_diff(&est.h_pilot, &h) < 1e-10);
    assert!(max_abs_diff(est.a_hat.as_ref().unwrap(), &a) < 1e-10);

    let full = ce_basis(32, 32, 4, 128, GridKind::Pilot).unwrap();
    let y: Vec<Complex64> = (0..32).map(|_| complex_normal(&mut rng)).collect();
    let o = PilotObservation::new(y.clone(), ones(32), 0.1).unwrap();
    assert!(max_abs_diff(&ls_bem_estimate(&o, &full).unwrap().h_pilot, &y) < 1e-12);
}

#[test]
fn ce_projection_residual_of_the_multipath_channel() {
    // The exact-fractional-delay channel has periodic-sinc tails over all 32
    // pilot-domain delays, so 18 functions leave a visible residual; the
    // band-limited channel has taps 0..8 only and is reproduced exactly.
    let p = params();
    let d = BemDesign::new(&p, 18, BasisKind::Ce).unwrap();
    let residual = |model| {
        let spec = ChannelSpec::reference(8).unwrap().with_delay_model(model);
        let (h, o) = observe(&p, &spec, 0.0, 3);
        let est = ls_bem_estimate(&o, &d.pilot).unwrap().h_pilot;
        sq_err(&est, &h).sqrt() / h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    assert!(residual(DelayModel::BandLimited) < 1e-10);
    let exact = residual(DelayModel::ExactFrequency);
    assert!(exact > 1e-3 && exact < 0.5, "{exact}");
}

#[test]
fn coefficient_covariance_cases() {
    let b = ce_basis(32, 6, 4, 128, GridKind::Pilot).unwrap();
    let bbh = b.matrix() * b.matrix().adjoint();
    let r = CovarianceMatrix::new(
        (&bbh + bbh.adjoint()) * Complex64::new(0.5, 0.0),
        CovarianceKind::TruePdp,
    )
    .unwrap();
    let ra = coefficient_covariance(&r, &b).unwrap();
    let defect = (ra - DMatrix::identity(6, 6))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(defect < 1e-12);

    let eye = CovarianceMatrix::new(DMatrix::identity(32, 32), CovarianceKind::TruePdp).unwrap();
    let ra = coefficient_covariance(&eye, &b).unwrap();
    let defect = (ra - DMatrix::identity(6, 6) / Complex64::new(32.0, 0.0))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(defect < 1e-14);

    let approx = approx_pilot_covariance(8, 128, 4, 32).unwrap();
    let d = BemDesign::new(&params(), 18, BasisKind::Lp).unwrap();
    let ra = coefficient_covariance(&approx, &d.pilot).unwrap();
    assert_eq!(ra.clone(), ra.adjoint());
    assert!(ra.symmetric_eigenvalues().min() >= -1e-12);
}

#[test]
fn primal_and_dual_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let bm = DMatrix::from_fn(8, 4, |_, _| complex_normal(&mut rng));
        let b = BasisMatrix::new(bm, BasisKind::Ce, GridKind::Pilot).unwrap();
        let ra = random_psd(4, &mut rng);
        let y: Vec<Complex64> = (0..8).map(|_| complex_normal(&mut rng)).collect();
        let x: Vec<Complex64> = (0..8)
            .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 6.0))
            .collect();
        let o = PilotObservation::new(y, x, 0.3).unwrap();
        let dual = lmmse_bem_estimate(&o, &b, &ra).unwrap();
        let primal = lmmse_bem_primal(&o, &b, &ra).unwrap();
        assert!(max_abs_diff(dual.a_hat.as_ref().unwrap(), primal.a_hat.as_ref().unwrap()) < 1e-10);
    }
}

#[test]
fn lmmse_bem_shrinkage_and_limits() {
    let b = ce_basis(32, 18, 4, 128, GridKind::Pilot).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y: Vec<Complex64> = (0..32).map(|_| complex_normal(&mut rng)).collect();
    let s2 = 0.7;
    let o = PilotObservation::new(y.clone(), ones(32), s2).unwrap();
    let a = lmmse_bem_estimate(&o, &b, &DMatrix::identity(18, 18))
        .unwrap()
        .a_hat
        .unwrap();
    let bh_y = b.matrix().adjoint() * nalgebra::DVector::from_vec(y.clone());
    let want: Vec<Complex64> = bh_y.iter().map(|z| z / (32.0 + s2)).collect();
    assert!(max_abs_diff(&a, &want) < 1e-12);

    let ra = random_psd(18, &mut rng);
    let o = PilotObservation::new(y.clone(), ones(32), 1e-12).unwrap();
    let lm = lmmse_bem_estimate(&o, &b, &ra).unwrap().h_pilot;
    let ls = ls_bem_estimate(&o, &b).unwrap().h_pilot;
    let rel = sq_err(&lm, &ls).sqrt() / ls.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(rel < 1e-6, "{rel}");
}

#[test]
fn singular_prior_without_noise_falls_back_to_ls_bem() {
    let d = BemDesign::new(&params(), 18, BasisKind::Ce).unwrap();
    let approx = approx_pilot_covariance(8, 128, 4, 32).unwrap();
    let ra = coefficient_covariance(&approx, &d.pilot).unwrap();
    let f = BemLmmseFilter::new(&d.pilot, &ra, 0.0).unwrap();
    assert!(f.is_fallback());
    assert!(!BemLmmseFilter::new(&d.pilot, &ra, 0.01).unwrap().is_fallback());
}

#[test]
fn almmse_requires_approximated_covariance() {
    let p = params();
    let d = BemDesign::new(&p, 18, BasisKind::Ce).unwrap();
    let r = true_pilot_covariance(&ChannelSpec::reference(8).unwrap(), &p).unwrap();
    let o = PilotObservation::new(ones(32), ones(32), 0.1).unwrap();
    assert!(matches!(almmse_bem_estimate(&o, &d.pilot, &r), Err(Error::Contract(_))));
}

#[test]
fn flat_channel_stays_flat() {
    let p = params();
    let d = BemDesign::new(&p, 18, BasisKind::Ce).unwrap();
    let approx = approx_pilot_covariance(8, 128, 4, 32).unwrap();
    let c = Complex64::new(0.6, -0.3);
    let o = PilotObservation::new(vec![c; 32], ones(32), 0.01).unwrap();
    let est = almmse_bem_estimate(&o, &d.pilot, &approx).unwrap().h_pilot;
    let mean: Complex64 = est.iter().sum::<Complex64>() / 32.0;
    assert!(max_abs_diff(&est, &vec![mean; 32]) < 1e-10);
    assert!((mean - c).norm() < 0.01 * c.norm());
}

#[test]
fn full_grid_interpolation() {
    let p = params();
    let bank_design = BemDesign::new(&p, 18, BasisKind::Ce).unwrap();
    let c = Complex64::new(0.2, 0.9);
    let ls = ls_estimate(&PilotObservation::new(vec![c; 32], ones(32), 0.0).unwrap()).unwrap();
    let full = interpolate_full_grid(&ls, &p, None, 8).unwrap();
    assert!(full.iter().all(|z| (z - c).norm() < 1e-10));

    let spec = ChannelSpec::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.6, 0.3], 8)
        .unwrap()
        .with_delay_model(DelayModel::ExactFrequency);
    let real = draw_channel_with(&spec, p.grid_size(), &mut trial_rng(1, Stream::Channel, 0)).unwrap();
    let h: Vec<Complex64> = p.pilot_bins.iter().map(|&b| real.freq_response[b]).collect();
    let ls = ls_estimate(&PilotObservation::new(h, ones(32), 0.0).unwrap()).unwrap();
    for taps in [8, 32] {
        let full = interpolate_full_grid(&ls, &p, None, taps).unwrap();
        assert!(max_abs_diff(&full, &real.freq_response) < 1e-10);
    }

    let o = PilotObservation::new(ls.h_pilot.clone(), ones(32), 0.0).unwrap();
    let bem = ls_bem_estimate(&o, &bank_design.pilot).unwrap();
    let full = interpolate_full_grid(&bem, &p, Some(&bank_design), 8).unwrap();
    for (q, &b) in p.pilot_bins.iter().enumerate() {
        assert_eq!(full[b], bem.h_pilot[q]);
    }
    assert!(interpolate_full_grid(&bem, &p, None, 8).is_err());
}

#[test]
fn runtime_paths_touch_only_precomputed_factors() {
    let p = params();
    let r = true_pilot_covariance(&ChannelSpec::reference(8).unwrap(), &p).unwrap();
    let bank = EstimatorBank::new(&p, BasisKind::Ce, 18, 8, 0.05, &r, &EstimatorKind::ALL).unwrap();
    let (_, o) = observe(&p, &ChannelSpec::reference(8).unwrap(), 0.05, 0);
    let (n_p, n_a) = (32u64, 18u64);
    ops::take();
    bank.estimate(EstimatorKind::Ls, &o).unwrap();
    assert_eq!(ops::take(), n_p);
    for kind in [EstimatorKind::LsBem, EstimatorKind::LmmseBem, EstimatorKind::AlmmseBem] {
        bank.estimate(kind, &o).unwrap();
        let used = ops::take();
        assert!(used <= 2 * n_p * n_a + n_p, "{kind:?}: {used}");
    }
    bank.estimate(EstimatorKind::Lmmse, &o).unwrap();
    assert!(ops::take() <= n_p * n_p + n_p);
}

#[test]
fn bank_matches_free_functions() {
    let p = params();
    let spec = ChannelSpec::reference(8).unwrap();
    let r = true_pilot_covariance(&spec, &p).unwrap();
    let bank = EstimatorBank::new(&p, BasisKind::Lp, 18, 8, 0.05, &r, &EstimatorKind::ALL).unwrap();
    let (_, o) = observe(&p, &spec, 0.05, 9);
    let b = &bank.design().pilot;
    let approx = approx_pilot_covariance(8, 128, 4, 32).unwrap();
    let pairs = [
        (
            bank.estimate(EstimatorKind::Lmmse, &o).unwrap(),
            lmmse_estimate(&o, &r).unwrap(),
        ),
        (
            bank.estimate(EstimatorKind::LsBem, &o).unwrap(),
            ls_bem_estimate(&o, b).unwrap(),
        ),
        (
            bank.estimate(EstimatorKind::AlmmseBem, &o).unwrap(),
            almmse_bem_estimate(&o, b, &approx).unwrap(),
        ),
        (
            bank.estimate(EstimatorKind::LmmseBem, &o).unwrap(),
            lmmse_bem_estimate(&o, b, &coefficient_covariance(&r, b).unwrap()).unwrap(),
        ),
    ];
    for (a, c) in pairs {
        assert!(max_abs_diff(&a.h_pilot, &c.h_pilot) < 1e-12);
    }
    let full = bank.estimate_full(EstimatorKind::Ls, &o).unwrap().h_full.unwrap();
    assert_eq!(full.len(), 640);
}

#[test]
fn mse_ordering_over_an_snr_range() {
    let p = params();
    let spec = ChannelSpec::reference(8).unwrap();
    let r = true_pilot_covariance(&spec, &p).unwrap();
    let order = [
        EstimatorKind::Lmmse,
        EstimatorKind::LmmseBem,
        EstimatorKind::AlmmseBem,
        EstimatorKind::LsBem,
        EstimatorKind::Ls,
    ];
    for snr_db in [0.0, 10.0, 20.0] {
        let s2 = 10f64.powf(-snr_db / 10.0);
        let bank = EstimatorBank::new(&p, BasisKind::Ce, 18, 8, s2, &r, &order).unwrap();
        let mut mse = [0.0; 5];
        let trials = 1000;
        for t in 0..trials {
            let (h, o) = observe(&p, &spec, s2, t);
            for (m, kind) in mse.iter_mut().zip(order) {
                *m += sq_err(&bank.estimate(kind, &o).unwrap().h_pilot, &h);
            }
        }
        for w in mse.windows(2) {
            assert!(w[0] <= w[1] * 1.03, "snr {snr_db}: {mse:?}");
        }
    }
}
