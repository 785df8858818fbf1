use std::ffi::CString;
use std::ptr;

use bemsim_ffi::*;

fn last_error() -> String {
    let n = unsafe { bemsim_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0u8; n + 1];
    unsafe { bemsim_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n);
    String::from_utf8(buf).unwrap()
}

fn small_config() -> *mut BemsimConfig {
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(bemsim_config_new(&mut cfg), BemsimStatus::Ok);
        assert_eq!(
            bemsim_config_set_frame(cfg, BemsimSystem::Gfdm, 64, 5, 4, 8, 0.5),
            BemsimStatus::Ok
        );
        assert_eq!(bemsim_config_set_basis(cfg, BemsimBasis::Ce, 10), BemsimStatus::Ok);
        let grid = [0.0, 10.0];
        assert_eq!(
            bemsim_config_set_ebn0_grid(cfg, grid.as_ptr(), grid.len()),
            BemsimStatus::Ok
        );
        assert_eq!(bemsim_config_set_run(cfg, 6, 2, 9, 1), BemsimStatus::Ok);
    }
    cfg
}

#[test]
fn mse_sweep_round_trip() {
    let cfg = small_config();
    unsafe {
        let kinds = [BemsimCurve::Ls, BemsimCurve::AlmmseBem];
        assert_eq!(
            bemsim_config_set_estimators(cfg, kinds.as_ptr(), kinds.len()),
            BemsimStatus::Ok
        );
        assert_eq!(bemsim_config_validate(cfg), BemsimStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(bemsim_run_mse(cfg, &mut report), BemsimStatus::Ok);
        let mut n = 0;
        assert_eq!(bemsim_report_cell_count(report, &mut n), BemsimStatus::Ok);
        assert_eq!(n, 4);
        let mut cell = std::mem::MaybeUninit::<BemsimCell>::uninit();
        assert_eq!(bemsim_report_cell(report, 3, cell.as_mut_ptr()), BemsimStatus::Ok);
        let cell = cell.assume_init();
        assert_eq!(cell.curve, BemsimCurve::AlmmseBem);
        assert_eq!(cell.ebn0_db, 10.0);
        assert_eq!(cell.trials, 6);
        assert!(cell.mse_db.is_finite() && cell.ber.is_nan());

        let mut bad = std::mem::MaybeUninit::<BemsimCell>::uninit();
        assert_eq!(
            bemsim_report_cell(report, 4, bad.as_mut_ptr()),
            BemsimStatus::InvalidArgument
        );
        assert!(last_error().contains("out of range"));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("r.csv").to_str().unwrap()).unwrap();
        assert_eq!(
            bemsim_report_write(report, path.as_ptr(), BemsimFormat::Csv),
            BemsimStatus::Ok
        );
        assert_eq!(
            std::fs::read_to_string(dir.path().join("r.csv"))
                .unwrap()
                .lines()
                .count(),
            5
        );
        let missing = CString::new(dir.path().join("no/r.csv").to_str().unwrap()).unwrap();
        assert_eq!(
            bemsim_report_write(report, missing.as_ptr(), BemsimFormat::Json),
            BemsimStatus::Io
        );
        assert!(last_error().contains("no/r.csv"));

        bemsim_report_free(report);
        bemsim_config_free(cfg);
    }
}

#[test]
fn ber_sweep_has_perfect_curve() {
    let cfg = small_config();
    unsafe {
        let kinds = [BemsimCurve::Ls];
        bemsim_config_set_estimators(cfg, kinds.as_ptr(), kinds.len());
        let mut report = ptr::null_mut();
        assert_eq!(bemsim_run_ber(cfg, &mut report), BemsimStatus::Ok);
        let mut cell = std::mem::MaybeUninit::<BemsimCell>::uninit();
        assert_eq!(bemsim_report_cell(report, 2, cell.as_mut_ptr()), BemsimStatus::Ok);
        let cell = cell.assume_init();
        assert_eq!(cell.curve, BemsimCurve::Perfect);
        assert!(cell.ber >= 0.0 && cell.ber <= 0.5);
        assert!(cell.mse_db.is_nan());
        bemsim_report_free(report);
        bemsim_config_free(cfg);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        assert_eq!(bemsim_config_validate(ptr::null()), BemsimStatus::NullPointer);
        assert_eq!(bemsim_config_new(ptr::null_mut()), BemsimStatus::NullPointer);

        let json = CString::new(r#"{"k": 128, "pilot_spacing": 3}"#).unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(bemsim_config_from_json(json.as_ptr(), &mut cfg), BemsimStatus::Ok);
        assert_eq!(bemsim_config_validate(cfg), BemsimStatus::Config);
        let mut report = ptr::null_mut();
        assert_eq!(bemsim_run_mse(cfg, &mut report), BemsimStatus::Config);
        assert!(report.is_null());
        assert!(!last_error().is_empty());
        bemsim_config_free(cfg);

        let bad = CString::new("{\"k\": ").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(bemsim_config_from_json(bad.as_ptr(), &mut cfg), BemsimStatus::Config);
        assert!(cfg.is_null());

        let cfg = small_config();
        let perfect = [BemsimCurve::Perfect];
        assert_eq!(
            bemsim_config_set_estimators(cfg, perfect.as_ptr(), 1),
            BemsimStatus::InvalidArgument
        );
        assert_eq!(bemsim_config_validate(cfg), BemsimStatus::Ok);
        assert!(last_error().is_empty());
        bemsim_config_free(cfg);
        bemsim_config_free(ptr::null_mut());
    }
}

#[test]
fn estimator_recovers_flat_channel() {
    let cfg = small_config();
    unsafe {
        for kind in [
            BemsimCurve::Ls,
            BemsimCurve::Lmmse,
            BemsimCurve::LsBem,
            BemsimCurve::LmmseBem,
            BemsimCurve::AlmmseBem,
        ] {
            let mut est = ptr::null_mut();
            assert_eq!(bemsim_estimator_new(cfg, kind, 300.0, &mut est), BemsimStatus::Ok);
            let (mut np, mut grid) = (0, 0);
            assert_eq!(bemsim_estimator_dims(est, &mut np, &mut grid), BemsimStatus::Ok);
            assert_eq!((np, grid), (16, 320));
            let h = BemsimComplex { re: 0.6, im: -0.8 };
            let x: Vec<BemsimComplex> = (0..np)
                .map(|i| {
                    if i % 2 == 0 {
                        BemsimComplex { re: 1.0, im: 0.0 }
                    } else {
                        BemsimComplex { re: 0.0, im: 1.0 }
                    }
                })
                .collect();
            let y: Vec<BemsimComplex> = x
                .iter()
                .map(|v| BemsimComplex {
                    re: h.re * v.re - h.im * v.im,
                    im: h.re * v.im + h.im * v.re,
                })
                .collect();
            let mut out = vec![BemsimComplex::default(); grid];
            assert_eq!(
                bemsim_estimator_run(est, y.as_ptr(), x.as_ptr(), np, out.as_mut_ptr(), grid),
                BemsimStatus::Ok
            );
            for v in &out {
                assert!(
                    (v.re - h.re).abs() < 1e-6 && (v.im - h.im).abs() < 1e-6,
                    "{kind:?}: {v:?}"
                );
            }
            assert_eq!(
                bemsim_estimator_run(est, y.as_ptr(), x.as_ptr(), np - 1, out.as_mut_ptr(), grid),
                BemsimStatus::InvalidArgument
            );
            let zeros = vec![BemsimComplex::default(); np];
            assert_eq!(
                bemsim_estimator_run(est, y.as_ptr(), zeros.as_ptr(), np, out.as_mut_ptr(), grid),
                BemsimStatus::InvalidArgument
            );
            bemsim_estimator_free(est);
        }
        let mut est = ptr::null_mut();
        assert_eq!(
            bemsim_estimator_new(cfg, BemsimCurve::Perfect, 10.0, &mut est),
            BemsimStatus::InvalidArgument
        );
        bemsim_config_free(cfg);
    }
}
