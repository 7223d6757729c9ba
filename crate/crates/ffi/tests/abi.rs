use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hedgefw_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hfw_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn generated(n: usize, p: usize, seed: u64) -> *mut HfwInstance {
    let mut inst = ptr::null_mut();
    let st = unsafe { hfw_instance_generate(n, p, 3, 0.1, HfwDesign::GaussianIid, 0.0, seed, &mut inst) };
    assert_eq!(st, HfwStatus::Ok, "{}", last_error());
    inst
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(hfw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn instance_round_trip() {
    let x = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    let y = [1.0, 2.0, 3.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(hfw_instance_new(x.as_ptr(), y.as_ptr(), 3, 2, &mut inst), HfwStatus::Ok);
        assert_eq!(hfw_instance_n(inst), 3);
        assert_eq!(hfw_instance_p(inst), 2);
        let mut back = [0.0; 3];
        assert_eq!(hfw_instance_y(inst, back.as_mut_ptr(), 3), HfwStatus::Ok);
        assert_eq!(back, y);
        let mut beta = [0.0; 2];
        assert_eq!(
            hfw_instance_true_beta(inst, beta.as_mut_ptr(), 2),
            HfwStatus::InvalidArgument
        );
        assert!(last_error().contains("ground truth"));
        hfw_instance_free(inst);
    }
}

#[test]
fn bad_inputs_map_to_codes() {
    let x = [1.0, f64::NAN];
    let y = [1.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(
            hfw_instance_new(x.as_ptr(), y.as_ptr(), 1, 2, &mut inst),
            HfwStatus::NonFinite
        );
        assert!(inst.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            hfw_instance_new(ptr::null(), y.as_ptr(), 1, 2, &mut inst),
            HfwStatus::NullPointer
        );
        assert_eq!(
            hfw_instance_new(x.as_ptr(), y.as_ptr(), 1, 2, ptr::null_mut()),
            HfwStatus::NonFinite
        );
        assert_eq!(hfw_instance_n(ptr::null()), 0);
        assert!(hfw_cv_best_lambda(ptr::null()).is_nan());

        let zeros = [0.0; 4];
        assert_eq!(
            hfw_instance_new(zeros.as_ptr(), zeros.as_ptr(), 2, 2, &mut inst),
            HfwStatus::Ok
        );
        let mut grid = [0.0; 5];
        assert_eq!(
            hfw_default_grid(inst, 5, grid.as_mut_ptr()),
            HfwStatus::DegenerateDesign
        );
        hfw_instance_free(inst);

        assert_eq!(
            hfw_instance_generate(10, 5, 6, 0.1, HfwDesign::GaussianIid, 0.0, 1, &mut inst),
            HfwStatus::InvalidArgument
        );
        assert_eq!(
            hfw_instance_generate(10, 5, 2, 0.1, HfwDesign::ToeplitzCorrelated, 1.5, 1, &mut inst),
            HfwStatus::InvalidArgument
        );
        hfw_instance_free(ptr::null_mut());
        hfw_result_free(ptr::null_mut());
        hfw_cv_free(ptr::null_mut());
    }
}

#[test]
fn panics_are_contained() {
    assert_eq!(__guarded_panic(), HfwStatus::Panic);
    assert!(last_error().contains("boom"));
}

#[test]
fn full_pipeline_matches_rust_api() {
    let inst = generated(60, 20, 7);
    unsafe {
        let (n, p) = (hfw_instance_n(inst), hfw_instance_p(inst));
        assert_eq!((n, p), (60, 20));
        let mut radii = vec![0.0; 8];
        assert_eq!(hfw_default_grid(inst, 8, radii.as_mut_ptr()), HfwStatus::Ok);
        assert!(radii.windows(2).all(|w| w[0] < w[1]));

        let mut res = ptr::null_mut();
        assert_eq!(hfw_run(inst, radii.as_ptr(), 8, 0.0, 2.0, &mut res), HfwStatus::Ok);
        assert_eq!(hfw_result_num_experts(res), 8);
        let expected_eta = (8.0 * 8f64.ln() / 60.0).sqrt();
        assert_eq!(hfw_result_eta(res), expected_eta);

        let mut w = vec![0.0; 8];
        assert_eq!(hfw_result_weights(res, w.as_mut_ptr(), 8), HfwStatus::Ok);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut lw = vec![0.0; 8];
        assert_eq!(hfw_result_log_weights(res, lw.as_mut_ptr(), 8), HfwStatus::Ok);
        let mut loss = vec![0.0; 8];
        assert_eq!(hfw_result_cumulative_loss(res, loss.as_mut_ptr(), 8), HfwStatus::Ok);
        for a in 0..8 {
            for b in 0..8 {
                if loss[a] < loss[b] {
                    assert!(lw[a] > lw[b]);
                }
            }
        }

        let mut agg = vec![0.0; p];
        assert_eq!(hfw_result_aggregate(res, agg.as_mut_ptr(), p), HfwStatus::Ok);
        let mut by_hand = vec![0.0; p];
        let mut it = vec![0.0; p];
        for g in 0..8 {
            assert_eq!(hfw_result_iterate(res, g, it.as_mut_ptr(), p), HfwStatus::Ok);
            assert!(it.iter().map(|v| v.abs()).sum::<f64>() <= radii[g] * (1.0 + 1e-9));
            for j in 0..p {
                by_hand[j] += w[g] * it[j];
            }
        }
        for j in 0..p {
            assert!((agg[j] - by_hand[j]).abs() < 1e-12);
        }
        assert_eq!(
            hfw_result_iterate(res, 8, it.as_mut_ptr(), p),
            HfwStatus::InvalidArgument
        );
        assert_eq!(
            hfw_result_aggregate(res, agg.as_mut_ptr(), p - 1),
            HfwStatus::DimensionMismatch
        );

        let mut sel = vec![0.0; p];
        let mut expert = usize::MAX;
        let mut dirac = true;
        assert_eq!(
            hfw_result_select(res, 0.01, sel.as_mut_ptr(), p, &mut expert, &mut dirac),
            HfwStatus::Ok
        );
        let best = (0..8).max_by(|&a, &b| lw[a].total_cmp(&lw[b]).then(b.cmp(&a))).unwrap();
        assert_eq!(expert, best);
        assert_eq!(dirac, w[best] >= 0.99);
        assert_eq!(
            hfw_result_select(res, 0.7, sel.as_mut_ptr(), p, ptr::null_mut(), ptr::null_mut()),
            HfwStatus::InvalidArgument
        );

        let mut cv = ptr::null_mut();
        assert_eq!(hfw_cv_lasso(inst, 20, 5, 7, &mut cv), HfwStatus::Ok);
        assert!(hfw_cv_best_lambda(cv) > 0.0);
        let mut cvb = vec![0.0; p];
        assert_eq!(hfw_cv_beta(cv, cvb.as_mut_ptr(), p), HfwStatus::Ok);

        let mut truth = vec![0.0; p];
        assert_eq!(hfw_instance_true_beta(inst, truth.as_mut_ptr(), p), HfwStatus::Ok);
        let mut err = f64::NAN;
        assert_eq!(hfw_prediction_error(inst, truth.as_ptr(), p, &mut err), HfwStatus::Ok);
        assert_eq!(err, 0.0);
        assert_eq!(hfw_prediction_error(inst, cvb.as_ptr(), p, &mut err), HfwStatus::Ok);
        assert!(err.is_finite() && err > 0.0);
        assert_eq!(last_error(), "");

        hfw_cv_free(cv);
        hfw_result_free(res);
        hfw_instance_free(inst);
    }
}

#[test]
fn same_seed_same_instance() {
    let a = generated(30, 10, 99);
    let b = generated(30, 10, 99);
    let (mut ya, mut yb) = (vec![0.0; 30], vec![0.0; 30]);
    unsafe {
        hfw_instance_y(a, ya.as_mut_ptr(), 30);
        hfw_instance_y(b, yb.as_mut_ptr(), 30);
        hfw_instance_free(a);
        hfw_instance_free(b);
    }
    assert_eq!(ya, yb);
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/hedgefw.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_path()).unwrap();
    for sym in [
        "HfwStatus hfw_instance_new(",
        "HfwStatus hfw_instance_generate(",
        "HfwStatus hfw_run(",
        "HfwStatus hfw_result_select(",
        "HfwStatus hfw_cv_lasso(",
        "HfwStatus hfw_prediction_error(",
        "const char *hfw_last_error_message(void);",
        "void hfw_instance_free(HfwInstance *inst);",
        "typedef struct HfwInstance HfwInstance;",
        "HFW_STATUS_OK = 0",
        "HFW_STATUS_PANIC = 8",
    ] {
        assert!(h.contains(sym), "header lacks `{sym}`");
    }
    assert!(!h.contains("__guarded_panic"));
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"hedgefw.h\"\nint main(void) { HfwInstance *i = 0; return hfw_instance_n(i) == 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
