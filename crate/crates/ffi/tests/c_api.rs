use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hyperbt_ffi::*;

fn last_error() -> String {
    let p = hbt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn dataset(n: usize, games: &[(&[usize], &[usize], f64)]) -> *mut HbtDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(hbt_dataset_new(n, false, &mut ds), HbtStatus::Ok);
    for (w, l, wt) in games {
        assert_eq!(
            hbt_dataset_add_game(ds, w.as_ptr(), w.len(), l.as_ptr(), l.len(), *wt),
            HbtStatus::Ok
        );
    }
    ds
}

#[test]
fn fit_pairwise_closed_form() {
    unsafe {
        let ds = dataset(2, &[(&[0], &[1], 2.0), (&[1], &[0], 1.0)]);
        assert_eq!(hbt_dataset_num_players(ds), 2);
        assert_eq!(hbt_dataset_num_games(ds), 2);
        let mut res = ptr::null_mut();
        let cfg = hbt_fit_config_default();
        assert_eq!(
            hbt_fit(ds, HbtModel::Bt as i32, HbtRule::Newman as i32, &cfg, &mut res),
            HbtStatus::Ok
        );
        assert!(hbt_fit_result_converged(res));
        assert!(hbt_fit_result_sweeps(res) > 0);
        assert!(hbt_fit_result_final_delta(res) <= cfg.tolerance);
        let mut pi = [0.0; 2];
        assert_eq!(hbt_fit_result_strengths(res, pi.as_mut_ptr(), 2), HbtStatus::Ok);
        assert!((pi[0] - 2f64.sqrt()).abs() < 1e-8);
        assert!((pi[1] - 0.5f64.sqrt()).abs() < 1e-8);
        let mut s = [0.0; 2];
        assert_eq!(hbt_fit_result_log_strengths(res, s.as_mut_ptr(), 2), HbtStatus::Ok);
        assert!((s[0] - pi[0].ln()).abs() < 1e-15);

        let mut short = [0.0; 1];
        assert_eq!(
            hbt_fit_result_strengths(res, short.as_mut_ptr(), 1),
            HbtStatus::InvalidArgument
        );
        assert!(last_error().contains("expected 2"));
        hbt_fit_result_free(res);
        hbt_dataset_free(ds);
    }
}

#[test]
fn team_fit_with_default_config_and_rule() {
    unsafe {
        let ds = dataset(
            4,
            &[
                (&[0, 1], &[2, 3], 2.0),
                (&[2, 3], &[0, 1], 1.0),
                (&[0, 2], &[1, 3], 1.0),
                (&[1, 3], &[0, 2], 1.0),
                (&[0], &[1, 2, 3], 1.0),
                (&[1, 2, 3], &[0], 1.0),
                (&[0], &[1], 1.0),
                (&[1], &[2], 1.0),
                (&[2], &[3], 1.0),
                (&[3], &[0], 1.0),
            ],
        );
        for model in [HbtModel::Hbt as i32, HbtModel::Gbt as i32] {
            let mut res = ptr::null_mut();
            assert_eq!(
                hbt_fit(ds, model, HbtRule::Default as i32, ptr::null(), &mut res),
                HbtStatus::Ok
            );
            assert!(hbt_fit_result_converged(res));
            assert_eq!(hbt_fit_result_num_players(res), 4);
            let mut pi = [0.0; 4];
            assert_eq!(hbt_fit_result_strengths(res, pi.as_mut_ptr(), 4), HbtStatus::Ok);
            let mut ll = 0.0;
            assert_eq!(hbt_log_likelihood(ds, model, pi.as_ptr(), 4, &mut ll), HbtStatus::Ok);
            let ones = [1.0; 4];
            let mut ll_ones = 0.0;
            assert_eq!(
                hbt_log_likelihood(ds, model, ones.as_ptr(), 4, &mut ll_ones),
                HbtStatus::Ok
            );
            assert!(ll >= ll_ones);
            hbt_fit_result_free(res);
        }
        hbt_dataset_free(ds);
    }
}

#[test]
fn win_probabilities() {
    let pi = [2.0, 1.0, 3.0, 0.5];
    let mut p = 0.0;
    unsafe {
        let (i, j) = ([0usize, 1], [2usize, 3]);
        assert_eq!(
            hbt_win_prob(
                HbtModel::Hbt as i32,
                i.as_ptr(),
                2,
                j.as_ptr(),
                2,
                pi.as_ptr(),
                4,
                &mut p
            ),
            HbtStatus::Ok
        );
        assert!((p - 2.0 / (2.0 + 1.5)).abs() < 1e-15);
        assert_eq!(
            hbt_win_prob(
                HbtModel::Gbt as i32,
                i.as_ptr(),
                2,
                j.as_ptr(),
                2,
                pi.as_ptr(),
                4,
                &mut p
            ),
            HbtStatus::Ok
        );
        assert!((p - 3.0 / 6.5).abs() < 1e-15);
        let k = [4usize];
        let status = hbt_win_prob(
            HbtModel::Bt as i32,
            i.as_ptr(),
            1,
            k.as_ptr(),
            1,
            pi.as_ptr(),
            4,
            &mut p,
        );
        assert_eq!(status, HbtStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(hbt_dataset_new(0, false, &mut ds), HbtStatus::InvalidArgument);
        assert_eq!(hbt_dataset_new(3, false, ptr::null_mut()), HbtStatus::NullPointer);
        assert!(last_error().contains("out"));

        let ds = dataset(3, &[(&[0], &[1], 1.0), (&[1], &[0], 1.0), (&[2], &[0], 1.0)]);
        let (w, l) = ([0usize], [0usize]);
        assert_eq!(
            hbt_dataset_add_game(ds, w.as_ptr(), 1, l.as_ptr(), 1, 1.0),
            HbtStatus::InvalidArgument
        );
        assert_eq!(
            hbt_dataset_add_game(ds, w.as_ptr(), 1, [1usize].as_ptr(), 1, -1.0),
            HbtStatus::InvalidArgument
        );
        assert_eq!(
            hbt_dataset_add_game(ds, ptr::null(), 1, l.as_ptr(), 1, 1.0),
            HbtStatus::NullPointer
        );

        let mut res = ptr::null_mut();
        assert_eq!(
            hbt_fit(ds, HbtModel::Hbt as i32, 0, ptr::null(), &mut res),
            HbtStatus::Degenerate
        );
        assert!(res.is_null());
        assert!(last_error().contains("no losses"));
        assert_eq!(hbt_fit(ds, 9, 0, ptr::null(), &mut res), HbtStatus::InvalidArgument);
        assert_eq!(
            hbt_fit(ds, HbtModel::Hbt as i32, HbtRule::Zermelo as i32, ptr::null(), &mut res),
            HbtStatus::InvalidArgument
        );
        assert_eq!(
            hbt_fit(ptr::null(), 1, 0, ptr::null(), &mut res),
            HbtStatus::NullPointer
        );
        hbt_dataset_free(ds);

        hbt_dataset_free(ptr::null_mut());
        hbt_fit_result_free(ptr::null_mut());
        assert_eq!(hbt_dataset_num_players(ptr::null()), 0);
        assert!(!hbt_fit_result_converged(ptr::null()));
    }
}

#[test]
fn games_file_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(
        &path,
        "# comment\nalice,bob|carol,dan|2\ncarol|alice\nbob|dan\ndan|bob,alice\n",
    )
    .unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            hbt_dataset_from_games_file(c_path.as_ptr(), false, &mut ds),
            HbtStatus::Ok
        );
        assert_eq!(hbt_dataset_num_players(ds), 4);
        assert_eq!(hbt_dataset_num_games(ds), 4);
        let label = |i| {
            let p = hbt_dataset_player_label(ds, i);
            (!p.is_null()).then(|| CStr::from_ptr(p).to_str().unwrap().to_owned())
        };
        assert_eq!(label(0).as_deref(), Some("alice"));
        assert_eq!(label(3).as_deref(), Some("dan"));
        assert_eq!(label(4), None);
        hbt_dataset_free(ds);

        std::fs::write(&path, "alice|bob|zero\n").unwrap();
        let mut ds = ptr::null_mut();
        assert_eq!(
            hbt_dataset_from_games_file(c_path.as_ptr(), false, &mut ds),
            HbtStatus::Parse
        );
        assert!(last_error().contains("line 1"));
        let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
        assert_eq!(
            hbt_dataset_from_games_file(missing.as_ptr(), false, &mut ds),
            HbtStatus::Io
        );
    }
}

#[test]
fn synthetic_generation_is_seeded() {
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        let mut sa = [0.0; 10];
        let mut sb = [0.0; 10];
        assert_eq!(
            hbt_synthetic_generate(10, 500, 42, &mut a, sa.as_mut_ptr()),
            HbtStatus::Ok
        );
        assert_eq!(
            hbt_synthetic_generate(10, 500, 42, &mut b, sb.as_mut_ptr()),
            HbtStatus::Ok
        );
        assert_eq!(sa, sb);
        assert_eq!(hbt_dataset_num_games(a), 500);
        assert!(hbt_dataset_player_label(a, 0).is_null());
        let mut ra = ptr::null_mut();
        let mut rb = ptr::null_mut();
        assert_eq!(hbt_fit(a, HbtModel::Hbt as i32, 0, ptr::null(), &mut ra), HbtStatus::Ok);
        assert_eq!(hbt_fit(b, HbtModel::Hbt as i32, 0, ptr::null(), &mut rb), HbtStatus::Ok);
        let (mut pa, mut pb) = ([0.0; 10], [0.0; 10]);
        hbt_fit_result_strengths(ra, pa.as_mut_ptr(), 10);
        hbt_fit_result_strengths(rb, pb.as_mut_ptr(), 10);
        assert_eq!(pa, pb);
        hbt_fit_result_free(ra);
        hbt_fit_result_free(rb);
        hbt_dataset_free(a);
        hbt_dataset_free(b);

        let mut c = ptr::null_mut();
        assert_eq!(
            hbt_synthetic_generate(3, 10, 1, &mut c, ptr::null_mut()),
            HbtStatus::InvalidArgument
        );
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hyperbt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "hbt_dataset_new",
        "hbt_dataset_add_game",
        "hbt_fit",
        "hbt_fit_result_strengths",
        "hbt_last_error_message",
        "HBT_STATUS_DEGENERATE",
        "HBT_RULE_GBT_NEWMAN",
        "typedef struct HbtDataset HbtDataset",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
