use std::ffi::CStr;
use std::ptr;

use locspec_ffi::*;

fn last_error() -> String {
    let p = ls_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn line_data() -> *mut LsData {
    let values = [0.0, 0.1, 5.0];
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { ls_data_new(values.as_ptr(), 3, 1, &mut data) },
        LsStatus::Ok
    );
    data
}

#[test]
fn search_round_trip() {
    let data = line_data();
    assert_eq!(unsafe { ls_data_rows(data) }, 3);
    let mut params = ls_params_default();
    params.epsilon = 1.0;
    params.k = 2;
    params.l = 3;
    let mut result = ptr::null_mut();
    assert_eq!(
        unsafe { ls_search(data, 0, &params, &mut result) },
        LsStatus::Ok
    );
    unsafe {
        assert_eq!(ls_result_len(result), 3);
        assert_eq!(ls_result_epsilon(result), 1.0);
        assert!(ls_result_residual(result) < 1e-12);
        let mut order = [0usize; 2];
        assert_eq!(ls_result_order(result, order.as_mut_ptr(), 2), LsStatus::Ok);
        assert_eq!(order, [1, 2]);
        let mut scores = [0.0; 3];
        assert_eq!(
            ls_result_scores(result, scores.as_mut_ptr(), 3),
            LsStatus::Ok
        );
        assert!(scores[1] > scores[2]);
        let mut rank = 0;
        assert_eq!(ls_result_rank_of(result, 2, &mut rank), LsStatus::Ok);
        assert_eq!(rank, 2);
        assert_eq!(
            ls_result_rank_of(result, 0, &mut rank),
            LsStatus::InvalidArgument
        );
        assert_eq!(
            ls_result_rank_of(result, 7, &mut rank),
            LsStatus::OutOfRange
        );
        assert_eq!(ls_result_eigenvalue_count(result), 3);
        let mut values = [0.0; 3];
        assert_eq!(
            ls_result_eigenvalues(result, values.as_mut_ptr(), 3),
            LsStatus::Ok
        );
        assert!((values[0] - 1.0).abs() < 1e-12);
        assert_eq!(ls_nn_rank(data, 0, 1, &mut rank), LsStatus::Ok);
        assert_eq!(rank, 1);
        ls_result_free(result);
        ls_data_free(data);
    }
}

#[test]
fn errors_are_reported() {
    let data = line_data();
    let mut params = ls_params_default();
    params.l = 3;
    params.k = 4;
    let mut result = ptr::null_mut();
    unsafe {
        assert_eq!(
            ls_search(data, 0, &params, &mut result),
            LsStatus::InvalidArgument
        );
        assert!(result.is_null());
        assert!(last_error().contains("k must be"), "{}", last_error());
        params.k = 1;
        assert_eq!(
            ls_search(data, 7, &params, &mut result),
            LsStatus::OutOfRange
        );
        assert_eq!(
            ls_search(ptr::null(), 0, &params, &mut result),
            LsStatus::NullPointer
        );
        assert!(last_error().contains("data"));

        assert_eq!(ls_search(data, 0, &params, &mut result), LsStatus::Ok);
        let mut small = [0.0; 2];
        assert_eq!(
            ls_result_scores(result, small.as_mut_ptr(), 2),
            LsStatus::InvalidArgument
        );
        ls_result_free(result);
        ls_data_free(data);

        let nan = [f64::NAN, 1.0];
        let mut bad = ptr::null_mut();
        assert_eq!(
            ls_data_new(nan.as_ptr(), 2, 1, &mut bad),
            LsStatus::InvalidArgument
        );
        assert_eq!(
            ls_data_new(nan.as_ptr(), usize::MAX, 2, &mut bad),
            LsStatus::InvalidArgument
        );
        assert!(bad.is_null());
        ls_data_free(ptr::null_mut());
        ls_result_free(ptr::null_mut());
        assert_eq!(ls_result_len(ptr::null()), 0);
        assert!(ls_result_epsilon(ptr::null()).is_nan());
    }
}

#[test]
fn pgm_patches() {
    let mut pgm = b"P5\n4 5\n255\n".to_vec();
    pgm.extend((0..20u8).map(|v| v * 9));
    let (mut h, mut w) = (0, 0);
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(
            ls_data_from_pgm_patches(pgm.as_ptr(), pgm.len(), &mut h, &mut w, &mut data),
            LsStatus::Ok
        );
        assert_eq!((h, w), (3, 2));
        assert_eq!(ls_data_rows(data), 6);
        ls_data_free(data);
        let truncated = &pgm[..15];
        assert_eq!(
            ls_data_from_pgm_patches(
                truncated.as_ptr(),
                truncated.len(),
                &mut h,
                &mut w,
                &mut data
            ),
            LsStatus::Parse
        );
    }
}

#[test]
fn version_and_defaults() {
    let v = unsafe { CStr::from_ptr(ls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let p = ls_params_default();
    assert_eq!(
        (p.k, p.l, p.oversampling, p.power_iterations),
        (3, 15, 10, 10)
    );
    assert_eq!(p.mode, LsMode::Magnitude);
    assert_eq!(p.method, LsMethod::Auto);
}
