use ivbench::slices::{slice_point, slices, write_slices_csv, DEFAULT_XS, ERROR_FLOOR};

#[test]
fn errors_settle_after_the_fast_step() {
    let rows = slices(&DEFAULT_XS, 0.01, 3.0, 120);
    assert!(rows.len() > 500);
    let settled = rows.iter().filter(|r| r.settles()).count();
    assert!(settled as f64 >= 0.99 * rows.len() as f64, "{settled} of {}", rows.len());
}

/// Away from points where rounding the price already costs more than
/// 1e-13 in `v`, the last stage reaches 1e-13.
#[test]
fn final_stage_reaches_the_rounding_floor() {
    let rows = slices(&DEFAULT_XS, 0.01, 3.0, 120);
    let mut limited = 0;
    for r in &rows {
        assert!(r.last() <= r.noise.max(1e-13), "x = {}, v = {}: {:e}", r.x, r.v_ref, r.last());
        limited += (r.noise > 1e-13) as usize;
    }
    assert!(limited < rows.len() / 50);
}

#[test]
fn near_atm_low_vol_corner_is_formula_limited() {
    let r = slice_point(-0.01, 0.01).unwrap();
    assert!(r.noise > 1e-14);
    assert!(r.last() <= r.noise.max(1e-13));
}

#[test]
fn errors_are_floored() {
    let rows = slices(&[-0.5], 0.2, 0.4, 30);
    assert!(rows.iter().all(|r| r.stages.iter().all(|&e| e >= ERROR_FLOOR)));
    assert!(rows.iter().any(|r| r.last() == ERROR_FLOOR));
}

#[test]
fn guarded_quotes_are_skipped() {
    // the price rounds into the upper branch
    assert!(slice_point(-0.01, 6.0).is_none());
    assert!(slice_point(-1.0, 0.5).is_some());
}

#[test]
fn csv_layout() {
    let rows = slices(&[-1.0], 0.1, 1.0, 5);
    let mut buf = Vec::new();
    write_slices_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,v_ref,branch,seed,fast,exact1,exact2,noise\n"));
    assert_eq!(text.lines().count(), rows.len() + 1);
}
