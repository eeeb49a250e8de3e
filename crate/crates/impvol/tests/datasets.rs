use impvol::datasets::{build, build_dataset, read_csv, write_csv, BenchmarkCase, DatasetName, DatasetSpec};
use impvol::oracle::{black_price_dd, iv_reference, ulp_error};

/// Case counts of the published datasets.
const PUBLISHED: [(DatasetName, usize); 8] = [
    (DatasetName::Cly3d, 51321),
    (DatasetName::Cly20, 1600),
    (DatasetName::Cly80, 1600),
    (DatasetName::Jaeckel, 5182),
    (DatasetName::Market, 7151),
    (DatasetName::Corners, 278),
    (DatasetName::Stress, 1270),
    (DatasetName::HighVol, 149),
];

#[test]
fn counts_are_close_to_published() {
    for (name, n) in PUBLISHED {
        let got = build(name).len();
        let ratio = got as f64 / n as f64;
        assert!((0.8..=1.2).contains(&ratio), "{name}: {got} vs {n}");
    }
    assert_eq!(build(DatasetName::Cly20).len(), 1600);
    assert_eq!(build(DatasetName::Cly80).len(), 1600);
}

#[test]
fn builds_are_bit_identical() {
    for name in DatasetName::ALL {
        let a = build(name);
        let b = build_dataset(&DatasetSpec::new(name));
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(
                (p.x.to_bits(), p.t.to_bits(), p.v_ref.to_bits(), p.c_ref.to_bits()),
                (q.x.to_bits(), q.t.to_bits(), q.v_ref.to_bits(), q.c_ref.to_bits())
            );
        }
    }
}

#[test]
fn cases_respect_dataset_ranges() {
    for name in DatasetName::ALL {
        let cases = build(name);
        for c in &cases {
            assert_eq!(c.dataset, name);
            assert!(c.x <= 0.0 && c.v_ref > 0.0 && c.t > 0.0);
            assert!(c.c_ref > 0.0 && c.c_ref < 1.0);
            assert_eq!(c.c_ref, black_price_dd(c.x, c.v_ref).to_f64());
        }
        for w in cases.windows(2) {
            let key = |c: &BenchmarkCase| (c.x, c.v_ref, c.t);
            assert!(key(&w[0]) <= key(&w[1]), "{name} not sorted");
        }
    }
}

#[test]
fn cly3d_filter_and_ranges() {
    for c in build(DatasetName::Cly3d) {
        assert!(c.c_ref >= 1e-20);
        let strike = 100.0 * (-c.x).exp();
        assert!((105.0 - 1e-9..=800.0 + 1e-9).contains(&strike));
        assert!((0.01 - 1e-12..=2.0 + 1e-12).contains(&c.t));
        let sigma = c.v_ref / c.t.sqrt();
        assert!((0.01 - 1e-12..=0.99 + 1e-12).contains(&sigma));
    }
}

#[test]
fn cly20_ranges() {
    for c in build(DatasetName::Cly20) {
        assert!((c.v_ref / c.t.sqrt() - 0.2).abs() < 1e-15);
        let strike = 100.0 * (-c.x).exp();
        assert!((105.0 - 1e-9..=180.0 + 1e-9).contains(&strike));
    }
}

#[test]
fn highvol_ranges() {
    for c in build(DatasetName::HighVol) {
        assert!(c.x <= -3.0);
        assert!(c.c_ref > 0.05 && c.c_ref < 0.95);
        assert!(c.v_ref / c.t.sqrt() <= 2.5 + 1e-12);
    }
}

#[test]
fn csv_round_trip_is_exact() {
    for name in [DatasetName::Corners, DatasetName::Stress] {
        let cases = build(name);
        let mut buf = Vec::new();
        write_csv(&cases, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dataset,x,T,v_ref,c_ref\n"));
        assert_eq!(text.lines().count(), cases.len() + 1);
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cases);
        // writing again reproduces the same bytes
        let mut again = Vec::new();
        write_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }
}

#[test]
fn csv_reader_rejects_bad_input() {
    assert!(read_csv("a,b,c\n".as_bytes()).is_err());
    assert!(read_csv("dataset,x,T,v_ref,c_ref\nCLY20,-0.1,1,0.2,1.5\n".as_bytes()).is_err());
    assert!(read_csv("dataset,x,T,v_ref,c_ref\nNOPE,-0.1,1,0.2,0.1\n".as_bytes()).is_err());
    assert!(read_csv("dataset,x,T,v_ref,c_ref\nCLY20,-0.1,1,abc,0.1\n".as_bytes()).is_err());
    let ok = read_csv("dataset,x,T,v_ref,c_ref\nCLY20,-0.1,1,0.2,0.01\n".as_bytes()).unwrap();
    assert_eq!(ok[0].dataset, DatasetName::Cly20);
}

/// Rounding `c_ref` to a double moves its root by `ulp(c) / (2 c'(v))`, which
/// exceeds one ulp of `v` wherever the price is flat in `v`.
#[test]
fn reference_prices_invert_to_reference_volatilities() {
    for name in DatasetName::ALL {
        let cases = build(name);
        let stride = (cases.len() / 1500).max(1);
        for c in cases.iter().step_by(stride) {
            let back = iv_reference(c.x, c.c_ref).unwrap();
            let slope = (black_price_dd(c.x, c.v_ref.next_up()) - black_price_dd(c.x, c.v_ref)).to_f64();
            let spread = if slope > 0.0 { 0.5 * (c.c_ref.next_up() - c.c_ref) / slope } else { f64::INFINITY };
            let e = ulp_error(back, c.v_ref);
            assert!(e <= 1.0 + spread, "{name} x = {}, v = {}: {e} ulp", c.x, c.v_ref);
        }
    }
}
