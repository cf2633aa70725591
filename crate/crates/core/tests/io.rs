use awi_core::experiments::Scenario;
use awi_core::filter::{filter_diagnostics, solve_filter};
use awi_core::io::{
    meta_path, read_gather, read_geometry, read_medium, read_trace, report_csv, write_filter, write_gather,
    write_geometry, write_medium, write_report, write_trace, GatherMeta,
};
use awi_core::medium::VelocityGrid;
use awi_core::objectives::j_awi;
use awi_core::signal::{Trace, WaveletKind};
use awi_core::AwiError;

#[test]
fn trace_round_trip_keeps_nine_digits() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 1e-3 + 1.0 / 3.0).collect();
    let tr = Trace::new(samples, 2e-3, -0.05).unwrap();
    let path = dir.path().join("sub/trace.csv");
    write_trace(&path, &tr).unwrap();
    let back = read_trace(&path).unwrap();
    assert_eq!(back.samples().len(), 50);
    assert!((back.dt() - 2e-3).abs() < 1e-12);
    assert!((back.t0() + 0.05).abs() < 1e-12);
    for (a, b) in tr.samples().iter().zip(back.samples()) {
        assert!((a - b).abs() <= 1e-9 * a.abs());
    }
}

#[test]
fn medium_and_geometry_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = VelocityGrid::from_fn(7, 5, 25.0, [-10.0, 3.0], |p| 1500.0 + 0.5 * p[0] + 2.0 * p[1]).unwrap();
    let mp = dir.path().join("medium.csv");
    write_medium(&mp, &g).unwrap();
    let back = read_medium(&mp).unwrap();
    assert_eq!((back.nx, back.nz), (7, 5));
    assert_eq!(back.origin, [-10.0, 3.0]);
    for (a, b) in g.velocities().iter().zip(back.velocities()) {
        assert!((a - b).abs() < 1e-9 * a);
    }

    // A bare numeric first line is also accepted.
    let bare = dir.path().join("bare.csv");
    std::fs::write(&bare, "3,3,10,0,0\n1000,1100,1200\n1300,1400,1500\n1600,1700,1800\n").unwrap();
    let b = read_medium(&bare).unwrap();
    assert_eq!((b.nx, b.nz, b.spacing), (3, 3, 10.0));
    assert_eq!(b.velocities()[5], 1500.0);

    let scn = Scenario::constant_media().unwrap();
    let gp = dir.path().join("geometry.csv");
    write_geometry(&gp, &scn.geometry).unwrap();
    let geo = read_geometry(&gp).unwrap();
    assert_eq!(geo.pairs(), scn.geometry.pairs());
}

#[test]
fn gather_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let scn = Scenario::cycle_skip().unwrap();
    let pred = scn.predicted(0.5).unwrap();
    let meta = GatherMeta { axis: scn.axis(), wavelet: WaveletKind::Ricker, lambda: 0.5 };
    let path = dir.path().join("pred.csv");
    write_gather(&path, &pred, &meta).unwrap();
    assert!(meta_path(&path).exists());
    let (back, m) = read_gather(&path).unwrap();
    assert_eq!(m, meta);
    assert_eq!(back.len(), pred.len());
    for (_, a, b) in pred.zip(&back).unwrap() {
        let err = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let peak = a.samples().iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-9 * peak);
    }
}

#[test]
fn filter_and_report_files_carry_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let scn = Scenario::constant_media().unwrap();
    let (p, d) = scn.gathers(0.25).unwrap();
    let sigma = scn.default_r().unwrap() * 0.25;
    let (pt, dt) = (p.get(0).unwrap(), d.get(0).unwrap());
    let f = solve_filter(pt, dt, sigma).unwrap();
    let diag = filter_diagnostics(&f, pt, dt).unwrap();
    let fp = dir.path().join("filter.csv");
    write_filter(&fp, &f, &diag).unwrap();
    let text = std::fs::read_to_string(&fp).unwrap();
    assert!(text.starts_with("lag,value\n"));
    assert!(text.lines().last().unwrap().starts_with("# norm_u="));
    assert!(text.contains("residual_ratio="));

    let rep = j_awi(&p, &d, sigma).unwrap();
    let rp = dir.path().join("report.csv");
    write_report(&rp, &rep).unwrap();
    let text = std::fs::read_to_string(&rp).unwrap();
    assert_eq!(text, report_csv(&rep));
    assert!(text.contains("pair_id,value,ratio,residual_ratio\n"));
    let total: f64 = text.lines().last().unwrap().trim_start_matches("# total=").parse().unwrap();
    assert!((total - rep.total).abs() <= 1e-11 * rep.total.abs());
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + rep.per_trace.len());
}

#[test]
fn missing_and_malformed_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    match read_geometry(&missing) {
        Err(e @ AwiError::Io { .. }) => {
            assert!(e.to_string().contains("nope.csv"), "{e}");
            assert!(e.is_validation());
        }
        other => panic!("expected io error, got {other:?}"),
    }
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,value\n0,1\n0.1,x\n").unwrap();
    assert!(matches!(read_trace(&bad), Err(AwiError::Parse(_))));
    std::fs::write(&bad, "time,value\n0,1\n0.1,2\n").unwrap();
    assert!(matches!(read_trace(&bad), Err(AwiError::Parse(_))));
    std::fs::write(&bad, "t,value\n0,1\n0.1,2\n0.3,2\n").unwrap();
    assert!(matches!(read_trace(&bad), Err(AwiError::Parse(_))));
    std::fs::write(&bad, "3,3,10,0,0\n1000,1100,1200\n1300\n").unwrap();
    assert!(read_medium(&bad).is_err());
}
