use std::fs;

use noncollapse_cli::core::geometry::{ellipse, torus};
use noncollapse_cli::core::{
    ratio_series, run, AnalyzerConfig, FlowConfig, SeriesRecord, SeriesRow, SpeedFunction,
};
use noncollapse_cli::io::{geometry_table, read_geometry, series_table, Table, SERIES_HEADER};

fn record(rows: Vec<SeriesRow>) -> SeriesRecord {
    SeriesRecord {
        rows,
        fields: Vec::new(),
        speeds: Vec::new(),
        defect_sup: 0.0,
        defect_inf: 0.0,
    }
}

fn row(t: f64) -> SeriesRow {
    SeriesRow {
        t,
        sup_ratio: 1.0 / 3.0,
        inf_ratio: std::f64::consts::PI * 1e-7,
        min_f: 0.1 + 0.2,
        max_f: 6.02214076e23,
        defect_sup: -2.5e-300,
        defect_inf: f64::MIN_POSITIVE,
        sup_index: 0,
        inf_index: 0,
    }
}

#[test]
fn empty_series_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    series_table(&record(Vec::new())).write(&path).unwrap();
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "t,sup_ratio,inf_ratio,min_F,max_F,defect_sup,defect_inf\n"
    );
}

#[test]
fn one_row_is_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    series_table(&record(vec![row(0.5)])).write(&path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("5.0000000000000000e-1,"));
}

#[test]
fn values_read_back_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let rows = vec![row(0.0), row(1e-3), row(0.1 + 0.2)];
    series_table(&record(rows.clone())).write(&path).unwrap();
    let table = Table::read(&path).unwrap();
    assert_eq!(table.header, SERIES_HEADER);
    let t = table.f64s("t").unwrap();
    let sup = table.f64s("sup_ratio").unwrap();
    let inf = table.f64s("inf_ratio").unwrap();
    let lo = table.f64s("min_F").unwrap();
    let hi = table.f64s("max_F").unwrap();
    let ds = table.f64s("defect_sup").unwrap();
    let di = table.f64s("defect_inf").unwrap();
    for (k, r) in rows.iter().enumerate() {
        let pairs = [
            (t[k], r.t),
            (sup[k], r.sup_ratio),
            (inf[k], r.inf_ratio),
            (lo[k], r.min_f),
            (hi[k], r.max_f),
            (ds[k], r.defect_sup),
            (di[k], r.defect_inf),
        ];
        for (read, written) in pairs {
            assert_eq!(read.to_bits(), written.to_bits());
        }
    }
}

#[test]
fn simulated_series_round_trips() {
    let h = ellipse(2.0, 1.0, 64).unwrap();
    let cfg = FlowConfig::new(SpeedFunction::sum(), 0.01).with_snapshot_every(20);
    let traj = run(&h, &cfg).unwrap();
    let rec = ratio_series(&traj, &cfg.speed, &AnalyzerConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    series_table(&rec).write(&path).unwrap();
    let back = Table::read(&path).unwrap();
    let sup = back.f64s("sup_ratio").unwrap();
    assert_eq!(sup.len(), rec.rows.len());
    for (a, b) in sup.iter().zip(&rec.rows) {
        assert_eq!(a.to_bits(), b.sup_ratio.to_bits());
    }
    series_table(&rec)
        .write(&dir.path().join("again.csv"))
        .unwrap();
    assert_eq!(
        fs::read(&path).unwrap(),
        fs::read(dir.path().join("again.csv")).unwrap()
    );
}

#[test]
fn geometry_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, h) in [
        ("curve", ellipse(2.0, 1.0, 40).unwrap()),
        ("torus", torus(2.0, 0.5, 40).unwrap()),
    ] {
        let path = dir.path().join(format!("{name}.csv"));
        geometry_table(&h).write(&path).unwrap();
        let (back, _) = read_geometry(&path, None, None).unwrap();
        assert_eq!(back.backend(), h.backend());
        assert_eq!(back.nodes(), h.nodes());
    }
}

#[test]
fn sidecar_sets_the_topology() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let mut text = String::from("x,r\n");
    for k in 0..16 {
        let t = std::f64::consts::PI * k as f64 / 8.0;
        text.push_str(&format!("{},{}\n", 0.5 * t.cos(), 2.0 + 0.5 * t.sin()));
    }
    fs::write(&path, text).unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"backend":"axisym","topology":"torus"}"#,
    )
    .unwrap();
    let (h, _) = read_geometry(&path, None, None).unwrap_or_else(|e| panic!("{e}"));
    assert!(!h.is_sphere_like());
    assert_eq!(h.resolution(), 16);
    assert!(read_geometry(&path, None, Some("knot")).is_err());
}
