use proptest::prelude::*;

use zk_core::fields::gaussian;
use zk_core::io::{
    decode_snapshot, decode_trajectory, emit_trace, encode_snapshot, encode_trajectory, load_snapshot,
    save_snapshot, trace_csv, TraceColumn, HEADER_LEN,
};
use zk_core::multiplier::SymbolKind;
use zk_core::propagator::free_evolve_unchecked;
use zk_core::solver::{evolve, weighted_energy_audit, SimulationConfig};
use zk_core::{Field2D, Grid2D, Trajectory, ZkError};

fn grid_strategy() -> impl Strategy<Value = Grid2D> {
    (4usize..10, 4usize..10, 1.0f64..50.0, 1.0f64..50.0)
        .prop_map(|(a, b, lx, ly)| Grid2D::new(2 * a, 2 * b, lx, ly).unwrap())
}

fn field_strategy() -> impl Strategy<Value = (Field2D, f64)> {
    grid_strategy().prop_flat_map(|g| {
        (
            prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, g.len()),
            -1e6f64..1e6,
        )
            .prop_map(move |(v, t)| (Field2D::new(g, v).unwrap(), t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn snapshot_roundtrip((f, t) in field_strategy()) {
        let mut bytes = Vec::new();
        encode_snapshot(&f, t, &mut bytes);
        prop_assert_eq!(bytes.len(), HEADER_LEN + 8 * f.grid().len());
        let (g, s) = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(s.to_bits(), t.to_bits());
        prop_assert_eq!(g.grid(), f.grid());
        prop_assert!(g.samples().iter().zip(f.samples()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn any_truncation_is_a_format_error((f, t) in field_strategy(), cut in 0.0f64..1.0) {
        let mut bytes = Vec::new();
        encode_snapshot(&f, t, &mut bytes);
        let keep = (cut * bytes.len() as f64) as usize;
        let err = decode_snapshot(&bytes[..keep]).unwrap_err();
        prop_assert!(matches!(err, ZkError::Format { offset, .. } if offset as usize <= bytes.len()), "{err}");
    }

    #[test]
    fn trajectory_roundtrip((f, _) in field_strategy(), steps in 1usize..5) {
        let times: Vec<f64> = (0..steps).map(|k| k as f64 * 0.5).collect();
        let traj = Trajectory::from_fn(times, |t| f.scale(0.5f64.powf(t))).unwrap();
        prop_assert_eq!(decode_trajectory(&encode_trajectory(&traj)).unwrap(), traj);
    }
}

#[test]
fn wrong_magic_gives_no_partial_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.zkf");
    let f = gaussian(Grid2D::square(16, 8.0).unwrap(), 1.0, 1.0, (0.0, 0.0));
    save_snapshot(&f, 0.25, &path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 40 + 8 * 16 * 16);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_snapshot(&path), Err(ZkError::Format { offset: 0, .. })));
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.split("\r\n")
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn zero_trajectory_traces_zero() {
    let g = Grid2D::square(32, 10.0).unwrap();
    let traj = Trajectory::from_fn(vec![0.0, 1.0], |_| Field2D::zeros(g)).unwrap();
    let cols: Vec<TraceColumn> = vec!["hs:1".parse().unwrap(), "poly:1".parse().unwrap()];
    let csv = trace_csv(&traj, &cols).unwrap();
    assert!(csv.starts_with("t,l2,mass,hs(1),weighted(poly(1))\r\n"));
    for r in rows(&csv) {
        assert!(r[1..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn free_trace_keeps_l2_and_prints_17_digits() {
    let g = Grid2D::square(64, 15.0).unwrap();
    let f = gaussian(g, 0.7, 1.2, (0.5, 0.0));
    let traj = Trajectory::from_fn(Trajectory::uniform_times(2.0, 5), |t| {
        free_evolve_unchecked(&f, t, SymbolKind::Original)
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    emit_trace(&traj, &[TraceColumn::Sobolev(1.0)], &path).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    let digits = csv.split("\r\n").nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(digits.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    let r = rows(&csv);
    assert_eq!(r.len(), 5);
    for row in &r {
        assert!((row[1] - r[0][1]).abs() < 1e-12 * r[0][1]);
    }
}

#[test]
fn evolved_weighted_column_sits_under_the_audit_envelope() {
    let cfg = SimulationConfig {
        nx: 128,
        ny: 128,
        half_length_x: 16.0,
        half_length_y: 16.0,
        t_final: 0.5,
        snapshots: 11,
        ..Default::default()
    };
    let u0 = gaussian(cfg.grid().unwrap(), 0.5, 1.0, (0.0, 0.0));
    let traj = evolve(&u0, &cfg).unwrap();
    let audit = weighted_energy_audit(&traj, 2.0, 8).unwrap();
    // trunc:N:s samples w_N^{2s}, the audit weight is w_N^s: s = 1 here.
    let csv = trace_csv(&traj, &["trunc:8:1".parse().unwrap()]).unwrap();
    for (row, (env, w)) in rows(&csv).iter().zip(audit.envelope.iter().zip(&audit.weighted)) {
        let sq = row[3] * row[3];
        assert!(sq.is_finite() && sq <= *env * (1.0 + 1e-12), "{sq} > {env}");
        assert!((sq - w).abs() <= 1e-10 * w);
    }
}
