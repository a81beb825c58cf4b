use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wptsim::circuit::{solve_currents, Resonator, Role, WptSystem};
use wptsim::measurement::*;
use wptsim::sweep::{build_array_system, ArrayElectrical, LinearArrayLayout, Tuning};
use wptsim::Complex;

fn random_record(rng: &mut ChaCha8Rng, f: f64) -> TwoPortRecord {
    let mut c = || Complex::from_polar(rng.gen_range(0.001..0.99), rng.gen_range(-3.1..3.1));
    TwoPortRecord::new(f, [[c(), c()], [c(), c()]], 50.0).unwrap()
}

fn max_rel(a: &TwoPortRecord, b: &TwoPortRecord) -> f64 {
    a.s.iter()
        .flatten()
        .zip(b.s.iter().flatten())
        .map(|(x, y)| (x - y).norm() / x.norm())
        .fold((a.frequency / b.frequency - 1.0).abs(), f64::max)
}

#[test]
fn round_trip_all_formats() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let records: Vec<_> = (1..=50).map(|k| random_record(&mut rng, k as f64 * 1.3e5)).collect();
    for format in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
        for unit in [FrequencyUnit::Hz, FrequencyUnit::KHz, FrequencyUnit::MHz, FrequencyUnit::GHz] {
            let text = write_touchstone(&records, unit, format).unwrap();
            let back = parse_touchstone(&text).unwrap();
            assert_eq!(back.len(), records.len());
            for (a, b) in records.iter().zip(&back) {
                assert!(max_rel(a, b) < 1e-12, "{format:?} {unit:?}");
            }
        }
    }
}

#[test]
fn s_z_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let r = random_record(&mut rng, 1e6);
        let z = s_to_z(&r).unwrap();
        let back = z_to_s(&z, r.z0, r.frequency).unwrap();
        assert!(max_rel(&r, &back) < 1e-12);
    }
}

fn two_coil(f0: f64) -> WptSystem {
    WptSystem::new(
        vec![Resonator::tuned(Role::Tx, 4.7e-6, 0.05, f0).unwrap(), Resonator::tuned(Role::Rx, 4.5e-6, 0.04, f0).unwrap()],
        vec![vec![0.0, 1e-6], vec![1e-6, 0.0]],
        1.0,
        12.5,
        f0,
    )
    .unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn z11_reactance_crosses_zero_at_resonance() {
    let s = two_coil(1e6);
    let f = grid(0.95e6, 1.05e6, 101);
    let recs = export_two_port(&s, &f, 50.0).unwrap();
    let x: Vec<f64> = recs.iter().map(|r| s_to_z(r).unwrap()[0][0].im).collect();
    let k = x.windows(2).position(|w| w[0] < 0.0 && w[1] >= 0.0).unwrap();
    assert!(f[k] <= 1e6 && 1e6 <= f[k + 1]);
    assert_eq!(x.windows(2).filter(|w| w[0].signum() != w[1].signum()).count(), 1);
}

fn array_at(z: f64, y: f64) -> WptSystem {
    build_array_system(&LinearArrayLayout::table2(z), &ArrayElectrical::table3()).unwrap().at(y).unwrap()
}

#[test]
fn fixture_efficiency_matches_solver_across_frequency() {
    let s = array_at(0.02, 0.0);
    let f = grid(0.9e6, 1.1e6, 41);
    let recs = export_two_port(&s, &f, 50.0).unwrap();
    let text = write_touchstone(&recs, FrequencyUnit::MHz, DataFormat::Ri).unwrap();
    let parsed = parse_touchstone(&text).unwrap();
    for (a, b) in recs.iter().zip(&parsed) {
        assert!(max_rel(a, b) < 1e-9);
    }
    let rows = ingest(&parsed, s.load_resistance).unwrap();
    for (row, &fk) in rows.iter().zip(&f) {
        let sk = s.clone().with_frequency(fk).unwrap();
        let sol = solve_currents(&sk, sk.omega()).unwrap();
        assert!((row.eta - sol.efficiency).abs() < 1e-6, "{fk}: {} vs {}", row.eta, sol.efficiency);
        assert!((row.i1_abs - sol.input_current.norm()).abs() < 1e-6 * sol.input_current.norm());
        assert!((row.i2_abs - sol.rx_current().norm()).abs() < 1e-6 * sol.rx_current().norm());
    }
}

#[test]
fn db_and_ri_fixtures_agree() {
    let s = array_at(0.05, 0.03);
    let recs = export_two_port(&s, &grid(0.98e6, 1.02e6, 9), 50.0).unwrap();
    let a = ingest(&parse_touchstone(&write_touchstone(&recs, FrequencyUnit::Hz, DataFormat::Ri).unwrap()).unwrap(), 12.5).unwrap();
    let b = ingest(&parse_touchstone(&write_touchstone(&recs, FrequencyUnit::GHz, DataFormat::Db).unwrap()).unwrap(), 12.5).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.eta - y.eta).abs() < 1e-9);
    }
}

#[test]
fn measured_style_fixture_lands_in_band() {
    // capacitors reproduce the measured per-coil resonances
    let e = ArrayElectrical::table3().with_tuning(Tuning::Measured);
    let s = build_array_system(&LinearArrayLayout::table2(0.02), &e).unwrap().at(0.0).unwrap();
    let recs = export_two_port(&s, &grid(0.98e6, 1.02e6, 41), 50.0).unwrap();
    let rows = ingest(&recs, s.load_resistance).unwrap();
    let best = best_near(&rows, 1e6, 0.02).unwrap();
    // unmodelled capacitor and connector losses only pull the measured 94.5% down
    assert!(best.eta > 0.945 && best.eta < 0.98, "{}", best.eta);
    let opt = max_efficiency_load(&recs[20], 0.1, 1000.0).unwrap();
    assert!(opt.eta >= rows[20].eta);
}

#[test]
fn passive_fixtures_never_exceed_unity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let n = rng.gen_range(2..7);
        let f0 = rng.gen_range(1e5..1e7);
        let mut res = vec![Resonator::tuned(Role::Tx, rng.gen_range(1e-6..1e-4), rng.gen_range(0.001..1.0), f0).unwrap()];
        for _ in 1..n - 1 {
            let role = if rng.gen_bool(0.5) { Role::Tx } else { Role::Repeater };
            res.push(Resonator::tuned(role, rng.gen_range(1e-6..1e-4), rng.gen_range(0.001..1.0), f0).unwrap());
        }
        res.push(Resonator::tuned(Role::Rx, rng.gen_range(1e-6..1e-4), rng.gen_range(0.001..1.0), f0).unwrap());
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let v = rng.gen_range(-0.4..0.4) * (res[i].inductance * res[j].inductance).sqrt();
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let s = WptSystem::new(res, m, 1.0, rng.gen_range(1.0..100.0), f0).unwrap();
        let recs = export_two_port(&s, &[f0 * rng.gen_range(0.9..1.1)], 50.0).unwrap();
        let eta = efficiency_from_two_port(&recs[0], rng.gen_range(0.1..500.0)).unwrap().eta;
        assert!((0.0..=1.0 + 1e-9).contains(&eta));
    }
}
