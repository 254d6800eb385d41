use funnelim::sim::presets::demo_scenario;
use funnelim::sim::simulate;
use funnelim_cli::config::{FunnelConfig, ScenarioConfig, TermConfig};
use funnelim_cli::csv::{read_table, write_trace};
use proptest::prelude::*;

const BENCHMARK: &str = include_str!("../scenarios/benchmark_im.toml");

#[test]
fn csv_reproduces_the_trace_bit_for_bit() {
    let scn = demo_scenario::<f64>(true).unwrap().with_horizon(0.2, 1e-3).unwrap();
    let trace = simulate(&scn).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace, 17).unwrap();
    let table = read_table(buf.as_slice()).unwrap();
    assert_eq!(table.rows.len(), trace.samples.len());
    for (row, s) in table.rows.iter().zip(&trace.samples) {
        let expected = [
            s.t,
            s.y[0],
            s.y_ref[0],
            s.errors[(0, 0)],
            s.psi[0],
            s.errors[(0, 1)],
            s.psi[1],
            s.k,
            s.w[0],
            s.u[0],
        ];
        for (a, b) in row.iter().zip(expected) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn benchmark_file_matches_the_preset() {
    let cfg = ScenarioConfig::parse(BENCHMARK).unwrap();
    let prepared = cfg.prepare().unwrap();
    let preset = demo_scenario::<f64>(true).unwrap();
    let scn = &prepared.scenario;
    assert_eq!(scn.plant.a(), preset.plant.a());
    assert_eq!(scn.reference.alpha(), preset.reference.alpha());
    assert_eq!(scn.internal_model.as_ref().unwrap().c_hat, preset.internal_model.as_ref().unwrap().c_hat);
    assert_eq!(scn.x0, preset.x0);
}

proptest! {
    #[test]
    fn formatted_values_parse_back_exactly(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let text = format!("{v:.16e}");
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn configs_survive_serialization(
        k_r in 0.1..1e3f64,
        gains in prop::collection::vec(0.1..1e3f64, 0..3),
        amp in -10.0..10.0f64,
        omega in 0.1..100.0f64,
        t_end in 0.1..10.0f64,
    ) {
        let mut cfg = ScenarioConfig::parse(BENCHMARK).unwrap();
        cfg.controller.k_r = k_r;
        cfg.controller.funnels = (0..=gains.len())
            .map(|i| FunnelConfig { big_lambda: Some(10.0 * (i + 1) as f64), lambda: 0.5, t_const: 0.1, unbounded_initial: false })
            .collect();
        cfg.controller.k = gains;
        cfg.reference.channels[0].push(TermConfig::Cos { amplitude: amp, omega, phase: 0.25 });
        cfg.sim.t_end = t_end;
        let again = ScenarioConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
