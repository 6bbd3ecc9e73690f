use shmc::experiments::{
    run_double_well, run_dyson, run_gmm, run_test_example, DoubleWellParams, DysonParams, GmmParams, GmmSampler,
    TestExampleParams,
};
use shmc::samplers::SamplerKind;

fn small_dyson() -> DysonParams {
    DysonParams { particles: 40, checkpoints: vec![0.02, 0.05], ..DysonParams::default() }
}

#[test]
fn dyson_series_reach_every_checkpoint() {
    let exp = run_dyson(&small_dyson(), 1, 2).unwrap();
    assert_eq!(exp.chains.len(), 6);
    for c in &exp.chains {
        assert_eq!(c.series.len(), 2, "{}", c.summary.sampler);
        assert!(c.series[0].evolution_time >= 0.02 - 1e-12);
        assert!(c.summary.evolution_time >= 0.05 - 1e-12);
        assert!(c.series.iter().all(|p| (0.0..=2.0).contains(&p.error)));
        assert_eq!(c.final_positions.len(), 40);
        assert_eq!(c.error_at(0.05), Some(c.series[1].error));
        assert_eq!(c.error_at(1.0), None);
    }
    let total: f64 = exp.reference.masses.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
    let mut chains = exp.chains_of("rb-shmc");
    let (a, b) = (chains.next().unwrap(), chains.next().unwrap());
    assert_ne!(a.final_positions, b.final_positions);
}

#[test]
fn dyson_default_mass_is_unit_before_rescaling() {
    let p = DysonParams::default();
    assert_eq!(p.mass(), 1.0 / 499.0);
    assert_eq!(DysonParams { mass: Some(0.5), ..p }.mass(), 0.5);
}

#[test]
fn empty_sampler_list_is_refused() {
    let p = DysonParams { samplers: vec![], ..small_dyson() };
    assert!(run_dyson(&p, 1, 1).is_err());
}

#[test]
fn test_example_runs_three_schedules() {
    let p = TestExampleParams { particles: 20, checkpoints: vec![1.0, 4.0], ..TestExampleParams::default() };
    let exp = run_test_example(&p, 2, 1).unwrap();
    let names: Vec<&str> = exp.chains.iter().map(|c| c.summary.sampler.as_str()).collect();
    assert_eq!(names, ["rb-shmc-l100", "rb-shmc-l10", "rb-shmc-adaptive"]);
    assert!(exp.chains.iter().all(|c| c.series.len() == 2));
}

#[test]
fn double_well_reports_both_wells() {
    let p = DoubleWellParams { n_samples: 2000, ..DoubleWellParams::default() };
    let out = run_double_well(&p, 1, 1).unwrap();
    for c in &out.chains {
        assert_eq!(c.samples.len(), 2000);
        assert!((c.occupancy[0] + c.occupancy[1] - 1.0).abs() < 1e-12);
    }
    let total: f64 = out.reference.masses.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn mixture_places_sand_between_two_wells() {
    let p = GmmParams {
        n_samples: 200,
        n_burnin: 20,
        samplers: vec![GmmSampler::new("shmc", SamplerKind::Shmc, 0.002, 0.2, None)],
        ..GmmParams::default()
    };
    let out = run_gmm(&p, 1, 1).unwrap();
    assert_eq!(out.data.len(), 100);
    assert!(out.sand.distance > 1.0);
    assert!(out.sand.barrier > 0.0);
    assert!(out.sand.height > out.sand.barrier);
    let c = &out.chains[0];
    assert_eq!(c.samples.len(), 200);
    assert_eq!(c.occupancy.len(), 3);
    assert!((c.occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(c.steps, (0.2 * out.sand.distance / 0.002).round() as usize);
}
