//! Checks against independently computed references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use aslm::bench::{run_experiment, ExperimentConfig, ModelKind};
use aslm::{
    add_noise, build_quantized_table, embed, euler_step, generate_lorenz, quantize_sequential, sliding_splits,
    train_aslm, EmbeddedDataset, EmbeddingConfig, LorenzParams, Metric, NeighborIndex, Predictor, SplitPlan,
    TimeSeries,
};

fn lorenz_rhs(p: &LorenzParams<f64>, [x, y, z]: [f64; 3]) -> [f64; 3] {
    [p.sigma * (y - x), x * (p.rho - z) - y, x * y - p.beta * z]
}

fn rk4(p: &LorenzParams<f64>, s: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]];
    let k1 = lorenz_rhs(p, s);
    let k2 = lorenz_rhs(p, add(s, k1, h / 2.0));
    let k3 = lorenz_rhs(p, add(s, k2, h / 2.0));
    let k4 = lorenz_rhs(p, add(s, k3, h));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[test]
fn euler_trajectory_stays_on_the_reference_attractor() {
    let p = LorenzParams::default();
    let (mut euler, mut fine) = ([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]);
    let (mut e_max, mut f_max) = ([0.0f64; 3], [0.0f64; 3]);
    for _ in 0..5000 {
        euler = euler_step(&p, euler);
        for _ in 0..10 {
            fine = rk4(&p, fine, 0.001);
        }
        for k in 0..3 {
            assert!(euler[k].is_finite() && euler[k].abs() < 100.0);
            e_max[k] = e_max[k].max(euler[k].abs());
            f_max[k] = f_max[k].max(fine[k].abs());
        }
    }
    // chaotic trajectories decorrelate, but both must span the same attractor
    for k in 0..3 {
        assert!((e_max[k] / f_max[k] - 1.0).abs() < 0.25, "axis {k}: {} vs {}", e_max[k], f_max[k]);
    }
}

#[test]
fn euler_local_error_is_second_order() {
    let start = [-5.0, -6.0, 22.0];
    let gap = |dt: f64| {
        let p = LorenzParams { dt, ..LorenzParams::default() };
        let half = LorenzParams { dt: dt / 2.0, ..p };
        let one = euler_step(&p, start);
        let two = euler_step(&half, euler_step(&half, start));
        (0..3).map(|k| (one[k] - two[k]).powi(2)).sum::<f64>().sqrt()
    };
    let ratio = gap(0.01) / gap(0.005);
    assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn normalized_moments_recomputed_independently() {
    let ts = generate_lorenz(&LorenzParams::<f64>::default(), 4857).unwrap();
    let norm = ts.normalize().unwrap();
    let v = norm.values();
    // two-pass recomputation, summed in reverse order
    let mean = v.iter().rev().sum::<f64>() / v.len() as f64;
    let var = v.iter().rev().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
}

#[test]
fn default_protocol_needs_4857_samples_and_yields_distinct_windows() {
    let plan = SplitPlan::default();
    let cfg = EmbeddingConfig::default();
    assert_eq!(plan.required_len(cfg), 4857);
    let ts = generate_lorenz(&LorenzParams::<f64>::default(), 4857).unwrap().normalize().unwrap();
    let splits = sliding_splits(&ts, plan, cfg).unwrap();
    assert_eq!(splits.len(), 50);
    for (k, s) in splits.iter().enumerate() {
        assert_eq!((s.train.len(), s.test.len()), (2000, 400));
        assert_eq!(s.train.input(0), &ts.values()[k * 50..k * 50 + 7]);
    }
    for a in 0..splits.len() {
        for b in 0..a {
            assert_ne!(splits[a].train, splits[b].train);
        }
    }
    let short = TimeSeries::new(ts.values()[..4856].to_vec()).unwrap();
    assert!(sliding_splits(&short, plan, cfg).is_err());
}

#[test]
fn noise_power_matches_snr() {
    let ds = EmbeddedDataset::new(1, vec![0.0; 10_000], vec![0.0; 10_000]).unwrap();
    let noisy = add_noise(&ds, 20.0, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let var = noisy.desired().iter().map(|e| e * e).sum::<f64>() / 10_000.0;
    assert!((var / 0.01 - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn every_stored_point_finds_itself() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<f64> = (0..2000 * 7).map(|_| rng.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..7).map(|_| rng.random_range(0.1..1.0)).collect();
    for metric in [Metric::PlainL2, Metric::hadamard(&w).unwrap()] {
        let idx = NeighborIndex::build(7, &pts, (0..2000).collect::<Vec<usize>>(), metric).unwrap();
        for (i, p) in pts.chunks_exact(7).enumerate() {
            let hit = idx.nearest_entry(p).unwrap();
            assert_eq!((hit.index, hit.distance), (i, 0.0));
        }
    }
}

#[test]
fn node_visits_grow_sublinearly() {
    let series = generate_lorenz(&LorenzParams::<f64>::default(), 100_300).unwrap().normalize().unwrap();
    let all = embed(&series, EmbeddingConfig::default()).unwrap();
    let queries = all.window(100_000, 200).unwrap();
    let visits: Vec<f64> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let idx = NeighborIndex::build(7, all.window(0, n).unwrap().inputs_flat(), vec![(); n], Metric::PlainL2).unwrap();
            queries.inputs().map(|q| idx.nearest_with_stats(q).unwrap().1 as f64).sum::<f64>() / 200.0
        })
        .collect();
    // tenfold data must cost well under tenfold visits
    assert!(visits[1] < 5.0 * visits[0] && visits[2] < 5.0 * visits[1], "{visits:?}");
}

#[test]
fn averaged_payloads_shrink_noise() {
    // 40 well separated clusters carrying a clean residual plus unit-variance noise
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (clusters, per) = (40, 25);
    let mut inputs = Vec::new();
    let mut errors = Vec::new();
    let mut clean = Vec::new();
    for i in 0..clusters * per {
        let c = i % clusters;
        inputs.extend([10.0 * c as f64 + rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)]);
        let truth = (c as f64).sin();
        let n: f64 = rng.sample(StandardNormal);
        errors.push(truth + n);
        clean.push(truth);
    }
    let cb = quantize_sequential(2, &inputs, 1.0, &Metric::PlainL2).unwrap();
    assert_eq!(cb.len(), clusters);
    let table = build_quantized_table(&cb, &errors, Metric::PlainL2).unwrap();
    for (c, &payload) in table.errors().iter().enumerate() {
        let truth = clean[cb.center_samples()[c]];
        assert!((payload - truth).abs() <= 3.0 / (per as f64).sqrt(), "center {c}");
    }
}

#[test]
fn single_precision_pipeline_agrees_with_double() {
    let ts64 = generate_lorenz(&LorenzParams::default(), 600).unwrap().normalize().unwrap();
    let ts32 = TimeSeries::new(ts64.values().iter().map(|&v| v as f32).collect()).unwrap();
    let cfg = EmbeddingConfig::default();
    let (d64, d32) = (embed(&ts64, cfg).unwrap(), embed(&ts32, cfg).unwrap());
    let (train64, test64) = (d64.window(0, 400).unwrap(), d64.window(400, 150).unwrap());
    let (train32, test32) = (d32.window(0, 400).unwrap(), d32.window(400, 150).unwrap());
    let m64 = train_aslm(&train64, 0.1).unwrap();
    let m32 = train_aslm(&train32, 0.1f32).unwrap();
    let mut worse = 0;
    for (a, b) in test64.inputs().zip(test32.inputs()) {
        if (m64.predict(a).unwrap() - m32.predict(b).unwrap() as f64).abs() > 1e-3 {
            worse += 1;
        }
    }
    // rounding may flip a near-tie neighbor on a handful of queries
    assert!(worse <= 5, "{worse} disagreements");
}

fn small_config(roster: Vec<ModelKind>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::noisy();
    cfg.split = SplitPlan {
        train_len: 300,
        test_len: 100,
        stride: 20,
        runs: 4,
    };
    cfg.quantization.target_size = 80;
    cfg.timing = false;
    cfg.roster = roster;
    cfg
}

#[test]
fn roster_order_does_not_change_results() {
    let forward = run_experiment::<f64>(&small_config(ModelKind::ALL.to_vec())).unwrap();
    let mut reversed_roster = ModelKind::ALL.to_vec();
    reversed_roster.reverse();
    let reversed = run_experiment::<f64>(&small_config(reversed_roster)).unwrap();
    for m in ModelKind::ALL {
        let (a, b) = (forward.get(m).unwrap(), reversed.get(m).unwrap());
        assert_eq!(a.runs, b.runs, "{m}");
    }
    let alone = run_experiment::<f64>(&small_config(vec![ModelKind::Qaslm])).unwrap();
    assert_eq!(alone.get(ModelKind::Qaslm).unwrap().runs, forward.get(ModelKind::Qaslm).unwrap().runs);
}

#[test]
fn each_run_is_independent_of_the_others() {
    let cfg = small_config(ModelKind::ALL.to_vec());
    let full = run_experiment::<f64>(&cfg).unwrap();
    let splits = aslm::bench::prepare_splits::<f64>(&cfg).unwrap();
    // run the last split on its own, without the earlier ones
    let last = splits.len() - 1;
    let alone = aslm::bench::run_split(&cfg, &splits[last]).unwrap();
    for (m, outcome) in cfg.roster.iter().zip(&alone) {
        assert_eq!(outcome, &full.get(*m).unwrap().runs[last], "{m}");
    }
}

#[test]
fn noise_never_reaches_test_targets() {
    let clean = ExperimentConfig {
        snr_db: None,
        ..small_config(vec![ModelKind::Ls])
    };
    let noisy = small_config(vec![ModelKind::Ls]);
    let (a, b) = (
        aslm::bench::prepare_splits::<f64>(&clean).unwrap(),
        aslm::bench::prepare_splits::<f64>(&noisy).unwrap(),
    );
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.test, y.test);
        let train = aslm::bench::training_set(&noisy, y).unwrap();
        assert_eq!(train.inputs_flat(), x.train.inputs_flat());
        assert_ne!(train.desired(), x.train.desired());
    }
}
