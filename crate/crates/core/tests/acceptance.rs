//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each and exits non-zero if any fails.
//!
//! `cargo test -p mismo --test acceptance` runs everything; pass criterion
//! numbers as arguments to run a subset, e.g.
//! `cargo test -p mismo --test acceptance -- 1 2 5`.

use std::path::Path;
use std::time::Instant;

use rand::Rng;

use mismo::datagen::{gen_logistic, gen_mackey_glass, LogisticConfig, MackeyGlassConfig};
use mismo::experiment::{
    load_dataset, leakage_audit, run_experiment, write_outputs, ExperimentConfig, Profile,
    RunOptions, StrategySpec, Tables, OUTPUT_FILES,
};
use mismo::fnn::{jacobian, train_lm, FnnParams, NetworkShape, TrainConfig, TrainReport};
use mismo::linalg::Matrix;
use mismo::metrics::{anova_oneway, mape_h, mase_h, smape_h};
use mismo::optimizers::{
    ga_run, inertia_weight, pso_run, update_velocity, CountingFitness, GaConfig, Particle,
    Selection, SwarmConfig,
};
use mismo::scalar::sigmoid;
use mismo::seed::rng_from;
use mismo::series::LagWindowDataset;
use mismo::strategies::{
    decode_partition, fit_strategy, forecast_model_space, BinaryMask, FitSettings,
    SegmentFitter, StrategyKind,
};

type Outcome = Result<String, String>;

fn e<T>(r: mismo::Result<T>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

// ---------------------------------------------------------------- 1

fn partition_codec() -> Outcome {
    let started = Instant::now();
    let mask = BinaryMask::parse("001000010").map_err(|e| e.to_string())?;
    let p = decode_partition(&mask, 10).map_err(|e| e.to_string())?;
    if p.segments() != [3, 5, 2] {
        return Err(format!("worked example decoded to {:?}", p.segments()));
    }
    let mut rng = rng_from(1);
    let mut failures = 0;
    let mut cases = 0;
    for h in 2..=18 {
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..h - 1).map(|_| rng.gen()).collect();
            let m = BinaryMask::new(bits);
            cases += 1;
            match decode_partition(&m, h) {
                Ok(p) if p.segments().iter().sum::<usize>() == h && p.len() == m.popcount() + 1 => {}
                _ => failures += 1,
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(
        failures == 0 && secs < 1.0,
        format!("(3,5,2) exact; {cases} fuzzed masks, 0 failures; {secs:.3}s"),
        format!("{failures} of {cases} fuzzed masks failed; {secs:.3}s"),
    )
}

// ---------------------------------------------------------------- 2

fn pso_mechanics() -> Outcome {
    let w = |t| inertia_weight(t, 100, 0.9, 0.4).map_err(|e| e.to_string());
    let ends = [(w(0)?, 0.9), (w(100)?, 0.4), (w(50)?, 0.65)];
    for (got, want) in ends {
        if (got - want).abs() > 1e-12 {
            return Err(format!("inertia {got} != {want}"));
        }
    }
    let mut rng = rng_from(2);
    let v_max = 4.0;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.gen_range(1..20);
        let bits = |rng: &mut rand_chacha::ChaCha8Rng| BinaryMask::new((0..d).map(|_| rng.gen()).collect());
        let particle = Particle {
            position: bits(&mut rng),
            velocity: (0..d).map(|_| rng.gen_range(-v_max..=v_max)).collect(),
            pbest: bits(&mut rng),
            pbest_fitness: 0.0,
        };
        let gbest = bits(&mut rng);
        let wt = rng.gen_range(0.4..=0.9);
        let v = update_velocity(&particle, &gbest, wt, 2.0, 2.0, v_max, &mut rng);
        worst = v.iter().fold(worst, |m, x| m.max(x.abs()));
    }
    if worst > v_max {
        return Err(format!("velocity {worst} exceeded the clamp"));
    }
    let s = [(0.0, 0.5), (4.0, 0.98201), (-4.0, 0.01799)];
    for (x, want) in s {
        let got: f64 = sigmoid(x);
        if (got - want).abs() > 1e-5 {
            return Err(format!("S({x}) = {got}, expected {want}"));
        }
    }
    Ok(format!("inertia endpoints exact; max |v| {worst:.3} over 10^4 updates; S(0), S(±4) match"))
}

// ---------------------------------------------------------------- 3

fn zero_count_squared(m: &BinaryMask) -> f64 {
    let zeros = m.len() - m.popcount();
    (zeros * zeros) as f64
}

fn optimizer_convergence() -> Outcome {
    let started = Instant::now();
    let (mut pso_hits, mut ga_hits, mut monotone) = (0, 0, 0);
    for seed in 0..10u64 {
        let swarm = SwarmConfig {
            seed,
            ..SwarmConfig::default()
        };
        let p = pso_run(&zero_count_squared, 17, &swarm).map_err(|e| e.to_string())?;
        let ga = GaConfig {
            seed,
            ..GaConfig::default()
        };
        let g = ga_run(&zero_count_squared, 17, &ga).map_err(|e| e.to_string())?;
        pso_hits += usize::from(p.best_fitness == 0.0 && p.best.popcount() == 17);
        ga_hits += usize::from(g.best_fitness == 0.0 && g.best.popcount() == 17);
        monotone += usize::from(p.trace.is_nonincreasing() && g.trace.is_nonincreasing());
    }
    let secs = started.elapsed().as_secs_f64();
    check(
        pso_hits >= 9 && ga_hits >= 8 && monotone == 10 && secs < 10.0,
        format!("PSO {pso_hits}/10, GA {ga_hits}/10 reach all-ones; traces monotone {monotone}/10; {secs:.2}s"),
        format!("PSO {pso_hits}/10 (need 9), GA {ga_hits}/10 (need 8), monotone {monotone}/10; {secs:.2}s"),
    )
}

// ---------------------------------------------------------------- 4

fn dataset(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> LagWindowDataset<f64> {
    let n = inputs.len();
    LagWindowDataset {
        lag_offsets: (1..=inputs[0].len()).collect(),
        target_offsets: (1..=targets[0].len()).collect(),
        inputs: Matrix::from_rows(&inputs),
        targets: Matrix::from_rows(&targets),
        anchors: (0..n).collect(),
    }
}

fn strictly_decreasing(report: &TrainReport) -> bool {
    report.mse_trace.windows(2).all(|w| w[1] < w[0])
}

fn fnn_numerics() -> Outcome {
    let mut rng = rng_from(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let shape = NetworkShape::relaxed(rng.gen_range(1..6), rng.gen_range(1..11), rng.gen_range(1..5))
            .map_err(|e| e.to_string())?;
        let params = FnnParams::<f64>::random_uniform(shape, &mut rng);
        let x: Vec<f64> = (0..shape.n_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jac = jacobian(&params, &x).map_err(|e| e.to_string())?;
        let flat = params.to_flat();
        let eps = 1e-6;
        for p in 0..flat.len() {
            let eval = |delta: f64| {
                let mut f = flat.clone();
                f[p] += delta;
                let q = FnnParams::from_flat(shape, &f).unwrap();
                mismo::fnn::forward(&q, &x).unwrap()
            };
            let (up, down) = (eval(eps), eval(-eps));
            for h in 0..shape.n_out {
                let fd = (up[h] - down[h]) / (2.0 * eps);
                let an = jac.get(h, p);
                let scale = an.abs().max(fd.abs()).max(1e-6);
                worst = worst.max((an - fd).abs() / scale);
            }
        }
    }
    if worst >= 1e-4 {
        return Err(format!("Jacobian max relative error {worst:.2e}"));
    }

    let xs: Vec<f64> = (0..50).map(|i| -1.0 + 2.0 * i as f64 / 49.0).collect();
    let ident = dataset(xs.iter().map(|&x| vec![x]).collect(), xs.iter().map(|&x| vec![x]).collect());
    let cfg = TrainConfig {
        max_epochs: 200,
        seed: 9,
        ..TrainConfig::default()
    };
    let shape = NetworkShape::new(1, 2, 1).map_err(|e| e.to_string())?;
    let (_, report) = train_lm(&ident, shape, &cfg).map_err(|e| e.to_string())?;
    if !(report.final_mse < 1e-3) || report.epochs_run > 200 {
        return Err(format!("y=x reached MSE {:.2e} after {} epochs", report.final_mse, report.epochs_run));
    }
    let mut runs = vec![report.clone()];
    for seed in 0..30u64 {
        let mut r = rng_from(100 + seed);
        let (n_in, n_out) = (r.gen_range(1..5), r.gen_range(1..4));
        let rows = r.gen_range(10..40);
        let inputs: Vec<Vec<f64>> = (0..rows).map(|_| (0..n_in).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let targets = inputs
            .iter()
            .map(|x| (0..n_out).map(|k| (x.iter().sum::<f64>() * (k + 1) as f64).sin()).collect())
            .collect();
        let shape = NetworkShape::relaxed(n_in, r.gen_range(2..8), n_out).map_err(|e| e.to_string())?;
        let cfg = TrainConfig { max_epochs: 100, seed, ..TrainConfig::default() };
        runs.push(train_lm(&dataset(inputs, targets), shape, &cfg).map_err(|e| e.to_string())?.1);
    }
    let bad = runs.iter().filter(|r| !strictly_decreasing(r)).count();
    check(
        bad == 0,
        format!(
            "Jacobian rel. err {worst:.1e}; y=x MSE {:.1e} in {} epochs; {} LM traces strictly decreasing",
            report.final_mse,
            report.epochs_run,
            runs.len()
        ),
        format!("{bad} of {} LM traces not strictly decreasing", runs.len()),
    )
}

// ---------------------------------------------------------------- 5

fn metric_oracles() -> Outcome {
    let mape = e(mape_h(&[vec![100.0], vec![200.0]], &[vec![110.0], vec![180.0]], 1))?;
    let smape = e(smape_h(&[vec![100.0]], &[vec![110.0]], 1))?;
    let mase = e(mase_h(&[vec![5.0]], &[vec![4.5]], &[vec![1.0, 2.0, 3.0, 4.0]], 1))?;
    for (name, got, want, tol) in [
        ("MAPE", mape, 10.0, 1e-9),
        ("SMAPE", smape, 1000.0 / 210.0, 1e-9),
        ("MASE", mase, 0.5, 1e-9),
    ] {
        if (got - want).abs() > tol {
            return Err(format!("{name} = {got}, expected {want}"));
        }
    }
    if (smape - 4.7619).abs() > 1e-4 {
        return Err(format!("SMAPE = {smape}, printed value 4.7619"));
    }

    let mut rng = rng_from(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(1..5);
        let actual: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen_range(1.0..10.0)]).collect();
        let fc: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen_range(1.0..10.0)]).collect();
        let ins: Vec<Vec<f64>> = (0..m).map(|_| (0..8).map(|_| rng.gen_range(1.0..10.0)).collect()).collect();
        let c = 10f64.powf(rng.gen_range(-3.0..3.0));
        let sc = |v: &[Vec<f64>]| v.iter().map(|r| r.iter().map(|x| x * c).collect()).collect::<Vec<Vec<f64>>>();
        let pairs = [
            (e(mape_h(&actual, &fc, 1))?, e(mape_h(&sc(&actual), &sc(&fc), 1))?),
            (e(smape_h(&actual, &fc, 1))?, e(smape_h(&sc(&actual), &sc(&fc), 1))?),
            (e(mase_h(&actual, &fc, &ins, 1))?, e(mase_h(&sc(&actual), &sc(&fc), &sc(&ins), 1))?),
        ];
        for (a, b) in pairs {
            worst = worst.max((a - b).abs() / a.abs().max(1e-12));
        }
    }
    if worst > 1e-9 {
        return Err(format!("scale invariance violated, relative change {worst:.1e}"));
    }

    let hand = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).map_err(|e| e.to_string())?;
    if (hand.f - 1.5).abs() > 1e-10 {
        return Err(format!("ANOVA hand case F = {}", hand.f));
    }
    let mut worst_t: f64 = 0.0;
    for _ in 0..200 {
        let (n1, n2) = (rng.gen_range(2..10), rng.gen_range(2..10));
        let a: Vec<f64> = (0..n1).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let ss = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        };
        let pooled = (ss(&a) + ss(&b)) / (n1 + n2 - 2) as f64;
        let t = (mean(&a) - mean(&b)) / (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
        let f = anova_oneway(&[a, b]).map_err(|e| e.to_string())?.f;
        worst_t = worst_t.max((f - t * t).abs() / (t * t).max(1.0));
    }
    check(
        worst_t <= 1e-10,
        format!("hand cases exact; scale drift {worst:.1e}; ANOVA F=1.5; |F − t²| {worst_t:.1e}"),
        format!("F = t² violated by {worst_t:.1e}"),
    )
}

// ---------------------------------------------------------------- 6

fn strategy_special_cases() -> Outcome {
    let series = gen_logistic::<f64>(&LogisticConfig { phi1: 0.3, length: 160 }).map_err(|e| e.to_string())?;
    let settings = FitSettings {
        candidate_lags: (1..=6).collect(),
        hidden_candidates: vec![2, 4],
        train: TrainConfig { max_epochs: 20, ..TrainConfig::default() },
        cv_folds: 0,
    };
    let h = 18;
    let a = SegmentFitter::new(series.clone(), settings.clone(), 42);
    let b = SegmentFitter::new(series.clone(), settings, 42);
    let hist = series.values();
    let mimo = e(fit_strategy(&StrategyKind::Mimo, &a, h))?;
    let zero = e(decode_partition(&BinaryMask::zeros(h - 1), h))?;
    let zero = e(fit_strategy(&StrategyKind::Partitioned(zero), &b, h))?;
    let (f_mimo, f_zero) = (e(forecast_model_space(&mimo, hist))?, e(forecast_model_space(&zero, hist))?);
    let direct = e(fit_strategy(&StrategyKind::Direct, &a, h))?;
    let ones = e(decode_partition(&BinaryMask::ones(h - 1), h))?;
    let ones = e(fit_strategy(&StrategyKind::Partitioned(ones), &b, h))?;
    let (f_direct, f_ones) = (e(forecast_model_space(&direct, hist))?, e(forecast_model_space(&ones, hist))?);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    if bits(&f_mimo) != bits(&f_zero) {
        return Err("all-zero mask forecast differs from MIMO".into());
    }
    if bits(&f_direct) != bits(&f_ones) {
        return Err("all-one mask forecast differs from direct".into());
    }
    let mismo = e(fit_strategy(&StrategyKind::Mismo(6), &a, h))?;
    check(
        mismo.segments.len() == 3,
        "all-zero ≡ MIMO and all-one ≡ direct bit for bit; MISMO(6, 18) has 3 sub-models".into(),
        format!("MISMO(6, 18) built {} sub-models", mismo.segments.len()),
    )
}

// ---------------------------------------------------------------- 7

fn generators() -> Outcome {
    let lg = gen_logistic::<f64>(&LogisticConfig { phi1: 0.2, length: 10_001 }).map_err(|e| e.to_string())?;
    let v = lg.values();
    if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err("Logistic left [0, 1]".into());
    }
    if v[0] != 0.2 || v.windows(2).any(|w| w[1] != 4.0 * w[0] * (1.0 - w[0])) {
        return Err("Logistic does not match the recurrence".into());
    }
    let flat = gen_mackey_glass::<f64>(&MackeyGlassConfig::new(1.0, 17, 500)).map_err(|e| e.to_string())?;
    let dev = flat.values().iter().fold(0.0f64, |m, x| m.max((x - 1.0).abs()));
    if dev > 1e-12 {
        return Err(format!("Mackey–Glass fixed point drifts by {dev:.1e}"));
    }
    let coarse = MackeyGlassConfig::new(1.2, 17, 200);
    let fine = MackeyGlassConfig { dt: coarse.dt / 2.0, ..coarse };
    let a = gen_mackey_glass::<f64>(&coarse).map_err(|e| e.to_string())?;
    let b = gen_mackey_glass::<f64>(&fine).map_err(|e| e.to_string())?;
    let diff = a
        .values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    check(
        diff < 1e-4 && a.len() == 200,
        format!("Logistic exact for 10^4 steps; MG(1.0) constant; dt-halving max |Δ| {diff:.1e}"),
        format!("dt-halving max |Δ| {diff:.1e} over {} samples", a.len()),
    )
}

// ---------------------------------------------------------------- 8

fn overall_rank(t: &Tables, strategy: &str) -> Option<f64> {
    t.overall_ranks.iter().find(|r| r.strategy == strategy).map(|r| r.average_rank)
}

fn mean_mse(t: &Tables, strategy: &str) -> Option<f64> {
    t.mse.iter().find(|r| r.strategy == strategy).map(|r| r.mean_mse)
}

fn desk_comparison() -> Outcome {
    let started = Instant::now();
    let cfg = ExperimentConfig::profile(Profile::Desk);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = run_experiment(&cfg, RunOptions { workers, progress: false }).map_err(|e| e.to_string())?;
    let t = mismo::experiment::compute_tables(&out.records);
    let secs = started.elapsed().as_secs_f64();
    let mut lines = vec![format!("{} runs ({} failed), {:.0}s on {workers} worker(s)", out.records.len(), out.failures(), secs)];
    for m in &t.mse {
        lines.push(format!(
            "    {:<10} mse {:.4e}  rank {:.3}",
            m.strategy,
            m.mean_mse,
            overall_rank(&t, &m.strategy).unwrap_or(f64::NAN)
        ));
    }
    let pso = StrategySpec::PsoMismo.name();
    let (Some(pso_mse), Some(it_mse), Some(pso_rank)) = (mean_mse(&t, pso), mean_mse(&t, "iterated"), overall_rank(&t, pso))
    else {
        return Err(format!("missing strategies in tables\n{}", lines.join("\n")));
    };
    let best_mismo = cfg
        .mismo_s
        .iter()
        .filter_map(|s| overall_rank(&t, &format!("mismo-{s}")).map(|r| (r, *s)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let Some((mismo_rank, s)) = best_mismo else {
        return Err(format!("no fixed-s MISMO ranks\n{}", lines.join("\n")));
    };
    let detail = format!(
        "PSO-MISMO mse {pso_mse:.4e} vs iterated {it_mse:.4e}; rank {pso_rank:.3} vs best MISMO (s={s}) {mismo_rank:.3}\n{}",
        lines.join("\n")
    );
    check(pso_mse < it_mse && pso_rank <= mismo_rank, detail.clone(), detail)
}

// ---------------------------------------------------------------- 9

fn budget_fairness() -> Outcome {
    let mut lines = Vec::new();
    for (pop, gens) in [(10, 30), (20, 100), (7, 3)] {
        let pso_count = CountingFitness::new(zero_count_squared);
        let ga_count = CountingFitness::new(zero_count_squared);
        let swarm = SwarmConfig { swarm_size: pop, iterations: gens, seed: 1, ..SwarmConfig::default() };
        let ga = GaConfig { population: pop, iterations: gens, seed: 1, ..GaConfig::default() };
        let p = pso_run(&pso_count, 17, &swarm).map_err(|e| e.to_string())?;
        let g = ga_run(&ga_count, 17, &ga).map_err(|e| e.to_string())?;
        let top = GaConfig { selection: Selection::TopPercent(0.3), ..ga };
        let top_count = CountingFitness::new(zero_count_squared);
        ga_run(&top_count, 17, &top).map_err(|e| e.to_string())?;
        if pso_count.calls() != ga_count.calls()
            || ga_count.calls() != top_count.calls()
            || p.evaluations != pso_count.calls()
            || g.evaluations != ga_count.calls()
        {
            return Err(format!(
                "(pop {pop}, T {gens}): PSO {} calls, GA {} calls, GA top-% {} calls",
                pso_count.calls(),
                ga_count.calls(),
                top_count.calls()
            ));
        }
        lines.push(format!("({pop},{gens})→{}", pso_count.calls()));
    }
    Ok(format!("PSO and GA call counts equal: {}", lines.join(" ")))
}

// ---------------------------------------------------------------- 10

const TINY: &str = r#"
    profile = "desk"
    seed = 99
    horizon = 6
    holdout_len = 6
    repetitions = 2
    mismo.s = [2, 3]
    pso.swarm_size = 4
    pso.iterations = 2
    ga.population = 4
    ga.iterations = 2
    dataset.generator = "logistic"
    dataset.rows = [1, 2]
    fnn.max_epochs = 15
    featsel.max_lag = 5
"#;

fn run_to(dir: &Path, cfg: &ExperimentConfig, workers: usize) -> Result<(), String> {
    let out = run_experiment(cfg, RunOptions { workers, progress: false }).map_err(|e| e.to_string())?;
    write_outputs(dir, cfg, &out).map_err(|e| e.to_string())?;
    Ok(())
}

fn determinism_and_leakage() -> Outcome {
    let cfg = ExperimentConfig::from_toml_str(TINY, None).map_err(|e| e.to_string())?;
    let (one, two) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_to(one.path(), &cfg, 1)?;
    run_to(two.path(), &cfg, 3)?;
    for f in OUTPUT_FILES {
        let a = std::fs::read(one.path().join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(two.path().join(f)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{f} differs between 1 and 3 workers"));
        }
    }
    let (_, series) = load_dataset(&cfg.dataset).map_err(|e| e.to_string())?;
    let mut audited = 0;
    for s in &series {
        for rep in 0..cfg.repetitions {
            let report = leakage_audit(&cfg, s, rep).map_err(|e| e.to_string())?;
            if !report.clean() {
                return Err(format!("hold-out leaks into {}: {:?}", s.name(), report.differences));
            }
            audited += 1;
        }
    }
    Ok(format!(
        "{} output files byte-identical at 1 and 3 workers; {audited} leakage audits clean",
        OUTPUT_FILES.len()
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "partition codec", partition_codec),
        (2, "PSO mechanics", pso_mechanics),
        (3, "optimizer convergence", optimizer_convergence),
        (4, "FNN numerics", fnn_numerics),
        (5, "metric oracles", metric_oracles),
        (6, "strategy special cases", strategy_special_cases),
        (7, "generators", generators),
        (8, "desk comparative run", desk_comparison),
        (9, "budget fairness", budget_fairness),
        (10, "determinism and leakage", determinism_and_leakage),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        match run() {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
