//! Exit criteria. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cann::discovery::{classify, default_threshold, ModelFamily};
use cann::energy::{energy, energy_weight_gradient, Term, N_PARAMS};
use cann::kinematics::{deformation_gradient, general_invariants, invariants, DiagonalDeformation};
use cann::optimizer::{loss_gradient, mse_loss};
use cann::stress::{nominal_stress, stress_weight_gradient};
use cann::{
    builtin_dataset, mlp_forward, mlp_gradient, mlp_train, recover_named_model, train_cann, AdamConfig, CannWeights,
    Dataset, DeformationMode, MlpParams, NamedModel, Report,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DISCOVERY_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("multi-mode discovery at 20 C", discovery_20),
        ("multi-mode discovery at 50 C", discovery_50),
        ("loss decay on single-mode sets", loss_decay),
        ("gradient oracles", gradient_oracles),
        ("physical invariants", physical_invariants),
        ("named-model equivalence", named_models),
        ("baseline network fit and saturation", baseline),
        ("kinematics identities", kinematics),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn run_fit(data: &str, seed: u64, out: &Path) -> Result<(Report, Duration), String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_cann"))
        .args(["fit", "--data", data, "--seed", &seed.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !status.status.success() {
        return Err(format!("fit exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
    }
    let text = std::fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?;
    Ok((Report::from_json(&text).map_err(|e| e.to_string())?, elapsed))
}

/// Runs `fit` for every discovery seed; `check` returns the per-seed verdict
/// and a short description of the run.
fn discovery(data: &str, check: impl Fn(&Report) -> (bool, String)) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut hits = 0;
    let mut runs = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in DISCOVERY_SEEDS {
        let (report, elapsed) = run_fit(data, seed, &dir.path().join(seed.to_string()))?;
        slowest = slowest.max(elapsed);
        let (ok, desc) = check(&report);
        hits += ok as usize;
        runs.push(format!("seed {seed}: {desc}"));
    }
    let detail = format!(
        "{hits}/{} seeds match, slowest {:.2} s [{}]",
        DISCOVERY_SEEDS.len(),
        slowest.as_secs_f64(),
        runs.join("; ")
    );
    if hits * 2 > DISCOVERY_SEEDS.len() && slowest < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn param(report: &Report, name: &str) -> f64 {
    report.physical_params.get(name).map_or(0.0, |p| p.value)
}

fn active_names(report: &Report) -> Vec<&'static str> {
    report.active_terms.iter().map(|t| t.term.name()).collect()
}

fn discovery_20() -> Outcome {
    let expected: BTreeSet<Term> = [Term::LinI1, Term::ExpLinI1, Term::ExpLinI2].into();
    discovery("treloar20_multi", |r| {
        let active: BTreeSet<Term> = r.active_terms.iter().map(|t| t.term).collect();
        let (mu1, a1, b1) = (param(r, "mu1"), param(r, "a1"), param(r, "b1"));
        let ok = active == expected && within(mu1, 0.2370, 0.25) && within(a1, 0.0582, 0.5) && within(b1, 0.0387, 0.5);
        (ok, format!("{:?} mu1 {mu1:.4} a1 {a1:.4} b1 {b1:.4}", active_names(r)))
    })
}

fn discovery_50() -> Outcome {
    discovery("treloar50_multi", |r| {
        let mu1 = param(r, "mu1");
        let exp_i1 = r.active_terms.iter().any(|t| t.term == Term::ExpLinI1);
        (within(mu1, 0.2830, 0.25) && exp_i1, format!("mu1 {mu1:.4} exp_lin_i1 active: {exp_i1}"))
    })
}

fn loss_decay() -> Outcome {
    let sets = ["treloar20_ut", "treloar50_ut", "mooney_gum_ut", "mooney_tread_ut", "blatzko_foam_ut", "blatzko_rubber_ut"];
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for name in sets {
        let data = builtin_dataset(name).map_err(|e| e.to_string())?;
        let config = AdamConfig { epochs: 10_000, ..AdamConfig::default() };
        let r = train_cann(&data, &config).map_err(|e| format!("{name}: {e}"))?;
        let orders = (r.loss_history[0] / r.final_loss).log10();
        worst = worst.min(orders);
        parts.push(format!("{name} {orders:.2}"));
    }
    let detail = format!("orders of reduction in 10000 epochs: {}", parts.join(", "));
    if worst >= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-6;

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)
}

/// Largest componentwise relative error, with components far below the
/// largest entry measured against that entry.
fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().chain(numeric).fold(0.0_f64, |m, v| m.max(v.abs()));
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3 * scale).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn positive_weights(rng: &mut ChaCha8Rng) -> CannWeights {
    let w: [f64; N_PARAMS] = std::array::from_fn(|k| match k {
        1 | 7 => rng.gen_range(0.01..0.3),
        4 => rng.gen_range(0.001..0.02),
        10 => rng.gen_range(1e-5..2e-4),
        _ => rng.gen_range(0.01..1.0),
    });
    CannWeights::from_array(&w)
}

fn fd_weights(w: &CannWeights, f: impl Fn(&CannWeights) -> f64) -> Vec<f64> {
    let a = w.to_array();
    (0..N_PARAMS)
        .map(|k| {
            central(
                |x| {
                    let mut b = a;
                    b[k] = x;
                    f(&CannWeights::from_array(&b))
                },
                a[k],
            )
        })
        .collect()
}

fn gradient_oracles() -> Outcome {
    const SAMPLES: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0_f64; 4];
    let e = |x: cann::CannError| x.to_string();

    for _ in 0..SAMPLES {
        let w = positive_weights(&mut rng);
        let (i1, i2) = (rng.gen_range(3.0..12.0), rng.gen_range(3.0..12.0));
        let numeric = fd_weights(&w, |v| energy(v, i1, i2));
        worst[0] = worst[0].max(rel_error(&energy_weight_gradient(&w, i1, i2), &numeric));

        let mode = DeformationMode::ALL[rng.gen_range(0..3)];
        let lambda = rng.gen_range(1.05..2.5);
        let numeric = fd_weights(&w, |v| nominal_stress(v, mode, lambda).unwrap().p1);
        worst[1] = worst[1].max(rel_error(&stress_weight_gradient(&w, mode, lambda).map_err(e)?, &numeric));
    }

    // Multi-mode points up to λ = 3, where a step of 1e-6 still resolves the
    // biaxial quadratic exponential.
    let full = builtin_dataset("treloar20_multi").map_err(e)?;
    let data = Dataset::new(full.samples.into_iter().filter(|s| s.lambda <= 3.0).collect(), "subset").map_err(e)?;
    for _ in 0..SAMPLES {
        let w = positive_weights(&mut rng);
        let numeric = fd_weights(&w, |v| mse_loss(v, &data).unwrap());
        worst[2] = worst[2].max(rel_error(&loss_gradient(&w, &data).map_err(e)?, &numeric));
    }

    for k in 0..SAMPLES {
        let params = MlpParams::random(&[1, 8, 1], k as u64).map_err(e)?;
        let lambda = rng.gen_range(0.5..4.0);
        let flat = params.flatten();
        let numeric: Vec<f64> = (0..flat.len())
            .map(|i| {
                central(
                    |x| {
                        let mut p = params.clone();
                        let mut f = flat.clone();
                        f[i] = x;
                        p.set_from_flat(&f);
                        mlp_forward(&p, lambda).unwrap()
                    },
                    flat[i],
                )
            })
            .collect();
        worst[3] = worst[3].max(rel_error(&mlp_gradient(&params, lambda).map_err(e)?.flatten(), &numeric));
    }

    let detail = format!(
        "max rel err over {SAMPLES} samples each: energy {:.1e}, stress {:.1e}, loss {:.1e}, mlp {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    );
    if worst.iter().all(|&x| x < FD_TOL) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn physical_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid: Vec<f64> = (0..=360).map(|k| 1.0 + 9.0 * k as f64 / 360.0).collect();
    let mut worst_reference: f64 = 0.0;
    for n in 0..1000 {
        let w = CannWeights::from_array(&std::array::from_fn(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        }));
        if energy(&w, 3.0, 3.0) != 0.0 {
            return Err(format!("vector {n}: psi(3, 3) = {:e}", energy(&w, 3.0, 3.0)));
        }
        for _ in 0..20 {
            let (i1, i2) = (rng.gen_range(3.0..40.0), rng.gen_range(3.0..40.0));
            let psi = energy(&w, i1, i2);
            if psi.is_nan() || psi < 0.0 {
                return Err(format!("vector {n}: psi({i1}, {i2}) = {psi}"));
            }
        }
        for mode in DeformationMode::ALL {
            let p = nominal_stress(&w, mode, 1.0).map_err(|e| e.to_string())?;
            worst_reference = worst_reference.max(p.p1.abs()).max(p.p2.unwrap_or(0.0).abs());
            let mut prev = 0.0;
            for &l in &grid {
                let p = nominal_stress(&w, mode, l).map_err(|e| e.to_string())?.p1;
                if p.is_nan() || p < prev {
                    return Err(format!("vector {n}, {mode}: P1({l}) = {p} below {prev}"));
                }
                prev = p;
            }
        }
    }
    let detail = format!("1000 weight vectors, max |P(1)| = {worst_reference:e}, psi(3,3) = 0, psi >= 0, P1 non-decreasing on [1, 10]");
    if worst_reference < 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn uniaxial_textbook(m: &NamedModel, l: f64) -> f64 {
    let g = l - 1.0 / (l * l);
    let x1 = l * l + 2.0 / l - 3.0;
    match *m {
        NamedModel::NeoHooke { mu } => mu * g,
        NamedModel::BlatzKo { mu } => mu * (1.0 - 1.0 / (l * l * l)),
        NamedModel::MooneyRivlin { mu1, mu2 } => (mu1 + mu2 / l) * g,
        NamedModel::Yeoh2 { a1, a2 } => (a1 + 2.0 * a2 * x1) * g,
        NamedModel::Demiray { a, b } => a * (b * x1).exp() * g,
    }
}

fn named_models() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_stress: f64 = 0.0;
    let mut worst_param: f64 = 0.0;
    for family in ModelFamily::ALL {
        for _ in 0..100 {
            let mut p = || rng.gen_range(0.01..2.0);
            let m = match family {
                ModelFamily::NeoHooke => NamedModel::NeoHooke { mu: p() },
                ModelFamily::BlatzKo => NamedModel::BlatzKo { mu: p() },
                ModelFamily::MooneyRivlin => NamedModel::MooneyRivlin { mu1: p(), mu2: p() },
                ModelFamily::Yeoh2 => NamedModel::Yeoh2 { a1: p(), a2: p() },
                ModelFamily::Demiray => NamedModel::Demiray { a: p(), b: p() / 4.0 },
            };
            let w = recover_named_model(&m).map_err(|e| e.to_string())?;
            for k in 0..=100 {
                let l = 1.0 + 4.0 * k as f64 / 100.0;
                let p = nominal_stress(&w, DeformationMode::UniaxialTension, l).map_err(|e| e.to_string())?.p1;
                let t = uniaxial_textbook(&m, l);
                worst_stress = worst_stress.max((p - t).abs() / t.abs().max(1.0));
            }
            let found = classify(&w, default_threshold(&w)).map_err(|e| e.to_string())?;
            let Some(back) = found.named_model else {
                return Err(format!("{m:?} classified as {}", found.model_name));
            };
            if back.family() != family {
                return Err(format!("{m:?} classified as {:?}", back.family()));
            }
            for (x, y) in back.params().iter().zip(m.params()) {
                worst_param = worst_param.max((x - y).abs() / y);
            }
        }
    }
    let detail = format!("5 families x 100 models: stress rel err {worst_stress:.1e}, parameter round trip rel err {worst_param:.1e}");
    if worst_stress <= 1e-12 && worst_param <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn baseline() -> Outcome {
    let data = builtin_dataset("treloar20_ut").map_err(|e| e.to_string())?;
    let config = AdamConfig { epochs: 20_000, ..AdamConfig::default() };
    let r = mlp_train(&data, &config, &[1, 8, 1]).map_err(|e| e.to_string())?;
    let bound = r.params.saturation_bound();
    let mut largest: f64 = 0.0;
    for k in 0..=1200 {
        let l = 8.0 + 12.0 * k as f64 / 1200.0;
        largest = largest.max(mlp_forward(&r.params, l).map_err(|e| e.to_string())?.abs());
    }
    let detail = format!("MSE {:.3e} MPa^2 after 20000 epochs; max |output| on [8, 20] {largest:.4} <= bound {bound:.4}", r.final_loss);
    if r.final_loss < 1e-2 && largest <= bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kinematics() -> Outcome {
    let e = |x: cann::CannError| x.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_consistency: f64 = 0.0;
    let mut worst_dilation: f64 = 0.0;
    let w = CannWeights::from_array(&std::array::from_fn(|_| rng.gen_range(0.0..0.1)));
    for _ in 0..2000 {
        let mode = DeformationMode::ALL[rng.gen_range(0..3)];
        let lambda = rng.gen_range(0.5..10.0);
        let s = invariants(mode, lambda).map_err(e)?;
        let g = general_invariants(&deformation_gradient(mode, lambda).map_err(e)?, None).map_err(e)?;
        worst_consistency = worst_consistency.max((s.i1 - g.i1).abs() / g.i1).max((s.i2 - g.i2).abs() / g.i2);

        let ps = invariants(DeformationMode::PureShear, lambda).map_err(e)?;
        if ps.i1.to_bits() != ps.i2.to_bits() {
            return Err(format!("pure shear at {lambda}: I1 {} != I2 {}", ps.i1, ps.i2));
        }
        let et = nominal_stress(&w, DeformationMode::EquibiaxialTension, lambda).map_err(e)?;
        if et.p2 != Some(et.p1) {
            return Err(format!("equibiaxial at {lambda}: P1 {} != P2 {:?}", et.p1, et.p2));
        }

        let l: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.2..5.0));
        let c = rng.gen_range(0.1..10.0);
        let a = general_invariants(&DiagonalDeformation::new(l[0], l[1], l[2]).map_err(e)?, None).map_err(e)?;
        let b = general_invariants(&DiagonalDeformation::new(c * l[0], c * l[1], c * l[2]).map_err(e)?, None).map_err(e)?;
        worst_dilation = worst_dilation.max((a.ibar1 - b.ibar1).abs() / a.ibar1).max((a.ibar2 - b.ibar2).abs() / a.ibar2);
    }
    let detail = format!(
        "2000 samples: mode vs general invariants {worst_consistency:.1e}, dilation change of isochoric invariants {worst_dilation:.1e}, PS I1 = I2 and ET P1 = P2 bitwise"
    );
    if worst_consistency <= 1e-12 && worst_dilation <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for data in ["treloar20_multi", "mooney_gum_ut"] {
        let (a, b) = (dir.path().join(format!("{data}_a")), dir.path().join(format!("{data}_b")));
        run_fit(data, 11, &a)?;
        run_fit(data, 11, &b)?;
        let ra = std::fs::read(a.join("report.json")).map_err(|e| e.to_string())?;
        let rb = std::fs::read(b.join("report.json")).map_err(|e| e.to_string())?;
        if ra != rb {
            return Err(format!("{data}: report.json differs between identical runs"));
        }
        sizes.push(format!("{data} {} bytes", ra.len()));
    }
    Ok(format!("identical report.json from repeated fits ({})", sizes.join(", ")))
}
