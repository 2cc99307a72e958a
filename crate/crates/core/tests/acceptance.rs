//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail for documented
//! reasons (see the README); the process exits non-zero only when any other
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anthill::ahcoa::{self, layer_volume, AhcoaConfig, LayerShape};
use anthill::array_model::{pattern, AngleGrid, ArrayGeometry, Excitation, DEFAULT_FLOOR_DB};
use anthill::baselines::{alo, pso, AloConfig, PsoConfig};
use anthill::harness::bench::packing_sweep;
use anthill::harness::{execute, Algorithm, ObjectiveKind, RunConfig};
use anthill::objectives::{
    bowl_objective, sll_cost, tangential_bowl_objective, Bounds, Objective, SynthesisSpec,
};
use anthill::pattern_metrics::{analyze, LobeReport};
use anthill::trace::RunOutcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform 30- and 40-element counts are 28 and 38, not the reported 26
/// and 36.
const KNOWN_RED: &[u32] = &[2];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn uniform_report(m: usize, spacing: f64) -> (LobeReport, Duration) {
    let start = Instant::now();
    let p = pattern(
        &ArrayGeometry::uniform(m, spacing).unwrap(),
        &Excitation::uniform(m),
        &AngleGrid::default(),
        DEFAULT_FLOOR_DB,
    )
    .unwrap();
    let report = analyze(&p, DEFAULT_FLOOR_DB).unwrap();
    (report, start.elapsed())
}

/// Interior nulls of a uniform array: ψ = 2πk/M strictly inside
/// (−2π·d, 2π·d), k not a multiple of M.
fn interior_null_oracle(m: usize, spacing: f64) -> usize {
    let limit = 2.0 * PI * spacing;
    let mut count = 0;
    let kmax = (spacing * m as f64).ceil() as i64 + 1;
    for k in -kmax..=kmax {
        if k % m as i64 == 0 {
            continue;
        }
        let psi = 2.0 * PI * k as f64 / m as f64;
        if psi.abs() < limit * (1.0 - 1e-12) {
            count += 1;
        }
    }
    count
}

fn criterion_1() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, s, expected) in [(10, 1.1, 18), (10, 0.6, 10), (10, 0.5, 8), (11, 0.3, 6)] {
        let (r, t) = uniform_report(m, s);
        ok &= r.side_lobe_count == expected && t < Duration::from_secs(1);
        parts.push(format!("({m},{s})={} in {:.0?}", r.side_lobe_count, t));
    }
    let (r, t) = uniform_report(11, 0.5);
    let oracle = interior_null_oracle(11, 0.5);
    ok &= r.side_lobe_count == oracle && oracle == 10 && t < Duration::from_secs(1);
    parts.push(format!(
        "(11,0.5)={} oracle {oracle} (reported 11, flagged)",
        r.side_lobe_count
    ));
    verdict(ok, parts.join(", "))
}

fn criterion_2() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, reported) in [(20, 18), (30, 26), (40, 36)] {
        let (r, _) = uniform_report(m, 0.5);
        ok &= r.side_lobe_count == reported;
        parts.push(format!(
            "{m}: computed {} reported {reported} oracle {}",
            r.side_lobe_count,
            interior_null_oracle(m, 0.5)
        ));
    }
    let (r, _) = uniform_report(10, 0.5);
    parts.push(format!(
        "10: computed {} (reported 10, flagged)",
        r.side_lobe_count
    ));
    verdict(ok, parts.join(", "))
}

fn fnbw_oracle(m: usize, s: f64) -> f64 {
    2.0 * (90.0 - (1.0 / (m as f64 * s)).acos().to_degrees())
}

fn criterion_3() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, expected) in [(10, 23.07), (20, 11.48)] {
        let (r, _) = uniform_report(m, 0.5);
        let f = r.fnbw_deg.unwrap_or(f64::NAN);
        let oracle = fnbw_oracle(m, 0.5);
        ok &= (f - expected).abs() <= 0.1 && (f - oracle).abs() <= 0.1;
        parts.push(format!("{m}: {f:.3} (oracle {oracle:.3})"));
    }
    verdict(ok, parts.join(", "))
}

fn criterion_4() -> Verdict {
    let (r, _) = uniform_report(10, 0.5);
    let sll = r.peak_sll_db.unwrap_or(f64::NAN);
    // dense brute force over the first side lobe of |sin(Mψ/2) / (M sin(ψ/2))|
    let m = 10.0;
    let (lo, hi) = (2.0 * PI / m, 4.0 * PI / m);
    let n = 2_000_000;
    let peak = (0..=n)
        .map(|i| {
            let psi = lo + (hi - lo) * i as f64 / n as f64;
            ((m * psi / 2.0).sin() / (m * (psi / 2.0).sin())).abs()
        })
        .fold(0.0, f64::max);
    let oracle = 20.0 * peak.log10();
    verdict(
        (sll - (-12.97)).abs() <= 0.05 && (sll - oracle).abs() <= 0.05,
        format!("{sll:.4} dB (oracle {oracle:.4} dB)"),
    )
}

fn random_bowl(rng: &mut ChaCha8Rng) -> Objective {
    let dim = rng.random_range(1..=6);
    let half = rng.random_range(1.0..100.0);
    let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-half..half)).collect();
    bowl_objective(Bounds::uniform(dim, -half, half).unwrap(), center).unwrap()
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = [0usize; 3];
    for _ in 0..100 {
        let obj = random_bowl(&mut rng);
        let seed = rng.random::<u64>();
        let population = rng.random_range(2..=20);
        let iterations = rng.random_range(10..=80);
        let runs: [RunOutcome; 3] = [
            ahcoa::run(
                &AhcoaConfig {
                    population,
                    max_iterations: iterations,
                    seed,
                    ..Default::default()
                },
                &obj,
            )
            .unwrap(),
            alo::run(
                &AloConfig {
                    population,
                    max_iterations: iterations,
                    seed,
                    ..Default::default()
                },
                &obj,
            )
            .unwrap(),
            pso::run(
                &PsoConfig {
                    population,
                    max_iterations: iterations,
                    seed,
                    ..Default::default()
                },
                &obj,
            )
            .unwrap(),
        ];
        for (k, out) in runs.iter().enumerate() {
            if !out.trace.is_non_increasing() {
                bad[k] += 1;
            }
        }
    }
    let t = start.elapsed();
    verdict(
        bad == [0, 0, 0] && t < Duration::from_secs(30),
        format!(
            "100 configs, increasing traces ahcoa/alo/pso = {}/{}/{}, {t:.1?}",
            bad[0], bad[1], bad[2]
        ),
    )
}

fn criterion_6() -> Verdict {
    let obj = tangential_bowl_objective(Bounds::uniform(2, -500.0, 500.0).unwrap()).unwrap();
    let finals: Vec<f64> = (1..=5)
        .map(|seed| {
            let config = AhcoaConfig {
                population: 25,
                max_iterations: 1200,
                seed,
                ..Default::default()
            };
            ahcoa::run(&config, &obj).unwrap().best_fitness
        })
        .collect();
    let hits = finals.iter().filter(|&&f| f <= 1e-3).count();
    let shown: Vec<String> = finals.iter().map(|f| format!("{f:.2e}")).collect();
    verdict(
        hits >= 4,
        format!("{hits}/5 seeds ≤ 1e-3: [{}]", shown.join(", ")),
    )
}

/// Peak SLL of the best design per seed, with a missing side lobe counted
/// as the floor; plus the slowest run.
fn synthesis_runs(spec: &SynthesisSpec) -> (Vec<f64>, Duration) {
    let obj = sll_cost(spec).unwrap();
    let mut slowest = Duration::ZERO;
    let sll = (1..=5)
        .map(|seed| {
            let start = Instant::now();
            let config = AhcoaConfig {
                max_iterations: 1000,
                seed,
                ..Default::default()
            };
            let out = ahcoa::run(&config, &obj).unwrap();
            slowest = slowest.max(start.elapsed());
            let report = spec.report(&out.best_vector).unwrap();
            report.peak_sll_db.unwrap_or(spec.floor_db)
        })
        .collect();
    (sll, slowest)
}

fn criterion_7() -> Verdict {
    let free = SynthesisSpec::amplitude(10, 0.5, -40.0).unwrap();
    let mut capped = free.clone();
    capped.fnbw_cap_deg = Some(50.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec) in [("no FNBW cap", &free), ("FNBW cap 50°", &capped)] {
        let (sll, slowest) = synthesis_runs(spec);
        let hits = sll.iter().filter(|&&s| s <= -20.0).count();
        ok &= hits >= 4 && slowest < Duration::from_secs(30);
        let shown: Vec<String> = sll.iter().map(|s| format!("{s:.1}")).collect();
        parts.push(format!(
            "{name}: {hits}/5 ≤ -20 dB [{}], slowest {slowest:.1?}",
            shown.join(", ")
        ));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let rows = packing_sweep(8).unwrap();
    let t = start.elapsed();
    let instances: u64 = rows.iter().map(|r| r.instances).sum();
    let violations: u64 = rows.iter().map(|r| r.bound_violations).sum();
    let worst = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    verdict(
        violations == 0 && rows.len() == 8 && t < Duration::from_secs(60),
        format!(
            "{instances} instances, {violations} with NF > 2·OPT, worst ratio {worst}, {t:.1?}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let b = 10f64.powf(rng.random_range(-3.0..3.0));
        let h = 10f64.powf(rng.random_range(-3.0..3.0));
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let prism = layer_volume(LayerShape::Prism {
            base_area: b,
            height: h,
        })
        .unwrap();
        let pyramid = layer_volume(LayerShape::Pyramid {
            base_area: b,
            height: h,
        })
        .unwrap();
        let cone = layer_volume(LayerShape::Cone {
            radius: r,
            height: h,
        })
        .unwrap();
        worst = worst.max(((pyramid - prism / 3.0) / pyramid).abs());
        worst = worst.max(((cone - PI * r * r * h / 3.0) / cone).abs());
    }
    verdict(
        worst <= 1e-12,
        format!("max relative error {worst:.1e} over 10000 draws"),
    )
}

fn criterion_10() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for algorithm in [Algorithm::Ahcoa, Algorithm::Alo, Algorithm::Pso] {
        for objective in [ObjectiveKind::TangentialBowl, ObjectiveKind::Sll] {
            let mut config = RunConfig::default();
            config.run.algorithm = algorithm;
            config.run.objective = objective;
            config.run.seed = 17;
            config.run.iterations = Some(60);
            let a = execute(&config).unwrap();
            let b = execute(&config).unwrap();
            let same = a.best_fitness.to_bits() == b.best_fitness.to_bits()
                && a.best_vector == b.best_vector
                && a.trace == b.trace;
            let verified = a.verify().is_ok();
            ok &= same && verified;
            parts.push(format!(
                "{algorithm}/{objective} {}",
                if same && verified { "ok" } else { "MISMATCH" }
            ));
        }
    }
    verdict(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        let known = if !v.pass && KNOWN_RED.contains(&id) {
            " (known)"
        } else {
            ""
        };
        println!("criterion {id:>2}: {status}{known}: {}", v.detail);
        if !v.pass && known.is_empty() {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
