//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mfeh::harvester::{demag_factor, effective_permeability, matched_load_power, CoilSpec};
use mfeh::magnetics::{
    field_lab_loop, field_two_rail, LabLoopGeometry, RailSiteGeometry, SourceCurrent,
};
use mfeh::optimize::lab_data::{lab_model_coefficients, LAB_LOOP_B_M};
use mfeh::optimize::{fit_loop_length, predict_coefficient, CoilCatalog};
use mfeh::scenario::{
    equivalent_current, feasibility_margin, simulate_period, CurrentSegment, NodeBudget,
    SiteConfig, Timetable, TrainPassEvent,
};
use mfeh::traces::{integrate_energy, power_trace, PowerSeries, Sample, Trace};

const MU0: f64 = 4.0e-7 * PI;
const F_LOW: f64 = 50.0 / 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn two_rail_b(i: f64, r_n: f64, d_rr: f64) -> f64 {
    let src = SourceCurrent::new(i, F_LOW).unwrap();
    let geom = RailSiteGeometry::new(r_n, d_rr).unwrap();
    field_two_rail(&src, &geom).b_rms
}

fn c1_free_air_field() -> Outcome {
    let b = two_rail_b(100.0, 0.5, 1.435);
    let dev = rel(b, 25.2e-6);
    outcome(
        dev <= 0.005,
        format!(
            "B = {:.4} µT, deviation {:.3}% (limit 0.5%)",
            b * 1e6,
            dev * 100.0
        ),
    )
}

fn fitted_a() -> f64 {
    fit_loop_length(
        &lab_model_coefficients(),
        &CoilCatalog::presets(),
        LAB_LOOP_B_M,
        (0.1, 10.0),
    )
    .unwrap()
    .a
}

fn c2_lab_model_reproduction() -> Outcome {
    let a = fitted_a();
    let catalog = CoilCatalog::presets();
    let published = lab_model_coefficients();
    let mut worst: f64 = 0.0;
    for row in &published.rows {
        let lab = LabLoopGeometry::new(row.r_m, a, LAB_LOOP_B_M).unwrap();
        let k = predict_coefficient(catalog.get(&row.coil).unwrap(), &lab, row.f_hz).unwrap();
        worst = worst.max(rel(k, row.k));
    }
    let a_ok = (a - 1.2).abs() <= 0.1;
    outcome(
        a_ok && worst <= 0.015 && published.rows.len() == 16,
        format!(
            "a = {a:.4} m (1.2 ± 0.1), worst of 16 coefficients {:.3}% (limit 1.5%)",
            worst * 100.0
        ),
    )
}

fn c3_headline_power() -> Outcome {
    let a = fitted_a();
    let lab = LabLoopGeometry::new(0.25, a, LAB_LOOP_B_M).unwrap();
    let coil = CoilSpec::coil_a();
    let power = |f: f64| {
        let src = SourceCurrent::new(200.0, f).unwrap();
        matched_load_power(&coil, &field_lab_loop(&src, &lab), f)
    };
    let (p_low, p_high) = (power(F_LOW), power(50.0));
    let d_low = rel(p_low, 4.15e-3);
    let ratio_err = rel(p_high, 9.0 * p_low);
    let d_high = rel(p_high, 40.5e-3);
    outcome(
        d_low <= 0.02 && ratio_err <= 1e-12 && d_high <= 0.15,
        format!(
            "P(16⅔ Hz) = {:.4} mW ({:.2}%, limit 2%), P(50)/P(16⅔) − 9 = {:.1e}, P(50 Hz) = {:.2} mW ({:.1}% from 40.5, limit 15%)",
            p_low * 1e3,
            d_low * 100.0,
            ratio_err,
            p_high * 1e3,
            d_high * 100.0
        ),
    )
}

fn random_coil(rng: &mut ChaCha8Rng) -> CoilSpec {
    if rng.gen_bool(0.5) {
        CoilSpec::coil_a()
    } else {
        CoilSpec::coil_b()
    }
}

fn c4_scaling_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let coil = random_coil(&mut rng);
        let f = rng.gen_range(1.0..100.0);
        let i = rng.gen_range(1.0..1000.0);
        let power = |i: f64, f: f64, lab: bool| {
            let src = SourceCurrent::new(i, f).unwrap();
            let h = if lab {
                field_lab_loop(&src, &LabLoopGeometry::new(0.6, 1.2, 3.0).unwrap())
            } else {
                field_two_rail(&src, &RailSiteGeometry::new(0.6, 1.435).unwrap())
            };
            matched_load_power(&coil, &h, f)
        };
        for lab in [false, true] {
            worst = worst.max(rel(power(i, 3.0 * f, lab), 9.0 * power(i, f, lab)));
            worst = worst.max(rel(power(2.0 * i, f, lab), 4.0 * power(i, f, lab)));
        }
    }
    outcome(
        worst <= 1e-10,
        format!("4000 cases per law, worst relative error {worst:.2e} (limit 1e-10)"),
    )
}

fn c5_permeability_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..5000 {
        let mu_r = 10f64.powf(rng.gen_range(0.0..4.0));
        let n_d = rng.gen_range(0.0..=1.0);
        let mu_e = effective_permeability(mu_r, n_d).unwrap();
        if mu_r > 1.0 {
            let back = effective_permeability(mu_r, demag_factor(mu_r, mu_e).unwrap()).unwrap();
            worst = worst.max(rel(back, mu_e));
        }
    }
    let nd_a = demag_factor(250.0, 23.5).unwrap();
    let nd_b = demag_factor(250.0, 31.3).unwrap();
    let mu_a = effective_permeability(250.0, 0.038707).unwrap();
    let mu_b = effective_permeability(250.0, 0.028061).unwrap();
    let table_ok = rel(nd_a, 0.038707) <= 1e-3
        && rel(nd_b, 0.028061) <= 1e-3
        && rel(mu_a, 23.5) <= 1e-3
        && rel(mu_b, 31.3) <= 1e-3;
    outcome(
        worst <= 1e-12 && table_ok,
        format!(
            "round trip worst {worst:.2e} (limit 1e-12); N_d = {nd_a:.6}, {nd_b:.6}; μe = {mu_a:.4}, {mu_b:.4} (limit 0.1%)"
        ),
    )
}

fn c6_trace_pipeline() -> Outcome {
    let peak = |v: f64| {
        let t = Trace::new(vec![Sample { t: 0.0, v }, Sample { t: 1.0, v }], 17.2e3).unwrap();
        power_trace(&t).p[0]
    };
    let (p2, p417) = (peak(2.0), peak(4.17));
    let peaks_ok = (p2 - 233e-6).abs() <= 1e-6 && (p417 - 1.01e-3).abs() <= 1e-5;

    let t: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.1).collect();
    let constant = PowerSeries::new(t.clone(), vec![1e-3; t.len()]).unwrap();
    let ramp = PowerSeries::new(t.clone(), t.iter().map(|x| 1e-5 * x).collect()).unwrap();
    let e_const = integrate_energy(&constant, 0.0, 100.0).unwrap();
    let e_ramp = integrate_energy(&ramp, 0.0, 100.0).unwrap();
    let e_part = integrate_energy(&ramp, 10.55, 70.25).unwrap();
    let part_exact = 0.5e-5 * (70.25f64.powi(2) - 10.55f64.powi(2));
    let worst = rel(e_const, 0.1)
        .max(rel(e_ramp, 0.05))
        .max(rel(e_part, part_exact));
    outcome(
        peaks_ok && worst <= 1e-9,
        format!(
            "2 V → {:.2} µW, 4.17 V → {:.4} mW; trapezoid fixtures worst {worst:.1e} (limit 1e-9)",
            p2 * 1e6,
            p417 * 1e3
        ),
    )
}

/// Daily total for a timetable of `n_f` freight passes at `e_f` J and `n_p`
/// passenger passes at `e_p` J, built through the scenario pipeline.
fn daily_total(coil: CoilSpec, n_f: usize, e_f: f64, n_p: usize, e_p: f64) -> (f64, f64) {
    let site = SiteConfig {
        geometry: RailSiteGeometry::new(0.5, 1.435).unwrap(),
        frequency: F_LOW,
        coil,
    };
    let mut events = Vec::new();
    let i_f = equivalent_current(&site, e_f, 540.0, 1.0).unwrap();
    let i_p = equivalent_current(&site, e_p, 120.0, 1.0).unwrap();
    for k in 0..n_f {
        let seg = vec![CurrentSegment {
            duration: 540.0,
            i_rms: i_f,
        }];
        events.push(
            TrainPassEvent::new(format!("freight-{k}"), 3600.0 + 7200.0 * k as f64, seg).unwrap(),
        );
    }
    for k in 0..n_p {
        let seg = vec![CurrentSegment {
            duration: 120.0,
            i_rms: i_p,
        }];
        events.push(
            TrainPassEvent::new(format!("passenger-{k}"), 7200.0 + 14400.0 * k as f64, seg)
                .unwrap(),
        );
    }
    let tt = Timetable::daily(events).unwrap();
    let report = simulate_period(&site, &tt, &NodeBudget::daily_joules(0.132).unwrap()).unwrap();
    (report.daily_total, report.margin)
}

fn c7_daily_extrapolation() -> Outcome {
    let (a, margin_a) = daily_total(CoilSpec::coil_a(), 9, 0.109, 4, 0.040);
    let (b, _) = daily_total(CoilSpec::coil_b(), 9, 0.0804, 4, 0.026);
    let freight_only =
        feasibility_margin(0.981, &NodeBudget::daily_joules(0.132).unwrap()).unwrap();
    let round = |x: f64, places: i32| (x * 10f64.powi(places)).round() / 10f64.powi(places);
    let ok = round(a, 2) == 1.14 && round(b * 1e3, 0) == 828.0 && round(freight_only, 2) == 7.43;
    outcome(
        ok,
        format!(
            "coil A {a:.4} J → 1.14 J, coil B {:.1} mJ → 828 mJ, freight-only margin {freight_only:.4} → 7.43 (full-day margin {margin_a:.2})",
            b * 1e3
        ),
    )
}

/// Matched-load power written directly in terms of the effective radius.
fn closed_form_power(coil: &CoilSpec, f: f64, i: f64, r_n: f64, d_rr: f64) -> f64 {
    let r_f = r_n + d_rr;
    let r_e = 2.0 * r_n * r_f / (r_n + r_f);
    let v = coil.turns as f64 * coil.area * coil.mu_e * MU0 * f * i / r_e;
    v * v / (4.0 * coil.resistance)
}

/// Published-curve coefficient in µW/A² for conductor length `a`.
fn oracle_k(coil: &CoilSpec, f: f64, r: f64, a: f64, b: f64) -> f64 {
    let seg = |d: f64| a / (2.0 * PI * d * (4.0 * d * d + a * a).sqrt());
    let h = seg(r) - seg(r + b);
    let v = coil.turns as f64 * coil.area * coil.mu_e * MU0 * 2.0 * PI * f * h;
    v * v / (4.0 * coil.resistance) * 1e6
}

fn oracle_scan() -> f64 {
    let table = lab_model_coefficients();
    let mut best = (f64::INFINITY, 0.0);
    for mm in 100..=10_000 {
        let a = mm as f64 * 1e-3;
        let sse: f64 = table
            .rows
            .iter()
            .map(|row| {
                let coil = CoilSpec::preset(&row.coil).unwrap();
                (oracle_k(&coil, row.f_hz, row.r_m, a, LAB_LOOP_B_M).ln() - row.k.ln()).powi(2)
            })
            .sum();
        if sse < best.0 {
            best = (sse, a);
        }
    }
    best.1
}

fn c8_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let coil = random_coil(&mut rng);
        let f = rng.gen_range(1.0..100.0);
        let i = rng.gen_range(1.0..1000.0);
        let r_n = rng.gen_range(0.05..5.0);
        let d_rr = rng.gen_range(0.5..3.0);
        let src = SourceCurrent::new(i, f).unwrap();
        let h = field_two_rail(&src, &RailSiteGeometry::new(r_n, d_rr).unwrap());
        let p = matched_load_power(&coil, &h, f);
        worst = worst.max(rel(p, closed_form_power(&coil, f, i, r_n, d_rr)));
    }
    let a_fit = fitted_a();
    let a_scan = oracle_scan();
    outcome(
        worst <= 1e-10 && (a_fit - a_scan).abs() <= 1e-3,
        format!(
            "closed form worst {worst:.2e} (limit 1e-10); fit a = {a_fit:.5} m vs 1 mm scan {a_scan:.3} m (limit 1 mm)"
        ),
    )
}

fn c9_determinism() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let dir = tempfile::tempdir().unwrap();
    let run = |cmd: &str, cfg: &str, name: &str| -> Option<Vec<u8>> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_mfeh"))
            .args([cmd, "-c", data.join(cfg).to_str()?, "-o", out.to_str()?])
            .output()
            .ok()?;
        status
            .status
            .success()
            .then(|| std::fs::read(&out).ok())
            .flatten()
    };
    let s1 = run("sweep", "lab_sweep.cfg", "s1.csv");
    let s2 = run("sweep", "lab_sweep.cfg", "s2.csv");
    let m1 = run("simulate", "timetable.cfg", "m1.csv");
    let m2 = run("simulate", "timetable.cfg", "m2.csv");
    let ok = s1.is_some() && s1 == s2 && m1.is_some() && m1 == m2;
    outcome(
        ok,
        format!(
            "sweep {} bytes, simulate {} bytes, repeated runs identical: {ok}",
            s1.map_or(0, |v| v.len()),
            m1.map_or(0, |v| v.len())
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 free-air field", c1_free_air_field),
        ("2 lab model reproduction", c2_lab_model_reproduction),
        ("3 headline power", c3_headline_power),
        ("4 scaling laws", c4_scaling_laws),
        ("5 permeability algebra", c5_permeability_algebra),
        ("6 trace pipeline", c6_trace_pipeline),
        ("7 daily extrapolation", c7_daily_extrapolation),
        ("8 oracle equivalence", c8_oracle_equivalence),
        ("9 determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
