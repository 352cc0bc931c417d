//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mvop::asym::{asym_b2, closed_form_b2, closed_form_mh_matrix, mehler_heine, predicted_zero_points, AsymContext};
use mvop::exact::{det_zeros, nodes_for, stieltjes, RecurrenceTable};
use mvop::harness::commands::{compare_report, endpoint_deviation, entrywise_rel, off_block};
use mvop::harness::reference::{gegenbauer3_b, gegenbauer3_c, jacobi_c};
use mvop::harness::{cmd_validate, Regime, RunConfig};
use mvop::matcore::{CMatrix, C64};
use mvop::specfun::{bessel_j, Side};
use mvop::szego::{closed_form_unitaries, extrapolated_unitaries, factorization_residual, szego_for, unitarity_defect};
use mvop::weights::{
    gegenbauer_block2, gegenbauer_family, gegenbauer_upper_block, gegenbauer_y, jacobi_family, WeightFamily,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn jacobi() -> WeightFamily {
    jacobi_family(1.0, 2.0, 1.0, 1).unwrap()
}

fn block() -> WeightFamily {
    gegenbauer_block2(0.5).unwrap()
}

fn table(fam: &WeightFamily, nmax: usize) -> RecurrenceTable {
    stieltjes(fam, nmax, nodes_for(fam, nmax)).unwrap()
}

fn family_config(fam: &str) -> RunConfig {
    match fam {
        "jacobi" => RunConfig::default(),
        _ => RunConfig { family: "gegenbauer_block".into(), nu: 0.5, ..RunConfig::default() },
    }
}

fn closed_form_c_jacobi() -> Verdict {
    let t0 = Instant::now();
    let tab = table(&jacobi(), 31);
    let worst = (1..=30).map(|n| entrywise_rel(&tab.c[n], &jacobi_c(1.0, 2.0, 1.0, n))).fold(0.0, f64::max);
    let dt = t0.elapsed();
    check(
        worst <= 1e-9 && dt <= Duration::from_secs(5),
        format!("max entrywise rel {worst:.3e} (<= 1e-9), {dt:.2?} (<= 5 s)"),
    )
}

fn gegenbauer_explicit() -> Verdict {
    let y = gegenbauer_y(2);
    let u = gegenbauer_upper_block(2);
    let (mut rel, mut off) = (0.0f64, 0.0f64);
    for nu in [0.5, 1.0] {
        let tab = table(&gegenbauer_family(nu, 2).unwrap(), 31);
        for n in 1..=30 {
            rel = rel.max(entrywise_rel(&tab.b[n], &gegenbauer3_b(nu, n)));
            rel = rel.max(entrywise_rel(&tab.c[n], &gegenbauer3_c(nu, n)));
            for m in [&tab.b[n], &tab.c[n]] {
                off = off.max(off_block(&(&(&y * m) * &y.transpose()), u));
            }
        }
    }
    check(rel <= 1e-9 && off <= 1e-10, format!("max rel {rel:.3e} (<= 1e-9), off-block {off:.3e} (<= 1e-10)"))
}

fn b2_convergence() -> Verdict {
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, fam) in [("jacobi", jacobi()), ("block", block())] {
        let ctx = AsymContext::new(&fam).unwrap();
        let b2 = asym_b2(&ctx).unwrap();
        let closed = (&b2 - &closed_form_b2(&fam).unwrap()).fro_norm();
        let tab = table(&fam, 101);
        let dev = (&tab.b[100].scale_re(1e4) - &b2).fro_norm();
        let bound = 0.05 * b2.fro_norm().max(0.1);
        ok &= dev <= bound && closed <= 1e-12;
        parts.push(format!("{name}: dev {dev:.3e} (<= {bound:.3e}), closed form {closed:.1e}"));
    }
    let dt = t0.elapsed();
    ok &= dt <= Duration::from_secs(30);
    check(ok, format!("{}; {dt:.2?}", parts.join("; ")))
}

fn inner_rate() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for fam in ["jacobi", "block"] {
        let rep = compare_report(&family_config(fam), Regime::Inner).map_err(|e| e.to_string())?;
        let ratio = rep.ratio(20, 40).unwrap();
        let p = rep.exponent.unwrap_or(f64::NAN);
        ok &= (1.5..=2.8).contains(&ratio) && (0.7..=1.4).contains(&p);
        parts.push(format!("{fam}: E20/E40 {ratio:.3}, exponent {p:.3}"));
    }
    check(ok, parts.join("; "))
}

fn outer_rate() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for fam in ["jacobi", "block"] {
        for z in [[2.0, 0.0], [1.5, 0.5]] {
            let cfg = RunConfig { outer_n: vec![20, 40], outer_z: vec![z], outer_order: 1, ..family_config(fam) };
            let rep = compare_report(&cfg, Regime::Outer).map_err(|e| e.to_string())?;
            let ratio = rep.ratio(20, 40).unwrap();
            ok &= (3.2..=5.0).contains(&ratio);
            parts.push(format!("{fam} z={}: {ratio:.3}", C64::new(z[0], z[1])));
        }
    }
    check(ok, parts.join("; "))
}

fn figure1_entry() -> Verdict {
    let tab = table(&jacobi(), 21);
    let (mut m11, mut m21) = (0.0f64, 0.0f64);
    for i in 0..401 {
        let x = -0.9 + 1.8 * i as f64 / 400.0;
        let p = tab.eval_scaled(20, x).unwrap();
        m11 = m11.max(p[(0, 0)].norm());
        m21 = m21.max(p[(1, 0)].norm());
    }
    check(m21 <= 0.2 * m11, format!("max|(2,1)| / max|(1,1)| = {:.4} (<= 0.2)", m21 / m11))
}

fn szego_factorization() -> Verdict {
    let families = [
        jacobi_family(1.0, 2.0, 1.0, 1).unwrap(),
        jacobi_family(0.5, -0.3, 0.7, 1).unwrap(),
        jacobi_family(2.5, 0.0, 1.5, 1).unwrap(),
        gegenbauer_block2(0.5).unwrap(),
        gegenbauer_block2(1.0).unwrap(),
        gegenbauer_block2(2.0).unwrap(),
    ];
    let (mut fact, mut unit, mut agree) = (0.0f64, 0.0f64, 0.0f64);
    for fam in &families {
        let sd = szego_for(fam).unwrap();
        for i in 1..=201 {
            let x = -1.0 + 2.0 * i as f64 / 202.0;
            for side in [Side::Plus, Side::Minus] {
                fact = fact.max(factorization_residual(&sd, x, side).unwrap());
            }
        }
        let cf = closed_form_unitaries(fam).unwrap();
        unit = unit.max(unitarity_defect(&cf.u1)).max(unitarity_defect(&cf.um1));
        let ex = extrapolated_unitaries(&sd).unwrap();
        agree = agree.max((&cf.u1 - &ex.u1).fro_norm()).max((&cf.um1 - &ex.um1).fro_norm());
    }
    check(
        fact <= 1e-10 && unit <= 1e-12 && agree <= 1e-6,
        format!(
            "factorization {fact:.2e} (<= 1e-10), unitarity {unit:.2e} (<= 1e-12), extrapolation {agree:.2e} (<= 1e-6)"
        ),
    )
}

fn mehler_heine_decay() -> Verdict {
    let mut ok = true;
    let mut closed = 0.0f64;
    for fam in ["jacobi", "block"] {
        let cfg = family_config(fam);
        let rep = compare_report(&cfg, Regime::Mh).map_err(|e| e.to_string())?;
        ok &= rep.pass;
        let f = cfg.build_family().unwrap();
        let ctx = AsymContext::new(&f).unwrap();
        let m = closed_form_mh_matrix(&f).unwrap();
        for theta in [1.0f64, 2.0, 5.0] {
            let d: Vec<f64> = ctx.alphas().iter().map(|&a| theta.powf(-a) * bessel_j(a, theta).unwrap()).collect();
            let want = &m * &CMatrix::diag_real(&d);
            closed = closed.max((&mehler_heine(&ctx, theta).unwrap() - &want).fro_norm() / want.fro_norm());
        }
    }
    let decreasing = ok;
    ok &= closed <= 1e-12;
    check(ok, format!("strictly decreasing for all theta: {decreasing}; limit vs closed form {closed:.2e} (<= 1e-12)"))
}

fn endpoint_bessel() -> Verdict {
    let fam = jacobi();
    let ctx = AsymContext::new(&fam).unwrap();
    let tab = table(&fam, 81);
    let dev = |n: usize| endpoint_deviation(&ctx, &tab, n, (2.0 / n as f64).cos()).unwrap();
    let (d40, d80) = (dev(40), dev(80));
    check(d40 <= 0.15 && d80 < d40, format!("n=40: {d40:.4} (<= 0.15), n=80: {d80:.4}"))
}

fn nearest(pred: &[f64], z: f64) -> (usize, f64) {
    pred.iter().enumerate().map(|(i, p)| (i, (p - z).abs())).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
}

fn zeros() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, fam) in [("jacobi", jacobi()), ("block", block())] {
        let tab = table(&fam, 41);
        let mut d = Vec::new();
        for n in [20, 40] {
            let pred = predicted_zero_points(&fam, n).unwrap();
            let exact = det_zeros(&tab, n).unwrap();
            d.push(exact.iter().map(|&z| nearest(&pred, z).1).fold(0.0, f64::max));
        }
        ok &= d[1] < d[0];
        parts.push(format!("{name}: d20 {:.3e}, d40 {:.3e}", d[0], d[1]));
    }
    // pair exact zeros by their nearest predicted double zero
    let fam = block();
    let pred = predicted_zero_points(&fam, 20).unwrap();
    let exact = det_zeros(&table(&fam, 21), 20).unwrap();
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); pred.len()];
    for &z in &exact {
        groups[nearest(&pred, z).0].push(z);
    }
    let pairs: Vec<&Vec<f64>> = groups.iter().filter(|g| g.len() == 2).collect();
    let intra = pairs.iter().map(|g| g[1] - g[0]).fold(0.0, f64::max);
    let inter = pairs.windows(2).map(|w| w[1][0] - w[0][1]).fold(f64::INFINITY, f64::min);
    let sizes_ok = groups.iter().all(|g| g.len() <= 2);
    ok &= sizes_ok && !pairs.is_empty() && intra < inter;
    parts.push(format!("block pairs {}: max intra {intra:.3e} < min inter {inter:.3e}", pairs.len()));
    check(ok, parts.join("; "))
}

fn property_suite() -> Verdict {
    let configs = [
        ("jacobi", RunConfig::default()),
        ("gegenbauer_block", RunConfig { family: "gegenbauer_block".into(), ..RunConfig::default() }),
        ("gegenbauer", RunConfig { family: "gegenbauer".into(), ..RunConfig::default() }),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, cfg) in configs {
        let out = cmd_validate(&cfg).map_err(|e| e.to_string())?;
        let failed: Vec<&String> = out.summary.iter().filter(|l| l.starts_with("[FAIL]")).collect();
        ok &= out.pass;
        parts.push(format!("{name}: {} checks, {} failed {failed:?}", out.summary.len(), failed.len()));
    }
    check(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("closed-form C_n, Jacobi (1,2,1)", closed_form_c_jacobi),
        ("explicit B_n, C_n, 3x3 Gegenbauer", gegenbauer_explicit),
        ("n^2 B_n -> B_2", b2_convergence),
        ("inner asymptotics O(1/n)", inner_rate),
        ("outer asymptotics O(1/n^2) with first correction", outer_rate),
        ("small (2,1) entry at n = 20", figure1_entry),
        ("Szego factorization and endpoint unitaries", szego_factorization),
        ("Mehler-Heine convergence", mehler_heine_decay),
        ("endpoint Bessel asymptotics", endpoint_bessel),
        ("determinant zeros", zeros),
        ("property suite on default configs", property_suite),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
