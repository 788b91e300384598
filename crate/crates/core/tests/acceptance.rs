//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use biphoton::amplitudes::coincidence_closed;
use biphoton::modes::{mode_norm, mode_overlap};
use biphoton::oracle::{coincidence_quadrature_2d, coincidence_quadrature_radial};
use biphoton::pumps::{elementary_symmetric, pump_field_value, singularities_to_lg};
use biphoton::spectra::coefficient_of_variation;
use biphoton::specfun::{assoc_laguerre, assoc_laguerre_explicit};
use biphoton::{
    effective_dimension, find_equal_probability_gammas, gamma_scan, spiral_spectrum,
    subspace_probabilities, BeamWidths, EqualizationOptions, ModeIndex, PumpSpec, Singularity,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const GAMMAS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
/// A wing counts as suppressed when the other side carries this many
/// times its mass.
const SUPPRESSION_RATIO: f64 = 10.0;

fn m(ell: i32, p: u32) -> ModeIndex {
    ModeIndex::new(ell, p)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn six_singularities() -> Vec<Singularity> {
    [0.65, 1.85, 1.06, 0.54, 1.53, 1.24]
        .iter()
        .enumerate()
        .map(|(k, &rho)| Singularity::new(rho, (k + 1) as f64 * PI / 3.0).unwrap())
        .collect()
}

fn qu_quart() -> Vec<(ModeIndex, ModeIndex)> {
    (0..4).map(|l| (m(l, 0), m(l, 0))).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut cases = Vec::new();
    for lp in 0..=4 {
        for pp in 0..=3 {
            for ls in -6..=6 {
                for ps in 0..=3 {
                    for pi in 0..=3 {
                        for gs in GAMMAS {
                            for gi in GAMMAS {
                                cases.push((m(lp, pp), m(ls, ps), m(lp - ls, pi), gs, gi));
                            }
                        }
                    }
                }
            }
        }
    }
    let worst = cases
        .par_iter()
        .map(|&(p, s, i, gs, gi)| {
            let w = BeamWidths::new(1.0, gs, gi).unwrap();
            let closed = coincidence_closed(p, s, i, &w).map_err(|e| e.to_string())?.value.re;
            let quad = coincidence_quadrature_radial(p, s, i, &w)
                .map_err(|e| format!("{p}/{s}/{i} at ({gs}, {gi}): {e}"))?
                .value
                .re;
            let diff = (closed - quad).abs();
            let ok = if closed.abs() < 1e-6 {
                diff <= 1e-12
            } else {
                diff <= 1e-8 * closed.abs()
            };
            if !ok {
                return Err(format!(
                    "{p}/{s}/{i} at ({gs}, {gi}): closed {closed:e}, quadrature {quad:e}"
                ));
            }
            Ok(if closed.abs() < 1e-6 { 0.0 } else { diff / closed.abs() })
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(format!("{} triples, worst relative error {worst:.2e}", cases.len()))
}

fn gaussian_ratio() -> Outcome {
    let s = spiral_spectrum(
        &PumpSpec::Single(ModeIndex::GAUSSIAN),
        &BeamWidths::equal(1.0).unwrap(),
        &[(0, 0)],
        -10..=10,
    )
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for ell in -10i32..=10 {
        let want = (4.0f64 / 9.0).powi(ell.abs());
        let got = s.probability(ell) / s.probability(0);
        let rel = (got - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 1e-12, format!("ell {ell}: ratio {got} vs {want}"))?;
    }
    Ok(format!("|ell| <= 10, worst relative error {worst:.2e}"))
}

fn oam_conservation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 50 {
        let (lp, ls, li) = (
            rng.gen_range(-5..=5),
            rng.gen_range(-6..=6),
            rng.gen_range(-6..=6),
        );
        if lp == ls + li {
            continue;
        }
        let (p, s, i) = (
            m(lp, rng.gen_range(0..=3)),
            m(ls, rng.gen_range(0..=3)),
            m(li, rng.gen_range(0..=3)),
        );
        let w = BeamWidths::new(1.0, GAMMAS[rng.gen_range(0..4)], GAMMAS[rng.gen_range(0..4)])
            .unwrap();
        let c = coincidence_quadrature_2d(p, s, i, &w).map_err(|e| e.to_string())?;
        worst = worst.max(c.value.norm());
        ensure(
            c.value.norm() < 1e-10,
            format!("{p}/{s}/{i}: |C| = {:e}", c.value.norm()),
        )?;
        count += 1;
    }
    Ok(format!("{count} violating triples, largest |C| {worst:.2e}"))
}

fn equalization_roots() -> Outcome {
    let r = find_equal_probability_gammas(
        &PumpSpec::Singularities(six_singularities()),
        &qu_quart(),
        (0.3, 3.0),
        &EqualizationOptions::paper(),
    )
    .map_err(|e| e.to_string())?;
    ensure(r.roots.len() == 2, format!("roots {:?}", r.roots))?;
    ensure(
        (r.roots[0] - 0.5).abs() <= 0.05 && (r.roots[1] - 1.0).abs() <= 0.05,
        format!("roots {:?}", r.roots),
    )?;
    Ok(format!(
        "roots {:.4} (CV {:.1e}), {:.4} (CV {:.1e})",
        r.roots[0], r.residuals[0], r.roots[1], r.residuals[1]
    ))
}

fn qu_quart_probabilities() -> Outcome {
    let p = subspace_probabilities(
        &PumpSpec::Singularities(six_singularities()),
        &BeamWidths::equal(1.0).unwrap(),
        &qu_quart(),
    )
    .map_err(|e| e.to_string())?;
    let cv = coefficient_of_variation(&p);
    ensure(cv < 0.05, format!("CV {cv} for {p:?}"))?;
    Ok(format!("probabilities {p:.4?}, CV {cv:.2e}"))
}

fn gaussian_monotonicity() -> Outcome {
    let grid: Vec<(f64, f64)> = (1..=6).map(|k| (0.5 * k as f64, 0.5 * k as f64)).collect();
    let scan = gamma_scan(&PumpSpec::Single(ModeIndex::GAUSSIAN), &grid, &[(0, 0)], -15..=15)
        .map_err(|e| e.to_string())?;
    let p0: Vec<f64> = scan.spectra().iter().map(|s| s.probability(0)).collect();
    let k: Vec<f64> = scan.spectra().iter().map(effective_dimension).collect();
    ensure(p0.windows(2).all(|w| w[1] < w[0]), format!("P(0) {p0:?}"))?;
    ensure(k.windows(2).all(|w| w[1] > w[0]), format!("K {k:?}"))?;
    Ok(format!(
        "P(0) {:.4} -> {:.4}, K {:.3} -> {:.3}",
        p0[0], p0[5], k[0], k[5]
    ))
}

fn wings() -> Outcome {
    // window symmetric about ell_p / 2 = 1
    let s = spiral_spectrum(
        &PumpSpec::Single(m(2, 0)),
        &BeamWidths::equal(3.0).unwrap(),
        &[(0, 0)],
        -60..=62,
    )
    .map_err(|e| e.to_string())?;
    let mut maxima = s.local_maxima();
    maxima.sort_by(|a, b| s.probability(*b).total_cmp(&s.probability(*a)));
    ensure(maxima.len() >= 2, format!("local maxima {maxima:?}"))?;
    let (a, b) = (maxima[0].min(maxima[1]), maxima[0].max(maxima[1]));
    let minima = s.local_minima();
    let between: Vec<i32> = minima.iter().copied().filter(|&l| a < l && l < b).collect();
    ensure(!between.is_empty(), format!("no minimum between {a} and {b}"))?;
    let mut worst: f64 = 0.0;
    for ell in -60..=62 {
        let (x, y) = (s.probability(ell), s.probability(2 - ell));
        let rel = (x - y).abs() / x.max(y);
        worst = worst.max(rel);
        ensure(rel <= 1e-12, format!("P({ell}) = {x:e}, P({}) = {y:e}", 2 - ell))?;
    }
    Ok(format!(
        "wings at {a} and {b}, minima {between:?}, symmetry about 1 to {worst:.1e}"
    ))
}

fn suppression() -> Outcome {
    let s = spiral_spectrum(
        &PumpSpec::Single(m(2, 0)),
        &BeamWidths::new(1.0, 3.0, 6.0).unwrap(),
        &[(0, 0)],
        -60..=62,
    )
    .map_err(|e| e.to_string())?;
    let ratio = s.wing_asymmetry(2);
    ensure(
        ratio > SUPPRESSION_RATIO,
        format!("asymmetry {ratio} <= {SUPPRESSION_RATIO}"),
    )?;
    Ok(format!("asymmetry ratio {ratio:.3} (threshold {SUPPRESSION_RATIO})"))
}

fn decomposition() -> Outcome {
    let sings = six_singularities();
    let pump = singularities_to_lg(&sings, 1.0).map_err(|e| e.to_string())?;
    let mut peak: f64 = 0.0;
    for r in 0..=120 {
        for a in 0..96 {
            let (rho, phi) = (4.0 * f64::from(r) / 120.0, 2.0 * PI * f64::from(a) / 96.0);
            peak = peak.max(pump_field_value(&pump, 1.0, rho, phi).unwrap().norm());
        }
    }
    let mut worst: f64 = 0.0;
    for s in &sings {
        let v = pump_field_value(&pump, 1.0, s.rho, s.phi).unwrap().norm() / peak;
        worst = worst.max(v);
        ensure(v < 1e-10, format!("|field| / peak = {v:e} at {s:?}"))?;
    }

    let zs: Vec<Complex64> = sings.iter().map(|s| Complex64::from_polar(s.rho, s.phi)).collect();
    let fast = elementary_symmetric(&zs);
    let mut brute = vec![Complex64::new(0.0, 0.0); zs.len() + 1];
    for mask in 0u32..(1 << zs.len()) {
        let prod: Complex64 = (0..zs.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| zs[k])
            .product();
        brute[mask.count_ones() as usize] += prod;
    }
    let mut worst_e: f64 = 0.0;
    for (f, b) in fast.iter().zip(&brute) {
        let rel = (f - b).norm() / b.norm();
        worst_e = worst_e.max(rel);
        ensure(rel <= 1e-13, format!("coefficient {f} vs {b}"))?;
    }
    Ok(format!(
        "zeros at {worst:.1e} of peak, coefficients to {worst_e:.1e}"
    ))
}

fn property_suites() -> Outcome {
    for width in [0.25, 1.0, 4.0] {
        for ell in -8..=8 {
            for p in 0..=5 {
                let n = mode_norm(m(ell, p), width).map_err(|e| e.to_string())?;
                ensure((n - 1.0).abs() < 1e-10, format!("norm of ({ell},{p}) = {n}"))?;
            }
        }
    }
    let modes: Vec<ModeIndex> = (-3..=3).flat_map(|l| (0..=3).map(move |p| m(l, p))).collect();
    for (n, a) in modes.iter().enumerate() {
        for b in &modes[n + 1..] {
            let o = mode_overlap(*a, *b, 1.0).map_err(|e| e.to_string())?;
            ensure(o.norm() < 1e-10, format!("overlap {a}/{b} = {o}"))?;
        }
    }
    for p in 0..=10 {
        for alpha in 0..=10 {
            for x in [0.1, 1.0, 5.0, 20.0] {
                let (r, e) = (assoc_laguerre(p, alpha, x), assoc_laguerre_explicit(p, alpha, x));
                let scale = r.abs().max(assoc_laguerre_explicit(p, alpha, -x).abs());
                ensure((r - e).abs() <= 1e-10 * scale, format!("L_{p}^{alpha}({x})"))?;
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(10);
    for _ in 0..500 {
        let (lp, ls) = (rng.gen_range(-4..=4), rng.gen_range(-6..=6));
        let (p, s, i) = (
            m(lp, rng.gen_range(0..=3)),
            m(ls, rng.gen_range(0..=3)),
            m(lp - ls, rng.gen_range(0..=3)),
        );
        ensure(
            (p.abs_ell() + s.abs_ell() + i.abs_ell()) % 2 == 0,
            format!("odd order for {p}/{s}/{i}"),
        )?;
        let (gs, gi) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let a = coincidence_closed(p, s, i, &BeamWidths::new(1.0, gs, gi).unwrap()).unwrap();
        let b = coincidence_closed(p, i, s, &BeamWidths::new(1.0, gi, gs).unwrap()).unwrap();
        ensure(
            (a.value - b.value).norm() <= 1e-12 * a.value.norm().max(1e-300),
            format!("swap symmetry {p}/{s}/{i}"),
        )?;
    }
    let mut worst: f64 = 0.0;
    for ell in 0..=4 {
        for p in 0..=2 {
            for (gs, gi) in [(0.5, 0.5), (1.0, 2.0), (3.0, 3.0), (2.0, 0.5)] {
                let w = BeamWidths::new(1.0, gs, gi).unwrap();
                let s = spiral_spectrum(&PumpSpec::Single(m(ell, p)), &w, &[(0, 0), (1, 1)], -15..=15)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((s.total() - 1.0).abs());
                ensure((s.total() - 1.0).abs() <= 1e-9, format!("total {}", s.total()))?;
            }
        }
    }
    Ok(format!(
        "norms, orthogonality, Laguerre paths, parity, swap symmetry; spectrum totals within {worst:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("Gaussian-pump (4/9)^|l| ratio", gaussian_ratio),
        ("OAM conservation in 2-D quadrature", oam_conservation),
        ("two equalization roots", equalization_roots),
        ("equal qu-quart probabilities", qu_quart_probabilities),
        ("Gaussian-pump monotonicity", gaussian_monotonicity),
        ("two wings, symmetric about l_p/2", wings),
        ("one-sided wing suppression", suppression),
        ("singularity decomposition exactness", decomposition),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {detail}", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
