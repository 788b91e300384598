use std::f64::consts::PI;

use biphoton::amplitudes::coincidence_closed;
use biphoton::modes::{lg_amplitude, mode_norm, mode_overlap};
use biphoton::pumps::{
    elementary_symmetric, normalize_pump, pump_field_value, singularities_to_lg,
};
use biphoton::specfun::{assoc_laguerre, assoc_laguerre_explicit, signed_log_sum, SignedLogValue};
use biphoton::{spiral_spectrum, BeamWidths, ModeIndex, PumpSpec, Singularity};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn modes_are_normalized() {
    for width in [0.25, 1.0, 4.0] {
        for ell in -8..=8 {
            for p in 0..=5 {
                let n = mode_norm(ModeIndex::new(ell, p), width).unwrap();
                assert!((n - 1.0).abs() < 1e-10, "({ell},{p}) width {width}: {n}");
            }
        }
    }
}

#[test]
fn distinct_modes_are_orthogonal() {
    let modes: Vec<ModeIndex> = (-3..=3)
        .flat_map(|l| (0..=3).map(move |p| ModeIndex::new(l, p)))
        .collect();
    for width in [0.5, 2.0] {
        for (n, a) in modes.iter().enumerate() {
            for b in &modes[n + 1..] {
                let o = mode_overlap(*a, *b, width).unwrap();
                assert!(o.norm() < 1e-10, "{a} vs {b}: {o}");
            }
        }
    }
}

#[test]
fn laguerre_recurrence_matches_explicit_sum() {
    for p in 0..=10 {
        for alpha in 0..=10 {
            for x in [0.1, 1.0, 5.0, 20.0] {
                let r = assoc_laguerre(p, alpha, x);
                let e = assoc_laguerre_explicit(p, alpha, x);
                // Σ|terms| of the explicit sum is L_p^α(-x); it stands in
                // for |L| near the polynomial's roots
                let scale = r.abs().max(assoc_laguerre_explicit(p, alpha, -x).abs());
                assert!(
                    (r - e).abs() <= 1e-10 * scale,
                    "L_{p}^{alpha}({x}): {r} vs {e}"
                );
            }
        }
    }
}

fn subset_products(zs: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); zs.len() + 1];
    for mask in 0u32..(1 << zs.len()) {
        let prod = zs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .fold(Complex64::new(1.0, 0.0), |acc, (_, z)| acc * z);
        e[mask.count_ones() as usize] += prod;
    }
    e
}

/// Largest `|field|` on a polar grid covering the beam.
fn field_peak(pump: &PumpSpec) -> f64 {
    let mut peak: f64 = 0.0;
    for r in 0..=80 {
        for a in 0..64 {
            let rho = 4.0 * f64::from(r) / 80.0;
            let phi = 2.0 * PI * f64::from(a) / 64.0;
            peak = peak.max(pump_field_value(pump, 1.0, rho, phi).unwrap().norm());
        }
    }
    peak
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signed_log_sum_is_permutation_invariant(
        terms in prop::collection::vec((any::<bool>(), -5.0..5.0f64), 1..12),
        seed in any::<u64>(),
    ) {
        let values: Vec<SignedLogValue> = terms
            .iter()
            .map(|&(neg, log)| SignedLogValue::new(if neg { -1 } else { 1 }, log))
            .collect();
        let (sum, condition) = signed_log_sum(&values);
        prop_assume!(condition < 1e6);
        let mut shuffled = values.clone();
        // deterministic Fisher-Yates driven by the seed
        let mut state = seed;
        for k in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(k, (state >> 33) as usize % (k + 1));
        }
        let (other, _) = signed_log_sum(&shuffled);
        let (a, b) = (sum.to_f64(), other.to_f64());
        prop_assert!((a - b).abs() <= 1e-13 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn amplitude_is_swap_symmetric(
        lp in -4i32..=4, ls in -6i32..=6,
        pp in 0u32..=3, ps in 0u32..=3, pi in 0u32..=3,
        gs in 0.3..3.0f64, gi in 0.3..3.0f64,
    ) {
        let (pump, signal, idler) = (ModeIndex::new(lp, pp), ModeIndex::new(ls, ps), ModeIndex::new(lp - ls, pi));
        let a = coincidence_closed(pump, signal, idler, &BeamWidths::new(1.0, gs, gi).unwrap()).unwrap();
        let b = coincidence_closed(pump, idler, signal, &BeamWidths::new(1.0, gi, gs).unwrap()).unwrap();
        prop_assert!((a.value - b.value).norm() <= 1e-12 * a.value.norm().max(1e-300));
        prop_assert_eq!(a.value.im, 0.0);
        prop_assert!(a.condition >= 1.0);
    }

    #[test]
    fn conserving_triples_have_even_order(lp in -60i32..=60, ls in -60i32..=60) {
        let li = lp - ls;
        prop_assert_eq!((lp.abs() + ls.abs() + li.abs()) % 2, 0);
        let c = coincidence_closed(
            ModeIndex::new(lp, 0), ModeIndex::new(ls, 0), ModeIndex::new(li, 0),
            &BeamWidths::default(),
        ).unwrap();
        prop_assert!(c.value.re.is_finite());
    }

    #[test]
    fn elementary_symmetric_matches_subsets(zs in prop::collection::vec(complex(), 0..=8)) {
        let fast = elementary_symmetric(&zs);
        let brute = subset_products(&zs);
        let scale: f64 = brute.iter().map(|e| e.norm()).fold(1.0, f64::max);
        for (f, b) in fast.iter().zip(&brute) {
            prop_assert!((f - b).norm() <= 1e-13 * scale, "{f} vs {b}");
        }
    }

    #[test]
    fn singularity_pumps_vanish_at_their_singularities(
        points in prop::collection::vec((0.0..2.0f64, 0.0..360.0f64), 0..=6),
    ) {
        let sings: Vec<Singularity> = points
            .iter()
            .map(|&(r, d)| Singularity::from_degrees(r, d).unwrap())
            .collect();
        let pump = singularities_to_lg(&sings, 1.0).unwrap();
        let norm: f64 = pump.components(1.0).unwrap().iter().map(|c| c.amplitude.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        let peak = field_peak(&pump);
        for s in &sings {
            let v = pump_field_value(&pump, 1.0, s.rho, s.phi).unwrap();
            prop_assert!(v.norm() < 1e-10 * peak, "{v} at {s:?}, peak {peak}");
        }
    }

    #[test]
    fn normalized_pumps_have_unit_power(
        raw in prop::collection::vec((complex(), -3i32..=3, 0u32..=2), 1..8),
    ) {
        let raw: Vec<(Complex64, ModeIndex)> = raw.into_iter().map(|(a, l, p)| (a, ModeIndex::new(l, p))).collect();
        match normalize_pump(&raw) {
            Ok(pump) => {
                let norm: f64 = pump.components(1.0).unwrap().iter().map(|c| c.amplitude.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-12);
            }
            Err(e) => prop_assert_eq!(e, biphoton::Error::DegeneratePump),
        }
    }

    #[test]
    fn lg_conjugation_symmetry(ell in 0i32..=8, p in 0u32..=4, rho in 0.0..3.0f64, phi in 0.0..6.3f64) {
        let a = lg_amplitude(ModeIndex::new(ell, p), 1.0, rho, phi).unwrap();
        let b = lg_amplitude(ModeIndex::new(-ell, p), 1.0, rho, phi).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_are_normalized(
        ell in 0i32..=4, p in 0u32..=2, gs in 0.5..3.0f64, gi in 0.5..3.0f64,
        family in prop::sample::subsequence(vec![(0u32, 0u32), (0, 1), (1, 0), (1, 1)], 1..=4),
    ) {
        let w = BeamWidths::new(1.0, gs, gi).unwrap();
        let s = spiral_spectrum(&PumpSpec::Single(ModeIndex::new(ell, p)), &w, &family, -15..=15).unwrap();
        prop_assert!((s.total() - 1.0).abs() < 1e-9, "total {}", s.total());
        prop_assert!(s.entries().values().all(|&v| v >= 0.0));
        prop_assert!(s.tail_mass() <= 1e-6);
    }

    #[test]
    fn equal_width_spectra_are_symmetric_about_half_pump_oam(
        ell in -4i32..=4, p in 0u32..=3, gamma in 0.5..3.0f64,
        ps in 0u32..=2,
    ) {
        let w = BeamWidths::equal(gamma).unwrap();
        // a symmetric p family keeps the exchange symmetry
        let family = if ps == 0 { vec![(0, 0)] } else { vec![(ps, 0), (0, ps)] };
        let s = spiral_spectrum(&PumpSpec::Single(ModeIndex::new(ell, p)), &w, &family, -20..=20).unwrap();
        for ls in -20 + ell.max(0)..=20 + ell.min(0) {
            let (a, b) = (s.probability(ls), s.probability(ell - ls));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-300), "{ls}: {a} vs {b}");
        }
    }
}
