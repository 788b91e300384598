use biphoton::amplitudes::coincidence_closed;
use biphoton::oracle::{coincidence_quadrature_2d, coincidence_quadrature_radial};
use biphoton::{BeamWidths, ModeIndex};

const GAMMAS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

#[test]
fn two_d_and_radial_paths_agree_on_the_grid() {
    for lp in 0..=4 {
        for pp in 0..=3 {
            for ls in -6..=6 {
                for (ps, pi) in [(0, 0), (1, 3), (3, 2)] {
                    for gs in GAMMAS {
                        for gi in GAMMAS {
                            let w = BeamWidths::new(1.0, gs, gi).unwrap();
                            let (p, s, i) = (
                                ModeIndex::new(lp, pp),
                                ModeIndex::new(ls, ps),
                                ModeIndex::new(lp - ls, pi),
                            );
                            let radial = coincidence_quadrature_radial(p, s, i, &w).unwrap().value;
                            let full = coincidence_quadrature_2d(p, s, i, &w).unwrap().value;
                            assert!(full.im.abs() < 1e-10, "{p}/{s}/{i}: {full}");
                            let diff = (full.re - radial.re).abs();
                            assert!(
                                diff <= 1e-9 * radial.re.abs() || diff <= 1e-14,
                                "{p}/{s}/{i} at ({gs}, {gi}): {full} vs {radial}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn closed_form_absolute_scale_matches_quadrature_for_any_waist() {
    for w_p in [0.3, 1.0, 7.5] {
        let w = BeamWidths::new(w_p, 1.4, 0.9).unwrap();
        let (p, s, i) = (ModeIndex::new(3, 1), ModeIndex::new(5, 2), ModeIndex::new(-2, 0));
        let closed = coincidence_closed(p, s, i, &w).unwrap().value.re;
        let quad = coincidence_quadrature_radial(p, s, i, &w).unwrap().value.re;
        assert!((closed - quad).abs() <= 1e-10 * closed.abs(), "{closed} vs {quad}");
    }
}
