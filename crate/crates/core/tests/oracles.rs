//! Linear algebra and projections checked against nalgebra.

use nalgebra::DMatrix;
use proptest::prelude::*;
use tgp_core::manifold::{project_tangent, project_to_manifold, random_point};
use tgp_core::matrix::{derive_seed, gaussian_from, polar, rng_from_seed, sym_eig};
use tgp_core::{ManifoldKind, Matrix};

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_from(&mut rng_from_seed(seed), rows, cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_factor_is_u_vt(seed in any::<u64>(), n in 2usize..7, r in 1usize..4) {
        prop_assume!(r <= n);
        let y = gaussian(n, r, seed);
        let q = polar(&y).unwrap().orthogonal;
        let svd = to_na(&y).svd(true, true);
        let oracle = svd.u.unwrap() * svd.v_t.unwrap();
        prop_assert!((to_na(&q) - oracle).norm() < 1e-10);
    }

    #[test]
    fn eigenvalues_match(seed in any::<u64>(), n in 1usize..8) {
        let g = gaussian(n, n, seed);
        let m = &g + &g.transpose();
        let ours = sym_eig(&m).unwrap().eigenvalues;
        let mut theirs: Vec<f64> = to_na(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn grassmann_projection_is_top_eigenprojector(seed in any::<u64>(), p in 1usize..3, extra in 1usize..4) {
        let n = p + extra;
        let kind = ManifoldKind::grassmann(p, n).unwrap();
        let y = gaussian(n, n, seed);
        let x = project_to_manifold(kind, &y).unwrap().point;
        let s = to_na(&y);
        let eig = ((&s + s.transpose()) * 0.5).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let top = DMatrix::from_columns(&order[..p].iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
        let oracle = &top * top.transpose();
        prop_assert!((to_na(x.value()) - oracle).norm() < 1e-9);
    }

    #[test]
    fn stiefel_tangent_projection_matches_formula(seed in any::<u64>()) {
        let kind = ManifoldKind::stiefel(5, 2).unwrap();
        let mut rng = rng_from_seed(seed);
        let x = random_point(kind, &mut rng);
        let y = gaussian_from(&mut rng, 5, 2);
        let (xn, yn) = (to_na(x.value()), to_na(&y));
        let xty = xn.transpose() * &yn;
        let oracle = &yn - &xn * ((&xty + xty.transpose()) * 0.5);
        prop_assert!((to_na(&project_tangent(&x, &y).unwrap()) - oracle).norm() < 1e-12);
    }
}

#[test]
fn stiefel_projection_minimizes_distance_over_random_frames() {
    let kind = ManifoldKind::stiefel(4, 2).unwrap();
    for i in 0..50 {
        let y = gaussian(4, 2, derive_seed(5, i));
        let best = (&y - project_to_manifold(kind, &y).unwrap().point.value()).norm();
        let mut rng = rng_from_seed(derive_seed(6, i));
        for _ in 0..200 {
            let other = random_point(kind, &mut rng);
            assert!(best <= (&y - other.value()).norm() + 1e-12);
        }
    }
}
