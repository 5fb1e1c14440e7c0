mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treewave::energy::energies;
use treewave::wave::{solve, SolverMode};
use treewave::{spherical_mean, Ball, QSurd, Scalar, TreeFunction, VertexAddress};

fn random_pair(q: u32, seed: u64) -> (TreeFunction<QSurd>, TreeFunction<QSurd>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        TreeFunction::random_integer(q, 2, 3, &mut rng).unwrap(),
        TreeFunction::random_integer(q, 2, 3, &mut rng).unwrap(),
    )
}

#[test]
fn compressed_solver_matches_dense_leapfrog() {
    for (q, steps) in [(2u32, 6usize), (3, 4)] {
        let (f, g) = random_pair(q, 11 + q as u64);
        let ball = Ball::new(q, 2 + steps as u32 + 2).unwrap();
        let dense = common::leapfrog(
            &common::densify(&f, &ball),
            &common::densify(&g, &ball),
            q,
            steps,
        );
        for mode in [SolverMode::ClosedForm, SolverMode::Recurrence] {
            let u = solve(&f, &g, 0..=steps as i64, mode, &ball).unwrap();
            for (n, d) in dense.iter().enumerate() {
                let snap = u.snapshot(n as i64).unwrap();
                for (x, v) in d {
                    assert_eq!(&snap.get(x), v, "q = {q}, n = {n}, x = {x}, {mode}");
                }
            }
        }
    }
}

#[test]
fn energies_match_dense_sums() {
    let q = 2;
    let steps = 6;
    let (f, g) = random_pair(q, 5);
    let ball = Ball::new(q, 2 + steps as u32 + 2).unwrap();
    let dense = common::leapfrog(
        &common::densify(&f, &ball),
        &common::densify(&g, &ball),
        q,
        steps,
    );
    let u = solve(&f, &g, -1..=steps as i64, SolverMode::Recurrence, &ball).unwrap();
    for n in 1..steps {
        let (k, p) = common::kinetic_potential(&dense[n - 1], &dense[n], &dense[n + 1], q);
        let e = energies(&u, n as i64).unwrap();
        assert_eq!(e.kinetic, k, "n = {n}");
        assert_eq!(e.potential, p, "n = {n}");
        assert_eq!(e.potential_pairs, p, "n = {n}");
    }
}

#[test]
fn spherical_means_match_enumeration() {
    let q = 3;
    let (f, _) = random_pair(q, 9);
    let ball = Ball::new(q, 6).unwrap();
    let dense = common::densify(&f, &ball);
    for x in ["", "0", "1,2", "2,0,1"] {
        let x = VertexAddress::parse(q, x).unwrap();
        for n in 0..=3u32 {
            let members: Vec<_> = dense.keys().filter(|y| y.distance(&x) == n).collect();
            let sum = members
                .iter()
                .fold(QSurd::zero(q), |acc, y| acc + &dense[*y]);
            let expected = sum * &QSurd::from_ratio(1, members.len() as i64, q);
            assert_eq!(
                spherical_mean(&f, &x, n, &ball).unwrap(),
                expected,
                "x = {x}, n = {n}"
            );
        }
    }
}
