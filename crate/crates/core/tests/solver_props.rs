mod common;

use common::fd::ridders;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varcheck_core::solver::{gradient, objective, solve_refined};
use varcheck_core::trajectory::{uniform_mesh, Endpoint, Grading};
use varcheck_core::{BoundaryData, LagrangianExpr, Problem, SolveOptions, Trajectory};

const CV90: &str = "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)";

fn k() -> f64 {
    0.6f64.powf(5.0 / 3.0)
}

fn problem(text: &str) -> Problem {
    let bc = if text == CV90 {
        BoundaryData::scalar(0.0, k(), 0.0, 5.0 * k() / 3.0)
    } else {
        BoundaryData::scalar(0.0, 1.0, 0.0, 0.0)
    };
    Problem::new(0.0, 1.0, LagrangianExpr::parse(text, 1).unwrap(), bc).unwrap()
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for text in ["pow(xdd1,2)", "pow(xdd1,2)+pow(x1,2)", CV90] {
        let p = problem(text);
        for _ in 0..20 {
            let cubic = Trajectory::boundary_cubic(&p, uniform_mesh(0.0, 1.0, 6)).unwrap();
            // perturbations of size h² (values) and h (slopes) move xdd by
            // O(0.1), keeping |xdd|^22 tame
            let h = 1.0 / 6.0;
            let dofs: Vec<f64> = cubic
                .free_dofs()
                .iter()
                .enumerate()
                .map(|(i, v)| v + 0.02 * rng.gen_range(-1.0..1.0) * if i % 2 == 0 { h * h } else { h })
                .collect();
            let traj = cubic.with_free_dofs(&dofs);
            assert!(traj.is_admissible(&p));
            let g = gradient(&p, &traj, 5).unwrap();
            for (i, an) in g.iter().enumerate() {
                let fd = ridders(|d| objective(&p, &cubic.with_free_dofs(d), 5).unwrap(), &dofs, i);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{text} dof {i}: fd {fd} vs {an}");
            }
        }
    }
}

#[test]
fn refinement_never_increases_the_objective() {
    let p = problem("pow(xdd1,2)+pow(x1,2)");
    let opts = SolveOptions {
        refinements: 3,
        initial_mesh: 4,
        ..SolveOptions::default()
    };
    let rep = solve_refined(&p, &opts).unwrap();
    assert_eq!(rep.levels.len(), 4);
    for w in rep.levels.windows(2) {
        assert!(w[1].objective <= w[0].objective + 1e-10, "{} -> {}", w[0].objective, w[1].objective);
        assert_eq!(w[1].intervals, 2 * w[0].intervals);
    }
}

#[test]
fn graded_mesh_beats_uniform_on_the_singular_example() {
    let p = problem(CV90);
    let base = SolveOptions {
        refinements: 1,
        initial_mesh: 8,
        ..SolveOptions::default()
    };
    let uniform = solve_refined(&p, &base).unwrap();
    let graded = solve_refined(
        &p,
        &SolveOptions {
            grading: Grading::Geometric {
                ratio: 2.0,
                toward: Endpoint::Start,
            },
            ..base
        },
    )
    .unwrap();
    for (u, g) in uniform.levels.iter().zip(&graded.levels) {
        assert_eq!(u.intervals, g.intervals);
        // both meshes can reach the same smooth minimizer
        assert!(g.objective <= u.objective * (1.0 + 1e-10), "K={}: graded {} uniform {}", u.intervals, g.objective, u.objective);
    }
}
