use proptest::prelude::*;
use uavplan::simplex::{
    simplex_solve, simplex_solve_with, LinearProgram, LpStatus, PivotRule, Relation, SimplexOptions,
};

const BOX: f64 = 6.0;

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic feasible points, or `None` if there are none.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars;
    // Every constraint as (coefficients, relation, rhs), bounds included.
    let mut cons: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for r in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] += v;
        }
        cons.push((a, r.relation, r.rhs));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        cons.push((a, Relation::Le, 0.0));
    }
    let feasible = |x: &[f64]| {
        cons.iter().all(|(a, rel, rhs)| {
            let v: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
            match rel {
                Relation::Le => v <= rhs + 1e-9,
                Relation::Ge => v >= rhs - 1e-9,
                Relation::Eq => (v - rhs).abs() <= 1e-9,
            }
        })
    };
    let mut best: Option<f64> = None;
    let total = cons.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let a = pick.iter().map(|&i| cons[i].0.clone()).collect();
        let b = pick.iter().map(|&i| cons[i].2).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        // Next n-subset in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                break;
            }
        }
        pick[i] += 1;
        for k in i + 1..n {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![4 => Just(Relation::Le), 1 => Just(Relation::Ge), 1 => Just(Relation::Eq)]
}

fn bounded_lp() -> impl Strategy<Value = LinearProgram> {
    (1usize..=8).prop_flat_map(|n| {
        let row = (prop::collection::vec(-3i32..=3, n), relation(), -4i32..=10);
        (prop::collection::vec(-5i32..=5, n), prop::collection::vec(row, 0..=3)).prop_map(move |(c, rows)| {
            let mut lp = LinearProgram::new(n);
            lp.objective = c.iter().map(|&v| f64::from(v)).collect();
            for (a, rel, rhs) in rows {
                let coeffs = a.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, &v)| (j, f64::from(v))).collect();
                lp.add_row(coeffs, rel, f64::from(rhs));
            }
            for j in 0..n {
                lp.add_row(vec![(j, 1.0)], Relation::Le, BOX);
            }
            lp
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_vertex_enumeration(lp in bounded_lp()) {
        let expected = vertex_oracle(&lp);
        for rule in [PivotRule::Bland, PivotRule::DantzigThenBland] {
            let sol = simplex_solve_with(&lp, &SimplexOptions { pivot_rule: rule, ..SimplexOptions::default() }).unwrap();
            match expected {
                None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(sol.status, LpStatus::Optimal);
                    prop_assert!((sol.value - v).abs() <= 1e-7, "simplex {} vertices {}", sol.value, v);
                    for r in &lp.rows {
                        let act: f64 = r.coeffs.iter().map(|&(j, a)| a * sol.x[j]).sum();
                        match r.relation {
                            Relation::Le => prop_assert!(act <= r.rhs + 1e-7),
                            Relation::Ge => prop_assert!(act >= r.rhs - 1e-7),
                            Relation::Eq => prop_assert!((act - r.rhs).abs() <= 1e-7),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn unbounded_ray_is_detected() {
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![1.0, 1.0];
    lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
    assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Unbounded);
}
