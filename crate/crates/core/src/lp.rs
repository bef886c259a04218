//! Exact two-phase simplex over rationals.
//!
//! Solves `maximize c·x subject to A x <= b, x >= 0` with a dense tableau
//! and Bland's rule, so it terminates on degenerate problems. Sizes here are
//! tiny (a vendor's items as variables), exactness is what matters.

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        self.rows[row].last().expect("rhs column")
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for columns below `allowed`.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        (0..self.allowed)
            .map(|j| {
                let mut r = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !cost[b].is_zero() && !row[j].is_zero() {
                        r -= &cost[b] * &row[j];
                    }
                }
                r
            })
            .collect()
    }

    /// Runs the simplex method on `cost`; returns false when unbounded.
    fn optimize(&mut self, cost: &[Rational]) -> bool {
        loop {
            let reduced = self.reduced_costs(cost);
            let Some(col) = (0..self.allowed).find(|&j| reduced[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / &row[col];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Maximizes `c·x` subject to `a x <= b` and `x >= 0`.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one bound per constraint row");
    assert!(a.iter().all(|row| row.len() == n), "constraint width");

    let flipped: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
    let width = n + m + flipped.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Rational::zero(); width + 1];
        let sign = if b[i].is_negative() { -Rational::one() } else { Rational::one() };
        for j in 0..n {
            row[j] = &sign * &a[i][j];
        }
        row[n + i] = sign.clone();
        row[width] = &sign * &b[i];
        if let Some(k) = flipped.iter().position(|&f| f == i) {
            row[n + m + k] = Rational::one();
            basis.push(n + m + k);
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis,
        allowed: width,
    };

    if !flipped.is_empty() {
        let mut phase1 = vec![Rational::zero(); width];
        for k in 0..flipped.len() {
            phase1[n + m + k] = -Rational::one();
        }
        t.optimize(&phase1);
        let infeasibility: Rational = (0..m)
            .filter(|&i| t.basis[i] >= n + m)
            .map(|i| t.rhs(i).clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis where possible; rows
        // where that is impossible are redundant and stay inert.
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, j);
                }
            }
        }
        t.allowed = n + m;
    }

    let mut cost = vec![Rational::zero(); width];
    cost[..n].clone_from_slice(c);
    if !t.optimize(&cost) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &col) in t.basis.iter().enumerate() {
        if col < n {
            x[col] = t.rhs(i).clone();
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    /// Solves a square system by Gauss-Jordan elimination; `None` when
    /// singular.
    fn solve_square(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
        let n = rhs.len();
        for col in 0..n {
            let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, piv);
            rhs.swap(col, piv);
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = &m[r][col] / &m[col][col];
                    for k in 0..n {
                        let d = &f * &m[col][k];
                        m[r][k] -= d;
                    }
                    let d = &f * &rhs[col];
                    rhs[r] -= d;
                }
            }
        }
        Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
    }

    /// Vertex enumeration: the optimum of a bounded LP sits at a basic
    /// feasible solution, i.e. `n` tight constraints.
    fn brute_force(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<Rational> {
        let n = c.len();
        let mut rows: Vec<(Vec<Rational>, Rational)> =
            a.iter().cloned().zip(b.iter().cloned()).collect();
        for j in 0..n {
            let mut e = vec![q(0); n];
            e[j] = q(-1);
            rows.push((e, q(0)));
        }
        let total = rows.len();
        let mut best: Option<Rational> = None;
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let chosen: Vec<usize> = (0..total).filter(|i| mask >> i & 1 == 1).collect();
            let m = chosen.iter().map(|&i| rows[i].0.clone()).collect();
            let rhs = chosen.iter().map(|&i| rows[i].1.clone()).collect();
            let Some(x) = solve_square(m, rhs) else { continue };
            let feasible = rows.iter().all(|(row, bound)| {
                let lhs: Rational = row.iter().zip(&x).map(|(r, xi)| r * xi).sum();
                lhs <= *bound
            });
            if feasible {
                let v: Rational = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
        best
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let out = maximize(
            &[q(3), q(5)],
            &[vec![q(1), q(0)], vec![q(0), q(2)], vec![q(3), q(2)]],
            &[q(4), q(12), q(18)],
        );
        assert_eq!(
            out,
            LpOutcome::Optimal {
                x: vec![q(2), q(6)],
                value: q(36)
            }
        );
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x + y <= -1 with x, y >= 0
        assert_eq!(
            maximize(&[q(1), q(1)], &[vec![q(1), q(1)]], &[q(-1)]),
            LpOutcome::Infeasible
        );
        // max x s.t. -x + y <= 1
        assert_eq!(
            maximize(&[q(1), q(0)], &[vec![q(-1), q(1)]], &[q(1)]),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn lower_bound_rows_need_phase_one() {
        // max -x s.t. -x <= -3/2 (x >= 3/2)
        assert_eq!(
            maximize(&[q(-1)], &[vec![q(-1)]], &[Rational::new(-3, 2)]),
            LpOutcome::Optimal {
                x: vec![Rational::new(3, 2)],
                value: Rational::new(-3, 2)
            }
        );
    }

    fn arb_lp() -> impl Strategy<Value = (Vec<i64>, Vec<Vec<i64>>, Vec<i64>)> {
        (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(-4i64..6, n),
                proptest::collection::vec(proptest::collection::vec(-3i64..5, n), m),
                proptest::collection::vec(-4i64..10, m),
            )
        })
    }

    proptest! {
        #[test]
        fn agrees_with_vertex_enumeration((c, a, b) in arb_lp()) {
            let n = c.len();
            let c: Vec<Rational> = c.into_iter().map(q).collect();
            let mut a: Vec<Vec<Rational>> = a.into_iter().map(|r| r.into_iter().map(q).collect()).collect();
            let mut b: Vec<Rational> = b.into_iter().map(q).collect();
            // Box the region so every feasible instance is bounded.
            for j in 0..n {
                let mut e = vec![q(0); n];
                e[j] = q(1);
                a.push(e);
                b.push(q(7));
            }
            let expected = brute_force(&c, &a, &b);
            match (maximize(&c, &a, &b), expected) {
                (LpOutcome::Optimal { x, value }, Some(best)) => {
                    prop_assert_eq!(&value, &best);
                    for (row, bound) in a.iter().zip(&b) {
                        let lhs: Rational = row.iter().zip(&x).map(|(r, xi)| r * xi).sum();
                        prop_assert!(lhs <= *bound);
                    }
                    prop_assert!(x.iter().all(|xi| !xi.is_negative()));
                }
                (LpOutcome::Infeasible, None) => {}
                (got, want) => prop_assert!(false, "simplex {:?} vs brute force {:?}", got, want),
            }
        }
    }
}
