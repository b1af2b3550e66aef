//! Bounded-variable revised simplex with Bland's rule.
//!
//! Rows become equalities with one slack each; rows whose slack would start
//! negative get an artificial variable and a phase-one objective. Upper bounds
//! are handled implicitly (bound flips), so the basis stays `rows x rows`.
//! The basis inverse is dense, updated by elementary row operations and
//! rebuilt from scratch every `REFACTOR_EVERY` pivots.

use alloc::vec;
use alloc::vec::Vec;

use super::{dot, FractionalSolution, LpProblem, LpStatus, FEASIBILITY_TOL};

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 50;

struct Tableau {
    rows: usize,
    // sparse columns: structural, then one slack per row, then artificials
    columns: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    // row-major inverse of the basis matrix
    binv: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
    first_artificial: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn new(problem: &LpProblem) -> Self {
        let n = problem.num_vars();
        let m = problem.rows.len();
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in problem.rows.iter().enumerate() {
            for (j, &a) in row.coeffs.iter().enumerate() {
                if a != 0.0 {
                    columns[j].push((i, a));
                }
            }
        }
        let mut lower: Vec<f64> = problem.bounds.iter().map(|b| b.0).collect();
        let mut upper: Vec<f64> = problem.bounds.iter().map(|b| b.1).collect();
        let mut x = lower.clone();
        let rhs: Vec<f64> = problem.rows.iter().map(|r| r.rhs).collect();

        let mut residual = rhs.clone();
        for (j, col) in columns.iter().enumerate() {
            for &(i, a) in col {
                residual[i] -= a * x[j];
            }
        }

        let mut basis = Vec::with_capacity(m);
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            columns.push(vec![(i, 1.0)]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(0.0);
        }
        for (i, &r) in residual.iter().enumerate() {
            if r >= 0.0 {
                basis.push(n + i);
                x[n + i] = r;
                binv[i * m + i] = 1.0;
            } else {
                let art = columns.len();
                columns.push(vec![(i, -1.0)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push(-r);
                basis.push(art);
                binv[i * m + i] = -1.0;
            }
        }
        let first_artificial = n + m;
        let mut position = vec![None; columns.len()];
        for (r, &var) in basis.iter().enumerate() {
            position[var] = Some(r);
        }
        Tableau {
            rows: m,
            columns,
            lower,
            upper,
            rhs,
            x,
            basis,
            position,
            binv,
            pivots: 0,
            since_refactor: 0,
            first_artificial,
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.rows;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let c = cost[var];
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yk, &b) in y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.columns[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.rows;
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.columns[j] {
            for (r, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[r * m + i] * a;
            }
        }
        alpha
    }

    fn pivot_inverse(&mut self, leave_row: usize, alpha: &[f64]) {
        let m = self.rows;
        let pivot = alpha[leave_row];
        for k in 0..m {
            self.binv[leave_row * m + k] /= pivot;
        }
        for r in 0..m {
            if r == leave_row || alpha[r] == 0.0 {
                continue;
            }
            let factor = alpha[r];
            for k in 0..m {
                let v = self.binv[leave_row * m + k];
                self.binv[r * m + k] -= factor * v;
            }
        }
    }

    /// Rebuilds the inverse by Gauss-Jordan elimination and recomputes the
    /// basic values from the nonbasic ones.
    fn refactor(&mut self) {
        let m = self.rows;
        if m == 0 {
            return;
        }
        let mut a = vec![0.0; m * m];
        for (r, &var) in self.basis.iter().enumerate() {
            for &(i, v) in &self.columns[var] {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut best = col;
            for r in col + 1..m {
                if a[r * m + col].abs() > a[best * m + col].abs() {
                    best = r;
                }
            }
            if a[best * m + col].abs() < 1e-14 {
                // numerically singular; keep the updated inverse
                return;
            }
            if best != col {
                for k in 0..m {
                    a.swap(col * m + k, best * m + k);
                    inv.swap(col * m + k, best * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;

        let mut residual = self.rhs.clone();
        for (j, col) in self.columns.iter().enumerate() {
            if self.position[j].is_none() && self.x[j] != 0.0 {
                for &(i, a) in col {
                    residual[i] -= a * self.x[j];
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = dot(row, &residual);
        }
    }

    fn run(&mut self, cost: &[f64], budget: usize) -> Outcome {
        let m = self.rows;
        let ncols = self.columns.len();
        for _ in 0..budget {
            let y = self.duals(cost);
            // Bland: lowest-index improving variable enters
            let mut entering = None;
            for j in 0..ncols {
                if self.position[j].is_some() || self.upper[j] - self.lower[j] <= 0.0 {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                let at_upper = self.x[j] >= self.upper[j];
                if !at_upper && d > REDUCED_COST_TOL {
                    entering = Some((j, 1.0));
                    break;
                }
                if at_upper && d < -REDUCED_COST_TOL {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((enter, dir)) = entering else {
                return Outcome::Optimal;
            };
            let alpha = self.ftran(enter);

            let mut step = f64::INFINITY;
            let mut leave: Option<usize> = None;
            for r in 0..m {
                let delta = -dir * alpha[r];
                let var = self.basis[r];
                let limit = if delta < -PIVOT_TOL {
                    (self.x[var] - self.lower[var]) / -delta
                } else if delta > PIVOT_TOL && self.upper[var].is_finite() {
                    (self.upper[var] - self.x[var]) / delta
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let take = match leave {
                    None => true,
                    Some(cur) => {
                        limit < step - RATIO_TIE_TOL
                            || (limit <= step + RATIO_TIE_TOL && var < self.basis[cur])
                    }
                };
                if take {
                    step = step.min(limit);
                    leave = Some(r);
                }
            }
            let flip = self.upper[enter] - self.lower[enter];
            if flip <= step {
                if !flip.is_finite() {
                    return Outcome::Unbounded;
                }
                for r in 0..m {
                    let var = self.basis[r];
                    self.x[var] += -dir * alpha[r] * flip;
                }
                self.x[enter] = if dir > 0.0 {
                    self.upper[enter]
                } else {
                    self.lower[enter]
                };
                continue;
            }
            let leave_row = leave.expect("finite step has a leaving row");
            for r in 0..m {
                let var = self.basis[r];
                self.x[var] += -dir * alpha[r] * step;
            }
            self.x[enter] += dir * step;
            let out = self.basis[leave_row];
            let delta = -dir * alpha[leave_row];
            self.x[out] = if delta < 0.0 {
                self.lower[out]
            } else {
                self.upper[out]
            };
            self.position[out] = None;
            self.position[enter] = Some(leave_row);
            self.basis[leave_row] = enter;
            self.pivot_inverse(leave_row, &alpha);
            self.pivots += 1;
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
        }
        Outcome::IterationLimit
    }
}

/// Power of two bringing the largest objective coefficient into `[1, 2)`.
/// Scaling by a power of two is exact, so the pivot sequence does not depend
/// on the objective's magnitude.
fn objective_scale(objective: &[f64]) -> f64 {
    let max = objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if max == 0.0 {
        return 1.0;
    }
    let (_, exp) = libm::frexp(max);
    libm::ldexp(1.0, 1 - exp)
}

/// Solves `problem` to a vertex optimum.
///
/// Infeasible, unbounded and malformed problems come back as a status, never
/// as a panic. The pivot sequence is fully deterministic.
pub fn solve_lp(problem: &LpProblem) -> FractionalSolution {
    let n = problem.num_vars();
    if problem.validate().is_err() {
        return FractionalSolution {
            status: LpStatus::Infeasible,
            values: vec![0.0; n],
            objective_value: 0.0,
            dual_bound: 0.0,
            pivots: 0,
        };
    }
    let m = problem.rows.len();
    let mut t = Tableau::new(problem);
    let budget = 10_000 + 200 * (t.columns.len() + m);

    let first_art = t.first_artificial;
    if first_art < t.columns.len() {
        let mut phase_one = vec![0.0; t.columns.len()];
        for c in &mut phase_one[first_art..] {
            *c = -1.0;
        }
        match t.run(&phase_one, budget) {
            Outcome::Optimal => {}
            Outcome::Unbounded | Outcome::IterationLimit => {
                return failed(&t, n, LpStatus::IterationLimit);
            }
        }
        t.refactor();
        let scale = 1.0 + problem.rows.iter().fold(0.0f64, |a, r| a.max(r.rhs.abs()));
        let infeasibility: f64 = t.x[first_art..].iter().sum();
        if infeasibility > FEASIBILITY_TOL * scale {
            return failed(&t, n, LpStatus::Infeasible);
        }
        for j in first_art..t.columns.len() {
            t.upper[j] = 0.0;
            if t.position[j].is_none() {
                t.x[j] = 0.0;
            }
        }
    }

    let scale = objective_scale(&problem.objective);
    let mut cost = vec![0.0; t.columns.len()];
    for (c, &o) in cost.iter_mut().zip(&problem.objective) {
        *c = o * scale;
    }
    let outcome = t.run(&cost, budget);
    t.refactor();
    let status = match outcome {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
        Outcome::IterationLimit => LpStatus::IterationLimit,
    };

    let mut values: Vec<f64> = t.x[..n].to_vec();
    for (v, &(lo, hi)) in values.iter_mut().zip(&problem.bounds) {
        *v = v.clamp(lo, hi);
    }
    let objective_value = problem.objective_value(&values);

    let y: Vec<f64> = t.duals(&cost).iter().map(|v| (v / scale).max(0.0)).collect();
    let mut dual_bound: f64 = y.iter().zip(&t.rhs).map(|(a, b)| a * b).sum();
    for j in 0..n {
        let d = problem.objective[j] - t.columns[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>();
        let (lo, hi) = problem.bounds[j];
        dual_bound += if d > 0.0 { d * hi } else { d * lo };
    }

    FractionalSolution {
        status,
        values,
        objective_value,
        dual_bound,
        pivots: t.pivots,
    }
}

fn failed(t: &Tableau, n: usize, status: LpStatus) -> FractionalSolution {
    FractionalSolution {
        status,
        values: t.x[..n].to_vec(),
        objective_value: 0.0,
        dual_bound: 0.0,
        pivots: t.pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::OPTIMALITY_TOL;

    fn check_optimal(p: &LpProblem, s: &FractionalSolution) {
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(p.max_violation(&s.values) <= FEASIBILITY_TOL);
        let slack = OPTIMALITY_TOL * s.objective_value.abs().max(1.0);
        assert!(s.dual_bound <= s.objective_value + slack, "{s:?}");
    }

    #[test]
    fn single_variable() {
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.add_row("r", vec![1.0], 1.0);
        let s = solve_lp(&p);
        check_optimal(&p, &s);
        assert_eq!(s.values, vec![1.0]);
        assert_eq!(s.objective_value, 1.0);
    }

    #[test]
    fn two_simplex() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 1.0];
        p.add_row("r", vec![1.0, 1.0], 1.0);
        let s = solve_lp(&p);
        check_optimal(&p, &s);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut p = LpProblem::new(2);
        p.objective = vec![3.0, 5.0];
        p.bounds = vec![(0.0, 100.0), (0.0, 100.0)];
        p.add_row("a", vec![1.0, 0.0], 4.0);
        p.add_row("b", vec![0.0, 2.0], 12.0);
        p.add_row("c", vec![3.0, 2.0], 18.0);
        let s = solve_lp(&p);
        check_optimal(&p, &s);
        assert!((s.objective_value - 36.0).abs() < 1e-9);
        assert!((s.values[0] - 2.0).abs() < 1e-9 && (s.values[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn lower_bounds_need_phase_one() {
        // max -x - y, x + y >= 3 (as -x - y <= -3), x,y in [1, 5] -> obj -3
        let mut p = LpProblem::new(2);
        p.objective = vec![-1.0, -1.0];
        p.bounds = vec![(1.0, 5.0), (1.0, 5.0)];
        p.add_row("cover", vec![-1.0, -1.0], -3.0);
        let s = solve_lp(&p);
        check_optimal(&p, &s);
        assert!((s.objective_value + 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.add_row("impossible", vec![-1.0], -2.0);
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn malformed_is_not_a_panic() {
        let mut p = LpProblem::new(2);
        p.rows.push(crate::lp::LpRow {
            name: "short".into(),
            coeffs: vec![1.0],
            rhs: 1.0,
        });
        assert_ne!(solve_lp(&p).status, LpStatus::Optimal);
    }

    #[test]
    fn tiny_objective_coefficients_still_optimize() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1e-12, 3e-12];
        p.add_row("r", vec![1.0, 1.0], 1.0);
        let s = solve_lp(&p);
        check_optimal(&p, &s);
        assert!((s.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_of_two_scaling_is_exact() {
        let mut p = LpProblem::new(3);
        p.objective = vec![0.3, 0.7, 0.5];
        p.add_row("a", vec![1.0, 1.0, 0.0], 1.0);
        p.add_row("b", vec![0.0, 1.0, 1.0], 1.0);
        p.add_row("c", vec![1.0, 0.0, 1.0], 1.0);
        let s1 = solve_lp(&p);
        p.objective.iter_mut().for_each(|c| *c *= 8.0);
        let s2 = solve_lp(&p);
        assert_eq!(s1.values, s2.values);
        assert!((s2.objective_value - 8.0 * s1.objective_value).abs() < 1e-12);
    }
}
