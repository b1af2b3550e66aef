//! Linear programs in "maximize, `<=` rows, boxed variables" form, a dense
//! revised simplex solver, and the builders for the two routing relaxations.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

mod formulation;
mod simplex;

pub use formulation::{build_step1_lp, build_step2_lp, Formulation};
pub use simplex::solve_lp;

/// Primal feasibility tolerance (absolute, per row and per bound).
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative optimality tolerance against the dual bound.
pub const OPTIMALITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `maximize objective . x` subject to `row . x <= rhs` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// `(lower, upper)` per variable, `0 <= lower <= upper < inf`.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: alloc::vec![0.0; num_vars],
            rows: Vec::new(),
            bounds: alloc::vec![(0.0, 1.0); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(LpRow {
            name: name.into(),
            coeffs,
            rhs,
        });
    }

    /// Checks the shape invariants; `solve_lp` refuses malformed problems.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.num_vars();
        if n == 0 {
            return Err("problem has no variables".into());
        }
        if self.bounds.len() != n {
            return Err(alloc::format!("{} bounds for {n} variables", self.bounds.len()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo >= 0.0) || !hi.is_finite() || hi < lo {
                return Err(alloc::format!("variable {j} has bounds [{lo}, {hi}]"));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err("objective has a non-finite coefficient".into());
        }
        for row in &self.rows {
            if row.coeffs.len() != n {
                return Err(alloc::format!(
                    "row {} has {} coefficients for {n} variables",
                    row.name,
                    row.coeffs.len()
                ));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(alloc::format!("row {} is not finite", row.name));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or bound by `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .rows
            .iter()
            .map(|r| dot(&r.coeffs, x) - r.rhs)
            .fold(0.0, f64::max);
        self.bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi))
            .fold(rows, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Plain-text LP-style dump, one constraint per line.
impl fmt::Display for LpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(f: &mut fmt::Formatter<'_>, coeffs: &[f64]) -> fmt::Result {
            let mut first = true;
            for (j, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                if first {
                    write!(f, "{c} x{j}")?;
                } else if c < 0.0 {
                    write!(f, " - {} x{j}", -c)?;
                } else {
                    write!(f, " + {c} x{j}")?;
                }
                first = false;
            }
            if first {
                write!(f, "0")?;
            }
            Ok(())
        }
        writeln!(f, "maximize")?;
        write!(f, "  obj: ")?;
        terms(f, &self.objective)?;
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for row in &self.rows {
            write!(f, "  {}: ", row.name)?;
            terms(f, &row.coeffs)?;
            writeln!(f, " <= {}", row.rhs)?;
        }
        writeln!(f, "bounds")?;
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            writeln!(f, "  {lo} <= x{j} <= {hi}")?;
        }
        writeln!(f, "end")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The pivot budget ran out; never observed with Bland's rule but kept
    /// so a pathological input cannot hang the caller.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// Weak-duality upper bound from the final row prices.
    pub dual_bound: f64,
    pub pivots: usize,
}

impl FractionalSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
