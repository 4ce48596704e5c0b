//! Dense phase-1 simplex for `A x = b, x ≥ 0`.
//!
//! One artificial variable per row, objective `min Σ artificials`, Bland's
//! smallest-index rule for both the entering column and ratio-test ties.
//! Sized for the 16×16 marginal-matching systems in [`crate::analysis`].

/// Outcome of a phase-1 run.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Solution {
    /// Basic solution for the original variables.
    pub x: Vec<f64>,
    /// Final value of the artificial objective.
    pub objective: f64,
    pub iterations: usize,
}

/// Safety cap; Bland's rule terminates long before this on 16-row systems.
const MAX_ITERATIONS: usize = 10_000;

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs, with `-objective` in the last slot.
    cost: Vec<f64>,
    basis: Vec<usize>,
    tol: f64,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.cost.len() - 1
    }

    fn entering(&self) -> Option<usize> {
        (0..self.rhs()).find(|&j| self.cost[j] < -self.tol)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let rhs = self.rhs();
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if row[col] <= self.tol {
                continue;
            }
            let ratio = row[rhs] / row[col];
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio - self.tol
                        || ((ratio - bratio).abs() <= self.tol && self.basis[r] < self.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = other[col];
            if f != 0.0 {
                for (v, pv) in other.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[row] = col;
    }
}

/// Minimizes the total artificial slack of `A x = b` over `x ≥ 0`.
///
/// Rows with negative `b` are negated first. A final objective above the
/// caller's tolerance means the system is infeasible.
pub fn phase1(a: &[Vec<f64>], b: &[f64], tol: f64) -> Phase1Solution {
    let m = a.len();
    assert_eq!(m, b.len(), "row count mismatch");
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;

    let mut rows = Vec::with_capacity(m);
    for (r, (ar, &br)) in a.iter().zip(b).enumerate() {
        assert_eq!(ar.len(), n, "ragged constraint matrix");
        let sign = if br < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for (j, &v) in ar.iter().enumerate() {
            row[j] = sign * v;
        }
        row[n + r] = 1.0;
        row[width - 1] = sign * br;
        rows.push(row);
    }

    // artificials start basic with unit cost
    let mut cost = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }

    let mut t = Tableau {
        rows,
        cost,
        basis: (n..n + m).collect(),
        tol,
    };

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let Some(col) = t.entering() else { break };
        let Some(row) = t.leaving(col) else {
            // unbounded direction cannot occur for a bounded-below objective
            break;
        };
        t.pivot(row, col);
        iterations += 1;
    }

    let rhs = width - 1;
    let mut x = vec![0.0; n];
    for (r, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.rows[r][rhs];
        }
    }
    Phase1Solution {
        x,
        objective: -t.cost[rhs],
        iterations,
    }
}
