//! Symmetric tridiagonal eigenproblem by implicit QL iteration with
//! Wilkinson-type shifts.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and subdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diagonal: Vec<f64>,
    subdiagonal: Vec<f64>,
}

/// Eigenvalues in ascending order with the first component of each unit
/// eigenvector.
#[derive(Debug, Clone)]
pub struct FirstComponentEigen {
    pub eigenvalues: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Eigenvalues in ascending order with the full unit eigenvectors
/// (`eigenvectors[j]` belongs to `eigenvalues[j]`).
#[derive(Debug, Clone)]
pub struct FullEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SymTridiagonal {
    pub fn new(diagonal: Vec<f64>, subdiagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::Shape("tridiagonal matrix must have n >= 1".into()));
        }
        if subdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::Shape(format!(
                "diagonal of length {} needs subdiagonal of length {}, got {}",
                diagonal.len(),
                diagonal.len() - 1,
                subdiagonal.len()
            )));
        }
        Ok(SymTridiagonal { diagonal, subdiagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn subdiagonal(&self) -> &[f64] {
        &self.subdiagonal
    }

    /// `T·v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * v[i];
                if i > 0 {
                    s += self.subdiagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.subdiagonal[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i].abs();
                if i > 0 {
                    s += self.subdiagonal[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.subdiagonal[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Eigenvalues and first eigenvector components. Only the first row of
    /// the accumulated rotation matrix is carried, so the cost is O(n²).
    pub fn eigen_first_components(&self) -> Result<FirstComponentEigen> {
        let n = self.dim();
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        let mut rows = [first];
        let d = self.ql_implicit(&mut rows)?;
        let [first] = rows;
        let order = ascending_order(&d);
        Ok(FirstComponentEigen {
            eigenvalues: order.iter().map(|&j| d[j]).collect(),
            first_components: order.iter().map(|&j| first[j]).collect(),
        })
    }

    /// Eigenvalues and full eigenvectors, O(n³).
    pub fn eigen_full(&self) -> Result<FullEigen> {
        let n = self.dim();
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            })
            .collect();
        let d = self.ql_implicit(&mut rows)?;
        let order = ascending_order(&d);
        Ok(FullEigen {
            eigenvalues: order.iter().map(|&j| d[j]).collect(),
            eigenvectors: order.iter().map(|&j| rows.iter().map(|r| r[j]).collect()).collect(),
        })
    }

    /// Implicit QL sweeps. Every rotation acting on columns `(i, i+1)` of the
    /// eigenvector matrix is applied to each of `rows`. Returns the unsorted
    /// eigenvalues.
    fn ql_implicit<R: AsMut<[f64]>>(&self, rows: &mut [R]) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diagonal.clone();
        let mut e = self.subdiagonal.clone();
        e.push(0.0);
        let max_iterations = 30 * n;
        let mut iterations = 0;

        for l in 0..n {
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iterations += 1;
                if iterations > max_iterations {
                    return Err(Error::Eigensolver { iterations: max_iterations });
                }

                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for row in rows.iter_mut() {
                        let row = row.as_mut();
                        let f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        Ok(d)
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let d = t.diagonal();
    let e = t.subdiagonal();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON * (e[i - 1].abs() + f64::MIN_POSITIVE) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
pub fn bisection_eigenvalue(t: &SymTridiagonal, k: usize) -> f64 {
    let radius = t.norm_inf();
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
