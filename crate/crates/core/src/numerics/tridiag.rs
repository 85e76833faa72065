use crate::error::{Error, Result};

/// Pivots smaller than this in magnitude abort the sweep.
pub const PIVOT_FLOOR: f64 = 1e-30;

/// Tridiagonal system `A x = rhs` with `A` stored as three bands.
///
/// Row `i` reads `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    dominant: bool,
}

impl TridiagonalSystem {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Shape("empty system".into()));
        }
        if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
            return Err(Error::Shape(format!(
                "lower {}, diag {}, upper {}, rhs {}",
                lower.len(),
                n,
                upper.len(),
                rhs.len()
            )));
        }
        let dominant = is_diagonally_dominant(&lower, &diag, &upper);
        Ok(Self {
            lower,
            diag,
            upper,
            rhs,
            dominant,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `|diag_i| ≥ |lower_i| + |upper_i|` on every row, strictly on at least one.
    pub fn is_dominant(&self) -> bool {
        self.dominant
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Max-norm of `A x − rhs`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max)
    }
}

fn is_diagonally_dominant(lower: &[f64], diag: &[f64], upper: &[f64]) -> bool {
    let n = diag.len();
    let mut strict = false;
    for i in 0..n {
        let off = if i > 0 { lower[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { upper[i].abs() } else { 0.0 };
        let d = diag[i].abs();
        if d < off {
            return false;
        }
        strict |= d > off;
    }
    strict
}

/// Solves the system by the counter sweep: elimination runs from both
/// ends towards the middle row, which is solved last, then back
/// substitution runs outwards. The two elimination passes are
/// independent, so they overlap on the CPU instead of forming one long
/// chain of divisions. No pivoting; stable for diagonally dominant
/// systems like the plain sweep.
pub fn sweep_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    if !sys.is_dominant() {
        log::debug!("sweep on a system that is not diagonally dominant (n = {})", sys.len());
    }
    let (a, d, b, f) = (&sys.lower, &sys.diag, &sys.upper, &sys.rhs);
    let n = sys.len();
    let m = n / 2;
    // ratio[i]: coupling to x[i+1] for i < m, to x[i-1] for i > m
    let mut ratio = vec![0.0; n];
    let mut x = vec![0.0; n];
    let check = |row: usize, pivot: f64| {
        if pivot.abs() < PIVOT_FLOOR || !pivot.is_finite() {
            Err(Error::SingularSystem { row, pivot })
        } else {
            Ok(())
        }
    };

    for k in 0..m.max(n - 1 - m) {
        // row k from the top
        if k < m {
            let i = k;
            let (pivot, carry) = if i == 0 {
                (d[0], f[0])
            } else {
                (d[i] - a[i - 1] * ratio[i - 1], f[i] - a[i - 1] * x[i - 1])
            };
            check(i, pivot)?;
            ratio[i] = b[i] / pivot;
            x[i] = carry / pivot;
        }
        // row n-1-k from the bottom
        if k < n - 1 - m {
            let i = n - 1 - k;
            let (pivot, carry) = if i == n - 1 {
                (d[i], f[i])
            } else {
                (d[i] - b[i] * ratio[i + 1], f[i] - b[i] * x[i + 1])
            };
            check(i, pivot)?;
            ratio[i] = a[i - 1] / pivot;
            x[i] = carry / pivot;
        }
    }

    let mut pivot = d[m];
    let mut carry = f[m];
    if m > 0 {
        pivot -= a[m - 1] * ratio[m - 1];
        carry -= a[m - 1] * x[m - 1];
    }
    if m + 1 < n {
        pivot -= b[m] * ratio[m + 1];
        carry -= b[m] * x[m + 1];
    }
    check(m, pivot)?;
    x[m] = carry / pivot;

    for i in (0..m).rev() {
        x[i] -= ratio[i] * x[i + 1];
    }
    for i in m + 1..n {
        x[i] -= ratio[i] * x[i - 1];
    }
    Ok(x)
}
