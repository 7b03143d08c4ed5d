use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Composite two-mode index `(n1, n2)` in a basis truncated at `n_trunc`
/// photons per mode (exclusive).
#[inline]
pub fn composite(n_trunc: usize, n1: usize, n2: usize) -> usize {
    n1 * n_trunc + n2
}

#[inline]
fn parity(n_trunc: usize, idx: usize) -> f64 {
    if (idx / n_trunc + idx % n_trunc).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Real symmetric density matrix on the truncated two-mode number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    pub n_trunc: usize,
    pub entries: DMatrix<f64>,
}

impl FockMatrix {
    pub fn zeros(n_trunc: usize) -> Self {
        let d = n_trunc * n_trunc;
        Self {
            n_trunc,
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, n1: usize, n2: usize, n3: usize, n4: usize) -> f64 {
        let n = self.n_trunc;
        self.entries[(composite(n, n1, n2), composite(n, n3, n4))]
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn normalized(&self) -> Self {
        Self {
            n_trunc: self.n_trunc,
            entries: &self.entries / self.trace(),
        }
    }

    /// Largest `|ρ_ij - ρ_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.entries.amax().max(f64::MIN_POSITIVE);
        (&self.entries - self.entries.transpose()).amax() / scale
    }

    pub fn purity(&self) -> f64 {
        self.entries.component_mul(&self.entries).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Conjugation by the photon-number parity operator.
    pub fn parity_flipped(&self) -> Self {
        let n = self.n_trunc;
        let mut out = self.clone();
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                out.entries[(i, j)] *= parity(n, i) * parity(n, j);
            }
        }
        out
    }

    /// Convex combination `Σ c_k ρ_k`.
    pub fn combine(terms: &[(f64, &FockMatrix)]) -> Self {
        let first = terms.first().expect("at least one term").1;
        let mut out = FockMatrix::zeros(first.n_trunc);
        for (c, m) in terms {
            out.entries += &m.entries * *c;
        }
        out
    }
}

/// A density operator held as `B Bᵀ`, one column per weighted pure
/// component. Its nonzero spectrum is that of the Gram matrix `Bᵀ B`, which
/// is much smaller than the Fock matrix when the mixture has few components.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredState {
    pub n_trunc: usize,
    pub columns: DMatrix<f64>,
}

impl FactoredState {
    pub fn trace(&self) -> f64 {
        self.columns.norm_squared()
    }

    pub fn rank_bound(&self) -> usize {
        self.columns.ncols()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_trunc: self.n_trunc,
            columns: &self.columns * factor.sqrt(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::Underflow {
                s: f64::NAN,
                m: f64::NAN,
                trace: t,
            });
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn parity_flipped(&self) -> Self {
        let n = self.n_trunc;
        let mut out = self.clone();
        for (i, mut row) in out.columns.row_iter_mut().enumerate() {
            row *= parity(n, i);
        }
        out
    }

    /// `Σ c_k ρ_k` with all `c_k >= 0`.
    pub fn mixture(terms: &[(f64, &FactoredState)]) -> Self {
        let n_trunc = terms[0].1.n_trunc;
        let rows = terms[0].1.columns.nrows();
        let kept: Vec<_> = terms.iter().filter(|(c, _)| *c > 0.0).collect();
        let cols = kept.iter().map(|(_, s)| s.columns.ncols()).sum();
        let mut columns = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for (c, s) in kept {
            let k = s.columns.ncols();
            columns.columns_mut(at, k).copy_from(&(&s.columns * c.sqrt()));
            at += k;
        }
        Self { n_trunc, columns }
    }

    pub fn to_matrix(&self) -> FockMatrix {
        FockMatrix {
            n_trunc: self.n_trunc,
            entries: &self.columns * self.columns.transpose(),
        }
    }

    /// Spectrum of `B Bᵀ` restricted to its support, ascending. Zero
    /// eigenvalues outside the column span are omitted.
    pub fn spectrum(&self) -> Vec<f64> {
        let (rows, cols) = self.columns.shape();
        let gram = if cols <= rows {
            self.columns.tr_mul(&self.columns)
        } else {
            &self.columns * self.columns.transpose()
        };
        let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}
