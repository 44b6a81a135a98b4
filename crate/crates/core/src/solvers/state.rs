use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2, DenseMatrix, LinearOperator};

/// Columns whose squared norm falls to or below this value are dropped.
pub const ZERO_COLUMN_ABS: f64 = 1e-20;
/// ... or to or below this fraction of their original squared norm.
pub const ZERO_COLUMN_REL: f64 = 1e-24;

/// One eliminated unknown: `h[lead] = constant − Σ coeff · h[index]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationRecord {
    pub lead: usize,
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

/// Working state of the decimation loop.
///
/// Every original column is in exactly one of three places: the active set,
/// the equation stack (as a lead), or the dropped list (columns that became
/// numerically zero and are fixed to `h = 0`).
#[derive(Debug, Clone)]
pub struct DecimationState {
    rows: usize,
    cols: usize,
    /// Column-major `rows × cols`; only active columns are kept current.
    work: Vec<f64>,
    original_sq_norms: Vec<f64>,
    active: Vec<usize>,
    residual: Vec<f64>,
    stack: Vec<EquationRecord>,
    dropped: Vec<usize>,
    pub(crate) warm_beta: Option<Vec<f64>>,
    /// `B Bᵀ` over the active columns, maintained once the direct engine asks for it.
    pub(crate) gram: Option<Vec<f64>>,
}

impl DecimationState {
    pub fn new(d: &DenseMatrix, z: &[f64]) -> Result<Self> {
        check_len("DecimationState::new", d.rows(), z.len())?;
        let (rows, cols) = (d.rows(), d.cols());
        let work = d.to_column_major();
        let original_sq_norms = work.chunks_exact(rows).map(|c| dot(c, c)).collect();
        let mut state = Self {
            rows,
            cols,
            work,
            original_sq_norms,
            active: (0..cols).collect(),
            residual: z.to_vec(),
            stack: Vec::new(),
            dropped: Vec::new(),
            warm_beta: None,
            gram: None,
        };
        state.prune_zero_columns();
        Ok(state)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of original columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Active original column indices in increasing order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn stack(&self) -> &[EquationRecord] {
        &self.stack
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Decimation steps taken so far (= stack depth).
    pub fn step(&self) -> usize {
        self.stack.len()
    }

    pub fn warm_beta(&self) -> Option<&[f64]> {
        self.warm_beta.as_deref()
    }

    /// Current (deflated) column for original index `mu`.
    #[inline]
    pub fn column(&self, mu: usize) -> &[f64] {
        &self.work[mu * self.rows..(mu + 1) * self.rows]
    }

    /// Current active columns as a dense matrix, in active-set order.
    pub fn work_matrix(&self) -> Option<DenseMatrix> {
        if self.active.is_empty() {
            return None;
        }
        let cols: Vec<Vec<f64>> = self
            .active
            .iter()
            .map(|&mu| self.column(mu).to_vec())
            .collect();
        DenseMatrix::from_columns(&cols).ok()
    }

    pub(crate) fn view(&self) -> ActiveColumns<'_> {
        ActiveColumns { state: self }
    }

    fn is_negligible(&self, mu: usize) -> bool {
        let c = self.column(mu);
        let sq = dot(c, c);
        sq <= ZERO_COLUMN_ABS || sq <= ZERO_COLUMN_REL * self.original_sq_norms[mu]
    }

    /// Moves numerically vanished columns from the active set to the dropped list.
    pub fn prune_zero_columns(&mut self) -> usize {
        let before = self.active.len();
        let mut kept = Vec::with_capacity(before);
        let active = std::mem::take(&mut self.active);
        for mu in active {
            if self.is_negligible(mu) {
                if let Some(g) = self.gram.as_mut() {
                    let c = &self.work[mu * self.rows..(mu + 1) * self.rows];
                    rank_one_update(g, self.rows, -1.0, c);
                }
                self.dropped.push(mu);
            } else {
                kept.push(mu);
            }
        }
        self.active = kept;
        before - self.active.len()
    }

    /// Eliminates active column `lead`: deposits its equation, then projects
    /// every other active column and the residual orthogonally to it.
    pub fn deflate(&mut self, lead: usize) -> Result<()> {
        let pos = self
            .active
            .binary_search(&lead)
            .map_err(|_| Error::InvalidArgument(format!("index {lead} is not active")))?;
        if self.is_negligible(lead) {
            return Err(Error::ZeroColumn(lead));
        }
        let rows = self.rows;
        let dl: Vec<f64> = self.column(lead).to_vec();
        let dd = dot(&dl, &dl);

        self.active.remove(pos);
        let mut terms = Vec::with_capacity(self.active.len());
        for &mu in &self.active {
            let col = &mut self.work[mu * rows..(mu + 1) * rows];
            let coeff = dot(col, &dl) / dd;
            if coeff != 0.0 {
                axpy(-coeff, &dl, col);
                terms.push((mu, coeff));
            }
        }
        let constant = dot(&self.residual, &dl) / dd;
        axpy(-constant, &dl, &mut self.residual);

        if let Some(g) = self.gram.as_mut() {
            // B' B'ᵀ = P (B Bᵀ) P with P = I − u uᵀ; the lead column drops out since P dˡ = 0.
            let nrm = dd.sqrt();
            let u: Vec<f64> = dl.iter().map(|v| v / nrm).collect();
            project_symmetric(g, rows, &u);
        }

        self.stack.push(EquationRecord {
            lead,
            constant,
            terms,
        });
        Ok(())
    }

    /// Removes an active index without depositing an equation (its `h` is fixed to 0).
    pub fn drop_column(&mut self, mu: usize) -> Result<()> {
        let pos = self
            .active
            .binary_search(&mu)
            .map_err(|_| Error::InvalidArgument(format!("index {mu} is not active")))?;
        self.active.remove(pos);
        if let Some(g) = self.gram.as_mut() {
            let c = &self.work[mu * self.rows..(mu + 1) * self.rows];
            rank_one_update(g, self.rows, -1.0, c);
        }
        self.dropped.push(mu);
        Ok(())
    }

    pub(crate) fn ensure_gram(&mut self) {
        if self.gram.is_some() {
            return;
        }
        let m = self.rows;
        let mut g = vec![0.0; m * m];
        // Row-major copy of the active block makes each Gram entry a contiguous dot product.
        let k = self.active.len();
        let mut rows_buf = vec![0.0; m * k];
        for (j, &mu) in self.active.iter().enumerate() {
            for (i, v) in self.column(mu).iter().enumerate() {
                rows_buf[i * k + j] = *v;
            }
        }
        for i in 0..m {
            for j in i..m {
                let v = dot(&rows_buf[i * k..(i + 1) * k], &rows_buf[j * k..(j + 1) * k]);
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        self.gram = Some(g);
    }
}

/// `G += s c cᵀ`.
fn rank_one_update(g: &mut [f64], m: usize, s: f64, c: &[f64]) {
    for i in 0..m {
        axpy(s * c[i], c, &mut g[i * m..(i + 1) * m]);
    }
}

/// `G ← (I − u uᵀ) G (I − u uᵀ)` for unit `u`.
fn project_symmetric(g: &mut [f64], m: usize, u: &[f64]) {
    let w: Vec<f64> = (0..m).map(|i| dot(&g[i * m..(i + 1) * m], u)).collect();
    let c = dot(u, &w);
    for i in 0..m {
        let row = &mut g[i * m..(i + 1) * m];
        let (ui, wi) = (u[i], w[i]);
        for j in 0..m {
            row[j] += -ui * w[j] - wi * u[j] + c * ui * u[j];
        }
    }
}

/// The active columns of a [`DecimationState`] as a linear operator.
pub(crate) struct ActiveColumns<'a> {
    state: &'a DecimationState,
}

impl LinearOperator for ActiveColumns<'_> {
    fn nrows(&self) -> usize {
        self.state.rows
    }

    fn ncols(&self) -> usize {
        self.state.active.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (&mu, &xk) in self.state.active.iter().zip(x) {
            if xk != 0.0 {
                axpy(xk, self.state.column(mu), out);
            }
        }
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        for (o, &mu) in out.iter_mut().zip(&self.state.active) {
            *o = dot(self.state.column(mu), y);
        }
    }
}

/// Resolves the equation stack in LIFO order. Indices that never became a
/// lead are zero.
pub fn backtrack(stack: &[EquationRecord], n: usize) -> Result<Vec<f64>> {
    let mut h = vec![0.0; n];
    let mut assigned = vec![true; n];
    for rec in stack {
        if rec.lead >= n {
            return Err(Error::InvalidArgument(format!(
                "equation lead {} out of range {n}",
                rec.lead
            )));
        }
        assigned[rec.lead] = false;
    }
    for rec in stack.iter().rev() {
        let mut value = rec.constant;
        for &(mu, coeff) in &rec.terms {
            if mu >= n || !assigned[mu] {
                return Err(Error::UnresolvedReference(mu));
            }
            value -= coeff * h[mu];
        }
        h[rec.lead] = value;
        assigned[rec.lead] = true;
    }
    Ok(h)
}

/// Relative orthogonality `|⟨a,b⟩| / (‖a‖‖b‖)`, zero when either vector vanishes.
pub fn relative_overlap(a: &[f64], b: &[f64]) -> f64 {
    let denom = norm2(a) * norm2(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b).abs() / denom
    }
}
