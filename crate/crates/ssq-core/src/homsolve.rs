//! Linear systems whose unknowns are block matrices: the engine behind
//! hom-space bases, lifting problems and mediating maps.

use crate::bigraded::Bidegree;
use crate::exactla::{FieldSpec, Matrix};

/// Identifies one unknown block: a page index and a source bidegree.
pub type BlockKey = (usize, Bidegree);

#[derive(Debug, Clone)]
struct BlockVar {
    rows: usize,
    cols: usize,
    offset: usize,
}

/// A system of matrix equations `Σ_k P_k · U_{b_k} · Q_k = R` in unknown
/// blocks `U_b`. Missing blocks (zero-dimensional) contribute nothing.
#[derive(Debug, Clone)]
pub struct MapSystem {
    field: FieldSpec,
    vars: std::collections::BTreeMap<BlockKey, BlockVar>,
    total: usize,
    rows: Vec<Vec<(usize, crate::exactla::Scalar)>>,
    rhs: Vec<crate::exactla::Scalar>,
}

/// One term `P · U_key · Q` of a matrix equation.
pub struct Term<'a> {
    pub left: &'a Matrix,
    pub key: BlockKey,
    pub right: &'a Matrix,
}

impl MapSystem {
    pub fn new(field: FieldSpec) -> Self {
        MapSystem {
            field,
            vars: Default::default(),
            total: 0,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Registers an unknown block; zero-sized blocks are silently skipped.
    pub fn add_block(&mut self, key: BlockKey, rows: usize, cols: usize) {
        if rows == 0 || cols == 0 || self.vars.contains_key(&key) {
            return;
        }
        self.vars.insert(
            key,
            BlockVar {
                rows,
                cols,
                offset: self.total,
            },
        );
        self.total += rows * cols;
    }

    /// Adds the matrix equation `Σ terms = rhs`. All terms and the rhs must
    /// share the output shape `rhs.rows x rhs.cols`.
    pub fn add_matrix_eq(&mut self, terms: &[Term<'_>], rhs: &Matrix) {
        let f = self.field;
        let out_rows = rhs.rows();
        let out_cols = rhs.cols();
        if out_rows == 0 || out_cols == 0 {
            return;
        }
        for i in 0..out_rows {
            for j in 0..out_cols {
                let mut row: Vec<(usize, crate::exactla::Scalar)> = Vec::new();
                for term in terms {
                    let Some(var) = self.vars.get(&term.key) else {
                        continue;
                    };
                    debug_assert_eq!(term.left.cols(), var.rows);
                    debug_assert_eq!(term.right.rows(), var.cols);
                    for s in 0..var.rows {
                        let l = term.left.entry(i, s);
                        if l.is_zero() {
                            continue;
                        }
                        for t in 0..var.cols {
                            let r = term.right.entry(t, j);
                            if r.is_zero() {
                                continue;
                            }
                            row.push((var.offset + s * var.cols + t, f.mul(l, r)));
                        }
                    }
                }
                self.rows.push(row);
                self.rhs.push(rhs.entry(i, j).clone());
            }
        }
    }

    fn assemble(&self) -> (Matrix, Matrix) {
        let f = self.field;
        let mut a = Matrix::zeros(f, self.rows.len(), self.total);
        let mut b = Matrix::zeros(f, self.rows.len(), 1);
        for (i, row) in self.rows.iter().enumerate() {
            for (col, v) in row {
                let cur = a.entry(i, *col).clone();
                a.set(i, *col, f.add(&cur, v));
            }
            b.set(i, 0, self.rhs[i].clone());
        }
        (a, b)
    }

    fn unpack(&self, flat: &Matrix) -> BlockAssignment {
        let mut blocks = std::collections::BTreeMap::new();
        for (key, var) in &self.vars {
            let m = Matrix::from_fn(self.field, var.rows, var.cols, |i, j| {
                flat.entry(var.offset + i * var.cols + j, 0).clone()
            });
            blocks.insert(*key, m);
        }
        BlockAssignment { blocks }
    }

    /// One solution of the affine system, if consistent.
    pub fn solve_affine(&self) -> Option<BlockAssignment> {
        let (a, b) = self.assemble();
        match a.solve_matrix(&b) {
            Ok(Some(x)) => Some(self.unpack(&x)),
            _ => None,
        }
    }

    /// Basis of the homogeneous solution space (the rhs is ignored).
    pub fn kernel_basis(&self) -> Vec<BlockAssignment> {
        let (a, _) = self.assemble();
        let ker = a.kernel();
        (0..ker.dim())
            .map(|j| self.unpack(&ker.basis().column(j)))
            .collect()
    }

    /// Dimension of the homogeneous solution space.
    pub fn kernel_dim(&self) -> usize {
        let (a, _) = self.assemble();
        self.total - a.rank()
    }
}

/// Values for every registered block.
#[derive(Debug, Clone)]
pub struct BlockAssignment {
    pub blocks: std::collections::BTreeMap<BlockKey, Matrix>,
}

impl BlockAssignment {
    pub fn block(&self, key: &BlockKey) -> Option<&Matrix> {
        self.blocks.get(key)
    }
}
