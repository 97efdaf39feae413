//! Exact linear algebra over the rationals and prime fields.
//!
//! Dense matrices with reduced-echelon canonical bases: the kernel, image and
//! quotient engine every other module calls. Arithmetic is exact, so
//! re-running any computation yields bit-identical output.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::fmt;

/// Default prime modulus when no field is specified: small enough to read,
/// large enough to avoid accidental degeneracies in random tests.
pub const DEFAULT_PRIME: u64 = 101;

/// The coefficient field: the rationals or a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// A prime field, validating the modulus.
    pub fn prime_field(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(FieldSpec::PrimeField(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn default_prime_field() -> Self {
        FieldSpec::PrimeField(DEFAULT_PRIME)
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::zero()),
            FieldSpec::PrimeField(_) => Scalar::Fp(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::one()),
            FieldSpec::PrimeField(_) => Scalar::Fp(1),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(BigRational::from(BigInt::from(v))),
            FieldSpec::PrimeField(p) => {
                let m = v.rem_euclid(*p as i64) as u64;
                Scalar::Fp(m)
            }
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (FieldSpec::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (FieldSpec::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp((x + y) % p),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (FieldSpec::Rationals, Scalar::Rat(x)) => Scalar::Rat(-x),
            (FieldSpec::PrimeField(p), Scalar::Fp(x)) => Scalar::Fp(if *x == 0 { 0 } else { p - x }),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (FieldSpec::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (FieldSpec::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        match (self, a) {
            (FieldSpec::Rationals, Scalar::Rat(x)) => {
                if x.is_zero() {
                    Err(Error::ShapeError("division by zero".into()))
                } else {
                    Ok(Scalar::Rat(x.recip()))
                }
            }
            (FieldSpec::PrimeField(p), Scalar::Fp(x)) => {
                if *x == 0 {
                    Err(Error::ShapeError("division by zero".into()))
                } else {
                    // Fermat: x^(p-2) mod p.
                    let mut base = *x as u128;
                    let mut exp = p - 2;
                    let m = *p as u128;
                    let mut acc: u128 = 1;
                    while exp > 0 {
                        if exp & 1 == 1 {
                            acc = acc * base % m;
                        }
                        base = base * base % m;
                        exp >>= 1;
                    }
                    Ok(Scalar::Fp(acc as u64))
                }
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Parses the canonical text form: decimal integers, `a/b` for rationals.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let text = text.trim();
        let bad = || Error::ParseError(format!("bad scalar `{text}`"));
        match self {
            FieldSpec::Rationals => {
                if let Some((num, den)) = text.split_once('/') {
                    let n: BigInt = num.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = den.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(Scalar::Rat(BigRational::new(n, d)))
                } else {
                    let n: BigInt = text.parse().map_err(|_| bad())?;
                    Ok(Scalar::Rat(BigRational::from(n)))
                }
            }
            FieldSpec::PrimeField(_) => {
                if let Some((num, den)) = text.split_once('/') {
                    let n: i64 = num.trim().parse().map_err(|_| bad())?;
                    let d: i64 = den.trim().parse().map_err(|_| bad())?;
                    self.div(&self.from_i64(n), &self.from_i64(d))
                } else {
                    let n: i64 = text.parse().map_err(|_| bad())?;
                    Ok(self.from_i64(n))
                }
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "F{p}"),
        }
    }
}

/// A canonical scalar: a lowest-terms rational or a residue in `[0, p)`.
///
/// The modulus is not stored; it is carried by the surrounding
/// [`FieldSpec`], which all arithmetic is routed through.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp(u64),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Fp(x) => *x == 0,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    write!(f, "{}", x.numer())
                } else {
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Fp(x) => write!(f, "{x}"),
        }
    }
}

/// A dense exact matrix. `entry(i, j)` is the coefficient of target basis
/// vector `i` on source basis vector `j`, so `m * v` acts on column vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_fn(field: FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix { field, rows, cols, entries }
    }

    /// Builds a matrix from integer entries; handy in tests and fixtures.
    pub fn from_i64(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(field, r, c, |i, j| field.from_i64(rows[i][j]))
    }

    pub fn column_vector(field: FieldSpec, entries: &[Scalar]) -> Self {
        Matrix {
            field,
            rows: entries.len(),
            cols: 1,
            entries: entries.to_vec(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.field, self.rows)
    }

    pub fn column(&self, j: usize) -> Matrix {
        Matrix::from_fn(self.field, self.rows, 1, |i, _| self.entry(i, j).clone())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.entry(j, i).clone())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeError(format!(
                "add {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.field.add(self.entry(i, j), other.entry(i, j))
        }))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.field.mul(self.entry(i, j), s)
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeError(format!(
                "mul {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        Ok(Matrix::from_fn(f, self.rows, other.cols, |i, j| {
            let mut acc = f.zero();
            for k in 0..self.cols {
                let t = f.mul(self.entry(i, k), other.entry(k, j));
                acc = f.add(&acc, &t);
            }
            acc
        }))
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::ShapeError("vstack with unequal widths".into()));
        }
        Ok(Matrix::from_fn(self.field, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.entry(i, j).clone()
            } else {
                other.entry(i - self.rows, j).clone()
            }
        }))
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::ShapeError("hstack with unequal heights".into()));
        }
        Ok(Matrix::from_fn(self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.entry(i, j).clone()
            } else {
                other.entry(i, j - self.cols).clone()
            }
        }))
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch(format!("{} vs {}", self.field, other.field)))
        } else {
            Ok(())
        }
    }

    /// Reduced row-echelon form with the pivot columns of the original matrix.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let pivot_row = (row..m.rows).find(|&r| !m.entry(r, col).is_zero());
            let Some(pr) = pivot_row else { continue };
            if pr != row {
                for j in 0..m.cols {
                    let a = m.entry(row, j).clone();
                    let b = m.entry(pr, j).clone();
                    m.set(row, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = f.inv(m.entry(row, col)).expect("pivot nonzero");
            for j in 0..m.cols {
                let v = f.mul(m.entry(row, j), &inv);
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || m.entry(r, col).is_zero() {
                    continue;
                }
                let factor = m.entry(r, col).clone();
                for j in 0..m.cols {
                    let v = f.sub(m.entry(r, j), &f.mul(&factor, m.entry(row, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Kernel as a canonical subspace of the source.
    pub fn kernel(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis.set(fc, k, f.one());
            for (prow, &pc) in pivots.iter().enumerate() {
                basis.set(pc, k, f.neg(r.entry(prow, fc)));
            }
        }
        Subspace::from_span(self.cols, &basis).expect("kernel span")
    }

    /// Column space as a canonical subspace of the target.
    pub fn image(&self) -> Subspace {
        Subspace::from_span(self.rows, self).expect("image span")
    }

    /// Solves `self * x = b`, returning one solution if `b` lies in the image.
    pub fn solve(&self, b: &Matrix) -> Result<Option<Matrix>> {
        self.check_same_field(b)?;
        if b.rows != self.rows || b.cols != 1 {
            return Err(Error::ShapeError(format!(
                "solve: rhs is {}x{}, expected {}x1",
                b.rows, b.cols, self.rows
            )));
        }
        Ok(self.solve_matrix(b)?.map(|m| m))
    }

    /// Solves `self * X = B` columnwise; `None` if any column is inconsistent.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Option<Matrix>> {
        self.check_same_field(b)?;
        if b.rows != self.rows {
            return Err(Error::ShapeError("solve_matrix: row mismatch".into()));
        }
        let aug = self.hstack(b)?;
        let (r, pivots) = aug.rref();
        // Any pivot in the appended block means inconsistency.
        if pivots.iter().any(|&c| c >= self.cols) {
            return Ok(None);
        }
        let f = self.field;
        let mut x = Matrix::zeros(f, self.cols, b.cols);
        for (prow, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.entry(prow, self.cols + j).clone());
            }
        }
        Ok(Some(x))
    }

    /// Inverse of a square matrix, if invertible.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let id = Matrix::identity(self.field, self.rows);
        match self.solve_matrix(&id) {
            Ok(Some(inv)) => {
                if self.rank() == self.rows {
                    Some(inv)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.cols
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.rows
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// A subspace of `k^n`, stored as a reduced-echelon basis whose columns have
/// strictly increasing pivot rows. The representation is canonical: two
/// subspaces are equal iff their stored bases are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl Subspace {
    /// Canonicalizes a spanning set (given as matrix columns).
    pub fn from_span(ambient_dim: usize, span: &Matrix) -> Result<Self> {
        if span.rows() != ambient_dim {
            return Err(Error::ShapeError(format!(
                "span lives in dimension {}, expected {ambient_dim}",
                span.rows()
            )));
        }
        let (r, pivots) = span.transpose().rref();
        let basis = Matrix::from_fn(span.field(), ambient_dim, pivots.len(), |i, j| {
            r.entry(j, i).clone()
        });
        Ok(Subspace { ambient_dim, basis })
    }

    pub fn zero(field: FieldSpec, ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::zeros(field, ambient_dim, 0),
        }
    }

    pub fn full(field: FieldSpec, ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::identity(field, ambient_dim),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Pivot rows of the echelon basis, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        let mut row = 0;
        for j in 0..self.dim() {
            while row < self.ambient_dim && self.basis.entry(row, j).is_zero() {
                row += 1;
            }
            out.push(row);
        }
        out
    }

    /// Coordinates of `v` in the stored basis, if `v` lies in the subspace.
    pub fn coords_of(&self, v: &Matrix) -> Result<Option<Matrix>> {
        if v.rows() != self.ambient_dim || v.cols() != 1 {
            return Err(Error::ShapeError("coords_of: bad vector shape".into()));
        }
        // Echelon structure: coordinates are the pivot-row entries.
        let pivots = self.pivots();
        let coords = Matrix::from_fn(self.field(), self.dim(), 1, |i, _| {
            v.entry(pivots[i], 0).clone()
        });
        let recon = self.basis.mul(&coords)?;
        if &recon == v {
            Ok(Some(coords))
        } else {
            Ok(None)
        }
    }

    pub fn contains(&self, v: &Matrix) -> Result<bool> {
        Ok(self.coords_of(v)?.is_some())
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        for j in 0..other.dim() {
            if !self.contains(&other.basis.column(j))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::ShapeError("sum: ambient mismatch".into()));
        }
        Subspace::from_span(self.ambient_dim, &self.basis.hstack(&other.basis)?)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::ShapeError("intersection: ambient mismatch".into()));
        }
        // x = A a = B b: read off the A-part of the kernel of [A | -B].
        let neg = other.basis.scale(&self.field().from_i64(-1));
        let stacked = self.basis.hstack(&neg)?;
        let ker = stacked.kernel();
        let mut span = Matrix::zeros(self.field(), self.ambient_dim, ker.dim());
        for j in 0..ker.dim() {
            let a_part = Matrix::from_fn(self.field(), self.dim(), 1, |i, _| {
                ker.basis().entry(i, j).clone()
            });
            let v = self.basis.mul(&a_part)?;
            for i in 0..self.ambient_dim {
                span.set(i, j, v.entry(i, 0).clone());
            }
        }
        Subspace::from_span(self.ambient_dim, &span)
    }
}

/// Rank, kernel and image of a matrix in one call.
pub fn rank_kernel_image(m: &Matrix) -> (usize, Subspace, Subspace) {
    let kernel = m.kernel();
    let image = m.image();
    (image.dim(), kernel, image)
}

/// A projection `k^n -> k^(n-d)` with kernel exactly `sub`, together with a
/// section: `proj * section = id` and `proj * sub.basis = 0`. Realizes every
/// quotient downstream.
pub fn quotient_with_section(ambient_dim: usize, sub: &Subspace) -> Result<(Matrix, Matrix)> {
    if sub.ambient_dim() != ambient_dim {
        return Err(Error::ShapeError(format!(
            "quotient: subspace of dimension {} in ambient {ambient_dim}",
            sub.ambient_dim()
        )));
    }
    let f = sub.field();
    let pivots = sub.pivots();
    let complement: Vec<usize> = (0..ambient_dim).filter(|i| !pivots.contains(i)).collect();
    let mut section = Matrix::zeros(f, ambient_dim, complement.len());
    for (j, &i) in complement.iter().enumerate() {
        section.set(i, j, f.one());
    }
    // [basis | section] is invertible; the quotient coordinates of v are the
    // complement block of its expansion.
    let change = sub.basis().hstack(&section)?;
    let inv = change.inverse().ok_or_else(|| Error::ShapeError("quotient basis not invertible".into()))?;
    let proj = Matrix::from_fn(f, complement.len(), ambient_dim, |i, j| {
        inv.entry(sub.dim() + i, j).clone()
    });
    Ok((proj, section))
}

/// The preimage `{x : m x in target_sub}` as a subspace of the source.
pub fn intersect_preimage(m: &Matrix, target_sub: &Subspace) -> Result<Subspace> {
    if target_sub.ambient_dim() != m.rows() {
        return Err(Error::ShapeError(format!(
            "preimage: subspace of ambient {} against map into dimension {}",
            target_sub.ambient_dim(),
            m.rows()
        )));
    }
    let (proj, _) = quotient_with_section(m.rows(), target_sub)?;
    Ok(proj.mul(m)?.kernel())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent textbook row-reduction oracle: counts pivots, no
    /// canonicalization, no shared code with `Matrix::rref`.
    fn naive_rank(field: FieldSpec, rows: usize, cols: usize, entries: &[Scalar]) -> usize {
        let mut m: Vec<Vec<Scalar>> = (0..rows)
            .map(|i| entries[i * cols..(i + 1) * cols].to_vec())
            .collect();
        let mut rank = 0;
        for col in 0..cols {
            let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, pr);
            for r in (rank + 1)..rows {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = field.div(&m[r][col], &m[rank][col]).unwrap();
                for c in 0..cols {
                    let t = field.mul(&factor, &m[rank][c]);
                    m[r][c] = field.sub(&m[r][c], &t);
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    fn random_matrix(field: FieldSpec, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(field, rows, cols, |_, _| field.from_i64(rng.gen_range(-8..9)))
    }

    #[test]
    fn identity_over_f5_full_rank() {
        let f = FieldSpec::prime_field(5).unwrap();
        let m = Matrix::identity(f, 2);
        let (rank, ker, im) = rank_kernel_image(&m);
        assert_eq!(rank, 2);
        assert_eq!(ker.dim(), 0);
        assert_eq!(im.dim(), 2);
    }

    #[test]
    fn dependent_rows_over_f5() {
        let f = FieldSpec::prime_field(5).unwrap();
        let m = Matrix::from_i64(f, &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn random_rank_matches_naive_oracle() {
        let f = FieldSpec::prime_field(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_matrix(f, 6, 4, &mut rng);
            let (rank, ker, _) = rank_kernel_image(&m);
            assert_eq!(rank + ker.dim(), 4);
            assert_eq!(rank, naive_rank(f, 6, 4, &m.entries));
            // m * kernel basis = 0
            assert!(m.mul(ker.basis()).unwrap().is_zero());
        }
    }

    #[test]
    fn solve_zero_and_identity() {
        let f = FieldSpec::Rationals;
        let z = Matrix::zeros(f, 3, 2);
        let b = Matrix::zeros(f, 3, 1);
        let x = z.solve(&b).unwrap().unwrap();
        assert!(x.is_zero());

        let id = Matrix::identity(f, 3);
        let b = Matrix::from_i64(f, &[&[1], &[-2], &[5]]);
        assert_eq!(id.solve(&b).unwrap().unwrap(), b);
    }

    #[test]
    fn solve_constructed_consistent_system_exactly() {
        let f = FieldSpec::Rationals;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(f, 4, 3, &mut rng);
            let x0 = random_matrix(f, 3, 1, &mut rng);
            let b = m.mul(&x0).unwrap();
            let x = m.solve(&b).unwrap().expect("consistent by construction");
            assert_eq!(m.mul(&x).unwrap(), b);
        }
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = FieldSpec::Rationals;
        let m = Matrix::identity(f, 2);
        let b = Matrix::zeros(f, 3, 1);
        assert!(matches!(m.solve(&b), Err(Error::ShapeError(_))));
    }

    #[test]
    fn quotient_trivial_cases() {
        let f = FieldSpec::prime_field(5).unwrap();
        let zero = Subspace::zero(f, 4);
        let (proj, section) = quotient_with_section(4, &zero).unwrap();
        assert!(proj.is_identity());
        assert!(section.is_identity());

        let full = Subspace::full(f, 4);
        let (proj, _) = quotient_with_section(4, &full).unwrap();
        assert_eq!(proj.rows(), 0);
        assert_eq!(proj.cols(), 4);
    }

    #[test]
    fn quotient_random_subspace_of_f5_6() {
        let f = FieldSpec::prime_field(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let span = random_matrix(f, 6, 3, &mut rng);
            let sub = Subspace::from_span(6, &span).unwrap();
            let (proj, section) = quotient_with_section(6, &sub).unwrap();
            assert!(proj.mul(&section).unwrap().is_identity());
            assert!(proj.mul(sub.basis()).unwrap().is_zero());
            assert_eq!(proj.rows(), 6 - sub.dim());
        }
    }

    #[test]
    fn preimage_trivial_and_identity() {
        let f = FieldSpec::prime_field(5).unwrap();
        let m = Matrix::from_i64(f, &[&[1, 0, 2], &[0, 1, 3]]);
        let full = Subspace::full(f, 2);
        assert!(intersect_preimage(&m, &full).unwrap().is_full());

        let id = Matrix::identity(f, 3);
        let s = Subspace::from_span(3, &Matrix::from_i64(f, &[&[1], &[2], &[0]])).unwrap();
        assert_eq!(intersect_preimage(&id, &s).unwrap(), s);
    }

    #[test]
    fn preimage_membership_brute_force() {
        let f = FieldSpec::prime_field(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let m = random_matrix(f, 4, 5, &mut rng);
            let span = random_matrix(f, 4, 2, &mut rng);
            let sub = Subspace::from_span(4, &span).unwrap();
            let pre = intersect_preimage(&m, &sub).unwrap();
            // Every basis vector of the preimage maps into sub.
            for j in 0..pre.dim() {
                let img = m.mul(&pre.basis().column(j)).unwrap();
                assert!(sub.contains(&img).unwrap());
            }
            // Conversely: solve against the augmented system on a spanning set
            // of candidate solutions - anything mapping into sub lies in pre.
            for _ in 0..10 {
                let x = random_matrix(f, 5, 1, &mut rng);
                if sub.contains(&m.mul(&x).unwrap()).unwrap() {
                    assert!(pre.contains(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn subspace_canonical_form_is_stable() {
        let f = FieldSpec::Rationals;
        let a = Matrix::from_i64(f, &[&[1, 3], &[2, 6], &[0, 1]]);
        let b = Matrix::from_i64(f, &[&[3, 1], &[6, 2], &[1, 0]]);
        let sa = Subspace::from_span(3, &a).unwrap();
        let sb = Subspace::from_span(3, &b).unwrap();
        assert_eq!(sa, sb);
        let p = sa.pivots();
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn rank_nullity(seed in 0u64..500) {
            let f = FieldSpec::PrimeField(101);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = rng.gen_range(0..6usize);
            let cols = rng.gen_range(0..6usize);
            let m = random_matrix(f, rows, cols, &mut rng);
            let (rank, ker, im) = rank_kernel_image(&m);
            prop_assert_eq!(rank + ker.dim(), cols);
            prop_assert_eq!(im.dim(), rank);
        }

        #[test]
        fn quotient_section_roundtrip(seed in 0u64..300) {
            let f = FieldSpec::PrimeField(101);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..6usize);
            let d = rng.gen_range(0..=n);
            let span = random_matrix(f, n, d, &mut rng);
            let sub = Subspace::from_span(n, &span).unwrap();
            let (proj, section) = quotient_with_section(n, &sub).unwrap();
            prop_assert!(proj.mul(&section).unwrap().is_identity());
            prop_assert!(proj.mul(sub.basis()).unwrap().is_zero());
        }
    }
}
