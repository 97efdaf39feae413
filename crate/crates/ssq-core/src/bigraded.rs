//! Finitely supported bigraded modules, bidegree-homogeneous maps, r-bigraded
//! complexes, homology with chosen sections, cones and the translation
//! functor.

use crate::error::{Error, Result, ValidationReport};
use crate::exactla::{quotient_with_section, FieldSpec, Matrix, Scalar, Subspace};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

pub type Bidegree = (i64, i64);

/// A finitely supported family of vector spaces indexed by ℤ².
/// Zero-dimensional components are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigradedModule {
    field: FieldSpec,
    components: BTreeMap<Bidegree, usize>,
}

impl BigradedModule {
    pub fn zero(field: FieldSpec) -> Self {
        BigradedModule {
            field,
            components: BTreeMap::new(),
        }
    }

    pub fn from_components(field: FieldSpec, components: &[(Bidegree, usize)]) -> Self {
        let mut map = BTreeMap::new();
        for &(pn, dim) in components {
            if dim > 0 {
                *map.entry(pn).or_insert(0) += dim;
            }
        }
        BigradedModule {
            field,
            components: map,
        }
    }

    /// Rank one concentrated in a single bidegree.
    pub fn line(field: FieldSpec, pn: Bidegree) -> Self {
        Self::from_components(field, &[(pn, 1)])
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dim(&self, pn: Bidegree) -> usize {
        self.components.get(&pn).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.components.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.components.keys().copied()
    }

    pub fn components(&self) -> &BTreeMap<Bidegree, usize> {
        &self.components
    }

    pub fn direct_sum(&self, other: &BigradedModule) -> Result<BigradedModule> {
        self.check_field(other)?;
        let mut components = self.components.clone();
        for (&pn, &d) in &other.components {
            *components.entry(pn).or_insert(0) += d;
        }
        Ok(BigradedModule {
            field: self.field,
            components,
        })
    }

    /// Reindexes along `(p, n) -> f(p, n)`; `f` must be injective on the support.
    pub fn reindex(&self, f: impl Fn(Bidegree) -> Bidegree) -> BigradedModule {
        let mut components = BTreeMap::new();
        for (&pn, &d) in &self.components {
            let prev = components.insert(f(pn), d);
            assert!(prev.is_none(), "reindexing must be injective on support");
        }
        BigradedModule {
            field: self.field,
            components,
        }
    }

    /// Translation: `(T A)^{p,n} = A^{n, 2n-p}`, i.e. `(p0,n0) -> (2p0-n0, p0)`.
    pub fn translate(&self) -> BigradedModule {
        self.reindex(|(p, n)| (2 * p - n, p))
    }

    /// Inverse translation: `(p0,n0) -> (n0, 2n0-p0)`.
    pub fn translate_inv(&self) -> BigradedModule {
        self.reindex(|(p, n)| (n, 2 * n - p))
    }

    fn check_field(&self, other: &BigradedModule) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch(format!(
                "{} vs {}",
                self.field, other.field
            )))
        } else {
            Ok(())
        }
    }
}

/// A bidegree-homogeneous linear map between bigraded modules. Blocks are
/// indexed by the source bidegree; missing blocks are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigradedMap {
    source: BigradedModule,
    target: BigradedModule,
    bidegree: Bidegree,
    blocks: BTreeMap<Bidegree, Matrix>,
}

impl BigradedMap {
    pub fn zero(source: &BigradedModule, target: &BigradedModule, bidegree: Bidegree) -> Self {
        BigradedMap {
            source: source.clone(),
            target: target.clone(),
            bidegree,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(module: &BigradedModule) -> Self {
        let mut map = Self::zero(module, module, (0, 0));
        for (&pn, &d) in module.components() {
            map.blocks.insert(pn, Matrix::identity(module.field(), d));
        }
        map
    }

    /// Builds a map from explicit blocks, checking shapes.
    pub fn from_blocks(
        source: &BigradedModule,
        target: &BigradedModule,
        bidegree: Bidegree,
        blocks: BTreeMap<Bidegree, Matrix>,
    ) -> Result<Self> {
        let mut map = Self::zero(source, target, bidegree);
        for (pn, block) in blocks {
            map.set_block(pn, block)?;
        }
        Ok(map)
    }

    pub fn set_block(&mut self, pn: Bidegree, block: Matrix) -> Result<()> {
        let tgt = self.target_bidegree(pn);
        if block.rows() != self.target.dim(tgt) || block.cols() != self.source.dim(pn) {
            return Err(Error::ShapeError(format!(
                "block at ({},{}) is {}x{}, expected {}x{}",
                pn.0,
                pn.1,
                block.rows(),
                block.cols(),
                self.target.dim(tgt),
                self.source.dim(pn)
            )));
        }
        if block.field() != self.source.field() {
            return Err(Error::FieldMismatch("block field".into()));
        }
        if block.is_zero() {
            self.blocks.remove(&pn);
        } else {
            self.blocks.insert(pn, block);
        }
        Ok(())
    }

    pub fn source(&self) -> &BigradedModule {
        &self.source
    }

    pub fn target(&self) -> &BigradedModule {
        &self.target
    }

    pub fn bidegree(&self) -> Bidegree {
        self.bidegree
    }

    pub fn target_bidegree(&self, pn: Bidegree) -> Bidegree {
        (pn.0 + self.bidegree.0, pn.1 + self.bidegree.1)
    }

    /// The block at a source bidegree, materializing zeros.
    pub fn block(&self, pn: Bidegree) -> Matrix {
        match self.blocks.get(&pn) {
            Some(b) => b.clone(),
            None => Matrix::zeros(
                self.source.field(),
                self.target.dim(self.target_bidegree(pn)),
                self.source.dim(pn),
            ),
        }
    }

    pub fn nonzero_blocks(&self) -> impl Iterator<Item = (Bidegree, &Matrix)> {
        self.blocks.iter().map(|(&pn, m)| (pn, m))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn compose(&self, first: &BigradedMap) -> Result<BigradedMap> {
        // self ∘ first
        if first.target != self.source {
            return Err(Error::ShapeError("compose: middle modules differ".into()));
        }
        let bidegree = (
            self.bidegree.0 + first.bidegree.0,
            self.bidegree.1 + first.bidegree.1,
        );
        let mut out = BigradedMap::zero(&first.source, &self.target, bidegree);
        for pn in first.source.support() {
            let mid = first.target_bidegree(pn);
            let block = self.block(mid).mul(&first.block(pn))?;
            out.set_block(pn, block)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &BigradedMap) -> Result<BigradedMap> {
        if self.source != other.source || self.target != other.target || self.bidegree != other.bidegree
        {
            return Err(Error::ShapeError("add: map shapes differ".into()));
        }
        let mut out = BigradedMap::zero(&self.source, &self.target, self.bidegree);
        for pn in self.source.support() {
            out.set_block(pn, self.block(pn).add(&other.block(pn))?)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> BigradedMap {
        let mut out = BigradedMap::zero(&self.source, &self.target, self.bidegree);
        for pn in self.source.support() {
            out.set_block(pn, self.block(pn).scale(s)).expect("same shape");
        }
        out
    }

    pub fn neg(&self) -> BigradedMap {
        self.scale(&self.source.field().from_i64(-1))
    }

    pub fn apply(&self, pn: Bidegree, v: &Matrix) -> Result<Matrix> {
        self.block(pn).mul(v)
    }

    pub fn is_injective(&self) -> bool {
        self.source
            .support()
            .all(|pn| self.block(pn).is_injective())
    }

    /// Surjective in every bidegree of the target.
    pub fn is_surjective(&self) -> bool {
        self.target.support().all(|tn| {
            let src = (tn.0 - self.bidegree.0, tn.1 - self.bidegree.1);
            self.block(src).is_surjective()
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    pub fn inverse(&self) -> Result<BigradedMap> {
        if !self.is_iso() {
            return Err(Error::ShapeError("inverse of a non-isomorphism".into()));
        }
        let mut out = BigradedMap::zero(
            &self.target,
            &self.source,
            (-self.bidegree.0, -self.bidegree.1),
        );
        for pn in self.source.support() {
            let tgt = self.target_bidegree(pn);
            let inv = self
                .block(pn)
                .inverse()
                .ok_or_else(|| Error::ShapeError("non-invertible block".into()))?;
            out.set_block(tgt, inv)?;
        }
        Ok(out)
    }

    /// Translation on maps; bidegree `(a, b)` becomes `(2a - b, a)`.
    pub fn translate(&self) -> BigradedMap {
        let mut out = BigradedMap::zero(
            &self.source.translate(),
            &self.target.translate(),
            (2 * self.bidegree.0 - self.bidegree.1, self.bidegree.0),
        );
        for (pn, block) in self.nonzero_blocks() {
            let new_pn = (2 * pn.0 - pn.1, pn.0);
            out.set_block(new_pn, block.clone()).expect("translate block");
        }
        out
    }

    pub fn translate_inv(&self) -> BigradedMap {
        let mut out = BigradedMap::zero(
            &self.source.translate_inv(),
            &self.target.translate_inv(),
            (self.bidegree.1, 2 * self.bidegree.1 - self.bidegree.0),
        );
        for (pn, block) in self.nonzero_blocks() {
            let new_pn = (pn.1, 2 * pn.1 - pn.0);
            out.set_block(new_pn, block.clone()).expect("translate block");
        }
        out
    }
}

/// An r-bigraded complex: a differential of bidegree `(-r, 1-r)` squaring to
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RComplex {
    r: usize,
    module: BigradedModule,
    d: BigradedMap,
}

/// The differential bidegree on page `r`.
pub fn differential_bidegree(r: usize) -> Bidegree {
    (-(r as i64), 1 - r as i64)
}

impl RComplex {
    pub fn new(r: usize, module: BigradedModule, d: BigradedMap) -> Result<Self> {
        let c = RComplex { r, module, d };
        c.validate().into_result()?;
        Ok(c)
    }

    /// Zero differential on the given module.
    pub fn with_zero_differential(r: usize, module: BigradedModule) -> Self {
        let d = BigradedMap::zero(&module, &module, differential_bidegree(r));
        RComplex { r, module, d }
    }

    pub fn zero(field: FieldSpec, r: usize) -> Self {
        Self::with_zero_differential(r, BigradedModule::zero(field))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.check(
            self.d.source() == &self.module && self.d.target() == &self.module,
            "differential endpoints differ from the underlying module",
        );
        report.check(
            self.d.bidegree() == differential_bidegree(self.r),
            format!(
                "differential bidegree {:?} on page {}",
                self.d.bidegree(),
                self.r
            ),
        );
        if report.is_ok() {
            match self.d.compose(&self.d) {
                Ok(dd) => report.check(dd.is_zero(), "d^2 != 0"),
                Err(e) => report.push(format!("d^2 not composable: {e}")),
            }
        }
        report
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn module(&self) -> &BigradedModule {
        &self.module
    }

    pub fn d(&self) -> &BigradedMap {
        &self.d
    }

    pub fn field(&self) -> FieldSpec {
        self.module.field()
    }

    pub fn is_zero(&self) -> bool {
        self.module.is_zero()
    }

    /// `Cone_r(A)^{p,n} = A^{p,n} ⊕ A^{p+r,n+r-1}` with `d(a,b) = (0,a)`,
    /// together with the chain projection `π(a,b) = a + d(b)`.
    pub fn cone(&self) -> (RComplex, ComplexMap) {
        let f = self.field();
        let r = self.r as i64;
        let shifted = self.module.reindex(|(p, n)| (p - r, n - r + 1));
        let module = self
            .module
            .direct_sum(&shifted)
            .expect("cone sum");
        let mut d = BigradedMap::zero(&module, &module, differential_bidegree(self.r));
        for pn in self.module.support() {
            // The a-summand at `pn` maps identically onto the b-summand at
            // `pn - (r, r-1)`, which is `self.module` at `pn` again.
            let a_dim = self.module.dim(pn);
            let tgt = (pn.0 - r, pn.1 - r + 1);
            let rows = module.dim(tgt);
            let cols = module.dim(pn);
            let mut block = Matrix::zeros(f, rows, cols);
            // Target layout: a-part of dimension module_a(tgt), then b-part.
            let tgt_a = self.module.dim(tgt);
            for k in 0..a_dim {
                block.set(tgt_a + k, k, f.one());
            }
            d.set_block(pn, block).expect("cone block");
        }
        let cone = RComplex {
            r: self.r,
            module,
            d,
        };
        // π(a, b) = a + d b
        let mut proj = BigradedMap::zero(cone.module(), &self.module, (0, 0));
        for pn in cone.module().support() {
            let a_dim = self.module.dim(pn);
            let b_src = (pn.0 + r, pn.1 + r - 1);
            let b_dim = self.module.dim(b_src);
            let rows = self.module.dim(pn);
            let mut block = Matrix::zeros(f, rows, a_dim + b_dim);
            for k in 0..a_dim.min(rows) {
                block.set(k, k, f.one());
            }
            let dblock = self.d.block(b_src);
            for i in 0..rows {
                for j in 0..b_dim {
                    block.set(i, a_dim + j, dblock.entry(i, j).clone());
                }
            }
            proj.set_block(pn, block).expect("cone proj block");
        }
        let proj = ComplexMap {
            source: cone.clone(),
            target: self.clone(),
            map: proj,
        };
        (cone, proj)
    }

    /// Translation to an `(r+1)`-complex: `(T A)^{p,n} = A^{n,2n-p}`.
    pub fn translate(&self) -> RComplex {
        RComplex {
            r: self.r + 1,
            module: self.module.translate(),
            d: self.d.translate(),
        }
    }

    /// Inverse translation; errors on a 0-complex.
    pub fn translate_inv(&self) -> Result<RComplex> {
        if self.r == 0 {
            return Err(Error::RangeError(
                "translate_inv of a 0-bigraded complex".into(),
            ));
        }
        Ok(RComplex {
            r: self.r - 1,
            module: self.module.translate_inv(),
            d: self.d.translate_inv(),
        })
    }

    pub fn direct_sum(&self, other: &RComplex) -> Result<(RComplex, SumEmbeddings)> {
        if self.r != other.r {
            return Err(Error::PageMismatch(format!("{} vs {}", self.r, other.r)));
        }
        let module = self.module.direct_sum(&other.module)?;
        let f = self.field();
        let mut d = BigradedMap::zero(&module, &module, differential_bidegree(self.r));
        for pn in module.support() {
            let tgt = d.target_bidegree(pn);
            let a = self.d.block(pn);
            let b = other.d.block(pn);
            let rows = module.dim(tgt);
            let cols = module.dim(pn);
            let mut block = Matrix::zeros(f, rows, cols);
            let (ra, ca) = (self.module.dim(tgt), self.module.dim(pn));
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    block.set(i, j, a.entry(i, j).clone());
                }
            }
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    block.set(ra + i, ca + j, b.entry(i, j).clone());
                }
            }
            d.set_block(pn, block)?;
        }
        let sum = RComplex {
            r: self.r,
            module,
            d,
        };
        let inj1 = block_injection(&self.module, &other.module, true);
        let inj2 = block_injection(&self.module, &other.module, false);
        let proj1 = block_projection(&self.module, &other.module, true);
        let proj2 = block_projection(&self.module, &other.module, false);
        let emb = SumEmbeddings {
            inj: [
                ComplexMap::new_unchecked(self.clone(), sum.clone(), inj1),
                ComplexMap::new_unchecked(other.clone(), sum.clone(), inj2),
            ],
            proj: [
                ComplexMap::new_unchecked(sum.clone(), self.clone(), proj1),
                ComplexMap::new_unchecked(sum.clone(), other.clone(), proj2),
            ],
        };
        Ok((sum, emb))
    }
}

/// Structure maps of a binary direct sum.
#[derive(Debug, Clone)]
pub struct SumEmbeddings {
    pub inj: [ComplexMap; 2],
    pub proj: [ComplexMap; 2],
}

fn block_injection(a: &BigradedModule, b: &BigradedModule, first: bool) -> BigradedMap {
    let sum = a.direct_sum(b).expect("sum");
    let (src, _other) = if first { (a, b) } else { (b, a) };
    let f = a.field();
    let mut map = BigradedMap::zero(src, &sum, (0, 0));
    for pn in src.support() {
        let rows = sum.dim(pn);
        let cols = src.dim(pn);
        let offset = if first { 0 } else { a.dim(pn) };
        let mut block = Matrix::zeros(f, rows, cols);
        for k in 0..cols {
            block.set(offset + k, k, f.one());
        }
        map.set_block(pn, block).expect("injection block");
    }
    map
}

fn block_projection(a: &BigradedModule, b: &BigradedModule, first: bool) -> BigradedMap {
    let sum = a.direct_sum(b).expect("sum");
    let tgt = if first { a } else { b };
    let f = a.field();
    let mut map = BigradedMap::zero(&sum, tgt, (0, 0));
    for pn in sum.support() {
        let rows = tgt.dim(pn);
        let cols = sum.dim(pn);
        let offset = if first { 0 } else { a.dim(pn) };
        let mut block = Matrix::zeros(f, rows, cols);
        for k in 0..rows {
            block.set(k, offset + k, f.one());
        }
        map.set_block(pn, block).expect("projection block");
    }
    map
}

/// A map of r-bigraded complexes: a bidegree `(0,0)` map commuting with the
/// differentials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexMap {
    source: RComplex,
    target: RComplex,
    map: BigradedMap,
}

impl ComplexMap {
    pub fn new(source: RComplex, target: RComplex, map: BigradedMap) -> Result<Self> {
        let cm = Self::new_unchecked(source, target, map);
        cm.validate().into_result()?;
        Ok(cm)
    }

    pub(crate) fn new_unchecked(source: RComplex, target: RComplex, map: BigradedMap) -> Self {
        ComplexMap {
            source,
            target,
            map,
        }
    }

    pub fn identity(c: &RComplex) -> Self {
        ComplexMap {
            source: c.clone(),
            target: c.clone(),
            map: BigradedMap::identity(c.module()),
        }
    }

    pub fn zero(source: &RComplex, target: &RComplex) -> Self {
        ComplexMap {
            source: source.clone(),
            target: target.clone(),
            map: BigradedMap::zero(source.module(), target.module(), (0, 0)),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.check(
            self.source.r() == self.target.r(),
            "source and target pages differ",
        );
        report.check(
            self.map.source() == self.source.module() && self.map.target() == self.target.module(),
            "map endpoints differ from the complexes",
        );
        report.check(self.map.bidegree() == (0, 0), "map is not bidegree (0,0)");
        if report.is_ok() {
            let fd = self.map.compose(self.source.d()).expect("f d");
            let df = self.target.d().compose(&self.map).expect("d f");
            report.check(
                fd.add(&df.neg()).expect("difference").is_zero(),
                "does not commute with differentials",
            );
        }
        report
    }

    pub fn source(&self) -> &RComplex {
        &self.source
    }

    pub fn target(&self) -> &RComplex {
        &self.target
    }

    pub fn map(&self) -> &BigradedMap {
        &self.map
    }

    pub fn compose(&self, first: &ComplexMap) -> Result<ComplexMap> {
        if first.target != self.source {
            return Err(Error::ShapeError("compose: endpoints differ".into()));
        }
        Ok(ComplexMap {
            source: first.source.clone(),
            target: self.target.clone(),
            map: self.map.compose(&first.map)?,
        })
    }

    /// Quasi-isomorphism test; errors if the map is not a chain map.
    pub fn is_quasi_iso(&self) -> Result<bool> {
        if !self.validate().is_ok() {
            return Err(Error::NotChainMap(self.validate().to_string()));
        }
        let hs = homology(&self.source)?;
        let ht = homology(&self.target)?;
        Ok(induced_on_homology(self, &hs, &ht)?.is_iso())
    }
}

/// Homology of an r-complex with a chosen basis, projection and section.
#[derive(Debug, Clone)]
pub struct HomologyData {
    ambient: BigradedModule,
    h: BigradedModule,
    cycles: BTreeMap<Bidegree, Subspace>,
    boundaries: BTreeMap<Bidegree, Subspace>,
    /// Classifier on ambient coordinates; restricted to cycles it is the
    /// quotient projection, elsewhere it is a linear extension.
    classify: BTreeMap<Bidegree, Matrix>,
    /// Section: a chosen cycle representative for each homology basis vector.
    lift: BTreeMap<Bidegree, Matrix>,
}

impl HomologyData {
    pub fn h(&self) -> &BigradedModule {
        &self.h
    }

    pub fn cycles(&self, pn: Bidegree) -> Subspace {
        self.cycles
            .get(&pn)
            .cloned()
            .unwrap_or_else(|| Subspace::zero(self.h.field(), 0))
    }

    pub fn boundaries(&self, pn: Bidegree) -> Subspace {
        self.boundaries
            .get(&pn)
            .cloned()
            .unwrap_or_else(|| Subspace::zero(self.h.field(), 0))
    }

    /// Class of an ambient vector, which must be a cycle.
    pub fn class_of(&self, pn: Bidegree, v: &Matrix) -> Result<Matrix> {
        let cycles = self
            .cycles
            .get(&pn)
            .ok_or_else(|| Error::ShapeError("class_of outside support".into()))?;
        if cycles.coords_of(v)?.is_none() {
            return Err(Error::ShapeError("class_of: not a cycle".into()));
        }
        self.classifier(pn).mul(v)
    }

    /// Linear ambient-coordinates classifier agreeing with the quotient
    /// projection on cycles.
    pub fn classifier(&self, pn: Bidegree) -> Matrix {
        self.classify
            .get(&pn)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.h.field(), 0, 0))
    }

    /// The chosen cycle representatives, one column per homology basis vector.
    pub fn lift(&self, pn: Bidegree) -> Matrix {
        self.lift
            .get(&pn)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.h.field(), 0, 0))
    }

    /// The section `H -> ambient` as a bigraded map.
    pub fn lift_map(&self) -> BigradedMap {
        let mut out = BigradedMap::zero(&self.h, &self.ambient, (0, 0));
        for pn in self.h.support() {
            out.set_block(pn, self.lift(pn)).expect("lift block");
        }
        out
    }

    /// The ambient classifier `module -> H` as a bigraded map.
    pub fn classifier_map(&self) -> BigradedMap {
        let mut out = BigradedMap::zero(&self.ambient, &self.h, (0, 0));
        for pn in self.ambient.support() {
            if self.h.dim(pn) > 0 {
                out.set_block(pn, self.classifier(pn)).expect("classifier block");
            }
        }
        out
    }

    pub fn ambient(&self) -> &BigradedModule {
        &self.ambient
    }
}

/// Homology of `c` with explicit projection and section; per bidegree,
/// `H = Ker d / Im d`.
pub fn homology(c: &RComplex) -> Result<HomologyData> {
    c.validate().into_result()?;
    let f = c.field();
    let r = c.r() as i64;
    let mut h_components = Vec::new();
    let mut cycles = BTreeMap::new();
    let mut boundaries = BTreeMap::new();
    let mut classify = BTreeMap::new();
    let mut lift = BTreeMap::new();
    for pn in c.module().support() {
        let dim = c.module().dim(pn);
        let z = c.d().block(pn).kernel();
        let from = (pn.0 + r, pn.1 + r - 1);
        let b = c.d().block(from).image();
        debug_assert!(z.contains_subspace(&b).unwrap());
        // Quotient Z/B in cycle coordinates.
        let b_in_z = {
            let mut coords = Matrix::zeros(f, z.dim(), b.dim());
            for j in 0..b.dim() {
                let col = z
                    .coords_of(&b.basis().column(j))
                    .expect("shape")
                    .expect("boundary is a cycle");
                for i in 0..z.dim() {
                    coords.set(i, j, col.entry(i, 0).clone());
                }
            }
            Subspace::from_span(z.dim(), &coords)?
        };
        let (proj, section) = quotient_with_section(z.dim(), &b_in_z)?;
        let hdim = proj.rows();
        if hdim > 0 {
            h_components.push((pn, hdim));
        }
        // Ambient classifier: cycle coordinates are the pivot-row entries of
        // the echelon cycle basis, extended linearly to all of ambient space.
        let selector = {
            let pivots = z.pivots();
            let mut m = Matrix::zeros(f, z.dim(), dim);
            for (i, &p) in pivots.iter().enumerate() {
                m.set(i, p, f.one());
            }
            m
        };
        classify.insert(pn, proj.mul(&selector)?);
        lift.insert(pn, z.basis().mul(&section)?);
        cycles.insert(pn, z);
        boundaries.insert(pn, b);
    }
    let h = BigradedModule::from_components(f, &h_components);
    Ok(HomologyData {
        ambient: c.module().clone(),
        h,
        cycles,
        boundaries,
        classify,
        lift,
    })
}

/// The induced map on homology, expressed in the stored bases.
pub fn induced_on_homology(
    f: &ComplexMap,
    hs: &HomologyData,
    ht: &HomologyData,
) -> Result<BigradedMap> {
    let mut out = BigradedMap::zero(hs.h(), ht.h(), (0, 0));
    for pn in hs.h().support() {
        let block = ht.classifier(pn).mul(&f.map().block(pn))?.mul(&hs.lift(pn))?;
        out.set_block(pn, block)?;
    }
    Ok(out)
}

/// Pushout of the span `B <-f- A -g-> C`, computed bidegreewise as
/// `(B ⊕ C)/⟨(f a, -g a)⟩`, with its cocone.
pub fn pushout(f: &ComplexMap, g: &ComplexMap) -> Result<Pushout> {
    if f.source() != g.source() {
        return Err(Error::ShapeError("pushout: apex mismatch".into()));
    }
    if f.source().r() != f.target().r() || g.source().r() != g.target().r() {
        return Err(Error::PageMismatch("pushout: page mismatch".into()));
    }
    let b = f.target();
    let c = g.target();
    let (sum, emb) = b.direct_sum(c)?;
    // Graph subspace ⟨(f a, -g a)⟩ per bidegree.
    let graph = emb.inj[0]
        .map()
        .compose(f.map())?
        .add(&emb.inj[1].map().compose(g.map())?.neg())?;
    let (quot, proj, section) = quotient_complex(&sum, &graph)?;
    let in_b = ComplexMap::new_unchecked(
        b.clone(),
        quot.clone(),
        proj.map().compose(emb.inj[0].map())?,
    );
    let in_c = ComplexMap::new_unchecked(
        c.clone(),
        quot.clone(),
        proj.map().compose(emb.inj[1].map())?,
    );
    Ok(Pushout {
        object: quot,
        in_b,
        in_c,
        proj_from_sum: proj,
        section,
    })
}

#[derive(Debug, Clone)]
pub struct Pushout {
    pub object: RComplex,
    pub in_b: ComplexMap,
    pub in_c: ComplexMap,
    pub proj_from_sum: ComplexMap,
    pub section: BigradedMap,
}

impl Pushout {
    /// The mediating map to a test cocone `(u, v)` with `u f = v g`.
    pub fn mediate(&self, u: &ComplexMap, v: &ComplexMap) -> Result<ComplexMap> {
        if u.target() != v.target() {
            return Err(Error::ShapeError("cocone targets differ".into()));
        }
        let (_, emb) = self.in_b.source().direct_sum(self.in_c.source())?;
        let uv = u
            .map()
            .compose(emb.proj[0].map())?
            .add(&v.map().compose(emb.proj[1].map())?)?;
        let m = uv.compose(&self.section)?;
        ComplexMap::new(self.object.clone(), u.target().clone(), m)
    }
}

/// Quotient of a complex by the image of a bidegree-(0,0) map into it,
/// returning the quotient, the projection and a module-level section.
pub fn quotient_complex(
    c: &RComplex,
    into: &BigradedMap,
) -> Result<(RComplex, ComplexMap, BigradedMap)> {
    if into.target() != c.module() {
        return Err(Error::ShapeError("quotient: map does not land in complex".into()));
    }
    let f = c.field();
    let mut sub = BTreeMap::new();
    for pn in c.module().support() {
        let src = (pn.0 - into.bidegree().0, pn.1 - into.bidegree().1);
        let image = into.block(src).image();
        sub.insert(pn, image);
    }
    quotient_complex_by_subspaces(c, &sub, f)
}

pub(crate) fn quotient_complex_by_subspaces(
    c: &RComplex,
    sub: &BTreeMap<Bidegree, Subspace>,
    f: FieldSpec,
) -> Result<(RComplex, ComplexMap, BigradedMap)> {
    let mut comps = Vec::new();
    let mut projs = BTreeMap::new();
    let mut sections = BTreeMap::new();
    for pn in c.module().support() {
        let dim = c.module().dim(pn);
        let s = sub
            .get(&pn)
            .cloned()
            .unwrap_or_else(|| Subspace::zero(f, dim));
        let (proj, section) = quotient_with_section(dim, &s)?;
        if proj.rows() > 0 {
            comps.push((pn, proj.rows()));
        }
        projs.insert(pn, proj);
        sections.insert(pn, section);
    }
    let module = BigradedModule::from_components(f, &comps);
    let mut proj_map = BigradedMap::zero(c.module(), &module, (0, 0));
    let mut section_map = BigradedMap::zero(&module, c.module(), (0, 0));
    for pn in c.module().support() {
        proj_map.set_block(pn, projs[&pn].clone())?;
        if module.dim(pn) > 0 {
            section_map.set_block(pn, sections[&pn].clone())?;
        }
    }
    // Induced differential: proj ∘ d ∘ section. Well-defined when the
    // subspaces are d-stable; validated below.
    let d = proj_map.compose(c.d())?.compose(&section_map)?;
    let quot = RComplex::new(c.r(), module, d).map_err(|e| {
        Error::InvalidComplex(format!("quotient differential not well-defined: {e}"))
    })?;
    let proj = ComplexMap::new(c.clone(), quot.clone(), proj_map)
        .map_err(|e| Error::InvalidComplex(format!("quotient projection not a chain map: {e}")))?;
    Ok((quot, proj, section_map))
}

/// Pullback of the cospan `B -f-> A <-g- C` as the bidegreewise kernel of
/// `(f, -g)` inside `B ⊕ C`, with its cone.
pub fn pullback(f: &ComplexMap, g: &ComplexMap) -> Result<Pullback> {
    if f.target() != g.target() {
        return Err(Error::ShapeError("pullback: target mismatch".into()));
    }
    let b = f.source();
    let c = g.source();
    let (sum, emb) = b.direct_sum(c)?;
    let diff = f
        .map()
        .compose(emb.proj[0].map())?
        .add(&g.map().compose(emb.proj[1].map())?.neg())?;
    let mut sub = BTreeMap::new();
    for pn in sum.module().support() {
        sub.insert(pn, diff.block(pn).kernel());
    }
    let (object, incl) = subcomplex_from_subspaces(&sum, &sub)?;
    let to_b = ComplexMap::new_unchecked(
        object.clone(),
        b.clone(),
        emb.proj[0].map().compose(incl.map())?,
    );
    let to_c = ComplexMap::new_unchecked(
        object.clone(),
        c.clone(),
        emb.proj[1].map().compose(incl.map())?,
    );
    Ok(Pullback {
        object,
        to_b,
        to_c,
        incl,
    })
}

#[derive(Debug, Clone)]
pub struct Pullback {
    pub object: RComplex,
    pub to_b: ComplexMap,
    pub to_c: ComplexMap,
    pub incl: ComplexMap,
}

/// Builds the subcomplex spanned by d-stable subspaces, with its inclusion.
pub fn subcomplex_from_subspaces(
    c: &RComplex,
    sub: &BTreeMap<Bidegree, Subspace>,
) -> Result<(RComplex, ComplexMap)> {
    let f = c.field();
    let mut comps = Vec::new();
    for (&pn, s) in sub {
        if s.dim() > 0 {
            comps.push((pn, s.dim()));
        }
    }
    let module = BigradedModule::from_components(f, &comps);
    let mut incl = BigradedMap::zero(&module, c.module(), (0, 0));
    for (&pn, s) in sub {
        if s.dim() > 0 {
            incl.set_block(pn, s.basis().clone())?;
        }
    }
    // Induced differential in the chosen bases: solve d ∘ incl = incl ∘ d'.
    let mut d = BigradedMap::zero(&module, &module, differential_bidegree(c.r()));
    for pn in module.support() {
        let tgt = d.target_bidegree(pn);
        let image = c.d().block(pn).mul(&incl.block(pn))?;
        let tgt_basis = incl.block(tgt);
        let solved = if module.dim(tgt) == 0 {
            if !image.is_zero() {
                return Err(Error::InvalidComplex(
                    "subspaces are not closed under the differential".into(),
                ));
            }
            Matrix::zeros(f, 0, module.dim(pn))
        } else {
            tgt_basis.solve_matrix(&image)?.ok_or_else(|| {
                Error::InvalidComplex("subspaces are not closed under the differential".into())
            })?
        };
        d.set_block(pn, solved)?;
    }
    let complex = RComplex::new(c.r(), module, d)?;
    let incl = ComplexMap::new(complex.clone(), c.clone(), incl)?;
    Ok((complex, incl))
}

/// Merged support of several bigraded modules.
pub fn merged_support(modules: &[&BigradedModule]) -> BTreeSet<Bidegree> {
    let mut out = BTreeSet::new();
    for m in modules {
        out.extend(m.support());
    }
    out
}
