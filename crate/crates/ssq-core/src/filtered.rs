//! Finite filtered cochain complexes, their spectral sequences, the
//! filtration-level shift and décalage functors, and the compatibility
//! isomorphisms with the page-level functors.
//!
//! Conventions: increasing bounded filtrations preserved by `d`; the page
//! bidegree is `(p, m)` with cohomological degree `k = m - p`, so `d_r` has
//! bidegree `(-r, 1-r)`. `Z_r^{p,m} = {x in F_p A^{m-p} : d x in F_{p-r}}`
//! and the page denominator is `B_r^{p,m} = Z_{r-1}^{p-1,m-1} +
//! d Z_{r-1}^{p+r-1,m+r-2}`.

use crate::bigraded::{BigradedMap, BigradedModule, Bidegree, RComplex};
use crate::decalage::{dec_r, ldec_r_full, shift_r};
use crate::error::{Error, Result, ValidationReport};
use crate::espse::{phi_from_cycle_reps, ESSMap, EssTail, ExtSpecSeq};
use crate::exactla::{intersect_preimage, FieldSpec, Matrix, Subspace};
use std::collections::BTreeMap;

/// A finite filtered cochain complex: spaces over a degree range, a
/// differential with `d^2 = 0`, and an increasing exhaustive filtration
/// preserved by `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    field: FieldSpec,
    k_min: i64,
    dims: Vec<usize>,
    /// `d[j]: A^{k_min+j} -> A^{k_min+j+1}`; the top differential is zero.
    d: Vec<Matrix>,
    p_min: i64,
    /// `filt[j][l] = F_{p_min+l} A^{k_min+j}`, increasing in `l`, full on top.
    filt: Vec<Vec<Subspace>>,
}

impl FilteredComplex {
    pub fn new(
        field: FieldSpec,
        k_min: i64,
        dims: Vec<usize>,
        d: Vec<Matrix>,
        p_min: i64,
        filt: Vec<Vec<Subspace>>,
    ) -> Result<Self> {
        let c = FilteredComplex {
            field,
            k_min,
            dims,
            d,
            p_min,
            filt,
        };
        c.validate().into_result()?;
        Ok(c)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let n = self.dims.len();
        report.check(n > 0, "empty degree range");
        report.check(
            self.d.len() + 1 == n,
            format!("expected {} differentials, found {}", n - 1, self.d.len()),
        );
        report.check(self.filt.len() == n, "one filtration chain per degree");
        if !report.is_ok() {
            return report;
        }
        for j in 0..n - 1 {
            report.check(
                self.d[j].rows() == self.dims[j + 1] && self.d[j].cols() == self.dims[j],
                format!("differential {j} has the wrong shape"),
            );
        }
        for j in 0..n.saturating_sub(2) {
            if let Ok(dd) = self.d[j + 1].mul(&self.d[j]) {
                report.check(dd.is_zero(), format!("d^2 != 0 at degree {}", self.k_min + j as i64));
            }
        }
        let levels = self.levels();
        for (j, chain) in self.filt.iter().enumerate() {
            report.check(
                chain.len() == levels,
                format!("degree {j}: expected {levels} filtration steps"),
            );
            for (l, sub) in chain.iter().enumerate() {
                report.check(
                    sub.ambient_dim() == self.dims[j],
                    format!("degree {j}, level {l}: wrong ambient"),
                );
                if l > 0 {
                    report.check(
                        sub.contains_subspace(&chain[l - 1]).unwrap_or(false),
                        format!("degree {j}: filtration not increasing at level {l}"),
                    );
                }
            }
            if let Some(top) = chain.last() {
                report.check(top.is_full(), format!("degree {j}: filtration not exhaustive"));
            }
        }
        if !report.is_ok() {
            return report;
        }
        // d-preservation.
        for j in 0..n - 1 {
            for (l, sub) in self.filt[j].iter().enumerate() {
                let img = self.d[j].mul(sub.basis()).expect("shape checked");
                let ok = self.filt[j + 1][l]
                    .contains_subspace(&img.image())
                    .unwrap_or(false);
                report.check(
                    ok,
                    format!("d does not preserve level {} at degree {j}", self.p_min + l as i64),
                );
            }
        }
        report
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.dims.len() as i64 - 1
    }

    pub fn p_min(&self) -> i64 {
        self.p_min
    }

    pub fn p_max(&self) -> i64 {
        self.p_min + self.levels() as i64 - 1
    }

    fn levels(&self) -> usize {
        self.filt.first().map_or(0, Vec::len)
    }

    pub fn dim(&self, k: i64) -> usize {
        if k < self.k_min || k > self.k_max() {
            0
        } else {
            self.dims[(k - self.k_min) as usize]
        }
    }

    /// `d: A^k -> A^{k+1}`, zero off the stored range.
    pub fn d_at(&self, k: i64) -> Matrix {
        if k < self.k_min || k + 1 > self.k_max() {
            Matrix::zeros(self.field, self.dim(k + 1), self.dim(k))
        } else {
            self.d[(k - self.k_min) as usize].clone()
        }
    }

    /// `F_p A^k`, clamped: zero below the range, full above.
    pub fn f_sub(&self, p: i64, k: i64) -> Subspace {
        let dim = self.dim(k);
        if dim == 0 {
            return Subspace::zero(self.field, 0);
        }
        if p < self.p_min {
            return Subspace::zero(self.field, dim);
        }
        let l = (p - self.p_min) as usize;
        let chain = &self.filt[(k - self.k_min) as usize];
        if l >= chain.len() {
            Subspace::full(self.field, dim)
        } else {
            chain[l].clone()
        }
    }

    /// `Z_r^{p,m} = {x in F_p A^{m-p} : d x in F_{p-r}}`; for `r <= 0` this
    /// is all of `F_p`.
    pub fn z_sub(&self, r: i64, p: i64, m: i64) -> Result<Subspace> {
        let k = m - p;
        let f_p = self.f_sub(p, k);
        if r <= 0 {
            return Ok(f_p);
        }
        let pre = intersect_preimage(&self.d_at(k), &self.f_sub(p - r, k + 1))?;
        f_p.intersection(&pre)
    }

    /// The page denominator `B_r^{p,m}`.
    pub fn b_sub(&self, r: i64, p: i64, m: i64) -> Result<Subspace> {
        let z1 = self.z_sub(r - 1, p - 1, m - 1)?;
        let z2 = self.z_sub(r - 1, p + r - 1, m + r - 2)?;
        let k = m - p;
        let img = self.d_at(k - 1).mul(z2.basis())?.image();
        z1.sum(&img)
    }
}

/// One page component of the spectral sequence presentation: the cycle and
/// boundary subspaces and a chosen basis of representatives.
#[derive(Debug, Clone)]
struct EComp {
    z: Subspace,
    b: Subspace,
    /// Ambient representatives, one column per page basis vector.
    lift: Matrix,
}

/// The spectral sequence of a filtered complex with its ambient
/// presentation, supporting exact class computations on every page.
#[derive(Debug, Clone)]
pub struct SSData {
    pub object: ExtSpecSeq,
    comp: Vec<BTreeMap<Bidegree, EComp>>,
    complex: FilteredComplex,
}

impl SSData {
    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }

    /// The chosen ambient representatives of the page-r basis at `(p,m)`.
    pub fn lift(&self, r: usize, pm: Bidegree) -> Matrix {
        self.comp[r]
            .get(&pm)
            .map(|c| c.lift.clone())
            .unwrap_or_else(|| Matrix::zeros(self.complex.field(), self.complex.dim(pm.1 - pm.0), 0))
    }

    /// The class of an ambient vector in the page-r component at `(p,m)`;
    /// the vector must lie in `Z_r^{p,m}`.
    pub fn class_of(&self, r: usize, pm: Bidegree, v: &Matrix) -> Result<Matrix> {
        let Some(c) = self.comp[r].get(&pm) else {
            // A vanishing component: every page cycle has zero class.
            let z = self.complex.z_sub(r as i64, pm.0, pm.1)?;
            if v.is_zero() || z.contains(v)? {
                return Ok(Matrix::zeros(self.complex.field(), 0, 1));
            }
            return Err(Error::ShapeError(format!(
                "vector is not a page-{r} cycle at {pm:?}"
            )));
        };
        if !c.z.contains(v)? {
            return Err(Error::ShapeError("vector is not a page cycle".into()));
        }
        // Solve v = b u + lift c.
        let stacked = c.b.basis().hstack(&c.lift)?;
        let sol = stacked
            .solve(v)?
            .ok_or_else(|| Error::ShapeError("class computation failed".into()))?;
        Ok(Matrix::from_fn(
            self.complex.field(),
            c.lift.cols(),
            1,
            |i, _| sol.entry(c.b.dim() + i, 0).clone(),
        ))
    }
}

/// A basis of a complement of `b` inside `z` (`b ⊆ z`).
fn complement_in(z: &Subspace, b: &Subspace) -> Result<Matrix> {
    let stacked = b.basis().hstack(z.basis())?;
    let (_, pivots) = stacked.rref();
    let field = z.field();
    let mut cols = Vec::new();
    for &c in &pivots {
        if c >= b.dim() {
            cols.push(z.basis().column(c - b.dim()));
        }
    }
    let mut out = Matrix::zeros(field, z.ambient_dim(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..z.ambient_dim() {
            out.set(i, j, col.entry(i, 0).clone());
        }
    }
    Ok(out)
}

/// The spectral sequence of a filtered complex, as an extended spectral
/// sequence (in fact spectral) with its ambient presentation.
pub fn ss(c: &FilteredComplex, horizon: usize) -> Result<SSData> {
    c.validate().into_result()?;
    let field = c.field();
    let mut comp: Vec<BTreeMap<Bidegree, EComp>> = Vec::new();
    let mut pages: Vec<RComplex> = Vec::new();
    for r in 0..=horizon {
        let ri = r as i64;
        let mut page_comp = BTreeMap::new();
        let mut dims = Vec::new();
        for k in c.k_min()..=c.k_max() {
            for p in c.p_min()..=c.p_max() {
                let m = p + k;
                let z = c.z_sub(ri, p, m)?;
                if z.dim() == 0 {
                    continue;
                }
                let b = c.b_sub(ri, p, m)?;
                debug_assert!(z.contains_subspace(&b).unwrap());
                let lift = complement_in(&z, &b)?;
                if lift.cols() == 0 {
                    continue;
                }
                dims.push(((p, m), lift.cols()));
                page_comp.insert((p, m), EComp { z, b, lift });
            }
        }
        let module = BigradedModule::from_components(field, &dims);
        comp.push(page_comp);
        pages.push(RComplex::with_zero_differential(r, module));
    }
    // Differentials, then characteristic maps.
    let mut full_pages = Vec::new();
    let data_stub = SSData {
        object: ExtSpecSeq::zero(field, 0),
        comp: comp.clone(),
        complex: c.clone(),
    };
    for (r, page) in pages.iter().enumerate() {
        let ri = r as i64;
        let module = page.module().clone();
        let mut d = BigradedMap::zero(&module, &module, crate::bigraded::differential_bidegree(r));
        for pm in module.support() {
            let tgt = (pm.0 - ri, pm.1 + 1 - ri);
            if module.dim(tgt) == 0 {
                continue;
            }
            let lift = data_stub.lift(r, pm);
            let k = pm.1 - pm.0;
            let img = c.d_at(k).mul(&lift)?;
            let mut cols = Vec::new();
            for j in 0..img.cols() {
                cols.push(data_stub.class_of(r, tgt, &img.column(j))?);
            }
            let block = Matrix::from_fn(field, module.dim(tgt), img.cols(), |i, j| {
                cols[j].entry(i, 0).clone()
            });
            d.set_block(pm, block)?;
        }
        full_pages.push(RComplex::new(r, module, d)?);
    }
    let mut phi = Vec::new();
    for r in 0..horizon {
        let hom = crate::bigraded::homology(&full_pages[r])?;
        // Representatives of the next page's basis inside page r.
        let mut reps = BigradedMap::zero(
            full_pages[r + 1].module(),
            full_pages[r].module(),
            (0, 0),
        );
        for pm in full_pages[r + 1].module().support() {
            let lift = data_stub.lift(r + 1, pm);
            let mut cols = Vec::new();
            for j in 0..lift.cols() {
                cols.push(data_stub.class_of(r, pm, &lift.column(j))?);
            }
            if full_pages[r].module().dim(pm) == 0 {
                continue;
            }
            let block = Matrix::from_fn(field, full_pages[r].module().dim(pm), lift.cols(), |i, j| {
                cols[j].entry(i, 0).clone()
            });
            reps.set_block(pm, block)?;
        }
        phi.push(phi_from_cycle_reps(&hom, &reps)?);
    }
    let object = ExtSpecSeq::new(full_pages, phi, EssTail::Unspecified)?;
    Ok(SSData {
        object,
        comp,
        complex: c.clone(),
    })
}

/// Deligne's décalage on the filtration:
/// `Dec(F)_p A^k = {x in F_{p-k} : d x in F_{p-k-1}}`.
pub fn dec_filtration(c: &FilteredComplex) -> Result<FilteredComplex> {
    let field = c.field();
    let new_p_min = c.p_min() + c.k_min();
    let new_p_max = c.p_max() + c.k_max() + 1;
    let mut filt = Vec::new();
    for k in c.k_min()..=c.k_max() {
        let mut chain = Vec::new();
        for p in new_p_min..=new_p_max {
            let f = c.f_sub(p - k, k);
            let pre = intersect_preimage(&c.d_at(k), &c.f_sub(p - k - 1, k + 1))?;
            chain.push(f.intersection(&pre)?);
        }
        filt.push(chain);
    }
    FilteredComplex::new(field, c.k_min, c.dims.clone(), c.d.clone(), new_p_min, filt)
}

/// The left décalage on the filtration:
/// `Dec*(F)_p A^k = F_{p-k} A^k + d(F_{p-k+1} A^{k-1})`.
pub fn decstar_filtration(c: &FilteredComplex) -> Result<FilteredComplex> {
    let field = c.field();
    let new_p_min = c.p_min() + c.k_min() - 1;
    let new_p_max = c.p_max() + c.k_max();
    let mut filt = Vec::new();
    for k in c.k_min()..=c.k_max() {
        let mut chain = Vec::new();
        for p in new_p_min..=new_p_max {
            let f = c.f_sub(p - k, k);
            let img = c
                .d_at(k - 1)
                .mul(c.f_sub(p - k + 1, k - 1).basis())?
                .image();
            chain.push(f.sum(&img)?);
        }
        filt.push(chain);
    }
    FilteredComplex::new(field, c.k_min, c.dims.clone(), c.d.clone(), new_p_min, filt)
}

/// The filtration shift `S(F)_p A^k = F_{p+k} A^k`.
pub fn shift_filtration(c: &FilteredComplex) -> Result<FilteredComplex> {
    let field = c.field();
    let new_p_min = c.p_min() - c.k_max();
    let new_p_max = c.p_max() - c.k_min();
    let mut filt = Vec::new();
    for k in c.k_min()..=c.k_max() {
        let mut chain = Vec::new();
        for p in new_p_min..=new_p_max {
            chain.push(c.f_sub(p + k, k));
        }
        filt.push(chain);
    }
    FilteredComplex::new(field, c.k_min, c.dims.clone(), c.d.clone(), new_p_min, filt)
}

/// A filtration- and differential-preserving map of filtered complexes.
#[derive(Debug, Clone)]
pub struct FilteredMap {
    pub source: FilteredComplex,
    pub target: FilteredComplex,
    /// One matrix per degree of the source range.
    pub components: Vec<Matrix>,
}

impl FilteredMap {
    pub fn new(
        source: FilteredComplex,
        target: FilteredComplex,
        components: Vec<Matrix>,
    ) -> Result<Self> {
        let f = FilteredMap {
            source,
            target,
            components,
        };
        f.validate().into_result()?;
        Ok(f)
    }

    pub fn component(&self, k: i64) -> Matrix {
        if k < self.source.k_min() || k > self.source.k_max() {
            return Matrix::zeros(self.source.field(), self.target.dim(k), 0);
        }
        self.components[(k - self.source.k_min()) as usize].clone()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.check(
            self.source.k_min() == self.target.k_min()
                && self.source.dims.len() == self.target.dims.len(),
            "degree ranges differ",
        );
        report.check(
            self.components.len() == self.source.dims.len(),
            "one component per degree",
        );
        if !report.is_ok() {
            return report;
        }
        for k in self.source.k_min()..=self.source.k_max() {
            let j = (k - self.source.k_min()) as usize;
            report.check(
                self.components[j].rows() == self.target.dim(k)
                    && self.components[j].cols() == self.source.dim(k),
                format!("component at degree {k} has the wrong shape"),
            );
        }
        if !report.is_ok() {
            return report;
        }
        for k in self.source.k_min()..self.source.k_max() {
            let j = (k - self.source.k_min()) as usize;
            let a = self.components[j + 1].mul(&self.source.d_at(k)).expect("shape");
            let b = self.target.d_at(k).mul(&self.components[j]).expect("shape");
            report.check(
                a.sub(&b).expect("shape").is_zero(),
                format!("does not commute with d at degree {k}"),
            );
        }
        for k in self.source.k_min()..=self.source.k_max() {
            let j = (k - self.source.k_min()) as usize;
            for p in self.source.p_min()..=self.source.p_max() {
                let img = self.components[j]
                    .mul(self.source.f_sub(p, k).basis())
                    .expect("shape");
                report.check(
                    self.target
                        .f_sub(p, k)
                        .contains_subspace(&img.image())
                        .unwrap_or(false),
                    format!("does not preserve level {p} at degree {k}"),
                );
            }
        }
        report
    }
}

/// The induced map of spectral sequences.
pub fn ss_map(f: &FilteredMap, horizon: usize) -> Result<ESSMap> {
    f.validate().into_result()?;
    let src = ss(&f.source, horizon)?;
    let tgt = ss(&f.target, horizon)?;
    let field = f.source.field();
    let mut components = Vec::new();
    for r in 0..=horizon {
        let mut map = BigradedMap::zero(
            src.object.page(r).module(),
            tgt.object.page(r).module(),
            (0, 0),
        );
        for pm in src.object.page(r).module().support() {
            let k = pm.1 - pm.0;
            let lift = src.lift(r, pm);
            let img = f.component(k).mul(&lift)?;
            if tgt.object.page(r).module().dim(pm) == 0 {
                if !img.is_zero() {
                    // The class must vanish; check.
                    let b = tgt.complex.b_sub(r as i64, pm.0, pm.1)?;
                    for j in 0..img.cols() {
                        if !b.contains(&img.column(j))? {
                            return Err(Error::InvalidComplex(
                                "induced page map escapes the target".into(),
                            ));
                        }
                    }
                }
                continue;
            }
            let mut cols = Vec::new();
            for j in 0..img.cols() {
                cols.push(tgt.class_of(r, pm, &img.column(j))?);
            }
            let block = Matrix::from_fn(
                field,
                tgt.object.page(r).module().dim(pm),
                img.cols(),
                |i, j| cols[j].entry(i, 0).clone(),
            );
            map.set_block(pm, block)?;
        }
        components.push(map);
    }
    ESSMap::new(src.object, tgt.object, components)
}

/// The comparison isomorphism `E(S C) -> Shift(E C)`, identity on
/// representatives.
pub fn compat_shift(c: &FilteredComplex, horizon: usize) -> Result<ESSMap> {
    let sc = ss(&shift_filtration(c)?, horizon)?;
    let ec = ss(c, horizon.saturating_sub(1))?;
    let shifted = shift_r(&ec.object, 1)?;
    let field = c.field();
    let mut components = Vec::new();
    for i in 0..=horizon.min(shifted.horizon()) {
        let mut map = BigradedMap::zero(
            sc.object.page(i).module(),
            shifted.page(i).module(),
            (0, 0),
        );
        for pm in sc.object.page(i).module().support() {
            // E(SC)_i at (P,M) has representatives in Z of E(C) at the
            // translated position (M, 2M-P) on page i-1 (page i for i = 0).
            let up = (pm.1, 2 * pm.1 - pm.0);
            let r_src = if i == 0 { 0 } else { i - 1 };
            let lift = sc.lift(i, pm);
            let mut cols = Vec::new();
            for j in 0..lift.cols() {
                cols.push(ec.class_of(r_src, up, &lift.column(j))?);
            }
            if shifted.page(i).module().dim(pm) == 0 {
                if lift.cols() > 0 {
                    return Err(Error::InvalidComplex(
                        "shift comparison misses a component".into(),
                    ));
                }
                continue;
            }
            let block = Matrix::from_fn(
                field,
                shifted.page(i).module().dim(pm),
                lift.cols(),
                |a, b| cols[b].entry(a, 0).clone(),
            );
            map.set_block(pm, block)?;
        }
        components.push(map);
    }
    let u = ESSMap::new(sc.object, shifted, components)?;
    if !u.is_pagewise_iso() {
        return Err(Error::InvalidComplex("E(SC) -> Shift(EC) is not an isomorphism".into()));
    }
    Ok(u)
}

/// The comparison isomorphism `u~: E(Dec C) -> Dec(E C)`: the displayed
/// closed form on page 0 and identity on representatives above.
pub fn compat_dec(c: &FilteredComplex, horizon: usize) -> Result<ESSMap> {
    if horizon < 1 {
        return Err(Error::HorizonError("compat_dec needs horizon >= 1".into()));
    }
    let ec = ss(c, horizon)?;
    let dec_obj = dec_r(&ec.object, 1)?;
    let edec = ss(&dec_filtration(c)?, horizon - 1)?;
    let n = crate::adjunction::nerve(&ec.object)?;
    let field = c.field();
    let mut components = Vec::new();
    for i in 0..horizon {
        let mut map = BigradedMap::zero(
            edec.object.page(i).module(),
            dec_obj.page(i).module(),
            (0, 0),
        );
        for pm in edec.object.page(i).module().support() {
            let up = (2 * pm.0 - pm.1, pm.0);
            let lift = edec.lift(i, pm);
            let dim = lift.cols();
            if dim == 0 {
                continue;
            }
            let mut cols = Vec::new();
            for j in 0..dim {
                let x = lift.column(j);
                let col = if i == 0 {
                    // ([x]_0, [x]_1; [dx]_0, [dx]_1) as a page-1 nerve class.
                    let k = pm.1 - pm.0;
                    let dx = c.d_at(k).mul(&x)?;
                    let x0 = ec.class_of(0, up, &x)?;
                    let x1 = ec.class_of(1, up, &x)?;
                    let ypos = (up.0 - 1, up.1);
                    let y0 = ec.class_of(0, ypos, &dx)?;
                    let y1 = ec.class_of(1, ypos, &dx)?;
                    let ambient = n.assemble(1, up, &[x0, x1], &[y0, y1])?;
                    n.coords(1, up, &ambient)?
                } else {
                    ec.class_of(i + 1, up, &x)?
                };
                cols.push(col);
            }
            if dec_obj.page(i).module().dim(pm) == 0 {
                return Err(Error::InvalidComplex(
                    "décalage comparison misses a component".into(),
                ));
            }
            let block = Matrix::from_fn(
                field,
                dec_obj.page(i).module().dim(pm),
                dim,
                |a, b| cols[b].entry(a, 0).clone(),
            );
            map.set_block(pm, block)?;
        }
        components.push(map);
    }
    let u = ESSMap::new(edec.object, dec_obj, components)?;
    if !u.is_pagewise_iso() {
        return Err(Error::InvalidComplex(
            "E(Dec C) -> Dec(E C) is not an isomorphism".into(),
        ));
    }
    Ok(u)
}

/// The comparison isomorphism `v~: E(Dec* C) -> LDec(E C)`: the inverse of
/// the closed form `(a,b) -> [a + d b]` on page 0 and inverted
/// identity-on-representatives above.
pub fn compat_decstar(c: &FilteredComplex, horizon: usize) -> Result<ESSMap> {
    if horizon < 1 {
        return Err(Error::HorizonError("compat_decstar needs horizon >= 1".into()));
    }
    let ec = ss(c, horizon)?;
    let ldec = ldec_r_full(&ec.object, 1)?;
    let edecstar = ss(&decstar_filtration(c)?, horizon - 1)?;
    let field = c.field();
    let mut components = Vec::new();
    for i in 0..horizon {
        let mut map = BigradedMap::zero(
            edecstar.object.page(i).module(),
            ldec.object.page(i).module(),
            (0, 0),
        );
        for pm in ldec.object.page(i).module().support() {
            let up = (2 * pm.0 - pm.1, pm.0);
            let tgt_dim = ldec.object.page(i).module().dim(pm);
            let src_dim = edecstar.object.page(i).module().dim(pm);
            if tgt_dim != src_dim {
                return Err(Error::InvalidComplex(
                    "left décalage comparison dimensions differ".into(),
                ));
            }
            if tgt_dim == 0 {
                continue;
            }
            // Build the inverse direction first.
            let inv_block = if i == 0 {
                // (a,b)bar -> [a + d b] on representatives of the cone.
                let mut cols = Vec::new();
                for j in 0..tgt_dim {
                    let e = Matrix::from_fn(field, tgt_dim, 1, |r2, _| {
                        if r2 == j {
                            field.one()
                        } else {
                            field.zero()
                        }
                    });
                    let cone_vec = ldec.c2_section_block(up).mul(&e)?;
                    // Cone coordinates: E_0 at `up` then E_0 at `up + (1,0)`.
                    let first = ec.object.page(0).module().dim(up);
                    let second_pos = (up.0 + 1, up.1);
                    let a_coords = Matrix::from_fn(field, first, 1, |r2, _| {
                        cone_vec.entry(r2, 0).clone()
                    });
                    let b_dim = ec.object.page(0).module().dim(second_pos);
                    let b_coords = Matrix::from_fn(field, b_dim, 1, |r2, _| {
                        cone_vec.entry(first + r2, 0).clone()
                    });
                    let a_amb = ec.lift(0, up).mul(&a_coords)?;
                    let b_amb = ec.lift(0, second_pos).mul(&b_coords)?;
                    let k_b = second_pos.1 - second_pos.0;
                    let v = a_amb.add(&c.d_at(k_b).mul(&b_amb)?)?;
                    cols.push(edecstar.class_of(0, pm, &v)?);
                }
                Matrix::from_fn(field, src_dim, tgt_dim, |a, b| cols[b].entry(a, 0).clone())
            } else {
                // Identity on representatives: E(C)_{i+1} -> E(Dec* C)_i.
                let lift = ec.lift(i + 1, up);
                let mut cols = Vec::new();
                for j in 0..lift.cols() {
                    cols.push(edecstar.class_of(i, pm, &lift.column(j))?);
                }
                Matrix::from_fn(field, src_dim, tgt_dim, |a, b| cols[b].entry(a, 0).clone())
            };
            let block = inv_block.inverse().ok_or_else(|| {
                Error::InvalidComplex("left décalage comparison block is singular".into())
            })?;
            map.set_block(pm, block)?;
        }
        components.push(map);
    }
    let v = ESSMap::new(edecstar.object, ldec.object, components)?;
    if !v.is_pagewise_iso() {
        return Err(Error::InvalidComplex(
            "E(Dec* C) -> LDec(E C) is not an isomorphism".into(),
        ));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn f5() -> FieldSpec {
        FieldSpec::prime_field(5).unwrap()
    }

    #[test]
    fn trivial_filtration_gives_graded_then_homology() {
        // 0 -> k -> k -> 0 with the one-step filtration.
        let field = f5();
        let dims = vec![1usize, 1];
        let d = vec![Matrix::identity(field, 1)];
        let filt = vec![
            vec![Subspace::full(field, 1)],
            vec![Subspace::full(field, 1)],
        ];
        let c = FilteredComplex::new(field, 0, dims, d, 0, filt).unwrap();
        let data = ss(&c, 3).unwrap();
        assert!(data.object.is_spectral());
        // E_0 = associated graded = A.
        assert_eq!(data.object.page(0).module().total_dim(), 2);
        // E_1 = H(A) = 0.
        assert!(data.object.page(1).is_zero());
        assert!(data.object.page(2).is_zero());
    }

    #[test]
    fn two_step_filtration_of_acyclic_complex() {
        // A = k e in degree 0, k (de) in degree 1; filtration level 0 holds
        // de, level 1 everything.
        let field = f5();
        let dims = vec![1usize, 1];
        let d = vec![Matrix::identity(field, 1)];
        let filt = vec![
            vec![Subspace::zero(field, 1), Subspace::full(field, 1)],
            vec![Subspace::full(field, 1), Subspace::full(field, 1)],
        ];
        let c = FilteredComplex::new(field, 0, dims, d, 0, filt).unwrap();
        let data = ss(&c, 3).unwrap();
        assert!(data.object.is_spectral());
        // Hand subquotient arithmetic: E_0 has e at p=1 (m=1) and de at p=0
        // (m=1); d_0 = 0 (de sits one level below e), d_1: e -> de kills
        // both at E_2.
        assert_eq!(data.object.page(0).module().dim((1, 1)), 1);
        assert_eq!(data.object.page(0).module().dim((0, 1)), 1);
        assert!(data.object.page(0).d().is_zero());
        assert!(!data.object.page(1).d().is_zero());
        assert!(data.object.page(2).is_zero());
    }

    #[test]
    fn random_filtered_complexes_are_spectral_and_stabilize() {
        let mut rng = sample::rng(3);
        for _ in 0..5 {
            let c = sample::random_filtered(f5(), &mut rng, 4, 3, 3);
            let data = ss(&c, 6).unwrap();
            assert!(data.object.is_spectral());
            // Stabilization within filtration length + 1 pages.
            let len = (c.p_max() - c.p_min() + 1) as usize;
            for i in len + 1..=6 {
                assert!(
                    data.object.page(i).d().is_zero(),
                    "page {i} differential should vanish"
                );
            }
        }
    }

    #[test]
    fn filtration_functors_validate() {
        let mut rng = sample::rng(11);
        for _ in 0..5 {
            let c = sample::random_filtered(f5(), &mut rng, 3, 3, 3);
            assert!(dec_filtration(&c).unwrap().validate().is_ok());
            assert!(decstar_filtration(&c).unwrap().validate().is_ok());
            assert!(shift_filtration(&c).unwrap().validate().is_ok());
        }
    }

    #[test]
    fn shift_compatibility() {
        let mut rng = sample::rng(17);
        for _ in 0..3 {
            let c = sample::random_filtered(f5(), &mut rng, 3, 3, 3);
            let u = compat_shift(&c, 4).unwrap();
            assert!(u.is_pagewise_iso());
            // E(SC)_0 carries zero differential.
            assert!(u.source().page(0).d().is_zero());
        }
    }

    #[test]
    fn dec_compatibility() {
        let mut rng = sample::rng(23);
        for _ in 0..3 {
            let c = sample::random_filtered(f5(), &mut rng, 3, 3, 3);
            let u = compat_dec(&c, 4).unwrap();
            assert!(u.is_pagewise_iso());
        }
    }

    #[test]
    fn decstar_compatibility() {
        let mut rng = sample::rng(29);
        for _ in 0..3 {
            let c = sample::random_filtered(f5(), &mut rng, 3, 3, 3);
            let v = compat_decstar(&c, 4).unwrap();
            assert!(v.is_pagewise_iso());
        }
    }

    #[test]
    fn ss_map_functoriality() {
        let mut rng = sample::rng(31);
        let c = sample::random_filtered(f5(), &mut rng, 3, 3, 3);
        let id = FilteredMap::new(
            c.clone(),
            c.clone(),
            (c.k_min()..=c.k_max())
                .map(|k| Matrix::identity(f5(), c.dim(k)))
                .collect(),
        )
        .unwrap();
        let e = ss_map(&id, 3).unwrap();
        assert!(e.is_pagewise_iso());
    }
}
