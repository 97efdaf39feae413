//! Shift and the two décalage functors on extended spectral sequences,
//! their r-fold versions with explicit bottom pages, adjunction witnesses,
//! and the presheaf-route composites used as cross-checks.

use crate::adjunction::{nerve, realize, Nerve};
use crate::bigraded::{homology, BigradedMap, HomologyData, RComplex};
use crate::error::{Error, Result};
use crate::espse::{ess_hom_basis, weq_r, weq_strict_r_at_horizon, ESSMap, ExtSpecSeq};
use crate::exactla::{FieldSpec, Matrix};
use crate::lwb::{trunc_u, w_shriek};
use std::collections::BTreeMap;

/// `(Σ A)^{p,n} = A^{p+k,n+k-1}` with differential `-d`; the suspension
/// feeding the connecting isomorphism.
pub fn sigma_complex(a: &RComplex, k: usize) -> RComplex {
    let ki = k as i64;
    let module = a.module().reindex(|(p, n)| (p - ki, n + 1 - ki));
    let mut d = BigradedMap::zero(&module, &module, a.d().bidegree());
    for (pn, block) in a.d().nonzero_blocks() {
        let new_pn = (pn.0 - ki, pn.1 + 1 - ki);
        d.set_block(new_pn, block.scale(&a.field().from_i64(-1)))
            .expect("sigma block");
    }
    RComplex::new(a.r(), module, d).expect("sigma complex")
}

/// `Shift^r`: pages below r copy the bottom page (translated, zero
/// differential) with identity characteristic maps; pages above are the
/// translated pages of the input.
pub fn shift_r(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    let h = x.horizon();
    let mut pages = Vec::new();
    for i in 0..=h + r {
        if i < r {
            let mut m = x.page(0).module().clone();
            for _ in 0..r {
                m = m.translate();
            }
            pages.push(RComplex::with_zero_differential(i, m));
        } else {
            let mut c = x.page(i - r).clone();
            for _ in 0..r {
                c = c.translate();
            }
            pages.push(c);
        }
    }
    let mut phi = Vec::new();
    for i in 0..h + r {
        if i + 1 <= r {
            // Both pages are the translated bottom module with zero
            // differential: the characteristic map is the identity.
            let hom = homology(&pages[i])?;
            let mut map = BigradedMap::zero(pages[i + 1].module(), hom.h(), (0, 0));
            for pn in pages[i + 1].module().support() {
                map.set_block(pn, Matrix::identity(x.field(), pages[i + 1].module().dim(pn)))?;
            }
            phi.push(map);
        } else {
            let mut m = x.phi(i - r).clone();
            for _ in 0..r {
                m = m.translate();
            }
            phi.push(m);
        }
    }
    let tail = x.tail();
    ExtSpecSeq::new(pages, phi, tail)
}

/// `Shift^r` on morphisms.
pub fn shift_map(f: &ESSMap, r: usize) -> Result<ESSMap> {
    let sx = shift_r(f.source(), r)?;
    let sy = shift_r(f.target(), r)?;
    let mut components = Vec::new();
    for i in 0..f.len() + r {
        let mut m = if i < r {
            f.component(0).clone()
        } else {
            f.component(i - r).clone()
        };
        for _ in 0..r {
            m = m.translate();
        }
        components.push(m);
    }
    ESSMap::new(sx, sy, components)
}

fn translate_inv_n(m: &BigradedMap, n: usize) -> BigradedMap {
    let mut out = m.clone();
    for _ in 0..n {
        out = out.translate_inv();
    }
    out
}

fn translate_inv_complex(c: &RComplex, n: usize) -> Result<RComplex> {
    let mut out = c.clone();
    for _ in 0..n {
        out = out.translate_inv()?;
    }
    Ok(out)
}

/// `Dec^r`: the bottom page becomes the page-r nerve (translated down),
/// higher pages shift down; `phi_1` inverts the quasi-isomorphism
/// `H(rho_r)`.
pub fn dec_r(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    let h = x.horizon();
    if h < r {
        return Err(Error::HorizonError(format!("dec_{r} needs horizon >= {r}")));
    }
    let n = nerve(x)?;
    dec_r_with_nerve(x, r, &n)
}

fn dec_r_with_nerve(x: &ExtSpecSeq, r: usize, n: &Nerve) -> Result<ExtSpecSeq> {
    let h = x.horizon();
    let mut pages = Vec::new();
    pages.push(translate_inv_complex(n.book.page(r), r)?);
    for j in 1..=h - r {
        pages.push(translate_inv_complex(x.page(j + r), r)?);
    }
    let mut phi = Vec::new();
    if h >= r + 1 {
        let h_n = homology(n.book.page(r))?;
        let h_x = x.homology_data(r);
        let h_rho = induced_h(&n.rho(r), &h_n, h_x)?;
        let h_rho_inv = h_rho.inverse().map_err(|_| {
            Error::InvalidComplex("H(rho_r) is not invertible".into())
        })?;
        let composite = h_rho_inv.compose(x.phi(r))?;
        phi.push(translate_inv_n(&composite, r));
        for j in 2..=h - r {
            phi.push(translate_inv_n(x.phi(j + r - 1), r));
        }
    }
    let tail = x.tail();
    ExtSpecSeq::new(pages, phi, tail)
}

/// `Dec^r` on morphisms: the nerve map at page r below, shifted components
/// above.
pub fn dec_map(f: &ESSMap, r: usize) -> Result<ESSMap> {
    let nx = nerve(f.source())?;
    let ny = nerve(f.target())?;
    let nf = nx.map_from(f, &ny)?;
    let dx = dec_r_with_nerve(f.source(), r, &nx)?;
    let dy = dec_r_with_nerve(f.target(), r, &ny)?;
    let mut components = vec![translate_inv_n(nf.component(r), r)];
    for j in 1..=f.len().saturating_sub(1 + r) {
        components.push(translate_inv_n(f.component(j + r), r));
    }
    ESSMap::new(dx, dy, components)
}

fn induced_h(
    map: &BigradedMap,
    hs: &HomologyData,
    ht: &HomologyData,
) -> Result<BigradedMap> {
    let mut out = BigradedMap::zero(hs.h(), ht.h(), (0, 0));
    for pn in hs.h().support() {
        let block = ht.classifier(pn).mul(&map.block(pn))?.mul(&hs.lift(pn))?;
        out.set_block(pn, block)?;
    }
    Ok(out)
}

/// The connecting isomorphism of the short exact sequence
/// `0 -> Σ(N X)_r / Ker q_r -> Cone_r(X_0) -> Cone_r(X_0) / Im q_r -> 0`,
/// with both zig-zag computations retained.
#[derive(Debug, Clone)]
pub struct ConnectingMap {
    /// `H(Cone/Im q) -> H(Σ(N X)_r / Ker q_r)`, bidegree `(-r, 1-r)`.
    pub matrix: BigradedMap,
    /// The same map recomputed with independently perturbed lifts.
    pub recomputed: BigradedMap,
}

impl ConnectingMap {
    pub fn is_choice_independent(&self) -> bool {
        self.matrix == self.recomputed
    }
}

/// All the data of one `LDec^r` bottom page.
pub struct LdecData {
    pub object: ExtSpecSeq,
    pub connecting: ConnectingMap,
    /// Dimension of `Ker q_r` per bidegree (zero on spectral sequences).
    pub ker_q_total: usize,
    /// Pagewise exactness of the defining short exact sequence, by
    /// dimension count.
    pub ses_exact: bool,
    cone: RComplex,
    c2: RComplex,
    c2_proj: BigradedMap,
    c2_section: BigradedMap,
}

impl LdecData {
    /// Section block of the bottom-page quotient, at an upstairs position.
    pub fn c2_section_block(&self, pn: crate::bigraded::Bidegree) -> Matrix {
        self.c2_section.block(pn)
    }
}

/// `LDec^r`: the bottom page is `Cone_r(X_0)/Im q_r`, with the four-step
/// characteristic composite through the connecting isomorphism.
pub fn ldec_r(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    Ok(ldec_r_full(x, r)?.object)
}

pub fn ldec_r_full(x: &ExtSpecSeq, r: usize) -> Result<LdecData> {
    let h = x.horizon();
    if h < r {
        return Err(Error::HorizonError(format!("ldec_{r} needs horizon >= {r}")));
    }
    let field = x.field();
    let n = nerve(x)?;
    let ri = r as i64;
    // Cone on the underlying module of the bottom page.
    let cone_base = RComplex::with_zero_differential(r, x.page(0).module().clone());
    let (cone, _) = cone_base.cone();
    // q as a map Σ(N X)_r -> Cone_r(X_0): q(x;y) = (-y_0, x_0).
    let sigma_n = sigma_complex(n.book.page(r), r);
    let mut q = BigradedMap::zero(sigma_n.module(), cone.module(), (0, 0));
    for spn in sigma_n.module().support() {
        let npn = (spn.0 + ri, spn.1 + ri - 1);
        let x0 = n.x_component(r, npn, 0);
        let y0 = n.y_component(r, npn, 0);
        let rows = cone.module().dim(spn);
        let cols = sigma_n.module().dim(spn);
        if rows == 0 || cols == 0 {
            continue;
        }
        // Cone^{spn} = X_0^{spn} (first) ⊕ X_0^{spn + (r, r-1)} (second).
        let first = x.page(0).module().dim(spn);
        let mut block = Matrix::zeros(field, rows, cols);
        for i in 0..y0.rows() {
            for j in 0..cols {
                block.set(i, j, field.neg(y0.entry(i, j)));
            }
        }
        for i in 0..x0.rows() {
            for j in 0..cols {
                block.set(first + i, j, x0.entry(i, j).clone());
            }
        }
        q.set_block(spn, block)?;
    }
    // K = Σ(N X)_r / Ker q, C2 = Cone / Im q.
    let mut ker_sub = BTreeMap::new();
    let mut ker_q_total = 0usize;
    for pn in sigma_n.module().support() {
        let k = q.block(pn).kernel();
        ker_q_total += k.dim();
        ker_sub.insert(pn, k);
    }
    let (k_complex, _k_proj, k_section) =
        crate::bigraded::quotient_complex_by_subspaces(&sigma_n, &ker_sub, field)?;
    let mut im_sub = BTreeMap::new();
    for pn in cone.module().support() {
        let src = pn;
        im_sub.insert(pn, q.block(src).image());
    }
    let (c2, c2_proj, c2_section) =
        crate::bigraded::quotient_complex_by_subspaces(&cone, &im_sub, field)?;
    // Exactness of the SES by dimension count.
    let mut ses_exact = true;
    for pn in cone.module().support() {
        let dim_k = k_complex.module().dim(pn);
        let dim_c2 = c2.module().dim(pn);
        if dim_k + dim_c2 != cone.module().dim(pn) {
            ses_exact = false;
        }
    }
    // q-bar: K -> Cone, injective.
    let q_bar = q.compose(&k_section)?;
    // Connecting map on homology, computed twice with different lifts.
    let h_c2 = homology(&c2)?;
    let h_k = homology(&k_complex)?;
    let connecting = {
        let compute = |perturb: bool| -> Result<BigradedMap> {
            let step = crate::bigraded::differential_bidegree(r);
            let mut out = BigradedMap::zero(
                h_c2.h(),
                h_k.h(),
                step,
            );
            let mut rng = crate::sample::rng(0xDE1A);
            for pn in h_c2.h().support() {
                let dim = h_c2.h().dim(pn);
                let tgt = (pn.0 + step.0, pn.1 + step.1);
                if h_k.h().dim(tgt) == 0 && dim == 0 {
                    continue;
                }
                let mut cols = Vec::new();
                for c in 0..dim {
                    // Lift the class to C2, then to the cone.
                    let class_rep = h_c2.lift(pn).column(c);
                    let mut lift = c2_section.block(pn).mul(&class_rep)?;
                    if perturb {
                        // Add an element of Im q: the result must not change.
                        use rand::Rng;
                        let im = &im_sub[&pn];
                        if im.dim() > 0 {
                            let coeffs = Matrix::from_fn(field, im.dim(), 1, |_, _| {
                                field.from_i64(rng.gen_range(-3..4))
                            });
                            lift = lift.add(&im.basis().mul(&coeffs)?)?;
                        }
                    }
                    let dc = cone.d().block(pn).mul(&lift)?;
                    // Solve q_bar u = dc; q_bar is injective, so u is unique.
                    let u = if k_complex.module().dim(tgt) == 0 {
                        Matrix::zeros(field, 0, 1)
                    } else {
                        q_bar
                            .block(tgt)
                            .solve(&dc)?
                            .ok_or_else(|| {
                                Error::InvalidComplex("d c is not in the image of q".into())
                            })?
                    };
                    cols.push(h_k.class_of(tgt, &u)?);
                }
                if dim > 0 && h_k.h().dim(tgt) > 0 {
                    let block = Matrix::from_fn(field, h_k.h().dim(tgt), dim, |i, j| {
                        cols[j].entry(i, 0).clone()
                    });
                    out.set_block(pn, block)?;
                }
            }
            Ok(out)
        };
        ConnectingMap {
            matrix: compute(false)?,
            recomputed: compute(true)?,
        }
    };
    if !connecting.is_choice_independent() {
        return Err(Error::InvalidComplex(
            "connecting map depends on the zig-zag choices".into(),
        ));
    }
    // Assemble the output object.
    let mut pages = Vec::new();
    pages.push(translate_inv_complex(&c2, r)?);
    for j in 1..=h - r {
        pages.push(translate_inv_complex(x.page(j + r), r)?);
    }
    let mut phi = Vec::new();
    if h >= r + 1 {
        // X_{r+1} -> H(X_r) -> H((N X)_r) -> H(K) -> H(C2), then translate.
        let h_n = homology(n.book.page(r))?;
        let h_x = x.homology_data(r);
        let h_rho_inv = induced_h(&n.rho(r), &h_n, h_x)?
            .inverse()
            .map_err(|_| Error::InvalidComplex("H(rho_r) is not invertible".into()))?;
        // Projection N_r -> K (as spaces: reindex to the sigma positions).
        let mut proj_to_k =
            BigradedMap::zero(n.book.page(r).module(), k_complex.module(), (-ri, 1 - ri));
        for npn in n.book.page(r).module().support() {
            let spn = (npn.0 - ri, npn.1 - ri + 1);
            if k_complex.module().dim(spn) == 0 {
                continue;
            }
            // The K projection block at the sigma position.
            let (pk, _) = crate::exactla::quotient_with_section(
                sigma_n.module().dim(spn),
                &ker_sub[&spn],
            )?;
            proj_to_k.set_block(npn, pk)?;
        }
        let h_proj = {
            // Induced on homology: classes of projected representatives.
            let mut out = BigradedMap::zero(h_n.h(), h_k.h(), (-ri, 1 - ri));
            for pn in h_n.h().support() {
                let tgt = (pn.0 - ri, pn.1 - ri + 1);
                if h_k.h().dim(tgt) == 0 {
                    continue;
                }
                let reps = proj_to_k.block(pn).mul(&h_n.lift(pn))?;
                let mut cols = Vec::new();
                for c in 0..reps.cols() {
                    cols.push(h_k.class_of(tgt, &reps.column(c))?);
                }
                let block = Matrix::from_fn(field, h_k.h().dim(tgt), reps.cols(), |i, j| {
                    cols[j].entry(i, 0).clone()
                });
                out.set_block(pn, block)?;
            }
            out
        };
        let del_inv = invert_connecting(&connecting.matrix)?;
        let composite = del_inv
            .compose(&h_proj)?
            .compose(&h_rho_inv)?
            .compose(x.phi(r))?;
        phi.push(translate_inv_n(&composite, r));
        for j in 2..=h - r {
            phi.push(translate_inv_n(x.phi(j + r - 1), r));
        }
    }
    let object = ExtSpecSeq::new(pages, phi, x.tail())?;
    Ok(LdecData {
        object,
        connecting,
        ker_q_total,
        ses_exact,
        cone,
        c2,
        c2_proj: c2_proj.map().clone(),
        c2_section,
    })
}

fn invert_connecting(del: &BigradedMap) -> Result<BigradedMap> {
    // The connecting map of the cone sequence is an isomorphism bidegreewise.
    del.inverse()
        .map_err(|_| Error::InvalidComplex("connecting map is not invertible".into()))
}

/// `LDec^r` on morphisms: the cone-quotient map below, shifted components
/// above.
pub fn ldec_map(f: &ESSMap, r: usize) -> Result<(ESSMap, LdecData, LdecData)> {
    let dx = ldec_r_full(f.source(), r)?;
    let dy = ldec_r_full(f.target(), r)?;
    let field = f.source().field();
    let ri = r as i64;
    // Cone(f_0) descends to the quotients; built upstairs, then translated.
    let mut bottom = BigradedMap::zero(dx.c2.module(), dy.c2.module(), (0, 0));
    for pn0 in dx.c2.module().support() {
        let rows = dy.c2.module().dim(pn0);
        if rows == 0 {
            continue;
        }
        // section -> cone -> apply f_0 blockwise -> project.
        let sec = dx.c2_section.block(pn0);
        let first_x = f.source().page(0).module().dim(pn0);
        let second_pos = (pn0.0 + ri, pn0.1 + ri - 1);
        let f_first = f.component(0).block(pn0);
        let f_second = f.component(0).block(second_pos);
        let cone_rows = dy.cone.module().dim(pn0);
        let mut cone_map = Matrix::zeros(field, cone_rows, dx.cone.module().dim(pn0));
        for i in 0..f_first.rows() {
            for j in 0..f_first.cols() {
                cone_map.set(i, j, f_first.entry(i, j).clone());
            }
        }
        let tgt_first = f.target().page(0).module().dim(pn0);
        for i in 0..f_second.rows() {
            for j in 0..f_second.cols() {
                cone_map.set(tgt_first + i, first_x + j, f_second.entry(i, j).clone());
            }
        }
        let block = dy.c2_proj.block(pn0).mul(&cone_map)?.mul(&sec)?;
        bottom.set_block(pn0, block)?;
    }
    let mut components = vec![translate_inv_n(&bottom, r)];
    for j in 1..=f.len().saturating_sub(1 + r) {
        components.push(translate_inv_n(f.component(j + r), r));
    }
    let m = ESSMap::new(dx.object.clone(), dy.object.clone(), components)?;
    Ok((m, dx, dy))
}

/// `Dec^r` through the presheaf route: `Q(T^{-r}(U_{>= r}(N x)))`.
pub fn dec_via_presheaf(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    let h = x.horizon();
    if h < r {
        return Err(Error::HorizonError(format!("dec_{r} needs horizon >= {r}")));
    }
    let n = nerve(x)?;
    let tb = trunc_u(&n.book, r, h)?;
    let down = tb.translate_down()?;
    Ok(realize(&down)?.object)
}

/// `LDec^r` through the presheaf route: `Q(T^{-r}((W_{>= r})_!(N x)))`.
pub fn ldec_via_presheaf(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    let h = x.horizon();
    if h < r {
        return Err(Error::HorizonError(format!("ldec_{r} needs horizon >= {r}")));
    }
    let n = nerve(x)?;
    let t = w_shriek(&n.book, r)?;
    let down = t.translate_down()?;
    Ok(realize(&down)?.object)
}

/// `Shift^r` through the presheaf route: `Q(F_{>= r}(N_{>= r}(T^r x)))`.
pub fn shift_via_presheaf(x: &ExtSpecSeq, r: usize) -> Result<ExtSpecSeq> {
    let n = nerve(x)?;
    // N_{>= r}(T^r x) is the translated nerve placed on pages r..; F_{>= r}
    // prepends copies of the bottom page.
    let mut pages = Vec::new();
    let mut w = Vec::new();
    let mut s = Vec::new();
    for k in 0..=x.horizon() {
        let mut c = n.book.page(k).clone();
        for _ in 0..r {
            c = c.translate();
        }
        pages.push(c);
    }
    for k in 0..x.horizon() {
        let mut wm = n.book.w(k).clone();
        let mut sm = n.book.s(k).clone();
        for _ in 0..r {
            wm = wm.translate();
            sm = sm.translate();
        }
        w.push(wm);
        s.push(sm);
    }
    let tb = crate::lwb::TruncatedBook { lo: r, pages, w, s };
    let full = crate::lwb::trunc_f(&tb, x.horizon() + r)?;
    Ok(realize(&full)?.object)
}

/// The explicit counit `Shift(Dec y) -> y` (page 0 extracts `x_0`, page 1
/// is the nerve projection, identity above).
pub fn shift_dec_counit(y: &ExtSpecSeq) -> Result<ESSMap> {
    if y.horizon() < 1 {
        return Err(Error::HorizonError("counit needs horizon >= 1".into()));
    }
    let n = nerve(y)?;
    let dy = dec_r_with_nerve(y, 1, &n)?;
    let sdy = shift_r(&dy, 1)?;
    let mut components = Vec::new();
    for i in 0..=y.horizon() {
        let mut m = BigradedMap::zero(sdy.page(i).module(), y.page(i).module(), (0, 0));
        match i {
            0 | 1 => {
                for pn in sdy.page(i).module().support() {
                    let block = n.x_component(1, pn, i);
                    if !block.is_zero() {
                        m.set_block(pn, block)?;
                    }
                }
            }
            _ => {
                m = BigradedMap::identity(y.page(i).module());
            }
        }
        components.push(m);
    }
    ESSMap::new(sdy, y.clone(), components)
}

/// The explicit unit `x -> Dec(Shift x)`: the inverse nerve projection at
/// the bottom, identity above.
pub fn shift_dec_unit(x: &ExtSpecSeq) -> Result<ESSMap> {
    let sx = shift_r(x, 1)?;
    let n = nerve(&sx)?;
    let dsx = dec_r_with_nerve(&sx, 1, &n)?;
    let mut components = Vec::new();
    // Page 0: rho_1 of the shifted object is an isomorphism; invert it.
    let rho = translate_inv_n(&n.rho(1), 1);
    components.push(rho.inverse().map_err(|_| {
        Error::InvalidComplex("bottom nerve projection of a shift is not invertible".into())
    })?);
    for i in 1..=x.horizon() {
        components.push(BigradedMap::identity(x.page(i).module()));
    }
    ESSMap::new(x.clone(), dsx, components)
}

/// The explicit counit `LDec(Shift y) -> y`: the cone projection
/// `(a,b) -> a + d b` on the bottom page, identity above.
pub fn ldec_shift_counit(y: &ExtSpecSeq) -> Result<ESSMap> {
    let sy = shift_r(y, 1)?;
    let data = ldec_r_full(&sy, 1)?;
    let field = y.field();
    let mut components = Vec::new();
    // Page 0 of LDec(Shift y) is T^{-1}(Cone_1((Shift y)_0)/Im q). At the
    // downstairs position `pn`, the cone summands are Y_0^{pn} and
    // Y_0^{(pn.0, pn.1 - 1)}; the counit sends (a,b) to a + d b.
    {
        let c2_down = translate_inv_complex(&data.c2, 1)?;
        let mut m = BigradedMap::zero(c2_down.module(), y.page(0).module(), (0, 0));
        for pn in c2_down.module().support() {
            let up = (2 * pn.0 - pn.1, pn.0);
            let sec = data.c2_section.block(up);
            let t_y0 = sy.page(0).module();
            let first = t_y0.dim(up);
            let second = t_y0.dim((up.0 + 1, up.1));
            let rows = y.page(0).module().dim(pn);
            let mut am = Matrix::zeros(field, rows, first + second);
            for k in 0..first.min(rows) {
                am.set(k, k, field.one());
            }
            let d_block = y.page(0).d().block((pn.0, pn.1 - 1));
            for i in 0..d_block.rows() {
                for j in 0..d_block.cols() {
                    am.set(i, first + j, d_block.entry(i, j).clone());
                }
            }
            let block = am.mul(&sec)?;
            m.set_block(pn, block)?;
        }
        components.push(m);
    }
    for i in 1..=y.horizon() {
        components.push(BigradedMap::identity(y.page(i).module()));
    }
    ESSMap::new(data.object, y.clone(), components)
}

/// The explicit unit `x -> Shift(LDec x)`: classes of `(x_0, 0)` in the cone
/// quotient on the low pages, identity above.
pub fn ldec_shift_unit(x: &ExtSpecSeq) -> Result<ESSMap> {
    let data = ldec_r_full(x, 1)?;
    let slx = shift_r(&data.object, 1)?;
    let field = x.field();
    // incl0: X_0 -> C2 (first cone summand, then project).
    let mut incl0 = BigradedMap::zero(x.page(0).module(), data.c2.module(), (0, 0));
    for pn in x.page(0).module().support() {
        let rows_cone = data.cone.module().dim(pn);
        let dim = x.page(0).module().dim(pn);
        let mut inc = Matrix::zeros(field, rows_cone, dim);
        for k in 0..dim {
            inc.set(k, k, field.one());
        }
        let block = data.c2_proj.block(pn).mul(&inc)?;
        incl0.set_block(pn, block)?;
    }
    let mut components = Vec::new();
    // Page 0: Shift(LDec x)_0 = T(LDec(x)_0) = C2 as a module.
    components.push(incl0.clone());
    if x.horizon() >= 1 {
        // Page 1: x_1 -> class of (x_0, 0) with x_0 a lift of phi_1(x_1).
        let lift = x.homology_data(0).lift_map();
        let block = incl0.compose(&lift)?.compose(x.phi(0))?;
        components.push(block);
    }
    for i in 2..=x.horizon() {
        components.push(BigradedMap::identity(x.page(i).module()));
    }
    ESSMap::new(x.clone(), slx, components)
}

/// Rank-equality report of an adjunction instance.
#[derive(Debug, Clone)]
pub struct AdjunctionWitness {
    pub left_dim: usize,
    pub right_dim: usize,
    /// The transposition (built from the explicit counit) is bijective.
    pub bijective: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// `LDec ⊣ Shift`.
    LdecShift,
    /// `Shift ⊣ Dec`.
    ShiftDec,
}

/// Verifies `dim Hom(F x, y) = dim Hom(x, G y)` with the explicit bijection
/// through the counit.
pub fn adjunction_witness(pairing: Pairing, x: &ExtSpecSeq, y: &ExtSpecSeq) -> Result<AdjunctionWitness> {
    match pairing {
        Pairing::ShiftDec => {
            let sx = shift_r(x, 1)?;
            let dy = dec_r(y, 1)?;
            let left = ess_hom_basis(&sx, y)?;
            let right = ess_hom_basis(x, &dy)?;
            let eps = shift_dec_counit(y)?;
            // f: x -> Dec y transposes to eps ∘ Shift(f).
            let images: Vec<ESSMap> = right
                .iter()
                .map(|f| {
                    let sf = shift_map(f, 1)?;
                    // Shift(Dec y) built by shift_r(dec) matches eps's source
                    // by construction.
                    eps.compose(&sf)
                })
                .collect::<Result<_>>()?;
            let bijective =
                left.len() == right.len() && flatten_rank(&images)? == right.len();
            Ok(AdjunctionWitness {
                left_dim: left.len(),
                right_dim: right.len(),
                bijective,
            })
        }
        Pairing::LdecShift => {
            let lx = ldec_r(x, 1)?;
            let sy = shift_r(y, 1)?;
            let left = ess_hom_basis(&lx, y)?;
            let right = ess_hom_basis(x, &sy)?;
            let eps = ldec_shift_counit(y)?;
            let images: Vec<ESSMap> = right
                .iter()
                .map(|f| {
                    let (lf, _, _) = ldec_map(f, 1)?;
                    eps.compose(&lf)
                })
                .collect::<Result<_>>()?;
            let bijective =
                left.len() == right.len() && flatten_rank(&images)? == right.len();
            Ok(AdjunctionWitness {
                left_dim: left.len(),
                right_dim: right.len(),
                bijective,
            })
        }
    }
}

fn flatten_rank(maps: &[ESSMap]) -> Result<usize> {
    if maps.is_empty() {
        return Ok(0);
    }
    let field = maps[0].source().field();
    let mut rows: Vec<Vec<crate::exactla::Scalar>> = Vec::new();
    for m in maps {
        let mut row = Vec::new();
        for i in 0..m.len() {
            for pn in m.source().page(i).module().support() {
                let b = m.component(i).block(pn);
                for r in 0..b.rows() {
                    for c in 0..b.cols() {
                        row.push(b.entry(r, c).clone());
                    }
                }
            }
        }
        rows.push(row);
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mat = Matrix::from_fn(field, rows.len(), cols, |i, j| {
        rows[i].get(j).cloned().unwrap_or_else(|| field.zero())
    });
    Ok(mat.rank())
}

/// Instance-level report for the relative-category facts.
#[derive(Debug, Clone)]
pub struct DwyerKanReport {
    pub samples: usize,
    pub counit_in_strict_r: usize,
    pub unit_page1_quasi_iso: usize,
    pub unit_identity_above: usize,
    /// LDec applied to a strict equivalence failing E'_0 at the bottom: the
    /// documented failure mode at r = 0, recorded when sampling finds one.
    pub ldec_e0_failures: usize,
}

/// Samples random (extended) spectral sequences and verifies the unit and
/// counit facts feeding the fibrancy statement; records any found
/// counterexample to LDec preserving strict equivalences at r = 0.
pub fn dwyer_kan_check(r: usize, seed: u64, samples: usize) -> Result<DwyerKanReport> {
    if r < 1 {
        return Err(Error::RangeError("the counit fact needs r >= 1".into()));
    }
    let field = FieldSpec::prime_field(5)?;
    let mut rng = crate::sample::rng(seed);
    let spec = crate::sample::SupportSpec {
        span: 2,
        max_positions: 4,
        max_dim: 3,
    };
    let mut counit_ok = 0;
    let mut unit_q = 0;
    let mut unit_id = 0;
    let mut ldec_fail = 0;
    for _ in 0..samples {
        let y = crate::sample::random_espse(field, r.max(2) + 1, &spec, &mut rng);
        let eps = shift_dec_counit(&y)?;
        if weq_strict_r_at_horizon(&eps, r)? {
            counit_ok += 1;
        }
        let x = crate::sample::random_spse(field, r.max(2) + 1, &spec, &mut rng);
        let eta = ldec_shift_unit(&x)?;
        if weq_r(&eta, 1)? {
            unit_q += 1;
        }
        if (2..eta.len()).all(|i| eta.component(i).is_iso()) {
            unit_id += 1;
        }
        // A strict 1-equivalence: projection off a page-1 disc summand.
        let d = ExtSpecSeq::disc(field, 1, 0, 0, x.horizon())?;
        let (sum, injs) = crate::espse::coproduct(&[x.clone(), d])?;
        let _ = &injs;
        let mut proj_components = Vec::new();
        for i in 0..=sum.horizon() {
            let mut m = BigradedMap::zero(sum.page(i).module(), x.page(i).module(), (0, 0));
            for pn in sum.page(i).module().support() {
                let rows = x.page(i).module().dim(pn);
                let cols = sum.page(i).module().dim(pn);
                if rows == 0 {
                    continue;
                }
                let mut block = Matrix::zeros(field, rows, cols);
                for k in 0..rows {
                    block.set(k, k, field.one());
                }
                m.set_block(pn, block)?;
            }
            proj_components.push(m);
        }
        let proj = ESSMap::new(sum, x.clone(), proj_components)?;
        if weq_strict_r_at_horizon(&proj, 1)? {
            let (lproj, _, _) = ldec_map(&proj, 1)?;
            if !weq_r(&lproj, 0)? {
                ldec_fail += 1;
            }
        }
    }
    Ok(DwyerKanReport {
        samples,
        counit_in_strict_r: counit_ok,
        unit_page1_quasi_iso: unit_q,
        unit_identity_above: unit_id,
        ldec_e0_failures: ldec_fail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::espse::iso_check;
    use crate::sample;

    fn f5() -> FieldSpec {
        FieldSpec::prime_field(5).unwrap()
    }

    #[test]
    fn sigma_of_zero_and_disc() {
        let z = RComplex::zero(f5(), 1);
        assert!(sigma_complex(&z, 1).is_zero());

        let module = crate::bigraded::BigradedModule::from_components(f5(), &[((0, 0), 1), ((-1, 0), 1)]);
        let mut d = BigradedMap::zero(&module, &module, crate::bigraded::differential_bidegree(1));
        d.set_block((0, 0), Matrix::identity(f5(), 1)).unwrap();
        let c = RComplex::new(1, module, d).unwrap();
        let s = sigma_complex(&c, 1);
        assert_eq!(s.module().dim((-1, 0)), 1);
        assert_eq!(s.module().dim((-2, 0)), 1);
        assert!(homology(&s).unwrap().h().is_zero());
    }

    #[test]
    fn shift_of_zero_and_unit() {
        let z = ExtSpecSeq::zero(f5(), 2);
        assert!(shift_r(&z, 1).unwrap().is_zero());

        let u = ExtSpecSeq::unit(f5(), 1, 2, 2);
        let s = shift_r(&u, 1).unwrap();
        // T places (1,2) at (2*1-2, 1) = (0,1).
        for i in 0..=3usize {
            assert_eq!(s.page(i).module().dim((0, 1)), 1, "page {i}");
            assert_eq!(s.page(i).module().total_dim(), 1);
        }
        assert!(s.is_spectral());
    }

    #[test]
    fn shift_dec_ldec_preserve_spectral() {
        let mut rng = sample::rng(5);
        let spec = sample::SupportSpec {
            span: 2,
            max_positions: 4,
            max_dim: 3,
        };
        for _ in 0..5 {
            let x = sample::random_spse(f5(), 3, &spec, &mut rng);
            assert!(shift_r(&x, 1).unwrap().is_spectral());
            assert!(shift_r(&x, 2).unwrap().is_spectral());
            assert!(dec_r(&x, 1).unwrap().is_spectral());
            let data = ldec_r_full(&x, 1).unwrap();
            assert!(data.object.is_spectral());
            assert_eq!(data.ker_q_total, 0, "Ker q vanishes on spectral sequences");
            assert!(data.ses_exact);
        }
    }

    #[test]
    fn dec_shift_and_ldec_shift_are_identity_up_to_iso() {
        let mut rng = sample::rng(17);
        let spec = sample::SupportSpec {
            span: 2,
            max_positions: 4,
            max_dim: 3,
        };
        for _ in 0..4 {
            let x = sample::random_espse(f5(), 2, &spec, &mut rng);
            for r in 1..=2usize {
                let s = shift_r(&x, r).unwrap();
                let ds = dec_r(&s, r).unwrap();
                assert!(iso_check(&ds, &x).unwrap(), "dec_{r} ∘ shift_{r}");
                let ls = ldec_r(&s, r).unwrap();
                assert!(iso_check(&ls, &x).unwrap(), "ldec_{r} ∘ shift_{r}");
            }
        }
    }

    #[test]
    fn units_and_counits_are_isomorphisms() {
        let mut rng = sample::rng(29);
        let spec = sample::SupportSpec {
            span: 2,
            max_positions: 4,
            max_dim: 3,
        };
        for _ in 0..4 {
            let x = sample::random_espse(f5(), 2, &spec, &mut rng);
            let eta = shift_dec_unit(&x).unwrap();
            assert!(eta.validate().is_ok());
            assert!(eta.is_pagewise_iso(), "unit of (Shift, Dec)");

            let eps = ldec_shift_counit(&x).unwrap();
            assert!(eps.validate().is_ok());
            assert!(eps.is_pagewise_iso(), "counit of (LDec, Shift)");
        }
    }

    #[test]
    fn dec_of_unit_bottom_page() {
        // dec_1(unit(p,n)): the bottom page is the rank-one page-1 nerve.
        let u = ExtSpecSeq::unit(f5(), 0, 0, 2);
        let d = dec_r(&u, 1).unwrap();
        assert_eq!(d.page(0).module().total_dim(), 1);
        assert!(d.is_spectral());
    }

    #[test]
    fn presheaf_routes_agree() {
        let mut rng = sample::rng(41);
        let spec = sample::SupportSpec {
            span: 2,
            max_positions: 3,
            max_dim: 2,
        };
        for _ in 0..3 {
            let x = sample::random_espse(f5(), 2, &spec, &mut rng);
            for r in 1..=2usize {
                let direct = dec_r(&x, r).unwrap();
                let route = dec_via_presheaf(&x, r).unwrap();
                assert!(iso_check(&direct, &route).unwrap(), "dec_{r} routes");

                let direct = ldec_r(&x, r).unwrap();
                let route = ldec_via_presheaf(&x, r).unwrap();
                assert!(iso_check(&direct, &route).unwrap(), "ldec_{r} routes");
            }
            let direct = shift_r(&x, 1).unwrap();
            let route = shift_via_presheaf(&x, 1).unwrap();
            assert!(iso_check(&direct, &route).unwrap(), "shift routes");
        }
    }

    #[test]
    fn ldec_cross_check_on_disc() {
        let d = ExtSpecSeq::disc(f5(), 0, 0, 0, 2).unwrap();
        let direct = ldec_r(&d, 1).unwrap();
        let route = ldec_via_presheaf(&d, 1).unwrap();
        assert!(iso_check(&direct, &route).unwrap());
    }

    #[test]
    fn adjunction_witness_reports() {
        let z = ExtSpecSeq::zero(f5(), 2);
        let w = adjunction_witness(Pairing::ShiftDec, &z, &z).unwrap();
        assert_eq!(w.left_dim, 0);
        assert_eq!(w.right_dim, 0);
        assert!(w.bijective);

        let x = ExtSpecSeq::disc(f5(), 0, 0, 0, 2).unwrap();
        let y = ExtSpecSeq::disc(f5(), 1, 0, 0, 2).unwrap();
        for pairing in [Pairing::ShiftDec, Pairing::LdecShift] {
            let w = adjunction_witness(pairing, &x, &y).unwrap();
            assert_eq!(w.left_dim, w.right_dim, "{pairing:?}");
            assert!(w.bijective, "{pairing:?}");
        }
    }

    #[test]
    fn dwyer_kan_report_on_samples() {
        let report = dwyer_kan_check(1, 7, 3).unwrap();
        assert_eq!(report.counit_in_strict_r, report.samples);
        assert_eq!(report.unit_page1_quasi_iso, report.samples);
        assert_eq!(report.unit_identity_above, report.samples);
    }

    #[test]
    fn zero_object_trivially_passes() {
        let z = ExtSpecSeq::zero(f5(), 2);
        assert!(shift_dec_counit(&z).unwrap().is_pagewise_iso());
        assert!(ldec_shift_unit(&z).unwrap().is_pagewise_iso());
    }
}
