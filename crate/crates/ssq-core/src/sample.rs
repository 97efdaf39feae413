//! Seeded random instance generators used by the property suites and the
//! randomized CLI subcommands. Everything is driven by a caller-supplied
//! `ChaCha8Rng`, so identical seeds give identical objects.

use crate::bigraded::{differential_bidegree, BigradedMap, BigradedModule, Bidegree, RComplex};
use crate::espse::{EssTail, ExtSpecSeq};
use crate::exactla::{FieldSpec, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Bounds for random supports: bidegrees in `[-span, span]^2`, at most
/// `max_positions` occupied, each of dimension at most `max_dim`.
#[derive(Debug, Clone)]
pub struct SupportSpec {
    pub span: i64,
    pub max_positions: usize,
    pub max_dim: usize,
}

impl Default for SupportSpec {
    fn default() -> Self {
        SupportSpec {
            span: 3,
            max_positions: 6,
            max_dim: 4,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_scalar_matrix(
    field: FieldSpec,
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> Matrix {
    Matrix::from_fn(field, rows, cols, |_, _| field.from_i64(rng.gen_range(-6..7)))
}

pub fn random_invertible(field: FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = random_scalar_matrix(field, n, n, rng);
        if m.is_invertible() {
            return m;
        }
    }
}

fn random_support(spec: &SupportSpec, rng: &mut ChaCha8Rng) -> Vec<(Bidegree, usize)> {
    let count = rng.gen_range(1..=spec.max_positions);
    let mut out: Vec<(Bidegree, usize)> = Vec::new();
    for _ in 0..count {
        let p = rng.gen_range(-spec.span..=spec.span);
        let n = rng.gen_range(-spec.span..=spec.span);
        if out.iter().any(|&((a, b), _)| (a, b) == (p, n)) {
            continue;
        }
        out.push(((p, n), rng.gen_range(1..=spec.max_dim)));
    }
    out
}

/// A random module on a sparse support within the given bounds.
pub fn random_module(field: FieldSpec, spec: &SupportSpec, rng: &mut ChaCha8Rng) -> BigradedModule {
    BigradedModule::from_components(field, &random_support(spec, rng))
}

/// A random r-bigraded complex with exact `d^2 = 0`.
///
/// Along each line `{(p,n) + t·(-r, 1-r)}` the components form a chain
/// complex; a differential is produced from a boundary/homology/preboundary
/// splitting and conjugated by random invertibles, so `d^2 = 0` holds by
/// construction.
pub fn random_rcomplex(
    field: FieldSpec,
    r: usize,
    rng: &mut ChaCha8Rng,
    spec: &SupportSpec,
) -> RComplex {
    let module = random_module(field, spec, rng);
    random_differential_on(&module, r, rng)
}

/// A random valid differential on a fixed module.
pub fn random_differential_on(
    module: &BigradedModule,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> RComplex {
    let field = module.field();
    let step = differential_bidegree(r);
    let mut d = BigradedMap::zero(module, module, step);
    // Choose ranks along each line, then matrices of exactly those ranks with
    // im(d) ⊆ ker(next d): d = G_tgt * [canonical rank block] * G_src^{-1}
    // where consecutive canonical blocks compose to zero by construction.
    let mut conj: std::collections::BTreeMap<Bidegree, (Matrix, Matrix)> =
        Default::default();
    for pn in module.support() {
        let n = module.dim(pn);
        let g = random_invertible(field, n, rng);
        let ginv = g.inverse().expect("invertible");
        conj.insert(pn, (g, ginv));
    }
    // Process bidegrees so that the upstream position `pn - step` of each
    // differential line is decided first: for r >= 1 the source p-coordinate
    // strictly decreases along d, for r = 0 the n-coordinate increases.
    let mut order: Vec<Bidegree> = module.support().collect();
    if r >= 1 {
        order.sort_by_key(|&(p, n)| (-p, n));
    } else {
        order.sort_by_key(|&(p, n)| (p, n));
    }
    let mut ranks: std::collections::BTreeMap<Bidegree, usize> = Default::default();
    for pn in order {
        let upstream = (pn.0 - step.0, pn.1 - step.1);
        let incoming_rank = ranks.get(&upstream).copied().unwrap_or(0);
        let tgt = (pn.0 + step.0, pn.1 + step.1);
        let max_rank = module
            .dim(pn)
            .saturating_sub(incoming_rank)
            .min(module.dim(tgt));
        let rank = if max_rank == 0 {
            0
        } else {
            rng.gen_range(0..=max_rank)
        };
        ranks.insert(pn, rank);
        if rank == 0 {
            continue;
        }
        // Canonical block: send the last `rank` source coordinates (which a
        // suitable basis keeps clear of the incoming image, placed in the
        // first `incoming_rank` coordinates) onto the first `rank` target
        // coordinates.
        let mut block = Matrix::zeros(field, module.dim(tgt), module.dim(pn));
        for k in 0..rank {
            block.set(k, module.dim(pn) - rank + k, field.one());
        }
        let (g_tgt, _) = &conj[&tgt];
        let (_, ginv_src) = &conj[&pn];
        let m = g_tgt.mul(&block).unwrap().mul(ginv_src).unwrap();
        d.set_block(pn, m).unwrap();
    }
    RComplex::new(r, module.clone(), d).expect("random differential squares to zero")
}

/// A random extended spectral sequence with zero tail: random pages with
/// exact differentials and arbitrary characteristic maps.
pub fn random_espse(
    field: FieldSpec,
    horizon: usize,
    spec: &SupportSpec,
    rng: &mut ChaCha8Rng,
) -> ExtSpecSeq {
    let mut pages = Vec::new();
    for r in 0..=horizon {
        pages.push(random_rcomplex(field, r, rng, spec));
    }
    let mut phi = Vec::new();
    for i in 0..horizon {
        let h = crate::bigraded::homology(&pages[i]).unwrap();
        let src = pages[i + 1].module().clone();
        let mut map = BigradedMap::zero(&src, h.h(), (0, 0));
        for pn in src.support() {
            let rows = h.h().dim(pn);
            let cols = src.dim(pn);
            if rows > 0 && cols > 0 {
                map.set_block(pn, random_scalar_matrix(field, rows, cols, rng))
                    .unwrap();
            }
        }
        phi.push(map);
    }
    ExtSpecSeq::new(pages, phi, EssTail::Zero).expect("random espse is valid by construction")
}

/// A random spectral sequence (characteristic maps isomorphisms within the
/// horizon): page `i+1` is modelled on `H(page i)` with a random conjugated
/// differential and a random isomorphism as characteristic map.
pub fn random_spse(
    field: FieldSpec,
    horizon: usize,
    spec: &SupportSpec,
    rng: &mut ChaCha8Rng,
) -> ExtSpecSeq {
    let mut pages = vec![random_rcomplex(field, 0, rng, spec)];
    let mut phi = Vec::new();
    for i in 0..horizon {
        let h = crate::bigraded::homology(&pages[i]).unwrap();
        let next = random_differential_on(h.h(), i + 1, rng);
        let mut map = BigradedMap::zero(next.module(), h.h(), (0, 0));
        for pn in next.module().support() {
            let n = next.module().dim(pn);
            map.set_block(pn, random_invertible(field, n, rng)).unwrap();
        }
        pages.push(next);
        phi.push(map);
    }
    ExtSpecSeq::new(pages, phi, EssTail::Zero).expect("random spse is valid by construction")
}

/// A random finite filtered complex over degrees `0..=degree_span` with
/// `levels` filtration steps: a sum of filtered spheres and discs,
/// conjugated by a random filtration-preserving automorphism.
pub fn random_filtered(
    field: FieldSpec,
    rng: &mut ChaCha8Rng,
    degree_span: usize,
    levels: usize,
    max_pieces: usize,
) -> crate::filtered::FilteredComplex {
    use crate::exactla::Subspace;
    let levels = levels.max(1);
    let n_deg = degree_span + 1;
    // Elements per degree: (level, optional partner) built in level order.
    let mut elements: Vec<Vec<i64>> = vec![Vec::new(); n_deg];
    let mut arrows: Vec<(usize, usize, usize)> = Vec::new(); // (deg, src idx, tgt idx)
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    for _ in 0..pieces {
        if rng.gen_bool(0.4) || degree_span == 0 {
            let k = rng.gen_range(0..n_deg);
            elements[k].push(rng.gen_range(0..levels) as i64);
        } else {
            let k = rng.gen_range(0..n_deg - 1);
            let pe = rng.gen_range(0..levels) as i64;
            let pde = rng.gen_range(0..=pe);
            elements[k].push(pe);
            elements[k + 1].push(pde);
            arrows.push((k, elements[k].len() - 1, elements[k + 1].len() - 1));
        }
    }
    // Sort each degree by level, fixing the arrow indices.
    let mut perms: Vec<Vec<usize>> = Vec::new();
    for lv in &mut elements {
        let mut idx: Vec<usize> = (0..lv.len()).collect();
        idx.sort_by_key(|&i| lv[i]);
        let mut inv = vec![0usize; idx.len()];
        for (new_i, &old_i) in idx.iter().enumerate() {
            inv[old_i] = new_i;
        }
        let sorted: Vec<i64> = idx.iter().map(|&i| lv[i]).collect();
        *lv = sorted;
        perms.push(inv);
    }
    let dims: Vec<usize> = elements.iter().map(Vec::len).collect();
    let mut d: Vec<Matrix> = (0..n_deg - 1)
        .map(|k| Matrix::zeros(field, dims[k + 1], dims[k]))
        .collect();
    for (k, src, tgt) in arrows {
        let i = perms[k + 1][tgt];
        let j = perms[k][src];
        d[k].set(i, j, field.one());
    }
    // Random filtration-preserving automorphisms per degree: entries only
    // from lower or equal levels, invertible within each level block.
    let autos: Vec<Matrix> = (0..n_deg)
        .map(|k| loop {
            let n = dims[k];
            let m = Matrix::from_fn(field, n, n, |i, j| {
                if elements[k][i] < elements[k][j] {
                    field.from_i64(rng.gen_range(-4..5))
                } else if elements[k][i] == elements[k][j] {
                    if i == j {
                        field.from_i64(rng.gen_range(1..5))
                    } else {
                        field.from_i64(rng.gen_range(-4..5))
                    }
                } else {
                    field.zero()
                }
            });
            if m.is_invertible() {
                break m;
            }
        })
        .collect();
    for k in 0..n_deg - 1 {
        let ginv = autos[k].inverse().expect("invertible");
        d[k] = autos[k + 1].mul(&d[k]).unwrap().mul(&ginv).unwrap();
    }
    let mut filt = Vec::new();
    for k in 0..n_deg {
        let mut chain = Vec::new();
        for q in 0..levels as i64 {
            let cols: Vec<usize> = (0..dims[k]).filter(|&i| elements[k][i] <= q).collect();
            let mut span = Matrix::zeros(field, dims[k], cols.len());
            for (j, &i) in cols.iter().enumerate() {
                span.set(i, j, field.one());
            }
            chain.push(Subspace::from_span(dims[k], &span).unwrap());
        }
        filt.push(chain);
    }
    crate::filtered::FilteredComplex::new(field, 0, dims, d, 0, filt)
        .expect("random filtered complex is valid by construction")
}
