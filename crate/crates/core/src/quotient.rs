//! Quotient maps onto finite groups, finite-index subgroups presented as
//! preimages, and chains of such subgroups.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_group::{abelian, cyclic, dihedral, FiniteGroup, FiniteSubgroup, GroupHom};
use crate::group_ring::{GroupAlgebraMatrix, GroupRingElement, GroupRingMatrix};
use crate::rational::Rational;
use crate::words::{BuiltinGroup, Family, Word};

#[derive(Clone, Debug)]
pub struct QuotientMap {
    source: BuiltinGroup,
    target: Arc<FiniteGroup>,
    images: Vec<usize>,
}

impl QuotientMap {
    /// Checks that the relators of the source family map to the identity.
    pub fn new(source: BuiltinGroup, target: Arc<FiniteGroup>, images: Vec<usize>) -> Result<QuotientMap> {
        if images.len() != source.generator_count() || images.iter().any(|&i| i >= target.order()) {
            return Err(Error::ConfigInvalid("one image per source generator is required".into()));
        }
        let q = QuotientMap { source, target, images };
        q.check_relators()?;
        Ok(q)
    }

    fn check_relators(&self) -> Result<()> {
        let t = &self.target;
        let im = &self.images;
        let fail = |what: &str| Err(Error::ConfigInvalid(format!("relator {what} does not map to the identity")));
        match self.source.family() {
            Family::Free(_) => {}
            Family::FreeAbelian(r) => {
                for i in 0..*r {
                    for j in 0..i {
                        if t.mul(im[i], im[j]) != t.mul(im[j], im[i]) {
                            return fail("[x_i, x_j]");
                        }
                    }
                }
            }
            Family::DihedralInfinite => {
                let (tt, s) = (im[0], im[1]);
                if t.mul(s, s) != 0 {
                    return fail("s^2");
                }
                let st = t.mul(s, tt);
                if t.mul(st, st) != 0 {
                    return fail("(st)^2");
                }
            }
            Family::FreeByFinite(d) => {
                let h = d.h();
                let r = d.rank();
                let hgens = h.generators().to_vec();
                let himgs: Vec<usize> = (0..hgens.len()).map(|k| im[r + k]).collect();
                if GroupHom::from_generator_images(h, t, &hgens, &himgs).is_err() {
                    return fail("of H");
                }
                for (k, &y) in himgs.iter().enumerate() {
                    for (i, &x) in im.iter().enumerate().take(r) {
                        let lhs = t.mul(t.mul(y, x), t.inv(y));
                        let w = Word::from_letters(vec![((r + k) as u32, 1), (i as u32, 1), ((r + k) as u32, -1)]);
                        if self.evaluate(&self.source.normal_form(&w)) != lhs {
                            return fail("y x y^-1 = σ_y(x)");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &BuiltinGroup {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Product of generator images along the letters of `w`.
    pub fn evaluate(&self, w: &Word) -> usize {
        let t = &self.target;
        w.letters().iter().fold(0, |acc, &(g, e)| {
            let x = self.images[g as usize];
            t.mul(acc, if e > 0 { x } else { t.inv(x) })
        })
    }

    pub fn push_element(&self, e: &GroupRingElement) -> crate::group_ring::FiniteElement {
        let mut out = crate::group_ring::FiniteElement::new();
        for (w, c) in e.terms() {
            let g = self.evaluate(w);
            let slot = out.entry(g).or_insert_with(|| Rational::from_integer(0.into()));
            *slot += c;
        }
        out.retain(|_, c| *c != Rational::from_integer(0.into()));
        out
    }

    pub fn push_matrix(&self, a: &GroupRingMatrix) -> GroupAlgebraMatrix {
        let mut m = GroupAlgebraMatrix::zeros(&self.target, a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                m.set(i, j, self.push_element(a.get(i, j)));
            }
        }
        m
    }
}

/// `Γ = via⁻¹(fiber)`.
#[derive(Clone, Debug)]
pub struct FiniteIndexSubgroup {
    pub via: QuotientMap,
    pub fiber: FiniteSubgroup,
}

impl FiniteIndexSubgroup {
    pub fn new(via: QuotientMap, fiber: FiniteSubgroup) -> FiniteIndexSubgroup {
        assert!(Arc::ptr_eq(fiber.parent(), via.target()), "fiber must live in the quotient target");
        FiniteIndexSubgroup { via, fiber }
    }

    pub fn kernel(via: QuotientMap) -> FiniteIndexSubgroup {
        let fiber = FiniteSubgroup::trivial(via.target());
        FiniteIndexSubgroup { via, fiber }
    }

    pub fn index(&self) -> usize {
        self.fiber.index()
    }

    pub fn is_normal(&self) -> bool {
        self.fiber.is_normal()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.fiber.contains(self.via.evaluate(w))
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        self.via.target()
    }
}

#[derive(Clone, Debug)]
pub struct QuotientChain {
    levels: Vec<FiniteIndexSubgroup>,
    connectors: Vec<GroupHom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub indices: Vec<usize>,
    pub normal: Vec<bool>,
}

impl QuotientChain {
    /// Derives connectors `Q_{n+1} → Q_n` from the generator images.
    pub fn new(levels: Vec<FiniteIndexSubgroup>) -> Result<QuotientChain> {
        let mut connectors = Vec::new();
        for n in 0..levels.len().saturating_sub(1) {
            let (lo, hi) = (&levels[n].via, &levels[n + 1].via);
            let hom = GroupHom::from_generator_images(hi.target(), lo.target(), hi.images(), lo.images())
                .map_err(|generator| Error::ChainBroken { level: n, generator })?;
            connectors.push(hom);
        }
        let chain = QuotientChain { levels, connectors };
        chain.validate()?;
        Ok(chain)
    }

    pub fn levels(&self) -> &[FiniteIndexSubgroup] {
        &self.levels
    }

    pub fn connectors(&self) -> &[GroupHom] {
        &self.connectors
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.levels.truncate(n);
        self.connectors.truncate(n.saturating_sub(1));
    }

    pub fn validate(&self) -> Result<ChainReport> {
        validate_chain(self)
    }
}

/// Connector compatibility on generators, fiber containment, normality flags
/// and indices per level.
pub fn validate_chain(c: &QuotientChain) -> Result<ChainReport> {
    for (n, hom) in c.connectors.iter().enumerate() {
        let (lo, hi) = (&c.levels[n], &c.levels[n + 1]);
        for (g, (&a, &b)) in hi.via.images().iter().zip(lo.via.images()).enumerate() {
            if hom.apply(a) != b {
                return Err(Error::ChainBroken { level: n, generator: g });
            }
        }
        for &k in hi.fiber.members() {
            if !lo.fiber.contains(hom.apply(k)) {
                return Err(Error::ChainBroken { level: n, generator: usize::MAX });
            }
        }
    }
    Ok(ChainReport {
        indices: c.levels.iter().map(|l| l.index()).collect(),
        normal: c.levels.iter().map(|l| l.is_normal()).collect(),
    })
}

/// Largest `L` such that no nonidentity element of word length `≤ L` lies in
/// the deepest level (searched up to `max_radius` and `cap` elements), and
/// whether the search was cut short.
pub fn intersection_diagnostic(c: &QuotientChain, max_radius: usize, cap: usize) -> (usize, bool) {
    let Some(deep) = c.levels.last() else { return (0, true) };
    let g = deep.via.source();
    let (ball, truncated) = g.ball(max_radius, cap);
    let mut first_hit: Option<usize> = None;
    for (w, len) in &ball {
        if !w.is_empty() && deep.contains(w) {
            first_hit = Some(first_hit.map_or(*len, |f: usize| f.min(*len)));
        }
    }
    match first_hit {
        Some(l) => (l - 1, false),
        None => {
            let reached = ball.iter().map(|(_, l)| *l).max().unwrap_or(0);
            (reached, truncated || reached == max_radius)
        }
    }
}

/// Which subgroup of the dihedral quotient serves as the fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DihedralFiber {
    Kernel,
    Reflection,
}

/// `D∞ → dihedral(2m)`, `t ↦ r`, `s ↦ s`, one level per modulus.
pub fn dihedral_chain(moduli: &[usize], fiber: DihedralFiber) -> Result<QuotientChain> {
    let g = BuiltinGroup::dihedral_infinite();
    let levels = moduli
        .iter()
        .map(|&m| {
            let q = Arc::new(dihedral(m));
            let imgs = q.generators().to_vec();
            let via = QuotientMap::new(g.clone(), q.clone(), imgs.clone())?;
            let fib = match fiber {
                DihedralFiber::Kernel => FiniteSubgroup::trivial(&q),
                DihedralFiber::Reflection => FiniteSubgroup::generated(&q, &[imgs[1]]),
            };
            Ok(FiniteIndexSubgroup::new(via, fib))
        })
        .collect::<Result<Vec<_>>>()?;
    QuotientChain::new(levels)
}

/// Kernels of `ℤ → ℤ/m` (source `ℤ` or `F_1`).
pub fn cyclic_chain(source: &BuiltinGroup, moduli: &[usize]) -> Result<QuotientChain> {
    if source.generator_count() != 1 || !matches!(source.family(), Family::Free(_) | Family::FreeAbelian(_)) {
        return Err(Error::UnsupportedFamily("cyclic chains need an infinite cyclic source".into()));
    }
    let levels = moduli
        .iter()
        .map(|&m| {
            let q = Arc::new(cyclic(m));
            let via = QuotientMap::new(source.clone(), q.clone(), vec![1 % m])?;
            Ok(FiniteIndexSubgroup::kernel(via))
        })
        .collect::<Result<Vec<_>>>()?;
    QuotientChain::new(levels)
}

/// Kernels of `F_r → (ℤ/m)^r` or `ℤ^r → (ℤ/m)^r`.
pub fn abelian_mod_chain(source: &BuiltinGroup, moduli: &[usize]) -> Result<QuotientChain> {
    let r = match source.family() {
        Family::Free(r) | Family::FreeAbelian(r) => *r,
        _ => return Err(Error::UnsupportedFamily("abelianized chains need a free or free abelian source".into())),
    };
    let levels = moduli
        .iter()
        .map(|&m| {
            let q = Arc::new(abelian(&vec![m; r]));
            let imgs = q.generators().to_vec();
            let via = QuotientMap::new(source.clone(), q.clone(), imgs)?;
            Ok(FiniteIndexSubgroup::kernel(via))
        })
        .collect::<Result<Vec<_>>>()?;
    QuotientChain::new(levels)
}

/// Kernels of `F_r ⋊ H → (ℤ/m)^r ⋊ H` through the abelianized action.
pub fn free_by_finite_chain(source: &BuiltinGroup, moduli: &[usize]) -> Result<QuotientChain> {
    let d = source
        .free_by_finite_data()
        .ok_or_else(|| Error::UnsupportedFamily("free-by-finite chains need a free-by-finite source".into()))?
        .clone();
    let r = d.rank();
    let h = d.h().clone();
    // abelianized action matrices: column i is the exponent vector of σ_h(x_i)
    let mats: Vec<Vec<Vec<i64>>> = (0..h.order())
        .map(|x| {
            let hw = d.h_word(x);
            let mut cols = vec![vec![0i64; r]; r];
            for (i, col) in cols.iter_mut().enumerate() {
                // σ_x(a_i) is the free part of x·a_i·x⁻¹
                let w = hw.concat(&Word::generator(i, 1)).concat(&hw.formal_inverse());
                let (u, _) = source.semidirect_coords(&w).unwrap();
                for &(g, e) in u.letters() {
                    col[g as usize] += e as i64;
                }
            }
            cols
        })
        .collect();
    let mats = Arc::new(mats);
    let levels = moduli
        .iter()
        .map(|&m| {
            let mats = mats.clone();
            let hh = h.clone();
            let mm = m as i64;
            let mul = move |a: &(Vec<i64>, usize), b: &(Vec<i64>, usize)| {
                let mh = &mats[a.1];
                let v: Vec<i64> = (0..a.0.len())
                    .map(|i| {
                        let s: i64 = (0..b.0.len()).map(|j| mh[j][i] * b.0[j]).sum();
                        (a.0[i] + s).rem_euclid(mm)
                    })
                    .collect();
                (v, hh.mul(a.1, b.1))
            };
            let mut gens: Vec<(Vec<i64>, usize)> = (0..r)
                .map(|i| {
                    let mut v = vec![0; r];
                    v[i] = 1 % mm;
                    (v, 0)
                })
                .collect();
            gens.extend(h.generators().iter().map(|&y| (vec![0; r], y)));
            let cap = m.pow(r as u32) * h.order() + 1;
            let (q, elems) = FiniteGroup::from_closure(&gens, (vec![0; r], 0), mul, cap)?;
            let labels = elems
                .iter()
                .map(|(v, x)| format!("({};{})", v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","), h.label(*x)))
                .collect();
            let q = Arc::new(q.with_labels(labels));
            let imgs = q.generators().to_vec();
            let via = QuotientMap::new(source.clone(), q, imgs)?;
            Ok(FiniteIndexSubgroup::kernel(via))
        })
        .collect::<Result<Vec<_>>>()?;
    QuotientChain::new(levels)
}

/// Element of a finite group named by a word over its generators.
pub fn finite_word(g: &FiniteGroup, w: &str) -> Result<usize> {
    let w = w.trim();
    if w == "1" || w.is_empty() {
        return Ok(0);
    }
    let gens = g.generators();
    let chars: Vec<char> = w.chars().filter(|c| !c.is_whitespace()).collect();
    let mut acc = 0;
    let mut i = 0;
    while i < chars.len() {
        let k = (chars[i] as u32).checked_sub('a' as u32).map(|k| k as usize).filter(|&k| k < gens.len());
        let k = k.ok_or_else(|| Error::Parse(format!("bad word `{w}` over {} generators", gens.len())))?;
        i += 1;
        let mut x = gens[k];
        if i < chars.len() && chars[i] == '\'' {
            x = g.inv(x);
            i += 1;
        }
        acc = g.mul(acc, x);
    }
    Ok(acc)
}
