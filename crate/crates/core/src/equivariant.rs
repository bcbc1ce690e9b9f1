//! Equivariant cell complexes over built-in groups, their finite quotient
//! complexes with residual `H`-action, exact homology, traces and
//! multiplicities.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::character_table::CharacterTable;
use crate::error::{Error, Result};
use crate::finite_group::{FiniteGroup, FiniteSubgroup};
use crate::group_ring::{GroupAlgebraMatrix, GroupRingElement, GroupRingMatrix};
use crate::linalg::{column_reduce, sparse_from_pairs, sparse_get, Reduction, SignedPerm, SparseMatrix, SparseVec, Q};
use crate::quotient::{FiniteIndexSubgroup, QuotientMap};
use crate::rational::Rational;
use crate::spectral::{induced_rep, FiniteRep, ProjectiveChain};
use crate::words::{BuiltinGroup, Family, Word, WordSubgroup};

pub const STABILIZER_CAP: usize = 10_000;
pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const CROSSCHECK_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct OrbitCell {
    pub label: String,
    pub stabilizer: Vec<Word>,
}

/// Cellular chain complex `⊕ ℚ[S_i\G]` of a proper cocompact `G`-CW complex.
/// Entry `(i,j)` of `∂_p` is `Σ c·w` meaning `∂e_j` contains `c·(e_i·w)`.
#[derive(Clone, Debug)]
pub struct EquivariantCWData {
    group: BuiltinGroup,
    cells: Vec<Vec<OrbitCell>>,
    stabilizers: Vec<Vec<WordSubgroup>>,
    /// `boundaries[p-1] = ∂_p`
    boundaries: Vec<GroupRingMatrix>,
}

fn coset_key(g: &BuiltinGroup, s: &WordSubgroup, x: &Word) -> Word {
    s.words().iter().map(|sw| g.mul(sw, x)).min().expect("nonempty subgroup")
}

impl EquivariantCWData {
    pub fn new(group: BuiltinGroup, cells: Vec<Vec<OrbitCell>>, boundaries: Vec<GroupRingMatrix>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::ConfigInvalid("complex has no cells".into()));
        }
        if boundaries.len() + 1 != cells.len() {
            return Err(Error::ConfigInvalid("one boundary matrix per positive dimension is required".into()));
        }
        let stabilizers: Vec<Vec<WordSubgroup>> = cells
            .iter()
            .map(|dim| dim.iter().map(|c| WordSubgroup::generated(&group, &c.stabilizer, STABILIZER_CAP)).collect())
            .collect::<Result<_>>()?;
        for (k, b) in boundaries.iter().enumerate() {
            let p = k + 1;
            if b.rows() != cells[p - 1].len() || b.cols() != cells[p].len() {
                return Err(Error::ConfigInvalid(format!("boundary {p} has the wrong shape")));
            }
            for j in 0..b.cols() {
                for i in 0..b.rows() {
                    let si = &stabilizers[p - 1][i];
                    let collect = |shift: Option<&Word>| -> BTreeMap<Word, Rational> {
                        let mut m: BTreeMap<Word, Rational> = BTreeMap::new();
                        for (w, c) in b.get(i, j).terms() {
                            let x = match shift {
                                Some(s) => group.mul(w, s),
                                None => w.clone(),
                            };
                            *m.entry(coset_key(&group, si, &x)).or_insert_with(Rational::zero) += c;
                        }
                        m.retain(|_, c| !c.is_zero());
                        m
                    };
                    let base = collect(None);
                    for s in &cells[p][j].stabilizer {
                        if collect(Some(s)) != base {
                            return Err(Error::NotAComplex(p));
                        }
                    }
                }
            }
        }
        Ok(EquivariantCWData { group, cells, stabilizers, boundaries })
    }

    /// `ℤ` acting on the line: one free vertex, one free edge, `∂ = 1 − a`.
    pub fn line_z() -> Self {
        let g = BuiltinGroup::free_abelian(1);
        let b = GroupRingMatrix::parse(&g, "1 + -1*a").expect("valid");
        let cells = vec![vec![free_cell("v")], vec![free_cell("e")]];
        EquivariantCWData::new(g, cells, vec![b]).expect("valid complex")
    }

    /// `D∞` acting on the line: vertices with stabilizers `⟨s⟩` and `⟨ts⟩`,
    /// one free edge with `∂e = v1 − v0`.
    pub fn line_dinf() -> Self {
        let g = BuiltinGroup::dihedral_infinite();
        let cells = vec![
            vec![
                OrbitCell { label: "v0".into(), stabilizer: vec![g.parse_word("s").unwrap()] },
                OrbitCell { label: "v1".into(), stabilizer: vec![g.parse_word("ts").unwrap()] },
            ],
            vec![free_cell("e")],
        ];
        let b = GroupRingMatrix::parse(&g, "-1*1; 1").expect("valid");
        EquivariantCWData::new(g, cells, vec![b]).expect("valid complex")
    }

    /// Free group acting on its Cayley tree: one vertex, `∂e_i = 1 − g_i`.
    pub fn rose_free(r: usize) -> Self {
        let g = BuiltinGroup::free(r);
        let mut b = GroupRingMatrix::zeros(1, r);
        for i in 0..r {
            let e = GroupRingElement::from_terms(
                &g,
                [(Rational::from_integer(1.into()), Word::identity()), (Rational::from_integer((-1).into()), g.generator(i))],
            );
            b.set(0, i, e);
        }
        let cells = vec![vec![free_cell("v")], (0..r).map(|i| free_cell(&format!("e{i}"))).collect()];
        EquivariantCWData::new(g, cells, b_vec(b)).expect("valid complex")
    }

    /// `F_r ⋊ H` acting on the Cayley tree of `F_r`, for actions by signed
    /// permutations of the free generators. Edge orbits that contain an
    /// inversion are subdivided at their midpoints.
    pub fn tree_free_by_finite(group: &BuiltinGroup) -> Result<Self> {
        let Some(data) = group.free_by_finite_data() else {
            return Err(Error::UnsupportedFamily(format!("{} is not free-by-finite", group.name())));
        };
        let Some(signed) = data.signed_action() else {
            return Err(Error::UnsupportedFamily("the tree needs an action by signed permutations".into()));
        };
        let r = data.rank();
        let h = data.h();
        // letters are (i, ε); σ_h(x_i^ε) = x_{π(i)}^{ε·sign}
        let act = |hh: usize, (i, e): (usize, i8)| -> (usize, i8) {
            let (j, s) = signed[hh][i];
            (j, e * s)
        };
        let letters: Vec<(usize, i8)> = (0..r).flat_map(|i| [(i, 1i8), (i, -1i8)]).collect();
        let mut seen: Vec<(usize, i8)> = Vec::new();
        let h_gen_words: Vec<Word> = (0..h.generators().len()).map(|k| group.generator(r + k)).collect();
        let mut zero_cells = vec![OrbitCell { label: "v0".into(), stabilizer: h_gen_words }];
        let mut one_cells = Vec::new();
        let mut entries: Vec<(usize, usize, GroupRingElement)> = Vec::new();
        let one = Rational::from_integer(1.into());
        let minus = Rational::from_integer((-1).into());
        for &l0 in &letters {
            if seen.contains(&l0) {
                continue;
            }
            let orbit: Vec<(usize, i8)> = (0..h.order()).map(|hh| act(hh, l0)).collect();
            let inv = (l0.0, -l0.1);
            let flips: Vec<usize> = (0..h.order()).filter(|&hh| act(hh, l0) == inv).collect();
            for &l in &orbit {
                seen.push(l);
                seen.push((l.0, -l.1));
            }
            let stab_words: Vec<Word> =
                (0..h.order()).filter(|&hh| act(hh, l0) == l0).map(|hh| data.h_word(hh).clone()).collect();
            let l0_word = Word::generator(l0.0, l0.1);
            let name = group.format_word(&l0_word);
            let col = one_cells.len();
            if flips.is_empty() {
                one_cells.push(OrbitCell { label: format!("e_{name}"), stabilizer: stab_words });
                entries.push((0, col, GroupRingElement::from_terms(group, [(one.clone(), l0_word), (minus.clone(), Word::identity())])));
            } else {
                let mut mid_stab = stab_words.clone();
                mid_stab.extend(flips.iter().map(|&hh| data.h_word(hh).concat(&l0_word)));
                let row = zero_cells.len();
                zero_cells.push(OrbitCell { label: format!("m_{name}"), stabilizer: mid_stab });
                one_cells.push(OrbitCell { label: format!("f_{name}"), stabilizer: stab_words });
                entries.push((row, col, GroupRingElement::monomial(one.clone(), Word::identity())));
                entries.push((0, col, GroupRingElement::monomial(minus.clone(), Word::identity())));
            }
        }
        let mut b = GroupRingMatrix::zeros(zero_cells.len(), one_cells.len());
        for (i, j, e) in entries {
            b.set(i, j, e);
        }
        EquivariantCWData::new(group.clone(), vec![zero_cells, one_cells], b_vec(b))
    }

    /// Reads `{"cells": [[{"label", "stabilizer": [words]}]], "boundaries": [[[sum]]]}`.
    pub fn from_json(group: &BuiltinGroup, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::ConfigInvalid(format!("complex: {m}"));
        let cells_v = v.get("cells").and_then(Value::as_array).ok_or_else(|| bad("missing cells"))?;
        let mut cells = Vec::new();
        for (p, dim) in cells_v.iter().enumerate() {
            let arr = dim.as_array().ok_or_else(|| bad("cells must be arrays"))?;
            let mut row = Vec::new();
            for (k, c) in arr.iter().enumerate() {
                let label = c.get("label").and_then(Value::as_str).map_or_else(|| format!("c{p}_{k}"), str::to_string);
                let stabilizer = match c.get("stabilizer") {
                    None => Vec::new(),
                    Some(s) => s
                        .as_array()
                        .ok_or_else(|| bad("stabilizer must be a word list"))?
                        .iter()
                        .map(|w| group.parse_word(w.as_str().unwrap_or("?")))
                        .collect::<Result<_>>()?,
                };
                row.push(OrbitCell { label, stabilizer });
            }
            cells.push(row);
        }
        let mut boundaries = Vec::new();
        if let Some(bs) = v.get("boundaries").and_then(Value::as_array) {
            for b in bs {
                let rows = b.as_array().ok_or_else(|| bad("boundary must be a matrix"))?;
                let parsed: Vec<Vec<GroupRingElement>> = rows
                    .iter()
                    .map(|r| {
                        r.as_array()
                            .ok_or_else(|| bad("boundary rows must be arrays"))?
                            .iter()
                            .map(|e| GroupRingElement::parse(group, e.as_str().unwrap_or("?")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                let ncols = parsed.first().map_or(0, Vec::len);
                if parsed.iter().any(|r| r.len() != ncols) {
                    return Err(bad("ragged boundary matrix"));
                }
                if parsed.is_empty() {
                    let p = boundaries.len() + 1;
                    let cols = cells.get(p).map_or(0, Vec::len);
                    boundaries.push(GroupRingMatrix::zeros(0, cols));
                } else {
                    boundaries.push(GroupRingMatrix::from_rows(parsed));
                }
            }
        }
        while boundaries.len() + 1 < cells.len() {
            let p = boundaries.len() + 1;
            boundaries.push(GroupRingMatrix::zeros(cells[p - 1].len(), cells[p].len()));
        }
        EquivariantCWData::new(group.clone(), cells, boundaries)
    }

    pub fn to_json(&self) -> Value {
        let g = &self.group;
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|dim| {
                Value::Array(
                    dim.iter()
                        .map(|c| json!({"label": c.label, "stabilizer": c.stabilizer.iter().map(|w| g.format_word(w)).collect::<Vec<_>>()}))
                        .collect(),
                )
            })
            .collect();
        let boundaries: Vec<Value> = self
            .boundaries
            .iter()
            .map(|b| {
                Value::Array(
                    (0..b.rows()).map(|i| Value::Array((0..b.cols()).map(|j| json!(b.get(i, j).format(g))).collect())).collect(),
                )
            })
            .collect();
        json!({"cells": cells, "boundaries": boundaries})
    }

    pub fn group(&self) -> &BuiltinGroup {
        &self.group
    }

    pub fn dimension(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn cells(&self, p: usize) -> &[OrbitCell] {
        self.cells.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn stabilizer(&self, p: usize, i: usize) -> &WordSubgroup {
        &self.stabilizers[p][i]
    }

    pub fn boundary(&self, p: usize) -> Option<&GroupRingMatrix> {
        if p == 0 {
            None
        } else {
            self.boundaries.get(p - 1)
        }
    }

    /// `Σ_p (−1)^p Σ_i 1/|S_i|`
    pub fn orbifold_euler(&self) -> Rational {
        orbifold_sum(self.stabilizers.iter().map(|d| d.iter().map(WordSubgroup::order).collect()))
    }

    /// Pushes stabilizers and boundaries into a finite quotient.
    pub fn push(&self, map: &QuotientMap) -> Result<FiniteCwComplex> {
        let q = map.target();
        let mut stabs = Vec::new();
        for (p, dim) in self.stabilizers.iter().enumerate() {
            let mut row = Vec::new();
            for (i, s) in dim.iter().enumerate() {
                let images: Vec<usize> = s.words().iter().map(|w| map.evaluate(w)).collect();
                let sub = FiniteSubgroup::generated(q, &images);
                if sub.order() != s.order() {
                    return Err(Error::NotFree(format!("stabilizer of {} meets the kernel", self.cells[p][i].label)));
                }
                row.push(sub);
            }
            stabs.push(row);
        }
        let labels = self.cells.iter().map(|d| d.iter().map(|c| c.label.clone()).collect()).collect();
        let boundaries = self.boundaries.iter().map(|b| map.push_matrix(b)).collect();
        FiniteCwComplex::new(q, labels, stabs, boundaries)
    }
}

fn free_cell(label: &str) -> OrbitCell {
    OrbitCell { label: label.into(), stabilizer: Vec::new() }
}

fn b_vec(b: GroupRingMatrix) -> Vec<GroupRingMatrix> {
    vec![b]
}

fn orbifold_sum(orders: impl Iterator<Item = Vec<usize>>) -> Rational {
    let mut acc = Rational::zero();
    for (p, dim) in orders.enumerate() {
        let s: Rational = dim.iter().map(|&o| Rational::new(1.into(), (o as i64).into())).fold(Rational::zero(), |a, b| a + b);
        if p % 2 == 0 {
            acc += s;
        } else {
            acc -= s;
        }
    }
    acc
}

/// Complex of permutation modules `⊕ ℚ[S_i\Q]` over a finite group.
#[derive(Clone, Debug)]
pub struct FiniteCwComplex {
    group: Arc<FiniteGroup>,
    labels: Vec<Vec<String>>,
    stabilizers: Vec<Vec<FiniteSubgroup>>,
    boundaries: Vec<GroupAlgebraMatrix>,
}

impl FiniteCwComplex {
    pub fn new(
        group: &Arc<FiniteGroup>,
        labels: Vec<Vec<String>>,
        stabilizers: Vec<Vec<FiniteSubgroup>>,
        boundaries: Vec<GroupAlgebraMatrix>,
    ) -> Result<Self> {
        if labels.len() != stabilizers.len() || boundaries.len() + 1 != stabilizers.len() {
            return Err(Error::ConfigInvalid("inconsistent finite complex dimensions".into()));
        }
        for (k, b) in boundaries.iter().enumerate() {
            if b.rows() != stabilizers[k].len() || b.cols() != stabilizers[k + 1].len() {
                return Err(Error::ConfigInvalid(format!("boundary {} has the wrong shape", k + 1)));
            }
        }
        Ok(FiniteCwComplex { group: group.clone(), labels, stabilizers, boundaries })
    }

    /// Free complex with the given boundaries.
    pub fn free(group: &Arc<FiniteGroup>, cell_counts: &[usize], boundaries: Vec<GroupAlgebraMatrix>) -> Result<Self> {
        let labels = cell_counts.iter().enumerate().map(|(p, &n)| (0..n).map(|i| format!("c{p}_{i}")).collect()).collect();
        let stabs = cell_counts.iter().map(|&n| vec![FiniteSubgroup::trivial(group); n]).collect();
        FiniteCwComplex::new(group, labels, stabs, boundaries)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn stabilizers(&self, p: usize) -> &[FiniteSubgroup] {
        &self.stabilizers[p]
    }

    pub fn orbifold_euler(&self) -> Rational {
        orbifold_sum(self.stabilizers.iter().map(|d| d.iter().map(FiniteSubgroup::order).collect()))
    }

    pub fn projective_chain(&self) -> Result<ProjectiveChain> {
        let stabs = self.stabilizers.iter().map(|d| d.iter().map(|s| s.members().to_vec()).collect()).collect();
        ProjectiveChain::new(&self.group, stabs, self.boundaries.clone())
    }

    /// Cells `S_i\Q/K` labeled by minimal double-coset representatives, with
    /// `H` acting by right translation through `h_images`.
    pub fn quotient_by(&self, fiber: &FiniteSubgroup, h_group: &Arc<FiniteGroup>, h_images: &[usize]) -> Result<QuotientComplex> {
        let q = &self.group;
        let nq = q.order();
        for (k, &x) in h_images.iter().enumerate() {
            if !fiber.normalized_by(x) {
                return Err(Error::HNotNormalizing(format!("element {} of H", h_group.label(k))));
            }
        }
        let kmem = fiber.members();
        // which[p][i][x] = cell index of S_i x K
        let mut which: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut reps: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut cell_labels = Vec::new();
        for (p, dim) in self.stabilizers.iter().enumerate() {
            let mut wp = Vec::new();
            let mut rp = Vec::new();
            let mut lp = Vec::new();
            for (i, s) in dim.iter().enumerate() {
                let mut w = vec![usize::MAX; nq];
                for x in 0..nq {
                    if w[x] != usize::MAX {
                        continue;
                    }
                    let idx = rp.len();
                    let mut count = 0;
                    for &sm in s.members() {
                        let sx = q.mul(sm, x);
                        for &km in kmem {
                            let y = q.mul(sx, km);
                            if w[y] == usize::MAX {
                                w[y] = idx;
                                count += 1;
                            }
                        }
                    }
                    if count < s.order() * kmem.len() {
                        return Err(Error::NotFree(format!("{} has a stabilizer meeting the fiber", self.labels[p][i])));
                    }
                    rp.push((i, x));
                    lp.push(format!("{}[{}]", self.labels[p][i], q.label(x)));
                }
                wp.push(w);
            }
            which.push(wp);
            reps.push(rp);
            cell_labels.push(lp);
        }
        let mut boundaries = Vec::new();
        for (k, b) in self.boundaries.iter().enumerate() {
            let p = k + 1;
            let cols = reps[p]
                .iter()
                .map(|&(j, x)| {
                    let mut pairs = Vec::new();
                    for i in 0..b.rows() {
                        for (g, c) in b.get(i, j) {
                            pairs.push((which[p - 1][i][q.mul(*g, x)], Q::from_rational(c)));
                        }
                    }
                    sparse_from_pairs(pairs)
                })
                .collect();
            boundaries.push(SparseMatrix { rows: reps[p - 1].len(), cols });
        }
        let actions = reps
            .iter()
            .zip(&which)
            .map(|(rp, wp)| {
                h_images
                    .iter()
                    .map(|&hb| {
                        let perm = rp.iter().map(|&(i, x)| wp[i][q.mul(x, hb)]).collect();
                        SignedPerm { perm, sign: vec![1; rp.len()] }
                    })
                    .collect()
            })
            .collect();
        let qc = QuotientComplex {
            cell_labels,
            boundaries,
            h_group: h_group.clone(),
            actions,
            index: nq / fiber.order(),
            reductions: OnceLock::new(),
        };
        qc.validate()?;
        Ok(qc)
    }
}

/// Quotient of an equivariant complex by `Γ = π⁻¹(K)`, with `H` given by
/// words normalizing `Γ`.
pub fn quotient_complex(cw: &EquivariantCWData, gamma: &FiniteIndexSubgroup, h: &WordSubgroup) -> Result<QuotientComplex> {
    let fc = cw.push(&gamma.via)?;
    let images: Vec<usize> = h.words().iter().map(|w| gamma.via.evaluate(w)).collect();
    fc.quotient_by(&gamma.fiber, h.group(), &images)
}

/// Finite complex of `ℚ`-vector spaces with exact boundaries and a
/// signed-permutation action of a finite group `H`.
#[derive(Debug)]
pub struct QuotientComplex {
    cell_labels: Vec<Vec<String>>,
    boundaries: Vec<SparseMatrix>,
    h_group: Arc<FiniteGroup>,
    /// `actions[p][h]`
    actions: Vec<Vec<SignedPerm>>,
    index: usize,
    reductions: OnceLock<Vec<Reduction>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyReport {
    pub betti: Vec<usize>,
    /// `traces[p][h]` for every element `h` of `H`, as exact fractions
    #[serde(serialize_with = "ser_rational_table")]
    pub traces: Vec<Vec<Rational>>,
    /// `multiplicities[p][χ]` in the order of the character table
    pub multiplicities: Vec<Vec<u64>>,
}

fn ser_rational_table<S: serde::Serializer>(t: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(t.len()))?;
    for row in t {
        seq.serialize_element(&row.iter().map(|r| r.to_string()).collect::<Vec<_>>())?;
    }
    seq.end()
}

impl QuotientComplex {
    /// Builds a complex from explicit data and validates it.
    pub fn from_parts(
        cell_labels: Vec<Vec<String>>,
        boundaries: Vec<SparseMatrix>,
        h_group: Arc<FiniteGroup>,
        actions: Vec<Vec<SignedPerm>>,
        index: usize,
    ) -> Result<Self> {
        let qc = QuotientComplex { cell_labels, boundaries, h_group, actions, index, reductions: OnceLock::new() };
        qc.validate()?;
        Ok(qc)
    }

    fn validate(&self) -> Result<()> {
        for (k, b) in self.boundaries.iter().enumerate() {
            let p = k + 1;
            if b.rows != self.cell_count(p - 1) || b.ncols() != self.cell_count(p) {
                return Err(Error::NotAComplex(p));
            }
            if let Some(next) = self.boundaries.get(p) {
                if !b.compose(next).is_zero() {
                    return Err(Error::NotAComplex(p));
                }
            }
        }
        for (p, acts) in self.actions.iter().enumerate() {
            if acts.len() != self.h_group.order() {
                return Err(Error::NotAnAction("one action matrix per element of H is required".into()));
            }
            for a in acts {
                if a.len() != self.cell_count(p) || !a.is_valid() {
                    return Err(Error::NotAnAction(format!("H-action on {p}-cells is not a signed permutation")));
                }
            }
        }
        for &g in self.h_group.generators() {
            for (k, b) in self.boundaries.iter().enumerate() {
                let p = k + 1;
                let (lo, hi) = (&self.actions[p - 1][g], &self.actions[p][g]);
                for c in 0..b.ncols() {
                    let lhs = lo.apply(&b.cols[c]);
                    let col = &b.cols[hi.perm[c]];
                    let rhs: SparseVec = if hi.sign[c] < 0 { col.iter().map(|(i, v)| (*i, -v)).collect() } else { col.clone() };
                    if lhs != rhs {
                        return Err(Error::NotAnAction(format!("H-action does not commute with boundary {p}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.cell_labels.len() - 1
    }

    pub fn cell_count(&self, p: usize) -> usize {
        self.cell_labels.get(p).map_or(0, Vec::len)
    }

    pub fn cell_labels(&self, p: usize) -> &[String] {
        self.cell_labels.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn boundary(&self, p: usize) -> Option<&SparseMatrix> {
        if p == 0 {
            None
        } else {
            self.boundaries.get(p - 1)
        }
    }

    pub fn h_group(&self) -> &Arc<FiniteGroup> {
        &self.h_group
    }

    pub fn action(&self, p: usize, h: usize) -> &SignedPerm {
        &self.actions[p][h]
    }

    /// Action matrices of the generators of `H` on `p`-cells.
    pub fn generator_actions(&self, p: usize) -> Vec<&SignedPerm> {
        self.h_group.generators().iter().map(|&g| &self.actions[p][g]).collect()
    }

    /// `[G:Γ]`
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.cell_labels.len()).map(|p| if p % 2 == 0 { 1 } else { -1 } * self.cell_count(p) as i64).sum()
    }

    fn reductions(&self) -> &[Reduction] {
        self.reductions.get_or_init(|| self.boundaries.iter().map(|b| column_reduce(b, true)).collect())
    }

    fn rank(&self, p: usize) -> usize {
        if p == 0 || p > self.boundaries.len() {
            0
        } else {
            self.reductions()[p - 1].rank
        }
    }

    /// `b_p = dim C_p − rank ∂_p − rank ∂_{p+1}`
    pub fn homology(&self) -> Vec<usize> {
        (0..self.cell_labels.len()).map(|p| self.cell_count(p) - self.rank(p) - self.rank(p + 1)).collect()
    }

    fn cycle_trace(&self, h: usize, p: usize) -> Rational {
        let a = &self.actions[p][h];
        if p == 0 || p > self.boundaries.len() {
            return Rational::from_integer(a.trace().into());
        }
        // coordinates of a cycle in the kernel basis are its entries at the zero columns
        let red = &self.reductions()[p - 1];
        let mut pre = vec![0usize; a.len()];
        for (x, &y) in a.perm.iter().enumerate() {
            pre[y] = x;
        }
        let mut t = Q::ZERO;
        for (v, &c) in red.kernel.iter().zip(&red.zero_cols) {
            let x = pre[c];
            if let Some(val) = sparse_get(v, x) {
                t = if a.sign[x] < 0 { &t - val } else { &t + val };
            }
        }
        t.to_rational()
    }

    /// `Tr(h | H_p) = Tr(h | Z_p) − Tr(h | C_{p+1}) + Tr(h | Z_{p+1})`, exact.
    pub fn action_trace(&self, h: usize, p: usize) -> Rational {
        let mut t = self.cycle_trace(h, p);
        if p < self.dimension() {
            t -= Rational::from_integer(self.actions[p + 1][h].trace().into());
            t += self.cycle_trace(h, p + 1);
        }
        t
    }

    pub fn traces(&self) -> Vec<Vec<Rational>> {
        (0..self.cell_labels.len()).map(|p| (0..self.h_group.order()).map(|h| self.action_trace(h, p)).collect()).collect()
    }

    /// `m(χ, H_p) = (1/|H|)·Σ_h conj χ(h)·Tr(h | H_p)`, integral within 1e-6.
    pub fn multiplicities(&self, table: &CharacterTable) -> Result<HomologyReport> {
        if table.group().order() != self.h_group.order() {
            return Err(Error::CharacterMismatch("character table is for a different group".into()));
        }
        let traces = self.traces();
        let hn = self.h_group.order() as f64;
        let mut multiplicities = Vec::new();
        for row in &traces {
            let mut mrow = Vec::new();
            for chi in table.irreducibles() {
                let m: Complex64 =
                    row.iter().enumerate().map(|(h, t)| chi.at(h).conj() * t.to_f64().unwrap()).sum::<Complex64>() / hn;
                let r = m.re.round();
                if (m - Complex64::new(r, 0.0)).norm() > INTEGRALITY_TOL || r < 0.0 {
                    return Err(Error::NotIntegral { value: m.re, tol: INTEGRALITY_TOL });
                }
                mrow.push(r as u64);
            }
            multiplicities.push(mrow);
        }
        Ok(HomologyReport { betti: self.homology(), traces, multiplicities })
    }

    /// `Tr(h | H_p)` as the trace of `h` on harmonic `p`-chains, in floating point.
    pub fn hodge_trace(&self, h: usize, p: usize) -> f64 {
        let n = self.cell_count(p);
        if n == 0 {
            return 0.0;
        }
        let dense = |m: &SparseMatrix| {
            let mut d = DMatrix::<f64>::zeros(m.rows, m.ncols());
            for (j, c) in m.cols.iter().enumerate() {
                for (i, v) in c {
                    d[(*i, j)] = v.to_f64();
                }
            }
            d
        };
        let mut lap = DMatrix::<f64>::zeros(n, n);
        if let Some(b) = self.boundary(p) {
            let d = dense(b);
            lap += d.transpose() * &d;
        }
        if let Some(b) = self.boundary(p + 1) {
            let d = dense(b);
            lap += &d * d.transpose();
        }
        let eig = lap.symmetric_eigen();
        let tol = 1e-8 * eig.eigenvalues.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        let a = &self.actions[p][h];
        let mut t = 0.0;
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() > tol {
                continue;
            }
            let u = eig.eigenvectors.column(k);
            t += (0..n).map(|x| u[a.perm[x]] * a.sign[x] as f64 * u[x]).sum::<f64>();
        }
        t
    }

    /// `row,col,value` triples of `∂_p`.
    pub fn boundary_csv(&self, p: usize) -> String {
        let mut out = String::from("row,col,value\n");
        if let Some(b) = self.boundary(p) {
            for (j, c) in b.cols.iter().enumerate() {
                for (i, v) in c {
                    out.push_str(&format!("{i},{j},{}\n", v.to_rational()));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckRow {
    pub p: usize,
    /// `(χ(1)/|H|)·b_p^φ` with `φ` the normalized induced character
    pub phi_route: f64,
    /// `m(χ, H_p|_H)/|G|`
    pub homology_route: f64,
}

/// Compares the φ-Betti route with the homology-multiplicity route for
/// `χ ∈ Irr(H)` on a complex over a finite group.
pub fn finite_group_crosscheck(
    complex: &FiniteCwComplex,
    h: &FiniteSubgroup,
    table: &CharacterTable,
    chi_index: usize,
    seed: u64,
) -> Result<Vec<CrosscheckRow>> {
    let g = complex.group();
    let chi = table.get(chi_index);
    let qc = complex.quotient_by(&FiniteSubgroup::trivial(g), h.group(), h.embedding())?;
    let report = qc.multiplicities(table)?;
    let rho = induced_rep(h, &FiniteRep::irreducible(chi, seed)?)?;
    let chain = complex.projective_chain()?;
    let mut rows = Vec::new();
    for p in 0..=qc.dimension() {
        let b = chain.phi_betti(p, &rho).to_f64();
        let phi_route = chi.degree() as f64 / h.order() as f64 * b;
        let homology_route = report.multiplicities[p][chi_index] as f64 / g.order() as f64;
        if (phi_route - homology_route).abs() > CROSSCHECK_TOL {
            return Err(Error::CrossCheckFailed(format!(
                "degree {p}: φ-Betti route {phi_route} vs homology route {homology_route}"
            )));
        }
        rows.push(CrosscheckRow { p, phi_route, homology_route });
    }
    Ok(rows)
}

/// Whether the family admits one of the built-in complexes.
pub fn builtin_for(group: &BuiltinGroup, name: &str) -> Result<EquivariantCWData> {
    let complex = match (name, group.family()) {
        ("line_Z", Family::FreeAbelian(1)) => EquivariantCWData::line_z(),
        ("line_Dinf", Family::DihedralInfinite) => EquivariantCWData::line_dinf(),
        ("rose_free", Family::Free(r)) => EquivariantCWData::rose_free(*r),
        ("tree_free_by_finite", Family::FreeByFinite(_)) => EquivariantCWData::tree_free_by_finite(group)?,
        _ => return Err(Error::UnsupportedFamily(format!("complex {name} over {}", group.name()))),
    };
    Ok(complex)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character_table::character_table;
    use crate::finite_group::{abelian, cyclic, dihedral, symmetric, GroupHom};
    use crate::quotient::{cyclic_chain, dihedral_chain, free_by_finite_chain, DihedralFiber};
    use crate::rational::{frac, int};

    #[test]
    fn line_z_cycle() {
        let cw = EquivariantCWData::line_z();
        let z = BuiltinGroup::free_abelian(1);
        let chain = cyclic_chain(&z, &[7]).unwrap();
        let h = WordSubgroup::generated(&z, &[], 4).unwrap();
        let qc = quotient_complex(&cw, &chain.levels()[0], &h).unwrap();
        assert_eq!((qc.cell_count(0), qc.cell_count(1)), (7, 7));
        assert_eq!(qc.homology(), vec![1, 1]);
    }

    #[test]
    fn dihedral_circle_traces() {
        let cw = EquivariantCWData::line_dinf();
        let d = cw.group().clone();
        let h = WordSubgroup::generated(&d, &[d.parse_word("s").unwrap()], 4).unwrap();
        let s = h.position(&d, &d.parse_word("s").unwrap()).unwrap();
        let table = character_table(h.group()).unwrap();
        for m in [2usize, 3, 4, 8] {
            let chain = dihedral_chain(&[m], DihedralFiber::Kernel).unwrap();
            let qc = quotient_complex(&cw, &chain.levels()[0], &h).unwrap();
            assert_eq!((qc.cell_count(0), qc.cell_count(1)), (2 * m, 2 * m));
            assert_eq!(qc.homology(), vec![1, 1]);
            assert_eq!(qc.action_trace(s, 0), int(1));
            assert_eq!(qc.action_trace(s, 1), int(-1));
            assert_eq!(qc.action_trace(0, 1), int(1));
            let rep = qc.multiplicities(&table).unwrap();
            assert_eq!(rep.multiplicities, vec![vec![1, 0], vec![0, 1]]);
            assert!((qc.hodge_trace(s, 1) + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reflection_fiber_is_not_free() {
        let cw = EquivariantCWData::line_dinf();
        let d = cw.group().clone();
        let h = WordSubgroup::generated(&d, &[], 4).unwrap();
        let chain = dihedral_chain(&[4], DihedralFiber::Reflection).unwrap();
        assert!(matches!(quotient_complex(&cw, &chain.levels()[0], &h), Err(Error::NotFree(_))));
    }

    #[test]
    fn rose_quotient_betti() {
        let cw = EquivariantCWData::rose_free(2);
        let f = cw.group().clone();
        let z = BuiltinGroup::free_abelian(2);
        let _ = z;
        let q = Arc::new(abelian(&[3, 2]));
        let map = QuotientMap::new(f.clone(), q.clone(), q.generators().to_vec()).unwrap();
        let gamma = FiniteIndexSubgroup::kernel(map);
        let h = WordSubgroup::generated(&f, &[], 4).unwrap();
        let qc = quotient_complex(&cw, &gamma, &h).unwrap();
        assert_eq!(qc.homology(), vec![1, 7]);
        assert_eq!(qc.euler_characteristic(), -6);
        assert_eq!(cw.orbifold_euler() * int(6), int(-6));
    }

    #[test]
    fn free_by_finite_tree() {
        let h = Arc::new(cyclic(2));
        let f = BuiltinGroup::free(2);
        let inv = vec![vec![f.parse_word("a'").unwrap(), f.parse_word("b'").unwrap()]];
        let g = BuiltinGroup::free_by_finite(2, h, &inv).unwrap();
        let cw = EquivariantCWData::tree_free_by_finite(&g).unwrap();
        assert_eq!(cw.cells(0).len(), 3);
        assert_eq!(cw.cells(1).len(), 2);
        assert_eq!(cw.orbifold_euler(), frac(-1, 2));
        let hs = WordSubgroup::generated(&g, &[g.generator(2)], 4).unwrap();
        let sigma = hs.position(&g, &g.generator(2)).unwrap();
        let chain = free_by_finite_chain(&g, &[2, 4]).unwrap();
        for (lvl, n) in chain.levels().iter().zip([4usize, 16]) {
            let qc = quotient_complex(&cw, lvl, &hs).unwrap();
            assert_eq!(qc.homology(), vec![1, n + 1]);
            assert_eq!(qc.action_trace(sigma, 1), int(-3));
            assert_eq!(qc.euler_characteristic(), -(n as i64));
            assert!((qc.hodge_trace(sigma, 1) + 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn swap_action_tree() {
        let h = Arc::new(cyclic(2));
        let f = BuiltinGroup::free(2);
        let swap = vec![vec![f.parse_word("b").unwrap(), f.parse_word("a").unwrap()]];
        let g = BuiltinGroup::free_by_finite(2, h, &swap).unwrap();
        let cw = EquivariantCWData::tree_free_by_finite(&g).unwrap();
        assert_eq!((cw.cells(0).len(), cw.cells(1).len()), (1, 1));
        assert_eq!(cw.orbifold_euler(), frac(-1, 2));
    }

    #[test]
    fn json_round_trip() {
        let cw = EquivariantCWData::line_dinf();
        let back = EquivariantCWData::from_json(cw.group(), &cw.to_json()).unwrap();
        assert_eq!(back.to_json(), cw.to_json());
        let bad = json!({"cells": [[{"label": "v", "stabilizer": ["s"]}], [{"label": "e", "stabilizer": ["s"]}]], "boundaries": [[["t"]]]});
        assert!(EquivariantCWData::from_json(cw.group(), &bad).is_err());
    }

    fn cayley_graph(g: &Arc<FiniteGroup>) -> FiniteCwComplex {
        let gens = g.generators().to_vec();
        let mut b = GroupAlgebraMatrix::zeros(g, 1, gens.len());
        for (k, &s) in gens.iter().enumerate() {
            b.add_term(0, k, s, int(1));
            b.add_term(0, k, 0, int(-1));
        }
        FiniteCwComplex::free(g, &[1, gens.len()], vec![b]).unwrap()
    }

    #[test]
    fn crosscheck_cyclic_four_cycle() {
        let g = Arc::new(cyclic(4));
        let cx = cayley_graph(&g);
        let r = g.generators()[0];
        let h = FiniteSubgroup::generated(&g, &[g.mul(r, r)]);
        let t = character_table(h.group()).unwrap();
        for k in 0..t.len() {
            finite_group_crosscheck(&cx, &h, &t, k, 1).unwrap();
        }
    }

    #[test]
    fn crosscheck_s3_cayley_graph() {
        let g = Arc::new(symmetric(3));
        let cx = cayley_graph(&g);
        let tr = (0..6).find(|&x| g.element_order(x) == 2).unwrap();
        let h = FiniteSubgroup::generated(&g, &[tr]);
        let t = character_table(h.group()).unwrap();
        for k in 0..t.len() {
            finite_group_crosscheck(&cx, &h, &t, k, 1).unwrap();
        }
        let whole = FiniteSubgroup::whole(&g);
        let tw = character_table(whole.group()).unwrap();
        for k in 0..tw.len() {
            finite_group_crosscheck(&cx, &whole, &tw, k, 1).unwrap();
        }
    }

    #[test]
    fn crosscheck_nonfree_dihedral() {
        let g = Arc::new(dihedral(4));
        let s = g.generators()[1];
        let r = g.generators()[0];
        let stab = FiniteSubgroup::generated(&g, &[s]);
        let mut b = GroupAlgebraMatrix::zeros(&g, 1, 1);
        b.add_term(0, 0, r, int(1));
        b.add_term(0, 0, 0, int(-1));
        let cx = FiniteCwComplex::new(
            &g,
            vec![vec!["v".into()], vec!["e".into()]],
            vec![vec![stab], vec![FiniteSubgroup::trivial(&g)]],
            vec![b],
        )
        .unwrap();
        let h = FiniteSubgroup::generated(&g, &[r]);
        let t = character_table(h.group()).unwrap();
        for k in 0..t.len() {
            finite_group_crosscheck(&cx, &h, &t, k, 2).unwrap();
        }
        let _ = GroupHom::new;
    }
}
