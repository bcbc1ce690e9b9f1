//! Finite representations, spectral measures of group-algebra matrices,
//! φ-rank and φ-nullity, Fuglede–Kadison determinants and the Lück bound.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::character_table::{induce_ordinary, OrdinaryCharacter};
use crate::error::{Error, Result};
use crate::finite_group::{FiniteGroup, FiniteSubgroup};
use crate::group_ring::{finite_mul, idempotent, FiniteElement, GroupAlgebraMatrix, GroupRingMatrix};
use crate::linalg::{charpoly_integer, column_reduce, sparse_from_pairs, SparseMatrix, Q};
use crate::quotient::QuotientMap;
use crate::rational::Rational;
use crate::words::{BuiltinGroup, Family, Word};

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const CLUSTER_TOL: f64 = 1e-7;
pub const UNITARY_TOL: f64 = 1e-9;
pub const CHARACTER_TOL: f64 = 1e-8;
pub const SVD_REL_TOL: f64 = 1e-8;

/// `M e_i = scale[i]·e_{perm[i]}`
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub scale: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(n: usize) -> Monomial {
        Monomial { perm: (0..n).collect(), scale: vec![Complex64::new(1.0, 0.0); n] }
    }

    pub fn permutation(perm: Vec<usize>) -> Monomial {
        let n = perm.len();
        Monomial { perm, scale: vec![Complex64::new(1.0, 0.0); n] }
    }

    /// `self · other`
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let scale = other.perm.iter().zip(&other.scale).map(|(&j, s)| s * self.scale[j]).collect();
        Monomial { perm, scale }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.perm.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(self.perm[i], i)] = self.scale[i];
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.perm.len()).filter(|&i| self.perm[i] == i).map(|i| self.scale[i]).sum()
    }

    fn is_signed(&self) -> bool {
        self.scale.iter().all(|s| s.im == 0.0 && s.re.abs() == 1.0)
    }

    fn approx_eq(&self, other: &Monomial, tol: f64) -> bool {
        self.perm == other.perm && self.scale.iter().zip(&other.scale).all(|(a, b)| (a - b).norm() <= tol)
    }
}

#[derive(Clone, Debug)]
pub enum RepMatrix {
    Monomial(Monomial),
    Dense(DMatrix<Complex64>),
}

impl RepMatrix {
    fn mul(&self, other: &RepMatrix) -> RepMatrix {
        match (self, other) {
            (RepMatrix::Monomial(a), RepMatrix::Monomial(b)) => RepMatrix::Monomial(a.compose(b)),
            _ => RepMatrix::Dense(self.to_dense() * other.to_dense()),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            RepMatrix::Monomial(m) => m.to_dense(),
            RepMatrix::Dense(d) => d.clone(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        match self {
            RepMatrix::Monomial(m) => m.trace(),
            RepMatrix::Dense(d) => d.trace(),
        }
    }

    fn approx_eq(&self, other: &RepMatrix, tol: f64) -> bool {
        match (self, other) {
            (RepMatrix::Monomial(a), RepMatrix::Monomial(b)) => a.approx_eq(b, tol),
            _ => (self.to_dense() - other.to_dense()).camax() <= tol,
        }
    }

    fn unitarity_defect(&self) -> f64 {
        match self {
            RepMatrix::Monomial(m) => m.scale.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max),
            RepMatrix::Dense(d) => (d * d.adjoint() - DMatrix::identity(d.nrows(), d.ncols())).camax(),
        }
    }
}

/// Unitary representation of a finite group, one matrix per element.
#[derive(Clone, Debug)]
pub struct FiniteRep {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<RepMatrix>,
    is_rational: bool,
    arithmetic_degree: u32,
}

impl FiniteRep {
    /// Extends generator images multiplicatively, checking
    /// `ρ(xg) = ρ(x)ρ(g)` for every element `x` and generator `g`.
    pub fn from_generator_images(
        group: &Arc<FiniteGroup>,
        dim: usize,
        images: Vec<RepMatrix>,
        arithmetic_degree: u32,
    ) -> Result<FiniteRep> {
        let gens = group.generators().to_vec();
        assert_eq!(gens.len(), images.len());
        for m in &images {
            if m.unitarity_defect() > UNITARY_TOL {
                return Err(Error::NotAnAction("generator image is not unitary".into()));
            }
        }
        let mut mats: Vec<Option<RepMatrix>> = vec![None; group.order()];
        mats[0] = Some(if images.iter().all(|m| matches!(m, RepMatrix::Monomial(_))) {
            RepMatrix::Monomial(Monomial::identity(dim))
        } else {
            RepMatrix::Dense(DMatrix::identity(dim, dim))
        });
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (k, &g) in gens.iter().enumerate() {
                let y = group.mul(x, g);
                let prod = mats[x].as_ref().unwrap().mul(&images[k]);
                match &mats[y] {
                    Some(existing) => {
                        if !existing.approx_eq(&prod, UNITARY_TOL) {
                            return Err(Error::NotAnAction("generator images violate a relation".into()));
                        }
                    }
                    None => {
                        mats[y] = Some(prod);
                        queue.push_back(y);
                    }
                }
            }
        }
        let matrices: Vec<RepMatrix> = mats
            .into_iter()
            .map(|m| m.ok_or_else(|| Error::NotAnAction("generators do not reach every element".into())))
            .collect::<Result<_>>()?;
        let is_rational = matrices.iter().all(|m| matches!(m, RepMatrix::Monomial(mm) if mm.is_signed()));
        Ok(FiniteRep { group: group.clone(), dim, matrices, is_rational, arithmetic_degree })
    }

    /// Permutation representation `ρ(g)e_x = e_{x·g⁻¹}` of a right action.
    pub fn from_action(group: &Arc<FiniteGroup>, npoints: usize, action: &dyn Fn(usize, usize) -> usize) -> Result<FiniteRep> {
        crate::characters::perm_character(group, npoints, action)?;
        let images = group
            .generators()
            .iter()
            .map(|&g| {
                let gi = group.inv(g);
                RepMatrix::Monomial(Monomial::permutation((0..npoints).map(|x| action(gi, x)).collect()))
            })
            .collect();
        FiniteRep::from_generator_images(group, npoints, images, 1)
    }

    pub fn regular(group: &Arc<FiniteGroup>) -> FiniteRep {
        let g = group.clone();
        FiniteRep::from_action(group, group.order(), &move |h, x| g.mul(x, h)).expect("regular action")
    }

    pub fn trivial(group: &Arc<FiniteGroup>) -> FiniteRep {
        FiniteRep::from_action(group, 1, &|_, x| x).expect("trivial action")
    }

    /// Exact realization of a linear character.
    pub fn linear(chi: &OrdinaryCharacter) -> Result<FiniteRep> {
        if chi.degree() != 1 {
            return Err(Error::CharacterMismatch("character is not linear".into()));
        }
        let g = chi.group();
        let exact = |s: usize| -> Complex64 {
            // snap to the nearest root of unity of order |s|
            let n = g.element_order(s) as f64;
            let k = (chi.at(s).arg() * n / std::f64::consts::TAU).round();
            Complex64::from_polar(1.0, k * std::f64::consts::TAU / n)
        };
        let images = g
            .generators()
            .iter()
            .map(|&s| RepMatrix::Monomial(Monomial { perm: vec![0], scale: vec![exact(s)] }))
            .collect();
        let mut order = 1u32;
        while chi.values().iter().any(|v| (v.powu(order) - Complex64::new(1.0, 0.0)).norm() > 1e-6) {
            order += 1;
        }
        let rep = FiniteRep::from_generator_images(g, 1, images, euler_phi(order))?;
        rep.check_character(chi)?;
        Ok(rep)
    }

    /// Realization of an irreducible character: exact for linear ones, and
    /// otherwise an irreducible summand of the isotypic part of the regular
    /// representation.
    pub fn irreducible(chi: &OrdinaryCharacter, seed: u64) -> Result<FiniteRep> {
        if chi.degree() == 1 {
            return FiniteRep::linear(chi);
        }
        let g = chi.group();
        let n = g.order();
        let d = chi.degree();
        let reg: Vec<DMatrix<Complex64>> = FiniteRep::regular(g).matrices.iter().map(|m| m.to_dense()).collect();
        let mut proj = DMatrix::<Complex64>::zeros(n, n);
        for (x, m) in reg.iter().enumerate() {
            proj += m * (chi.at(x).conj() * (d as f64 / n as f64));
        }
        let exponent = (0..n).map(|x| g.element_order(x) as u32).fold(1, num_integer::lcm);
        for attempt in 0..8u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x1aab_0000 + attempt));
            let r = DMatrix::<Complex64>::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let herm = &proj * (&r + r.adjoint()) * &proj;
            let mut avg = DMatrix::<Complex64>::zeros(n, n);
            for m in &reg {
                avg += m * &herm * m.adjoint();
            }
            avg /= Complex64::new(n as f64, 0.0);
            let eig = avg.symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
            let lead = eig.eigenvalues[order[0]];
            let cluster: Vec<usize> = order.iter().copied().filter(|&i| (eig.eigenvalues[i] - lead).abs() < 1e-6 * lead.abs().max(1.0)).collect();
            if cluster.len() != d || lead.abs() < 1e-6 {
                continue;
            }
            let u = DMatrix::from_fn(n, d, |i, j| eig.eigenvectors[(i, cluster[j])]);
            let images = g.generators().iter().map(|&s| RepMatrix::Dense(u.adjoint() * &reg[s] * &u)).collect();
            let Ok(rep) = FiniteRep::from_generator_images(g, d, images, euler_phi(exponent)) else { continue };
            if rep.check_character(chi).is_ok() {
                return Ok(rep);
            }
        }
        Err(Error::NumericalDegeneracy(format!("no irreducible summand of degree {d} isolated")))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_rational(&self) -> bool {
        self.is_rational
    }

    pub fn arithmetic_degree(&self) -> u32 {
        self.arithmetic_degree
    }

    pub fn matrix(&self, g: usize) -> &RepMatrix {
        &self.matrices[g]
    }

    /// Trace per conjugacy class.
    pub fn character(&self) -> Vec<Complex64> {
        self.group.classes().reps.iter().map(|&r| self.matrices[r].trace()).collect()
    }

    pub fn check_character(&self, chi: &OrdinaryCharacter) -> Result<()> {
        let dev = self.character().iter().zip(chi.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if dev > CHARACTER_TOL {
            return Err(Error::CharacterMismatch(format!("character deviates by {dev:e}")));
        }
        Ok(())
    }

    /// Largest deviation of `ρ(gh)` from `ρ(g)ρ(h)` over all pairs.
    pub fn multiplicativity_defect(&self) -> f64 {
        let n = self.group.order();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let p = self.matrices[a].mul(&self.matrices[b]);
                let diff = (p.to_dense() - self.matrices[self.group.mul(a, b)].to_dense()).camax();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// The same representation with generators routed through `phi`:
    /// `ρ'(x) = ρ(φ(x))` for a homomorphism given on all elements.
    pub fn pullback(&self, source: &Arc<FiniteGroup>, phi: &[usize]) -> Result<FiniteRep> {
        let images = source.generators().iter().map(|&g| self.matrices[phi[g]].clone()).collect();
        FiniteRep::from_generator_images(source, self.dim, images, self.arithmetic_degree)
    }
}

fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count() as u32
}

/// Block-monomial induction from `H ≤ Q`, character-checked against the
/// induction formula.
pub fn induced_rep(h: &FiniteSubgroup, rho: &FiniteRep) -> Result<FiniteRep> {
    let q = h.parent();
    let (reps, which) = h.left_cosets();
    let k = reps.len();
    let d = rho.dim;
    let block = |g: usize| -> RepMatrix {
        // g·t_j = t_i·h
        let mut placement = Vec::with_capacity(k);
        for &t in &reps {
            let y = q.mul(g, t);
            let i = which[y];
            let hh = h.locate(q.mul(q.inv(reps[i]), y)).expect("coset representative");
            placement.push((i, hh));
        }
        match &rho.matrices[0] {
            RepMatrix::Monomial(_) => {
                let mut perm = vec![0; k * d];
                let mut scale = vec![Complex64::zero(); k * d];
                for (j, &(i, hh)) in placement.iter().enumerate() {
                    let RepMatrix::Monomial(m) = &rho.matrices[hh] else { unreachable!() };
                    for a in 0..d {
                        perm[j * d + a] = i * d + m.perm[a];
                        scale[j * d + a] = m.scale[a];
                    }
                }
                RepMatrix::Monomial(Monomial { perm, scale })
            }
            RepMatrix::Dense(_) => {
                let mut m = DMatrix::zeros(k * d, k * d);
                for (j, &(i, hh)) in placement.iter().enumerate() {
                    m.view_mut((i * d, j * d), (d, d)).copy_from(&rho.matrices[hh].to_dense());
                }
                RepMatrix::Dense(m)
            }
        }
    };
    let images = q.generators().iter().map(|&g| block(g)).collect();
    let rep = FiniteRep::from_generator_images(q, k * d, images, rho.arithmetic_degree)?;
    let chi_h = OrdinaryCharacter::new(h.group().clone(), rho.character());
    rep.check_character(&induce_ordinary(h, &chi_h))?;
    Ok(rep)
}

/// Representation of a built-in group on a finite-dimensional space.
#[derive(Clone, Debug)]
pub enum WordRep {
    /// `ρ(letter k) e_x = e_{perms[k][x]}`, for free groups.
    Permutation { group: BuiltinGroup, perms: Vec<Vec<usize>> },
    /// `ρ ∘ π` for a finite quotient `π`.
    Pullback { map: QuotientMap, rep: FiniteRep },
}

impl WordRep {
    pub fn permutation(group: &BuiltinGroup, perms: Vec<Vec<usize>>) -> Result<WordRep> {
        if !matches!(group.family(), Family::Free(_)) {
            return Err(Error::UnsupportedFamily("arbitrary permutation images need a free group".into()));
        }
        if perms.len() != group.generator_count() || perms.is_empty() {
            return Err(Error::ConfigInvalid("one permutation per generator is required".into()));
        }
        let n = perms[0].len();
        for p in &perms {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::NotAnAction("generator image is not a permutation".into()));
            }
        }
        Ok(WordRep::Permutation { group: group.clone(), perms })
    }

    pub fn random_permutation(group: &BuiltinGroup, degree: usize, rng: &mut impl Rng) -> Result<WordRep> {
        let perms = (0..group.generator_count())
            .map(|_| {
                let mut p: Vec<usize> = (0..degree).collect();
                for i in (1..degree).rev() {
                    p.swap(i, rng.random_range(0..=i));
                }
                p
            })
            .collect();
        WordRep::permutation(group, perms)
    }

    pub fn dim(&self) -> usize {
        match self {
            WordRep::Permutation { perms, .. } => perms[0].len(),
            WordRep::Pullback { rep, .. } => rep.dim,
        }
    }

    pub fn is_rational(&self) -> bool {
        match self {
            WordRep::Permutation { .. } => true,
            WordRep::Pullback { rep, .. } => rep.is_rational,
        }
    }

    pub fn arithmetic_degree(&self) -> u32 {
        match self {
            WordRep::Permutation { .. } => 1,
            WordRep::Pullback { rep, .. } => rep.arithmetic_degree,
        }
    }

    pub fn matrix(&self, w: &Word) -> RepMatrix {
        match self {
            WordRep::Permutation { perms, .. } => {
                let n = perms[0].len();
                let inverses: Vec<Vec<usize>> = perms
                    .iter()
                    .map(|p| {
                        let mut inv = vec![0; n];
                        for (x, &y) in p.iter().enumerate() {
                            inv[y] = x;
                        }
                        inv
                    })
                    .collect();
                let image = (0..n)
                    .map(|x| {
                        w.letters().iter().rev().fold(x, |pt, &(k, e)| {
                            let table = if e > 0 { &perms[k as usize] } else { &inverses[k as usize] };
                            (0..e.unsigned_abs()).fold(pt, |q, _| table[q])
                        })
                    })
                    .collect();
                RepMatrix::Monomial(Monomial::permutation(image))
            }
            WordRep::Pullback { map, rep } => rep.matrices[map.evaluate(w)].clone(),
        }
    }
}

/// Operator of a matrix over a group ring acting blockwise on `V^n`.
#[derive(Clone, Debug)]
pub enum OperatorMatrix {
    Exact(SparseMatrix),
    Dense(DMatrix<Complex64>),
}

impl OperatorMatrix {
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            OperatorMatrix::Exact(s) => {
                let mut m = DMatrix::zeros(s.rows, s.ncols());
                for (j, c) in s.cols.iter().enumerate() {
                    for (i, v) in c {
                        m[(*i, j)] = Complex64::new(v.to_f64(), 0.0);
                    }
                }
                m
            }
            OperatorMatrix::Dense(d) => d.clone(),
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            OperatorMatrix::Exact(s) => s.rows,
            OperatorMatrix::Dense(d) => d.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            OperatorMatrix::Exact(s) => s.ncols(),
            OperatorMatrix::Dense(d) => d.ncols(),
        }
    }

    fn integer_rows(&self) -> Option<Vec<Vec<i64>>> {
        let OperatorMatrix::Exact(s) = self else { return None };
        let mut m = vec![vec![0i64; s.ncols()]; s.rows];
        for (j, c) in s.cols.iter().enumerate() {
            for (i, v) in c {
                let r = v.to_rational();
                if !r.is_integer() {
                    return None;
                }
                m[*i][j] = r.to_integer().to_i64()?;
            }
        }
        Some(m)
    }
}

fn assemble(rows: usize, cols: usize, dim: usize, exact: bool, terms: impl Iterator<Item = (usize, usize, Rational, RepMatrix)>) -> OperatorMatrix {
    if exact {
        let mut pairs: Vec<Vec<(usize, Q)>> = vec![Vec::new(); cols * dim];
        for (i, j, c, m) in terms {
            let RepMatrix::Monomial(m) = m else { unreachable!() };
            let qc = Q::from_rational(&c);
            for a in 0..dim {
                let v = if m.scale[a].re < 0.0 { -&qc } else { qc.clone() };
                pairs[j * dim + a].push((i * dim + m.perm[a], v));
            }
        }
        OperatorMatrix::Exact(SparseMatrix { rows: rows * dim, cols: pairs.into_iter().map(sparse_from_pairs).collect() })
    } else {
        let mut out = DMatrix::<Complex64>::zeros(rows * dim, cols * dim);
        for (i, j, c, m) in terms {
            let cf = c.to_f64().unwrap();
            match m {
                RepMatrix::Monomial(m) => {
                    for a in 0..dim {
                        out[(i * dim + m.perm[a], j * dim + a)] += m.scale[a] * cf;
                    }
                }
                RepMatrix::Dense(d) => {
                    let mut v = out.view_mut((i * dim, j * dim), (dim, dim));
                    v += d * Complex64::new(cf, 0.0);
                }
            }
        }
        OperatorMatrix::Dense(out)
    }
}

/// Block `(i,j)` is `Σ c·ρ(g)` over the terms of `A_ij`.
pub fn operator_matrix(a: &GroupAlgebraMatrix, rho: &FiniteRep) -> OperatorMatrix {
    let terms = (0..a.rows()).flat_map(|i| {
        (0..a.cols()).flat_map(move |j| a.get(i, j).iter().map(move |(g, c)| (i, j, c.clone(), rho.matrices[*g].clone())))
    });
    assemble(a.rows(), a.cols(), rho.dim, rho.is_rational, terms)
}

pub fn operator_matrix_word(a: &GroupRingMatrix, rho: &WordRep) -> OperatorMatrix {
    let terms = (0..a.rows())
        .flat_map(|i| (0..a.cols()).flat_map(move |j| a.get(i, j).terms().map(move |(w, c)| (i, j, c.clone(), rho.matrix(w)))));
    assemble(a.rows(), a.cols(), rho.dim(), rho.is_rational(), terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub multiplicity: usize,
}

/// `(1/dim V)·Σ δ_λ` over the eigenvalues of the operator, as sorted atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    pub normalizer: usize,
    pub matrix_size: usize,
}

impl SpectralMeasure {
    pub fn total_multiplicity(&self) -> usize {
        self.atoms.iter().map(|a| a.multiplicity).sum()
    }

    /// `∫ t^k dμ`
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|a| a.value.powi(k as i32) * a.multiplicity as f64).sum::<f64>() / self.normalizer as f64
    }

    /// Mass of the zero atom.
    pub fn kernel_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.value.abs() <= CLUSTER_TOL).map(|a| a.multiplicity).sum::<usize>() as f64
            / self.normalizer as f64
    }

    /// Same atoms up to the clustering tolerance.
    pub fn approx_eq(&self, other: &SpectralMeasure) -> bool {
        self.normalizer == other.normalizer
            && self.matrix_size == other.matrix_size
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| a.multiplicity == b.multiplicity && (a.value - b.value).abs() <= 10.0 * CLUSTER_TOL)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn hermitian_eigenvalues(op: &OperatorMatrix) -> Result<Vec<f64>> {
    let m = op.to_dense();
    if m.nrows() != m.ncols() {
        return Err(Error::NotHermitian(f64::INFINITY));
    }
    let defect = if m.is_empty() { 0.0 } else { (&m - m.adjoint()).camax() };
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut vals: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn cluster(vals: &[f64], normalizer: usize, matrix_size: usize) -> SpectralMeasure {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > CLUSTER_TOL {
            let group = &vals[start..i];
            let mut value = group.iter().sum::<f64>() / group.len() as f64;
            if value.abs() <= CLUSTER_TOL {
                value = 0.0;
            }
            atoms.push(Atom { value, multiplicity: group.len() });
            start = i;
        }
    }
    SpectralMeasure { atoms, normalizer, matrix_size }
}

fn measure_of(op: &OperatorMatrix, n: usize, dim: usize) -> Result<SpectralMeasure> {
    Ok(cluster(&hermitian_eigenvalues(op)?, dim, n))
}

pub fn spectral_measure(a: &GroupAlgebraMatrix, rho: &FiniteRep) -> Result<SpectralMeasure> {
    measure_of(&operator_matrix(a, rho), a.rows(), rho.dim)
}

pub fn spectral_measure_word(a: &GroupRingMatrix, rho: &WordRep) -> Result<SpectralMeasure> {
    measure_of(&operator_matrix_word(a, rho), a.rows(), rho.dim())
}

/// Von Neumann dimension, exact on the rational path.
#[derive(Clone, Debug, PartialEq)]
pub enum VnDim {
    Exact(Rational),
    Approx(f64),
}

impl std::fmt::Display for VnDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VnDim::Exact(r) => write!(f, "{r}"),
            VnDim::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl VnDim {
    pub fn to_f64(&self) -> f64 {
        match self {
            VnDim::Exact(r) => r.to_f64().unwrap(),
            VnDim::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            VnDim::Exact(r) => Some(r),
            VnDim::Approx(_) => None,
        }
    }
}

/// Rank of the operator; exact elimination on the rational path, singular
/// values above `1e-8·norm_bound` otherwise.
fn operator_rank(op: &OperatorMatrix, norm_bound: f64) -> (usize, bool) {
    match op {
        OperatorMatrix::Exact(s) => (column_reduce(s, false).rank, true),
        OperatorMatrix::Dense(d) => {
            if d.is_empty() {
                return (0, false);
            }
            let thr = SVD_REL_TOL * norm_bound.max(1.0);
            (d.singular_values().iter().filter(|&&s| s > thr).count(), false)
        }
    }
}

fn dim_value(count: usize, dim: usize, exact: bool) -> VnDim {
    if exact {
        VnDim::Exact(Rational::new((count as i64).into(), (dim as i64).into()))
    } else {
        VnDim::Approx(count as f64 / dim as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankNullity {
    pub rank: VnDim,
    pub nullity: VnDim,
}

fn rank_nullity_of(op: &OperatorMatrix, cols: usize, dim: usize, norm_bound: f64) -> RankNullity {
    let (r, exact) = operator_rank(op, norm_bound);
    RankNullity { rank: dim_value(r, dim, exact), nullity: dim_value(cols * dim - r, dim, exact) }
}

/// φ-rank and φ-nullity normalized by `dim V`.
pub fn rank_nullity(a: &GroupAlgebraMatrix, rho: &FiniteRep) -> RankNullity {
    rank_nullity_of(&operator_matrix(a, rho), a.cols(), rho.dim, a.sup_norm_bound().to_f64().unwrap())
}

pub fn rank_nullity_word(a: &GroupRingMatrix, rho: &WordRep) -> RankNullity {
    rank_nullity_of(&operator_matrix_word(a, rho), a.cols(), rho.dim(), a.sup_norm_bound().to_f64().unwrap())
}

/// `(Π λ^mult)^{1/normalizer}` over nonzero atoms; 1 when there are none.
pub fn fk_det(mu: &SpectralMeasure) -> f64 {
    let log: f64 =
        mu.atoms.iter().filter(|a| a.value.abs() > CLUSTER_TOL).map(|a| a.value.abs().ln() * a.multiplicity as f64).sum();
    (log / mu.normalizer as f64).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub k: u32,
    pub moment: f64,
    pub trace: f64,
    pub tolerance: f64,
}

/// Normalized trace `(1/dim V)·tr ρ(B)` computed from the diagonal terms.
pub fn normalized_trace(b: &GroupAlgebraMatrix, rho: &FiniteRep) -> f64 {
    let mut t = Complex64::zero();
    for i in 0..b.rows().min(b.cols()) {
        for (g, c) in b.get(i, i) {
            t += rho.matrices[*g].trace() * c.to_f64().unwrap();
        }
    }
    t.re / rho.dim as f64
}

/// `|∫ t^k dμ − (1/dim V)·tr ρ(A^k)| ≤ 1e-6·c_A^k` for `k ≤ kmax`.
pub fn moments_check(a: &GroupAlgebraMatrix, rho: &FiniteRep, kmax: u32) -> Result<Vec<MomentRow>> {
    let mu = spectral_measure(a, rho)?;
    let c = a.sup_norm_bound().to_f64().unwrap();
    let mut power = GroupAlgebraMatrix::identity(a.group(), a.rows());
    let mut rows = Vec::new();
    for k in 0..=kmax {
        if k > 0 {
            power = power.mul(a);
        }
        let moment = mu.moment(k);
        let trace = normalized_trace(&power, rho);
        let tolerance = if c == 0.0 && k > 0 { 1e-12 } else { 1e-6 * c.powi(k as i32) };
        if (moment - trace).abs() > tolerance {
            return Err(Error::MomentMismatch(k as usize));
        }
        rows.push(MomentRow { k, moment, trace, tolerance });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LuckReport {
    pub det: f64,
    pub bound: f64,
    pub degree: u32,
    /// Lowest nonzero coefficient of the characteristic polynomial, in absolute value.
    pub lowest_coefficient: Option<String>,
    /// `|log det^{dim V} − log |c||`
    pub log_deviation: Option<f64>,
    pub pass: bool,
}

/// Upper bound on the product of the nonzero eigenvalues of a positive
/// semidefinite integer matrix of size `n` with trace `t`.
fn eigenproduct_bound(n: usize, trace: i64) -> BigInt {
    let t = trace.max(0) as f64;
    let log2 = if t >= std::f64::consts::E * n as f64 {
        n as f64 * (t / n as f64).log2()
    } else {
        t / std::f64::consts::E * std::f64::consts::LOG2_E
    };
    BigInt::one() << (log2.ceil().max(0.0) as usize + 2)
}

fn luck_check_operator(op: &OperatorMatrix, n: usize, dim: usize, c: f64, degree: u32) -> Result<LuckReport> {
    let vals = hermitian_eigenvalues(op)?;
    if vals.first().is_some_and(|&v| v < -CLUSTER_TOL) {
        return Err(Error::NotHermitian(-vals[0]));
    }
    let bound = if degree <= 1 { 1.0 } else { c.powf(-((degree - 1) as f64) * n as f64) };
    let mut report = LuckReport { det: 0.0, bound, degree, lowest_coefficient: None, log_deviation: None, pass: false };
    let size = vals.len();
    let kernel = match (degree, op.integer_rows()) {
        (1, Some(m)) => {
            let trace: i64 = (0..size).map(|i| m[i][i]).sum();
            let cp = charpoly_integer(&m, &eigenproduct_bound(size, trace));
            let k = cp.iter().position(|x| !x.is_zero()).unwrap_or(size);
            let coeff = cp[k].abs();
            report.lowest_coefficient = Some(coeff.to_string());
            Some((k, coeff))
        }
        _ => None,
    };
    let nonzero: Vec<f64> = match &kernel {
        Some((k, _)) => vals[*k..].to_vec(),
        None => vals.iter().copied().filter(|v| v.abs() > CLUSTER_TOL).collect(),
    };
    let log_product: f64 = nonzero.iter().map(|v| v.ln()).sum();
    report.det = (log_product / dim as f64).exp();
    if let Some((_, coeff)) = &kernel {
        let log_c = big_ln(coeff);
        report.log_deviation = Some((log_product - log_c).abs());
    }
    if report.det < bound * (1.0 - 1e-9) {
        return Err(Error::BoundViolated { det: report.det, bound });
    }
    report.pass = report.log_deviation.is_none_or(|d| d <= 1e-6) && kernel.as_ref().is_none_or(|(_, c)| !c.is_zero());
    Ok(report)
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `det ≥ c_A^{−(d−1)n}`; for rational representations also compares
/// `det^{dim V}` with the exact lowest nonzero charpoly coefficient.
pub fn luck_bound_check(a: &GroupAlgebraMatrix, rho: &FiniteRep, degree: u32) -> Result<LuckReport> {
    if !a.is_integral() {
        return Err(Error::ConfigInvalid("Lück check needs integer coefficients".into()));
    }
    let c = a.sup_norm_bound().to_f64().unwrap();
    luck_check_operator(&operator_matrix(a, rho), a.rows(), rho.dim, c, degree)
}

pub fn luck_bound_check_word(a: &GroupRingMatrix, rho: &WordRep) -> Result<LuckReport> {
    let c = a.sup_norm_bound().to_f64().unwrap();
    luck_check_operator(&operator_matrix_word(a, rho), a.rows(), rho.dim(), c, rho.arithmetic_degree())
}

/// Chain of projective modules `⊕_j e_{S_j}ℚ[G]` with compressed boundaries.
#[derive(Clone, Debug)]
pub struct ProjectiveChain {
    group: Arc<FiniteGroup>,
    stabilizers: Vec<Vec<Vec<usize>>>,
    /// `boundaries[p-1] = ∂_p : C_p → C_{p−1}`
    boundaries: Vec<GroupAlgebraMatrix>,
}

impl ProjectiveChain {
    /// Compresses each entry to `e_{S_i}·w_ij·e_{S_j}` and checks `∂∂ = 0`.
    pub fn new(
        group: &Arc<FiniteGroup>,
        stabilizers: Vec<Vec<Vec<usize>>>,
        boundaries: Vec<GroupAlgebraMatrix>,
    ) -> Result<ProjectiveChain> {
        let idem: Vec<Vec<FiniteElement>> =
            stabilizers.iter().map(|cells| cells.iter().map(|s| idempotent(s)).collect()).collect();
        let mut compressed = Vec::new();
        for (k, b) in boundaries.iter().enumerate() {
            let p = k + 1;
            if b.rows() != stabilizers[p - 1].len() || b.cols() != stabilizers.get(p).map_or(0, |s| s.len()) {
                return Err(Error::NotAComplex(p));
            }
            let mut c = GroupAlgebraMatrix::zeros(group, b.rows(), b.cols());
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    let w = b.get(i, j);
                    if !w.is_empty() {
                        c.set(i, j, finite_mul(group, &finite_mul(group, &idem[p - 1][i], w), &idem[p][j]));
                    }
                }
            }
            compressed.push(c);
        }
        for p in 1..compressed.len() {
            if !compressed[p - 1].mul(&compressed[p]).is_zero() {
                return Err(Error::NotAComplex(p));
            }
        }
        Ok(ProjectiveChain { group: group.clone(), stabilizers, boundaries: compressed })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn top_degree(&self) -> usize {
        self.stabilizers.len().saturating_sub(1)
    }

    pub fn boundary(&self, p: usize) -> Option<&GroupAlgebraMatrix> {
        if p == 0 {
            None
        } else {
            self.boundaries.get(p - 1)
        }
    }

    /// `[tr ρ(E_p) − rank ρ(∂_p) − rank ρ(∂_{p+1})] / dim V`
    pub fn phi_betti(&self, p: usize, rho: &FiniteRep) -> VnDim {
        let Some(cells) = self.stabilizers.get(p) else { return VnDim::Exact(Rational::zero()) };
        let mut trace = Complex64::zero();
        let mut trace_exact = Rational::zero();
        for s in cells {
            for &x in s {
                let t = rho.matrices[x].trace();
                trace += t / s.len() as f64;
                trace_exact += Rational::new((t.re.round() as i64).into(), (s.len() as i64).into());
            }
        }
        let mut exact = rho.is_rational;
        let mut ranks = 0usize;
        for b in [self.boundary(p), self.boundary(p + 1)].into_iter().flatten() {
            let (r, e) = operator_rank(&operator_matrix(b, rho), b.sup_norm_bound().to_f64().unwrap());
            ranks += r;
            exact &= e;
        }
        if exact {
            let d = Rational::from_integer((rho.dim as i64).into());
            VnDim::Exact((trace_exact - Rational::from_integer((ranks as i64).into())) / d)
        } else {
            VnDim::Approx((trace.re - ranks as f64) / rho.dim as f64)
        }
    }
}
