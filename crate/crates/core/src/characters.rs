//! Characters of finite quotients, biset characters and induction through
//! them, and limit characters of built-in infinite groups.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::character_table::{clean, induce_ordinary, OrdinaryCharacter};
use crate::error::{Error, Result};
use crate::finite_group::{FiniteGroup, FiniteSubgroup};
use crate::quotient::{FiniteIndexSubgroup, QuotientChain};
use crate::rational::Rational;
use crate::words::{BuiltinGroup, Family, Word, WordSubgroup};

pub const INDUCE_DENOMINATOR_TOL: f64 = 1e-10;
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-9;
const GRAM_SAMPLE: usize = 12;

/// Class function on a finite group, usually normalized to `φ(1) = 1`.
#[derive(Clone, Debug)]
pub struct FiniteCharacter {
    group: Arc<FiniteGroup>,
    values: Vec<Complex64>,
    normalized: bool,
}

impl FiniteCharacter {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<Complex64>) -> FiniteCharacter {
        assert_eq!(values.len(), group.classes().len());
        let normalized = (values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12;
        FiniteCharacter { group, values, normalized }
    }

    /// `χ/χ(1)`
    pub fn normalize(chi: &OrdinaryCharacter) -> FiniteCharacter {
        FiniteCharacter::new(chi.group().clone(), chi.normalized_values())
    }

    pub fn trivial(group: &Arc<FiniteGroup>) -> FiniteCharacter {
        FiniteCharacter::new(group.clone(), vec![Complex64::new(1.0, 0.0); group.classes().len()])
    }

    pub fn regular(group: &Arc<FiniteGroup>) -> FiniteCharacter {
        let mut v = vec![Complex64::zero(); group.classes().len()];
        v[0] = Complex64::new(1.0, 0.0);
        FiniteCharacter::new(group.clone(), v)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn at(&self, x: usize) -> Complex64 {
        self.values[self.group.class_of(x)]
    }

    pub fn product(&self, other: &FiniteCharacter) -> FiniteCharacter {
        FiniteCharacter::new(self.group.clone(), self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// `t·self + (1 − t)·other`
    pub fn convex(&self, other: &FiniteCharacter, t: &Rational) -> FiniteCharacter {
        let t = t.to_f64().unwrap();
        let vals = self.values.iter().zip(&other.values).map(|(a, b)| a * t + b * (1.0 - t)).collect();
        FiniteCharacter::new(self.group.clone(), vals)
    }

    pub fn max_deviation(&self, other: &FiniteCharacter) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Gram matrix `(φ(g_i⁻¹ g_j))` over a sample
    /// of at most 12 elements.
    pub fn gram_min_eigenvalue(&self, seed: u64) -> f64 {
        let n = self.group.order();
        let mut sample: Vec<usize> = if n <= GRAM_SAMPLE {
            (0..n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = vec![0];
            while s.len() < GRAM_SAMPLE {
                let x = rng.random_range(0..n);
                if !s.contains(&x) {
                    s.push(x);
                }
            }
            s
        };
        sample.sort_unstable();
        let k = sample.len();
        let m = DMatrix::from_fn(k, k, |i, j| self.at(self.group.mul(self.group.inv(sample[i]), sample[j])));
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `{"classes": [{"representative", "value": [re, im]}]}`
    pub fn to_json(&self) -> serde_json::Value {
        let reps = &self.group.classes().reps;
        let classes: Vec<serde_json::Value> = reps
            .iter()
            .zip(&self.values)
            .map(|(&r, v)| serde_json::json!({"representative": self.group.label(r), "value": [clean(v.re), clean(v.im)]}))
            .collect();
        serde_json::json!({ "order": self.group.order(), "classes": classes })
    }

    /// Identity value 1 and sampled Gram positivity up to `−1e-8`.
    pub fn is_character(&self, seed: u64) -> bool {
        self.normalized && self.gram_min_eigenvalue(seed) >= -1e-8
    }
}

/// `φ(g) = |fix_X(g)|/|X|` for a right action `(g, x) ↦ x·g` on `0..npoints`.
pub fn perm_character(g: &Arc<FiniteGroup>, npoints: usize, action: &dyn Fn(usize, usize) -> usize) -> Result<FiniteCharacter> {
    if npoints == 0 {
        return Err(Error::NotAnAction("empty set".into()));
    }
    for x in 0..npoints {
        if action(0, x) != x {
            return Err(Error::NotAnAction("identity moves a point".into()));
        }
    }
    for &s in g.generators() {
        let mut seen = vec![false; npoints];
        for x in 0..npoints {
            let y = action(s, x);
            if y >= npoints || seen[y] {
                return Err(Error::NotAnAction("generator does not act bijectively".into()));
            }
            seen[y] = true;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xac7);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &a in g.generators() {
        for &b in g.generators() {
            pairs.push((a, b));
        }
    }
    for _ in 0..32 {
        pairs.push((rng.random_range(0..g.order()), rng.random_range(0..g.order())));
    }
    for (a, b) in pairs {
        let ab = g.mul(a, b);
        for x in 0..npoints {
            if action(ab, x) != action(b, action(a, x)) {
                return Err(Error::NotAnAction("x·(gh) differs from (x·g)·h".into()));
            }
        }
    }
    let vals = g
        .classes()
        .reps
        .iter()
        .map(|&r| Complex64::new((0..npoints).filter(|&x| action(r, x) == x).count() as f64 / npoints as f64, 0.0))
        .collect();
    Ok(FiniteCharacter::new(g.clone(), vals))
}

/// Character of a `Q`–`H` biset: `values[c][h]` for `Q`-class `c` and
/// abstract `H` element `h`.
#[derive(Clone, Debug)]
pub struct BisetCharacter {
    q: Arc<FiniteGroup>,
    h: Arc<FiniteGroup>,
    h_images: Vec<usize>,
    values: Vec<Vec<Rational>>,
}

impl BisetCharacter {
    pub fn new(q: Arc<FiniteGroup>, h: Arc<FiniteGroup>, h_images: Vec<usize>, values: Vec<Vec<Rational>>) -> Self {
        BisetCharacter { q, h, h_images, values }
    }

    /// The one-point biset.
    pub fn one_point(q: &Arc<FiniteGroup>, h: &Arc<FiniteGroup>) -> Self {
        let one = Rational::from_integer(1.into());
        let values = vec![vec![one; h.order()]; q.classes().len()];
        BisetCharacter { q: q.clone(), h: h.clone(), h_images: vec![0; h.order()], values }
    }

    pub fn q_group(&self) -> &Arc<FiniteGroup> {
        &self.q
    }

    pub fn h_group(&self) -> &Arc<FiniteGroup> {
        &self.h
    }

    pub fn h_images(&self) -> &[usize] {
        &self.h_images
    }

    pub fn value(&self, g: usize, h: usize) -> &Rational {
        &self.values[self.q.class_of(g)][h]
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }
}

/// `i(g, h) = [Q : C_Q(h)]⁻¹` if `g ~ h`, else 0.
pub fn i_finite(h: &FiniteSubgroup) -> BisetCharacter {
    let q = h.parent();
    let cls = q.classes();
    let hg = h.group();
    let zero = Rational::zero();
    let mut values = vec![vec![zero; hg.order()]; cls.len()];
    for i in 0..hg.order() {
        let x = h.embed(i);
        let c = cls.class_of[x];
        values[c][i] = Rational::new(1.into(), (cls.sizes[c] as i64).into());
    }
    BisetCharacter { q: q.clone(), h: hg.clone(), h_images: h.embedding().to_vec(), values }
}

/// `g ↦ Σ_h ψ(g,h)φ(h) / Σ_h ψ(1,h)φ(h)`.
pub fn induce_via(psi: &BisetCharacter, phi: &FiniteCharacter) -> Result<FiniteCharacter> {
    assert_eq!(phi.group().order(), psi.h.order());
    let num: Vec<Complex64> = psi
        .values
        .iter()
        .map(|row| row.iter().enumerate().map(|(h, v)| phi.at(h) * v.to_f64().unwrap()).sum())
        .collect();
    let den = num[0];
    if den.norm() < INDUCE_DENOMINATOR_TOL {
        return Err(Error::CannotInduce(den.norm()));
    }
    Ok(FiniteCharacter::new(psi.q.clone(), num.iter().map(|v| v / den).collect()))
}

/// Normalized induced character, computed through `i_finite` and through
/// the ordinary induction formula, cross-checked.
pub fn ind_finite(h: &FiniteSubgroup, chi: &OrdinaryCharacter) -> Result<FiniteCharacter> {
    let via = induce_via(&i_finite(h), &FiniteCharacter::normalize(chi))?;
    let ord = induce_ordinary(h, chi);
    let scale = 1.0 / (chi.degree() as f64 * h.index() as f64);
    let direct = FiniteCharacter::new(h.parent().clone(), ord.values().iter().map(|v| v * scale).collect());
    let dev = via.max_deviation(&direct);
    if dev > ROUTE_AGREEMENT_TOL {
        return Err(Error::CrossCheckFailed(format!("induction routes differ by {dev:e}")));
    }
    Ok(via)
}

/// `ψ(g,h) = |{fK : f⁻¹gf ∈ h̄K}| / [Q:K]` for `Γ = π⁻¹(K)` and `H` the finite
/// subgroup generated by `h_words`.
pub fn biset_character(gamma: &FiniteIndexSubgroup, h: &WordSubgroup) -> Result<BisetCharacter> {
    let q = gamma.target();
    let k = &gamma.fiber;
    let h_images: Vec<usize> = h.words().iter().map(|w| gamma.via.evaluate(w)).collect();
    for (i, &x) in h_images.iter().enumerate() {
        if !k.normalized_by(x) {
            return Err(Error::HNotNormalizing(format!("element {} of H", h.group().label(i))));
        }
    }
    let (reps, which) = k.left_cosets();
    let idx = reps.len() as i64;
    let cls = q.classes();
    let values = cls
        .reps
        .iter()
        .map(|&g| {
            h_images
                .iter()
                .map(|&hb| {
                    let target = which[hb];
                    let count = reps.iter().filter(|&&f| which[q.conj(g, q.inv(f))] == target).count();
                    Rational::new((count as i64).into(), idx.into())
                })
                .collect()
        })
        .collect();
    Ok(BisetCharacter { q: q.clone(), h: h.group().clone(), h_images, values })
}

#[derive(Clone, Debug)]
pub enum LimitCharacterSpec {
    Regular,
    Trivial,
    CirclePoint(Complex64),
    InducedFromFinite {
        h_words: Vec<Word>,
        chi: OrdinaryCharacter,
        infinite_centralizers: bool,
    },
}

impl LimitCharacterSpec {
    pub fn circle_point(z: Complex64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::ConfigInvalid("circle point must have modulus 1".into()));
        }
        Ok(LimitCharacterSpec::CirclePoint(z))
    }

    /// `h_words[i]` must be the element of `G` corresponding to element `i`
    /// of the character's group.
    pub fn induced_from_finite(
        g: &BuiltinGroup,
        h_words: Vec<Word>,
        chi: OrdinaryCharacter,
        infinite_centralizers: bool,
    ) -> Result<Self> {
        let hg = chi.group();
        if h_words.len() != hg.order() {
            return Err(Error::ConfigInvalid("one word per element of H is required".into()));
        }
        let nf: Vec<Word> = h_words.iter().map(|w| g.normal_form(w)).collect();
        for i in 0..nf.len() {
            for j in 0..i {
                if nf[i] == nf[j] {
                    return Err(Error::ConfigInvalid("H words are not distinct".into()));
                }
            }
        }
        for i in 0..nf.len() {
            for j in 0..nf.len() {
                if g.mul(&nf[i], &nf[j]) != nf[hg.mul(i, j)] {
                    return Err(Error::ConfigInvalid("H words do not multiply like the character's group".into()));
                }
            }
        }
        Ok(LimitCharacterSpec::InducedFromFinite { h_words: nf, chi, infinite_centralizers })
    }

    /// Induced limit from the normal-form subgroup enumeration.
    pub fn induced_from_subgroup(h: &WordSubgroup, chi: OrdinaryCharacter, infinite_centralizers: bool) -> Self {
        LimitCharacterSpec::InducedFromFinite { h_words: h.words().to_vec(), chi, infinite_centralizers }
    }
}

/// `i_G(g, h)` from the family's conjugacy and centralizer oracles; `None`
/// when the family has none.
pub fn i_infinite(g: &BuiltinGroup, w: &Word, h: &Word) -> Option<Rational> {
    let conj = g.are_conjugate(w, h)?;
    let idx = g.centralizer_index(h)?;
    Some(match (conj, idx) {
        (true, Some(n)) => Rational::new(1.into(), (n as i64).into()),
        _ => Rational::zero(),
    })
}

pub fn limit_value(g: &BuiltinGroup, spec: &LimitCharacterSpec, w: &Word) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    match spec {
        LimitCharacterSpec::Regular => Ok(if g.is_identity(w) { one } else { Complex64::zero() }),
        LimitCharacterSpec::Trivial => Ok(one),
        LimitCharacterSpec::CirclePoint(z) => {
            if g.generator_count() != 1 || !matches!(g.family(), Family::Free(_) | Family::FreeAbelian(_)) {
                return Err(Error::UnsupportedFamily("circle points need an infinite cyclic group".into()));
            }
            let k: i64 = w.letters().iter().map(|&(_, e)| e as i64).sum();
            Ok(z.powi(k as i32))
        }
        LimitCharacterSpec::InducedFromFinite { h_words, chi, infinite_centralizers } => {
            let normalized = chi.normalized_values();
            let hg = chi.group();
            let mut total = Complex64::zero();
            for (i, hw) in h_words.iter().enumerate() {
                let iv = match i_infinite(g, w, hw) {
                    Some(v) => v,
                    None if *infinite_centralizers => {
                        // every nontrivial h has infinite centralizer index
                        if i == 0 && g.is_identity(w) {
                            Rational::from_integer(1.into())
                        } else {
                            Rational::zero()
                        }
                    }
                    None => {
                        return Err(Error::UnsupportedFamily(format!(
                            "{} has no conjugacy oracle and no infinite-centralizer assertion was made",
                            g.name()
                        )))
                    }
                };
                if !iv.is_zero() {
                    total += normalized[hg.class_of(i)] * iv.to_f64().unwrap();
                }
            }
            Ok(total)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub word: String,
    pub value: Complex64,
    pub limit: Complex64,
    pub deviation: f64,
}

/// Pointwise deviation `|φ_n(w̄) − limit(w)|` per level and probe word.
pub fn convergence_report(
    chain: &QuotientChain,
    spec: &LimitCharacterSpec,
    probe_words: &[Word],
    chars: &[FiniteCharacter],
) -> Result<Vec<ConvergenceRow>> {
    if chars.len() != chain.len() {
        return Err(Error::ConfigInvalid("one character per chain level is required".into()));
    }
    let mut rows = Vec::new();
    for (n, (level, phi)) in chain.levels().iter().zip(chars).enumerate() {
        let g = level.via.source();
        for w in probe_words {
            let value = phi.at(level.via.evaluate(w));
            let limit = limit_value(g, spec, w)?;
            rows.push(ConvergenceRow { level: n, word: g.format_word(w), value, limit, deviation: (value - limit).norm() });
        }
    }
    Ok(rows)
}
