//! Rational group rings: formal sums over words of a built-in group and over
//! elements of a finite group, and matrices over both.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::finite_group::FiniteGroup;
use crate::rational::{parse_rational, Rational};
use crate::words::{BuiltinGroup, Word};

/// Finite formal sum `Σ c·w` with words in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, Rational>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Rational::from_integer(1.into()), Word::identity())
    }

    /// `c·w`; `w` must already be in normal form.
    pub fn monomial(c: Rational, w: Word) -> Self {
        let mut e = Self::zero();
        e.add_term(c, w);
        e
    }

    pub fn from_terms(g: &BuiltinGroup, terms: impl IntoIterator<Item = (Rational, Word)>) -> Self {
        let mut e = Self::zero();
        for (c, w) in terms {
            e.add_term(c, g.normal_form(&w));
        }
        e
    }

    fn add_term(&mut self, c: Rational, w: Word) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut e = self.clone();
        for (w, c) in &other.terms {
            e.add_term(c.clone(), w.clone());
        }
        e
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut e = Self::zero();
        for (w, v) in &self.terms {
            e.add_term(v * c, w.clone());
        }
        e
    }

    pub fn mul(&self, g: &BuiltinGroup, other: &Self) -> Self {
        let mut e = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                e.add_term(a * b, g.mul(u, v));
            }
        }
        e
    }

    /// `Σ c·w ↦ Σ c·w⁻¹` (coefficients are real).
    pub fn adjoint(&self, g: &BuiltinGroup) -> Self {
        let mut e = Self::zero();
        for (w, c) in &self.terms {
            e.add_term(c.clone(), g.inverse(w));
        }
        e
    }

    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).fold(Rational::zero(), |a, b| a + b)
    }

    /// Parses sums such as `3/2*ab' + -1*1`, `1 - a` or `2`.
    pub fn parse(g: &BuiltinGroup, s: &str) -> Result<Self> {
        let mut e = Self::zero();
        let normalized = s.replace('−', "-");
        let mut pieces: Vec<String> = Vec::new();
        let mut cur = String::new();
        for ch in normalized.chars() {
            if ch == '+' || (ch == '-' && !cur.trim().is_empty() && !cur.trim_end().ends_with('*') && !cur.ends_with('^')) {
                pieces.push(std::mem::take(&mut cur));
                if ch == '-' {
                    cur.push('-');
                }
            } else {
                cur.push(ch);
            }
        }
        pieces.push(cur);
        for p in pieces {
            let p = p.trim();
            if p.is_empty() {
                continue;
            }
            let (coef, word) = if let Some((c, w)) = p.split_once('*') {
                (parse_rational(c)?, g.parse_word(w)?)
            } else if let Ok(c) = parse_rational(p) {
                (c, Word::identity())
            } else if let Some(rest) = p.strip_prefix('-') {
                (Rational::from_integer((-1).into()), g.parse_word(rest)?)
            } else {
                (Rational::from_integer(1.into()), g.parse_word(p)?)
            };
            e.add_term(coef, word);
        }
        Ok(e)
    }

    pub fn format(&self, g: &BuiltinGroup) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms.iter().map(|(w, c)| format!("{}*{}", c, g.format_word(w))).collect::<Vec<_>>().join(" + ")
    }
}

/// Matrix over `ℚ[G]` for a built-in `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GroupRingElement>,
}

impl GroupRingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GroupRingMatrix { rows, cols, entries: vec![GroupRingElement::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GroupRingElement::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GroupRingElement>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        GroupRingMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: GroupRingElement) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn mul(&self, g: &BuiltinGroup, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = GroupRingElement::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(g, other.get(k, j)));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn adjoint(&self, g: &BuiltinGroup) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).adjoint(g));
            }
        }
        m
    }

    /// `c_A = Σ |coefficient|` over all entries and terms.
    pub fn sup_norm_bound(&self) -> Rational {
        self.entries.iter().map(|e| e.l1_norm()).fold(Rational::zero(), |a, b| a + b)
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn parse(g: &BuiltinGroup, s: &str) -> Result<Self> {
        let rows: Vec<Vec<GroupRingElement>> = s
            .split(';')
            .map(|r| r.split(',').map(|e| GroupRingElement::parse(g, e)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Parse("ragged matrix".into()));
        }
        Ok(Self::from_rows(rows))
    }

    pub fn format(&self, g: &BuiltinGroup) -> String {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).format(g)).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Element of `ℚ[Q]` for a finite group `Q`.
pub type FiniteElement = BTreeMap<usize, Rational>;

fn add_into(e: &mut FiniteElement, g: usize, c: Rational) {
    if c.is_zero() {
        return;
    }
    let slot = e.entry(g).or_insert_with(Rational::zero);
    *slot += c;
    if slot.is_zero() {
        e.remove(&g);
    }
}

pub fn finite_mul(group: &FiniteGroup, a: &FiniteElement, b: &FiniteElement) -> FiniteElement {
    let mut out = FiniteElement::new();
    for (x, c) in a {
        for (y, d) in b {
            add_into(&mut out, group.mul(*x, *y), c * d);
        }
    }
    out
}

pub fn finite_add(a: &FiniteElement, b: &FiniteElement) -> FiniteElement {
    let mut out = a.clone();
    for (y, d) in b {
        add_into(&mut out, *y, d.clone());
    }
    out
}

/// Averaging idempotent `(1/|S|) Σ_{s ∈ S} s`.
pub fn idempotent(members: &[usize]) -> FiniteElement {
    let c = Rational::new(1.into(), (members.len() as i64).into());
    members.iter().map(|&s| (s, c.clone())).collect()
}

/// Matrix over `ℚ[Q]` for a finite group `Q`.
#[derive(Clone, Debug)]
pub struct GroupAlgebraMatrix {
    group: Arc<FiniteGroup>,
    rows: usize,
    cols: usize,
    entries: Vec<FiniteElement>,
}

impl PartialEq for GroupAlgebraMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl GroupAlgebraMatrix {
    pub fn zeros(group: &Arc<FiniteGroup>, rows: usize, cols: usize) -> Self {
        GroupAlgebraMatrix { group: group.clone(), rows, cols, entries: vec![FiniteElement::new(); rows * cols] }
    }

    pub fn identity(group: &Arc<FiniteGroup>, n: usize) -> Self {
        let mut m = Self::zeros(group, n, n);
        for i in 0..n {
            m.entries[i * n + i].insert(0, Rational::from_integer(1.into()));
        }
        m
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FiniteElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: FiniteElement) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn add_term(&mut self, i: usize, j: usize, g: usize, c: Rational) {
        add_into(&mut self.entries[i * self.cols + j], g, c);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_empty())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut m = Self::zeros(&self.group, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_empty() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_empty() {
                        continue;
                    }
                    let prod = finite_mul(&self.group, a, b);
                    let idx = i * other.cols + j;
                    m.entries[idx] = finite_add(&m.entries[idx], &prod);
                }
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(&self.group, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e: FiniteElement = self.get(i, j).iter().map(|(g, c)| (self.group.inv(*g), c.clone())).collect();
                m.set(j, i, e);
            }
        }
        m
    }

    pub fn sup_norm_bound(&self) -> Rational {
        self.entries.iter().flat_map(|e| e.values()).map(|c| c.abs()).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn pow(&self, k: u32) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(&self.group, self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().flat_map(|e| e.values()).all(|c| c.is_integer())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::cyclic;
    use crate::rational::int;

    #[test]
    fn parse_and_format() {
        let f2 = BuiltinGroup::free(2);
        let e = GroupRingElement::parse(&f2, "3/2*ab' + -1*1").unwrap();
        assert_eq!(e.terms().count(), 2);
        let back = GroupRingElement::parse(&f2, &e.format(&f2)).unwrap();
        assert_eq!(e, back);
        let z = BuiltinGroup::free_abelian(1);
        let d = GroupRingElement::parse(&z, "1 - a").unwrap();
        assert_eq!(d.l1_norm(), int(2));
        let cancel = GroupRingElement::parse(&z, "a - a").unwrap();
        assert!(cancel.is_zero());
    }

    #[test]
    fn sup_norm_examples() {
        let z = BuiltinGroup::free_abelian(1);
        let a = GroupRingMatrix::parse(&z, "1 - a").unwrap();
        assert_eq!(a.sup_norm_bound(), int(2));
        let ata = a.adjoint(&z).mul(&z, &a);
        assert_eq!(ata.sup_norm_bound(), int(4));
        assert_eq!(ata.get(0, 0), &GroupRingElement::parse(&z, "2 - a - a'").unwrap());
        assert_eq!(GroupRingMatrix::zeros(2, 3).sup_norm_bound(), int(0));
    }

    #[test]
    fn adjoint_is_an_involution() {
        let f2 = BuiltinGroup::free(2);
        let a = GroupRingMatrix::parse(&f2, "1 - a, 2*ab; b', -1/3*ba'").unwrap();
        assert_eq!(a.adjoint(&f2).adjoint(&f2), a);
        let ata = a.adjoint(&f2).mul(&f2, &a);
        assert_eq!(ata.adjoint(&f2), ata);
    }

    #[test]
    fn finite_algebra_products() {
        let z4 = Arc::new(cyclic(4));
        let mut a = GroupAlgebraMatrix::zeros(&z4, 1, 1);
        a.add_term(0, 0, 0, int(1));
        a.add_term(0, 0, 1, int(-1));
        let p = a.adjoint().mul(&a);
        assert_eq!(p.get(0, 0).get(&0), Some(&int(2)));
        assert_eq!(p.sup_norm_bound(), int(4));
        let e = idempotent(&[0, 2]);
        assert_eq!(finite_mul(&z4, &e, &e), e);
    }
}
