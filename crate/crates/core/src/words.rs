//! Built-in infinite groups with solvable word problem.
//!
//! Families: free groups `F_r`, free abelian groups `ℤ^r`, the infinite
//! dihedral group `⟨t, s | s², stst⟩`, and semidirect products `F_r ⋊ H` with
//! `H` finite acting by automorphisms given on the free generators.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finite_group::FiniteGroup;

/// A word as a sequence of `(generator, ±1)` letters.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<(u32, i8)>,
}

impl Word {
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn from_letters(letters: Vec<(u32, i8)>) -> Word {
        Word { letters }
    }

    pub fn generator(k: usize, exp: i8) -> Word {
        Word { letters: vec![(k as u32, exp)] }
    }

    pub fn letters(&self) -> &[(u32, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Formal concatenation (no reduction).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Formal inverse (no reduction).
    pub fn formal_inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.formal_inverse() } else { self.clone() };
        let mut letters = Vec::new();
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word { letters }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for &(g, e) in &self.letters {
            write!(f, "{}{}", (b'a' + g as u8) as char, if e < 0 { "'" } else { "" })?;
        }
        Ok(())
    }
}

// shortlex
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.len().cmp(&other.letters.len()).then_with(|| {
            let key = |&(g, e): &(u32, i8)| (g, if e > 0 { 0 } else { 1 });
            self.letters.iter().map(key).cmp(other.letters.iter().map(key))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn free_reduce(letters: impl IntoIterator<Item = (u32, i8)>) -> Vec<(u32, i8)> {
    let mut out: Vec<(u32, i8)> = Vec::new();
    for l in letters {
        match out.last() {
            Some(&(g, e)) if g == l.0 && e == -l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

fn invert_letters(w: &[(u32, i8)]) -> Vec<(u32, i8)> {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

#[derive(Debug)]
pub struct FreeByFinite {
    rank: usize,
    h: Arc<FiniteGroup>,
    /// per H element, images of the free generators (reduced letters)
    sigma: Vec<Vec<Vec<(u32, i8)>>>,
    /// per H element, a shortlex word over the H generator letters
    h_words: Vec<Word>,
    /// per H element, images as signed permutations when the action is one
    signed: Option<Vec<Vec<(usize, i8)>>>,
}

impl FreeByFinite {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn h(&self) -> &Arc<FiniteGroup> {
        &self.h
    }

    /// Word for element `h` of the finite group, over letters `r..`.
    pub fn h_word(&self, h: usize) -> &Word {
        &self.h_words[h]
    }

    /// `σ_h(x_i) = x_{π(i)}^{±1}` when the action is by signed permutations.
    pub fn signed_action(&self) -> Option<&Vec<Vec<(usize, i8)>>> {
        self.signed.as_ref()
    }

    fn apply(&self, h: usize, u: &[(u32, i8)]) -> Vec<(u32, i8)> {
        let mut out = Vec::new();
        for &(g, e) in u {
            let img = &self.sigma[h][g as usize];
            if e > 0 {
                out.extend_from_slice(img);
            } else {
                out.extend(invert_letters(img));
            }
        }
        free_reduce(out)
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    Free(usize),
    FreeAbelian(usize),
    DihedralInfinite,
    FreeByFinite(Arc<FreeByFinite>),
}

#[derive(Clone, Debug)]
pub struct BuiltinGroup {
    family: Family,
}

/// Family-specific element representation.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Elem {
    Free(Vec<(u32, i8)>),
    Abelian(Vec<i64>),
    Dihedral(i64, bool),
    Semi(Vec<(u32, i8)>, usize),
}

impl BuiltinGroup {
    pub fn free(r: usize) -> BuiltinGroup {
        BuiltinGroup { family: Family::Free(r) }
    }

    pub fn free_abelian(r: usize) -> BuiltinGroup {
        BuiltinGroup { family: Family::FreeAbelian(r) }
    }

    pub fn dihedral_infinite() -> BuiltinGroup {
        BuiltinGroup { family: Family::DihedralInfinite }
    }

    /// `F_r ⋊ H`; `action[k][i]` is the image of free generator `i` under the
    /// `k`-th generator of `h`, written over the letters `a, b, …`.
    pub fn free_by_finite(rank: usize, h: Arc<FiniteGroup>, action: &[Vec<Word>]) -> Result<BuiltinGroup> {
        let hg = h.generators().to_vec();
        if action.len() != hg.len() || action.iter().any(|imgs| imgs.len() != rank) {
            return Err(Error::ConfigInvalid("action needs one image per free generator and H generator".into()));
        }
        for imgs in action {
            for w in imgs {
                if w.letters().iter().any(|&(g, _)| g as usize >= rank) {
                    return Err(Error::ConfigInvalid("action images must be free words".into()));
                }
            }
        }
        let n = h.order();
        let mut sigma: Vec<Option<Vec<Vec<(u32, i8)>>>> = vec![None; n];
        let mut h_words: Vec<Option<Word>> = vec![None; n];
        sigma[0] = Some((0..rank).map(|i| vec![(i as u32, 1)]).collect());
        h_words[0] = Some(Word::identity());
        let gen_images: Vec<Vec<Vec<(u32, i8)>>> =
            action.iter().map(|imgs| imgs.iter().map(|w| free_reduce(w.letters().iter().copied())).collect()).collect();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let sx = sigma[x].clone().unwrap();
            for (k, &g) in hg.iter().enumerate() {
                let y = h.mul(x, g);
                // σ_{x·g}(a_i) = σ_x(σ_g(a_i))
                let sy: Vec<Vec<(u32, i8)>> = gen_images[k]
                    .iter()
                    .map(|img| {
                        let mut out = Vec::new();
                        for &(l, e) in img {
                            let im = &sx[l as usize];
                            if e > 0 {
                                out.extend_from_slice(im);
                            } else {
                                out.extend(invert_letters(im));
                            }
                        }
                        free_reduce(out)
                    })
                    .collect();
                match &sigma[y] {
                    None => {
                        sigma[y] = Some(sy);
                        let mut w = h_words[x].clone().unwrap();
                        w.letters.push(((rank + k) as u32, 1));
                        h_words[y] = Some(w);
                        queue.push_back(y);
                    }
                    Some(existing) if *existing != sy => {
                        return Err(Error::NotAnAction(
                            "generator substitutions do not extend to a homomorphism H → Aut(F_r)".into(),
                        ));
                    }
                    Some(_) => {}
                }
            }
        }
        let sigma: Vec<Vec<Vec<(u32, i8)>>> = sigma.into_iter().map(|s| s.unwrap()).collect();
        let h_words = h_words.into_iter().map(|w| w.unwrap()).collect();
        let signed = sigma
            .iter()
            .map(|imgs| {
                imgs.iter()
                    .map(|img| if img.len() == 1 { Some((img[0].0 as usize, img[0].1)) } else { None })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>();
        let data = FreeByFinite { rank, h, sigma, h_words, signed };
        Ok(BuiltinGroup { family: Family::FreeByFinite(Arc::new(data)) })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn free_by_finite_data(&self) -> Option<&Arc<FreeByFinite>> {
        match &self.family {
            Family::FreeByFinite(d) => Some(d),
            _ => None,
        }
    }

    pub fn generator_count(&self) -> usize {
        match &self.family {
            Family::Free(r) | Family::FreeAbelian(r) => *r,
            Family::DihedralInfinite => 2,
            Family::FreeByFinite(d) => d.rank + d.h.generators().len(),
        }
    }

    pub fn generator_names(&self) -> Vec<String> {
        match &self.family {
            Family::DihedralInfinite => vec!["t".into(), "s".into()],
            _ => (0..self.generator_count()).map(|i| ((b'a' + i as u8) as char).to_string()).collect(),
        }
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Free(r) => format!("F_{r}"),
            Family::FreeAbelian(r) => format!("Z^{r}"),
            Family::DihedralInfinite => "D_inf".into(),
            Family::FreeByFinite(d) => format!("F_{} x| H(order {})", d.rank, d.h.order()),
        }
    }

    pub fn generator(&self, k: usize) -> Word {
        Word::generator(k, 1)
    }

    fn identity_elem(&self) -> Elem {
        match &self.family {
            Family::Free(_) => Elem::Free(Vec::new()),
            Family::FreeAbelian(r) => Elem::Abelian(vec![0; *r]),
            Family::DihedralInfinite => Elem::Dihedral(0, false),
            Family::FreeByFinite(_) => Elem::Semi(Vec::new(), 0),
        }
    }

    fn mul_letter(&self, x: &mut Elem, (g, e): (u32, i8)) {
        match (&self.family, x) {
            (Family::Free(_), Elem::Free(u)) => match u.last() {
                Some(&(h, f)) if h == g && f == -e => {
                    u.pop();
                }
                _ => u.push((g, e)),
            },
            (Family::FreeAbelian(_), Elem::Abelian(v)) => v[g as usize] += e as i64,
            (Family::DihedralInfinite, Elem::Dihedral(k, refl)) => {
                if g == 0 {
                    *k += if *refl { -(e as i64) } else { e as i64 };
                } else {
                    *refl = !*refl;
                }
            }
            (Family::FreeByFinite(d), Elem::Semi(u, h)) => {
                let g = g as usize;
                if g < d.rank {
                    let img = d.apply(*h, &[(g as u32, e)]);
                    let joined = free_reduce(u.iter().copied().chain(img));
                    *u = joined;
                } else {
                    let hg = d.h.generators()[g - d.rank];
                    let step = if e > 0 { hg } else { d.h.inv(hg) };
                    *h = d.h.mul(*h, step);
                }
            }
            _ => unreachable!("element does not match family"),
        }
    }

    fn check_word(&self, w: &Word) {
        let n = self.generator_count() as u32;
        debug_assert!(w.letters.iter().all(|&(g, _)| g < n), "letter outside the alphabet");
    }

    fn eval(&self, w: &Word) -> Elem {
        self.check_word(w);
        let mut x = self.identity_elem();
        for &l in &w.letters {
            self.mul_letter(&mut x, l);
        }
        x
    }

    fn to_word(&self, x: &Elem) -> Word {
        let letters = match x {
            Elem::Free(u) => u.clone(),
            Elem::Abelian(v) => {
                let mut out = Vec::new();
                for (i, &k) in v.iter().enumerate() {
                    let e = if k < 0 { -1 } else { 1 };
                    out.extend(std::iter::repeat_n((i as u32, e), k.unsigned_abs() as usize));
                }
                out
            }
            Elem::Dihedral(k, refl) => {
                let e = if *k < 0 { -1 } else { 1 };
                let mut out: Vec<(u32, i8)> = std::iter::repeat_n((0, e), k.unsigned_abs() as usize).collect();
                if *refl {
                    out.push((1, 1));
                }
                out
            }
            Elem::Semi(u, h) => {
                let d = self.free_by_finite_data().unwrap();
                let mut out = u.clone();
                out.extend_from_slice(d.h_words[*h].letters());
                out
            }
        };
        Word { letters }
    }

    pub fn normal_form(&self, w: &Word) -> Word {
        self.to_word(&self.eval(w))
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        self.normal_form(&a.concat(b))
    }

    pub fn inverse(&self, a: &Word) -> Word {
        self.normal_form(&a.formal_inverse())
    }

    pub fn is_identity(&self, w: &Word) -> bool {
        self.eval(w) == self.identity_elem()
    }

    pub fn equal(&self, a: &Word, b: &Word) -> bool {
        self.eval(a) == self.eval(b)
    }

    /// Exponent `k` and reflection flag of a word of the infinite dihedral group.
    pub fn dihedral_coords(&self, w: &Word) -> Option<(i64, bool)> {
        match self.eval(w) {
            Elem::Dihedral(k, r) => Some((k, r)),
            _ => None,
        }
    }

    /// Exponent vector of a word of a free abelian group.
    pub fn abelian_coords(&self, w: &Word) -> Option<Vec<i64>> {
        match self.eval(w) {
            Elem::Abelian(v) => Some(v),
            _ => None,
        }
    }

    /// Free part and finite part of a word of `F_r ⋊ H`.
    pub fn semidirect_coords(&self, w: &Word) -> Option<(Word, usize)> {
        match self.eval(w) {
            Elem::Semi(u, h) => Some((Word { letters: u }, h)),
            _ => None,
        }
    }

    /// Parses words such as `ab'a`, `t^3s`, `t^-2` or `1`.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let names = self.generator_names();
        let positional: Vec<char> = (0..names.len()).map(|i| (b'a' + i as u8) as char).collect();
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Word::identity());
        }
        let bad = || Error::Parse(format!("bad word `{s}` for {}", self.name()));
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let g = names
                .iter()
                .position(|n| n.starts_with(c))
                .or_else(|| positional.iter().position(|&p| p == c))
                .ok_or_else(bad)?;
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '\'' {
                exp = -1;
                i += 1;
            }
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let k: i64 = chars[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
                exp *= k;
            }
            let e = if exp < 0 { -1 } else { 1 };
            letters.extend(std::iter::repeat_n((g as u32, e), exp.unsigned_abs() as usize));
        }
        Ok(self.normal_form(&Word { letters }))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let names = self.generator_names();
        let mut out = String::new();
        for &(g, e) in &w.letters {
            out.push_str(&names[g as usize]);
            if e < 0 {
                out.push('\'');
            }
        }
        out
    }

    /// Conjugacy decision where the family supports it.
    pub fn are_conjugate(&self, a: &Word, b: &Word) -> Option<bool> {
        match (&self.family, self.eval(a), self.eval(b)) {
            (Family::Free(_), Elem::Free(u), Elem::Free(v)) => {
                let u = cyclic_reduce(&u);
                let v = cyclic_reduce(&v);
                if u.len() != v.len() {
                    return Some(false);
                }
                if u.is_empty() {
                    return Some(true);
                }
                Some((0..u.len()).any(|k| u[k..].iter().chain(&u[..k]).eq(v.iter())))
            }
            (Family::FreeAbelian(_), x, y) => Some(x == y),
            (Family::DihedralInfinite, Elem::Dihedral(k, r), Elem::Dihedral(l, q)) => Some(match (r, q) {
                (false, false) => k == l || k == -l,
                (true, true) => (k - l).rem_euclid(2) == 0,
                _ => false,
            }),
            _ => None,
        }
    }

    /// `[G : C_G(h)]`: outer `None` when unsupported, inner `None` when infinite.
    pub fn centralizer_index(&self, h: &Word) -> Option<Option<u64>> {
        if self.is_identity(h) {
            return Some(Some(1));
        }
        match (&self.family, self.eval(h)) {
            (Family::Free(r), _) => Some(if *r <= 1 { Some(1) } else { None }),
            (Family::FreeAbelian(_), _) => Some(Some(1)),
            (Family::DihedralInfinite, Elem::Dihedral(_, false)) => Some(Some(2)),
            (Family::DihedralInfinite, Elem::Dihedral(_, true)) => Some(None),
            _ => None,
        }
    }

    /// All distinct elements of word length at most `radius`, in shortlex
    /// normal form, by breadth-first search; stops after `cap` elements.
    pub fn ball(&self, radius: usize, cap: usize) -> (Vec<(Word, usize)>, bool) {
        let mut seen = std::collections::HashSet::new();
        let id = Word::identity();
        seen.insert(id.clone());
        let mut out = vec![(id, 0)];
        let mut head = 0;
        let n = self.generator_count();
        while head < out.len() {
            let (w, len) = out[head].clone();
            head += 1;
            if len == radius {
                continue;
            }
            for g in 0..n {
                for e in [1i8, -1] {
                    let v = self.mul(&w, &Word::generator(g, e));
                    if seen.insert(v.clone()) {
                        if out.len() >= cap {
                            return (out, true);
                        }
                        out.push((v, len + 1));
                    }
                }
            }
        }
        (out, false)
    }
}

fn cyclic_reduce(u: &[(u32, i8)]) -> Vec<(u32, i8)> {
    let (mut i, mut j) = (0, u.len());
    while j > i + 1 && u[i].0 == u[j - 1].0 && u[i].1 == -u[j - 1].1 {
        i += 1;
        j -= 1;
    }
    u[i..j].to_vec()
}

/// Finite subgroup of a built-in group given by generating words; abstract
/// element `i` is `words[i]` (normal form).
#[derive(Clone, Debug)]
pub struct WordSubgroup {
    group: Arc<FiniteGroup>,
    words: Vec<Word>,
}

impl WordSubgroup {
    pub fn generated(g: &BuiltinGroup, gens: &[Word], cap: usize) -> Result<WordSubgroup> {
        let gens: Vec<Word> = gens.iter().map(|w| g.normal_form(w)).collect();
        let bg = g.clone();
        let (fg, words) = FiniteGroup::from_closure(&gens, Word::identity(), move |a: &Word, b: &Word| bg.mul(a, b), cap)?;
        let labels = words.iter().map(|w| g.format_word(w)).collect();
        Ok(WordSubgroup { group: Arc::new(fg.with_labels(labels)), words })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn order(&self) -> usize {
        self.words.len()
    }

    pub fn position(&self, g: &BuiltinGroup, w: &Word) -> Option<usize> {
        let nf = g.normal_form(w);
        self.words.iter().position(|x| *x == nf)
    }
}
