//! Enumerated finite groups, subgroups and homomorphisms.
//!
//! Elements are indices `0..order` with `0` the identity. Products follow the
//! permutation convention `x·y = apply x, then y`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;
pub const CHARACTER_TABLE_CAP: usize = 2000;
const TABLE_LIMIT: usize = 2500;

type MulFn = dyn Fn(usize, usize) -> usize + Send + Sync;

enum Repr {
    Table(Vec<u32>),
    Closure(Box<MulFn>),
}

pub struct FiniteGroup {
    order: usize,
    repr: Repr,
    inverse: Vec<u32>,
    generators: Vec<usize>,
    labels: Option<Vec<String>>,
    classes: OnceLock<ConjugacyClasses>,
}

#[derive(Clone, Debug)]
pub struct ConjugacyClasses {
    pub class_of: Vec<usize>,
    pub reps: Vec<usize>,
    pub sizes: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl ConjugacyClasses {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("generators", &self.generators)
            .finish()
    }
}

impl FiniteGroup {
    /// Closure of `gens` under multiplication, breadth first from `identity`.
    /// Returns the group together with the enumerated elements.
    pub fn from_closure<T, F>(gens: &[T], identity: T, mul: F, cap: usize) -> Result<(FiniteGroup, Vec<T>)>
    where
        T: Hash + Eq + Clone + Send + Sync + 'static,
        F: Fn(&T, &T) -> T + Send + Sync + 'static,
    {
        let mut elems = vec![identity.clone()];
        let mut index: HashMap<T, usize> = HashMap::new();
        index.insert(identity, 0);
        // parent[y] = (x, k) with y = x·gen_k
        let mut parent: Vec<(usize, usize)> = vec![(0, usize::MAX)];
        let mut right: Vec<Vec<u32>> = vec![Vec::new(); gens.len()];
        let mut head = 0;
        while head < elems.len() {
            let x = elems[head].clone();
            for (k, g) in gens.iter().enumerate() {
                let y = mul(&x, g);
                let j = match index.get(&y) {
                    Some(&j) => j,
                    None => {
                        if elems.len() >= cap {
                            return Err(Error::ClosureTooLarge { cap });
                        }
                        let j = elems.len();
                        index.insert(y.clone(), j);
                        elems.push(y);
                        parent.push((head, k));
                        j
                    }
                };
                right[k].push(j as u32);
            }
            head += 1;
        }
        let order = elems.len();
        let generators: Vec<usize> = gens.iter().map(|g| index[g]).collect();

        let (repr, inverse) = if order <= TABLE_LIMIT {
            let mut table = vec![0u32; order * order];
            for x in 0..order {
                table[x * order] = x as u32;
            }
            for y in 1..order {
                let (p, k) = parent[y];
                for x in 0..order {
                    let xp = table[x * order + p] as usize;
                    table[x * order + y] = right[k][xp];
                }
            }
            let mut inverse = vec![0u32; order];
            for x in 0..order {
                let row = &table[x * order..(x + 1) * order];
                inverse[x] = row.iter().position(|&v| v == 0).expect("group has inverses") as u32;
            }
            (Repr::Table(table), inverse)
        } else {
            let elems_arc = Arc::new(elems.clone());
            let index_arc = Arc::new(index);
            let mul = Arc::new(mul);
            let closure = {
                let elems = elems_arc.clone();
                let index = index_arc.clone();
                let mul = mul.clone();
                move |a: usize, b: usize| index[&mul(&elems[a], &elems[b])]
            };
            // inverse of each generator by powering, then along the BFS tree
            let mut gen_inv = Vec::with_capacity(gens.len());
            for k in 0..gens.len() {
                let g = generators[k];
                let mut prev = 0usize;
                let mut cur = g;
                while cur != 0 {
                    prev = cur;
                    cur = closure(cur, g);
                }
                gen_inv.push(if g == 0 { 0 } else { prev });
            }
            let mut inverse = vec![0u32; order];
            for y in 1..order {
                let (p, k) = parent[y];
                inverse[y] = closure(gen_inv[k], inverse[p] as usize) as u32;
            }
            (Repr::Closure(Box::new(closure)), inverse)
        };
        let group = FiniteGroup {
            order,
            repr,
            inverse,
            generators,
            labels: None,
            classes: OnceLock::new(),
        };
        Ok((group, elems))
    }

    /// Closure of a list of permutations of `0..degree` (images as vectors).
    pub fn from_generators(perms: &[Vec<usize>]) -> Result<FiniteGroup> {
        Self::from_generators_capped(perms, DEFAULT_CLOSURE_CAP)
    }

    pub fn from_generators_capped(perms: &[Vec<usize>], cap: usize) -> Result<FiniteGroup> {
        let degree = perms.first().map_or(0, |p| p.len());
        for p in perms {
            if p.len() != degree {
                return Err(Error::NotAnAction("permutations act on different sets".into()));
            }
            let mut seen = vec![false; degree];
            for &i in p {
                if i >= degree || seen[i] {
                    return Err(Error::NotAnAction("input is not a bijection".into()));
                }
                seen[i] = true;
            }
        }
        let gens: Vec<Vec<u32>> = perms.iter().map(|p| p.iter().map(|&i| i as u32).collect()).collect();
        let identity: Vec<u32> = (0..degree as u32).collect();
        let (mut g, elems) = Self::from_closure(
            &gens,
            identity,
            |x: &Vec<u32>, y: &Vec<u32>| x.iter().map(|&i| y[i as usize]).collect(),
            cap,
        )?;
        g.labels = Some(elems.iter().map(|p| cycle_label(p)).collect());
        Ok(g)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.order);
        self.labels = Some(labels);
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.repr {
            Repr::Table(t) => t[a * self.order + b] as usize,
            Repr::Closure(f) => f(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    /// `g⁻¹·x·g`
    #[inline]
    pub fn conj(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn pow(&self, x: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(x) } else { x };
        let mut acc = 0;
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut cur = x;
        while cur != 0 {
            cur = self.mul(cur, x);
            k += 1;
        }
        k
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => format!("g{x}"),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter().all(|&a| g.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Exhaustive associativity/identity/inverse scan (small orders only).
    pub fn verify_axioms(&self) -> bool {
        let n = self.order;
        for x in 0..n {
            if self.mul(0, x) != x || self.mul(x, 0) != x {
                return false;
            }
            if self.mul(x, self.inv(x)) != 0 || self.mul(self.inv(x), x) != 0 {
                return false;
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = self.mul(x, y);
                for z in 0..n {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn classes(&self) -> &ConjugacyClasses {
        self.classes.get_or_init(|| self.compute_classes())
    }

    fn compute_classes(&self) -> ConjugacyClasses {
        let n = self.order;
        let mut class_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        let mut members = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            class_of[x] = c;
            let mut orbit = vec![x];
            let mut head = 0;
            while head < orbit.len() {
                let y = orbit[head];
                head += 1;
                for &g in &self.generators {
                    let z = self.conj(y, g);
                    if class_of[z] == usize::MAX {
                        class_of[z] = c;
                        orbit.push(z);
                    }
                }
            }
            orbit.sort_unstable();
            members.push(orbit);
        }
        let sizes = members.iter().map(|m| m.len()).collect();
        ConjugacyClasses { class_of, reps, sizes, members }
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.classes().class_of[x]
    }

    /// `[G : C_G(h)]`, the size of the conjugacy class of `h`.
    pub fn centralizer_index(&self, h: usize) -> usize {
        let c = self.classes();
        c.sizes[c.class_of[h]]
    }

    pub fn centralizer_order(&self, h: usize) -> usize {
        self.order / self.centralizer_index(h)
    }

    pub fn are_conjugate(&self, a: usize, b: usize) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    pub fn trivial() -> FiniteGroup {
        cyclic(1)
    }
}

fn cycle_label(p: &[u32]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] as usize == start {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut j = p[start] as usize;
        while j != start {
            seen[j] = true;
            cyc.push(j);
            j = p[j] as usize;
        }
        out.push('(');
        out.push_str(&cyc.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
        out.push(')');
    }
    if out.is_empty() {
        "()".into()
    } else {
        out
    }
}

/// A subgroup with its own abstract group structure; abstract element `i`
/// sits at `embed[i]` in the parent.
#[derive(Clone, Debug)]
pub struct FiniteSubgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
    embed: Vec<usize>,
    locate: HashMap<usize, usize>,
    group: Arc<FiniteGroup>,
}

impl FiniteSubgroup {
    pub fn generated(parent: &Arc<FiniteGroup>, gens: &[usize]) -> FiniteSubgroup {
        let p = parent.clone();
        let (mut group, embed) = FiniteGroup::from_closure(gens, 0usize, move |a: &usize, b: &usize| p.mul(*a, *b), parent.order())
            .expect("subgroup of a finite group is finite");
        if let Some(l) = parent.labels() {
            group.labels = Some(embed.iter().map(|&e| l[e].clone()).collect());
        }
        let mut members = embed.clone();
        members.sort_unstable();
        let locate = embed.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        FiniteSubgroup { parent: parent.clone(), members, embed, locate, group: Arc::new(group) }
    }

    pub fn trivial(parent: &Arc<FiniteGroup>) -> FiniteSubgroup {
        Self::generated(parent, &[])
    }

    pub fn whole(parent: &Arc<FiniteGroup>) -> FiniteSubgroup {
        Self::generated(parent, parent.generators())
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// The subgroup as an abstract group.
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// Parent element of abstract element `i`.
    pub fn embed(&self, i: usize) -> usize {
        self.embed[i]
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embed
    }

    /// Abstract index of parent element `x`, if it is a member.
    pub fn locate(&self, x: usize) -> Option<usize> {
        self.locate.get(&x).copied()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.locate.contains_key(&x)
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.members.len()
    }

    pub fn normalized_by(&self, g: usize) -> bool {
        self.group.generators().iter().all(|&i| self.contains(self.parent.conj(self.embed[i], g)))
    }

    pub fn is_normal(&self) -> bool {
        self.parent.generators().iter().all(|&g| self.normalized_by(g))
    }

    /// Canonical representative (minimal index) of the left coset `xK`.
    pub fn left_coset_rep(&self, x: usize) -> usize {
        self.members.iter().map(|&k| self.parent.mul(x, k)).min().unwrap()
    }

    /// Minimal representatives of the left cosets `xK`, together with the
    /// coset number of every parent element.
    pub fn left_cosets(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.order();
        let mut which = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if which[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(x);
            for &k in &self.members {
                which[self.parent.mul(x, k)] = c;
            }
        }
        (reps, which)
    }
}

#[derive(Clone, Debug)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    images: Vec<usize>,
}

impl GroupHom {
    /// Checks `φ(x·g) = φ(x)·φ(g)` for all `x` and all generators `g`, which
    /// together with `φ(1) = 1` is equivalent to multiplicativity.
    pub fn new(source: Arc<FiniteGroup>, target: Arc<FiniteGroup>, images: Vec<usize>) -> Result<GroupHom> {
        if images.len() != source.order() || images[0] != 0 {
            return Err(Error::NotAnAction("image table has wrong shape".into()));
        }
        for x in 0..source.order() {
            for &g in source.generators() {
                if images[source.mul(x, g)] != target.mul(images[x], images[g]) {
                    return Err(Error::NotAnAction("map is not multiplicative".into()));
                }
            }
        }
        Ok(GroupHom { source, target, images })
    }

    /// The homomorphism determined by images of `gens` (which must generate
    /// `source`). On inconsistency returns the offending position in `gens`.
    pub fn from_generator_images(
        source: &Arc<FiniteGroup>,
        target: &Arc<FiniteGroup>,
        gens: &[usize],
        gen_images: &[usize],
    ) -> std::result::Result<GroupHom, usize> {
        let n = source.order();
        let mut images = vec![usize::MAX; n];
        images[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        let mut visited = 1;
        while let Some(x) = queue.pop_front() {
            for (k, (&g, &gi)) in gens.iter().zip(gen_images).enumerate() {
                let y = source.mul(x, g);
                let yi = target.mul(images[x], gi);
                if images[y] == usize::MAX {
                    images[y] = yi;
                    visited += 1;
                    queue.push_back(y);
                } else if images[y] != yi {
                    return Err(k);
                }
            }
        }
        if visited != n {
            return Err(gens.len());
        }
        Ok(GroupHom { source: source.clone(), target: target.clone(), images })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.order()];
        for &i in &self.images {
            hit[i] = true;
        }
        hit.iter().all(|&h| h)
    }
}

pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let (g, elems) = FiniteGroup::from_closure(&[1 % n], 0usize, move |a: &usize, b: &usize| (a + b) % n, n + 1).unwrap();
    let labels = elems.iter().map(|&k| if k == 0 { "1".to_string() } else { format!("r^{k}") }).collect();
    g.with_labels(labels)
}

/// Dihedral group of order `2m`: pairs `(k, ε)` standing for `r^k s^ε`,
/// generated by `r = (1, 0)` and `s = (0, 1)` in that order.
pub fn dihedral(m: usize) -> FiniteGroup {
    assert!(m >= 1);
    let mul = move |a: &(usize, u8), b: &(usize, u8)| {
        let k = if a.1 == 0 { (a.0 + b.0) % m } else { (a.0 + m - b.0) % m };
        (k, a.1 ^ b.1)
    };
    let (g, elems) = FiniteGroup::from_closure(&[(1 % m, 0u8), (0, 1u8)], (0, 0), mul, 2 * m + 1).unwrap();
    let labels = elems
        .iter()
        .map(|&(k, e)| match (k, e) {
            (0, 0) => "1".to_string(),
            (0, 1) => "s".to_string(),
            (k, 0) => format!("r^{k}"),
            (k, _) => format!("r^{k}s"),
        })
        .collect();
    g.with_labels(labels)
}

/// Dicyclic group of order `4m` (quaternion group for `m = 2`).
pub fn dicyclic(m: usize) -> FiniteGroup {
    assert!(m >= 1);
    let n = 2 * m;
    let mul = move |a: &(usize, u8), b: &(usize, u8)| match (a.1, b.1) {
        (0, e) => ((a.0 + b.0) % n, e),
        (1, 0) => ((a.0 + n - b.0) % n, 1),
        _ => ((a.0 + n - b.0 + m) % n, 0),
    };
    let (g, elems) = FiniteGroup::from_closure(&[(1, 0u8), (0, 1u8)], (0, 0), mul, 2 * n + 1).unwrap();
    let labels = elems
        .iter()
        .map(|&(k, e)| match (k, e) {
            (0, 0) => "1".to_string(),
            (0, 1) => "x".to_string(),
            (k, 0) => format!("a^{k}"),
            (k, _) => format!("a^{k}x"),
        })
        .collect();
    g.with_labels(labels)
}

pub fn abelian(moduli: &[usize]) -> FiniteGroup {
    let r = moduli.len();
    let ms = moduli.to_vec();
    let gens: Vec<Vec<usize>> = (0..r)
        .map(|i| {
            let mut v = vec![0; r];
            v[i] = 1 % ms[i];
            v
        })
        .collect();
    let cap = moduli.iter().product::<usize>() + 1;
    let (g, elems) = FiniteGroup::from_closure(
        &gens,
        vec![0; r],
        move |a: &Vec<usize>, b: &Vec<usize>| a.iter().zip(b).zip(&ms).map(|((x, y), m)| (x + y) % m).collect(),
        cap,
    )
    .unwrap();
    let labels = elems
        .iter()
        .map(|v| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    g.with_labels(labels)
}

pub fn symmetric(n: usize) -> FiniteGroup {
    if n <= 1 {
        return FiniteGroup::from_generators(&[]).unwrap();
    }
    let transposition: Vec<usize> = (0..n).map(|i| if i < 2 { 1 - i } else { i }).collect();
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    FiniteGroup::from_generators(&[transposition, cycle]).unwrap()
}

pub fn alternating(n: usize) -> FiniteGroup {
    let gens: Vec<Vec<usize>> = (2..n)
        .map(|k| {
            let mut p: Vec<usize> = (0..n).collect();
            p[0] = 1;
            p[1] = k;
            p[k] = 0;
            p
        })
        .collect();
    FiniteGroup::from_generators(&gens).unwrap()
}

/// Parses permutations in cycle notation, generators separated by `;`,
/// e.g. `(0,1,2)(3,4);(0,1)`.
pub fn parse_permutations(s: &str) -> Result<Vec<Vec<usize>>> {
    let bad = || Error::Parse(format!("bad permutation list `{s}`"));
    let mut cycles_per_gen: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut degree = 0;
    for part in s.split(';') {
        let part = part.trim();
        let mut cycles = Vec::new();
        for c in part.split(')') {
            let c = c.trim();
            if c.is_empty() {
                continue;
            }
            let c = c.strip_prefix('(').ok_or_else(bad)?;
            if c.trim().is_empty() {
                continue;
            }
            let pts = c.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
            degree = degree.max(pts.iter().max().map_or(0, |m| m + 1));
            cycles.push(pts);
        }
        cycles_per_gen.push(cycles);
    }
    let mut out = Vec::new();
    for cycles in cycles_per_gen {
        let mut p: Vec<usize> = (0..degree).collect();
        let mut seen = vec![false; degree];
        for c in cycles {
            for (i, &a) in c.iter().enumerate() {
                if seen[a] {
                    return Err(bad());
                }
                seen[a] = true;
                p[a] = c[(i + 1) % c.len()];
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Builds a group from a spec such as `cyclic:6`, `dihedral:8` (order 8),
/// `symmetric:4`, `alternating:5`, `abelian:2,4`, `quaternion:8`,
/// `dicyclic:12` or `perm:(0,1);(1,2)`.
pub fn parse_group_spec(spec: &str) -> Result<FiniteGroup> {
    let bad = || Error::Parse(format!("bad group spec `{spec}`"));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    let num = |a: &str| a.trim().parse::<usize>().map_err(|_| bad());
    let g = match kind.trim() {
        "cyclic" => {
            let n = num(arg)?;
            if n == 0 {
                return Err(bad());
            }
            cyclic(n)
        }
        "dihedral" => {
            let n = num(arg)?;
            if n < 2 || n % 2 != 0 {
                return Err(bad());
            }
            dihedral(n / 2)
        }
        "quaternion" | "dicyclic" => {
            let n = num(arg)?;
            if n < 4 || n % 4 != 0 {
                return Err(bad());
            }
            dicyclic(n / 4)
        }
        "symmetric" => symmetric(num(arg)?),
        "alternating" => {
            let n = num(arg)?;
            if n < 3 {
                return FiniteGroup::from_generators(&[]);
            }
            alternating(n)
        }
        "abelian" => {
            let ms = arg.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if ms.contains(&0) {
                return Err(bad());
            }
            abelian(&ms)
        }
        "perm" => FiniteGroup::from_generators(&parse_permutations(arg)?)?,
        _ => return Err(bad()),
    };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_orders() {
        let s3 = FiniteGroup::from_generators(&[vec![1, 0, 2], vec![0, 2, 1]]).unwrap();
        assert_eq!(s3.order(), 6);
        let one = FiniteGroup::from_generators(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(one.order(), 1);
        let c5 = FiniteGroup::from_generators(&[vec![1, 2, 3, 4, 0]]).unwrap();
        assert_eq!(c5.order(), 5);
    }

    #[test]
    fn cap_is_enforced() {
        let err = FiniteGroup::from_generators_capped(&[vec![1, 0, 2, 3], vec![1, 2, 3, 0]], 10).unwrap_err();
        assert_eq!(err, Error::ClosureTooLarge { cap: 10 });
    }

    #[test]
    fn axioms_and_classes() {
        for g in [symmetric(3), dihedral(4), dicyclic(2), abelian(&[2, 4]), alternating(4)] {
            assert!(g.verify_axioms());
            let c = g.classes();
            assert_eq!(c.sizes.iter().sum::<usize>(), g.order());
            for (i, m) in c.members.iter().enumerate() {
                assert_eq!(c.reps[i], m[0]);
            }
            for h in 0..g.order() {
                assert_eq!(g.centralizer_index(h) * (0..g.order()).filter(|&x| g.mul(x, h) == g.mul(h, x)).count(), g.order());
            }
        }
        let mut sizes = symmetric(3).classes().sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(cyclic(5).classes().len(), 5);
        assert_eq!(cyclic(1).classes().len(), 1);
    }

    #[test]
    fn large_groups_use_closure_products() {
        let g = symmetric(7);
        assert_eq!(g.order(), 5040);
        for x in [1usize, 17, 999, 4000] {
            assert_eq!(g.mul(x, g.inv(x)), 0);
            assert_eq!(g.mul(g.inv(x), x), 0);
        }
        assert_eq!(g.classes().len(), 15);
    }

    #[test]
    fn dihedral_reflection_classes() {
        let d = dihedral(4);
        let s = d.generators()[1];
        assert_eq!(d.centralizer_index(s), 2);
        let d5 = dihedral(5);
        assert_eq!(d5.centralizer_index(d5.generators()[1]), 5);
    }

    #[test]
    fn subgroup_and_normality() {
        let d = Arc::new(dihedral(4));
        let s = d.generators()[1];
        let h = FiniteSubgroup::generated(&d, &[s]);
        assert_eq!(h.order(), 2);
        assert!(!h.is_normal());
        let r = d.generators()[0];
        let rot = FiniteSubgroup::generated(&d, &[r]);
        assert!(rot.is_normal());
        assert_eq!(rot.index(), 2);
        let (reps, which) = h.left_cosets();
        assert_eq!(reps.len(), 4);
        assert!(which.iter().all(|&w| w < 4));
    }

    #[test]
    fn homomorphism_from_generators() {
        let z4 = Arc::new(cyclic(4));
        let z2 = Arc::new(cyclic(2));
        let hom = GroupHom::from_generator_images(&z4, &z2, &[1], &[1]).unwrap();
        assert!(hom.is_surjective());
        let z3 = Arc::new(cyclic(3));
        assert!(GroupHom::from_generator_images(&z3, &z2, &[1], &[1]).is_err());
    }

    #[test]
    fn spec_parser() {
        assert_eq!(parse_group_spec("dihedral:8").unwrap().order(), 8);
        assert_eq!(parse_group_spec("perm:(0,1);(1,2)").unwrap().order(), 6);
        assert_eq!(parse_group_spec("quaternion:8").unwrap().order(), 8);
        assert_eq!(parse_group_spec("abelian:2,4").unwrap().order(), 8);
        assert_eq!(parse_group_spec("alternating:5").unwrap().order(), 60);
        assert!(parse_group_spec("dihedral:7").is_err());
        assert!(parse_group_spec("nonsense").is_err());
    }
}
