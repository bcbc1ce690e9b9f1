//! Ordinary characters and Burnside–Dixon character tables.

use std::cmp::Ordering;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::finite_group::{FiniteGroup, FiniteSubgroup, CHARACTER_TABLE_CAP};

pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Class function on a finite group, one value per conjugacy class.
#[derive(Clone, Debug)]
pub struct OrdinaryCharacter {
    group: Arc<FiniteGroup>,
    values: Vec<Complex64>,
}

impl OrdinaryCharacter {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<Complex64>) -> OrdinaryCharacter {
        assert_eq!(values.len(), group.classes().len());
        OrdinaryCharacter { group, values }
    }

    pub fn trivial(group: &Arc<FiniteGroup>) -> OrdinaryCharacter {
        let n = group.classes().len();
        Self::new(group.clone(), vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn regular(group: &Arc<FiniteGroup>) -> OrdinaryCharacter {
        let n = group.classes().len();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[0] = Complex64::new(group.order() as f64, 0.0);
        Self::new(group.clone(), v)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.values[0].re.round().max(0.0) as usize
    }

    pub fn at(&self, x: usize) -> Complex64 {
        self.values[self.group.class_of(x)]
    }

    /// `(1/|G|) Σ_g self(g)·conj(other(g))`
    pub fn inner(&self, other: &OrdinaryCharacter) -> Complex64 {
        let sizes = &self.group.classes().sizes;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .zip(sizes)
            .map(|((a, b), &h)| a * b.conj() * h as f64)
            .sum();
        s / self.group.order() as f64
    }

    /// Values divided by the degree.
    pub fn normalized_values(&self) -> Vec<Complex64> {
        let d = self.values[0];
        self.values.iter().map(|v| v / d).collect()
    }

    pub fn restrict(&self, h: &FiniteSubgroup) -> OrdinaryCharacter {
        let hg = h.group();
        let vals = hg.classes().reps.iter().map(|&r| self.at(h.embed(r))).collect();
        OrdinaryCharacter::new(hg.clone(), vals)
    }

    pub fn scale(&self, c: f64) -> OrdinaryCharacter {
        OrdinaryCharacter::new(self.group.clone(), self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &OrdinaryCharacter) -> OrdinaryCharacter {
        OrdinaryCharacter::new(self.group.clone(), self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// True when all values are real integers within `1e-12`.
    pub fn is_rational_valued(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < 1e-12 && (v.re - v.re.round()).abs() < 1e-12)
    }
}

#[derive(Clone, Debug)]
pub struct CharacterTable {
    group: Arc<FiniteGroup>,
    irreducibles: Vec<OrdinaryCharacter>,
}

impl CharacterTable {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn irreducibles(&self) -> &[OrdinaryCharacter] {
        &self.irreducibles
    }

    pub fn len(&self) -> usize {
        self.irreducibles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreducibles.is_empty()
    }

    pub fn get(&self, i: usize) -> &OrdinaryCharacter {
        &self.irreducibles[i]
    }

    pub fn to_json(&self) -> Value {
        let c = self.group.classes();
        let classes: Vec<Value> = c
            .reps
            .iter()
            .zip(&c.sizes)
            .map(|(&r, &s)| json!({"representative": self.group.label(r), "size": s}))
            .collect();
        let chars: Vec<Value> = self
            .irreducibles
            .iter()
            .map(|chi| {
                json!({
                    "degree": chi.degree(),
                    "values": chi.values().iter().map(|v| json!([clean(v.re), clean(v.im)])).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({"order": self.group.order(), "classes": classes, "characters": chars})
    }
}

pub(crate) fn clean(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

/// Burnside–Dixon: common eigenvectors of the class-multiplication operators,
/// obtained as eigenvectors of one random Hermitian combination.
pub fn character_table(group: &Arc<FiniteGroup>) -> Result<CharacterTable> {
    if group.order() > CHARACTER_TABLE_CAP {
        return Err(Error::ClosureTooLarge { cap: CHARACTER_TABLE_CAP });
    }
    let cls = group.classes();
    let r = cls.len();
    let n = group.order();
    // a[i][j][l] = #{x ∈ K_i : x⁻¹ z_l ∈ K_j}
    let mut a = vec![vec![vec![0.0f64; r]; r]; r];
    for i in 0..r {
        for &x in &cls.members[i] {
            let xi = group.inv(x);
            for l in 0..r {
                let y = group.mul(xi, cls.reps[l]);
                a[i][cls.class_of[y]][l] += 1.0;
            }
        }
    }
    let h: Vec<f64> = cls.sizes.iter().map(|&s| s as f64).collect();
    let ops: Vec<DMatrix<Complex64>> = (0..r)
        .map(|i| DMatrix::from_fn(r, r, |l, j| Complex64::new(a[i][j][l] * (h[l] / h[j]).sqrt(), 0.0)))
        .collect();

    let mut last_err = String::new();
    for attempt in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt);
        let mut t = DMatrix::<Complex64>::zeros(r, r);
        for op in &ops {
            let adj = op.adjoint();
            let c: f64 = rng.random_range(-1.0..1.0);
            let d: f64 = rng.random_range(-1.0..1.0);
            t += (op + &adj) * Complex64::new(c, 0.0) + (op - &adj) * Complex64::new(0.0, d);
        }
        let eig = t.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let scale = ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if ev.windows(2).any(|w| w[1] - w[0] < 1e-6 * scale) {
            last_err = "eigenvalues of the class-sum combination are not separated".into();
            continue;
        }
        let mut chars = Vec::with_capacity(r);
        let mut ok = true;
        for k in 0..r {
            let y = eig.eigenvectors.column(k).into_owned();
            for op in &ops {
                let oy = op * &y;
                let lambda = y.dotc(&oy);
                let resid = (oy - &y * lambda).norm();
                if resid > 1e-7 * (1.0 + op.norm()) {
                    ok = false;
                }
            }
            let y0 = y[0];
            if y0.norm() < 1e-12 {
                ok = false;
                break;
            }
            let deg = y0.norm() * (n as f64).sqrt();
            let d = deg.round();
            if (deg - d).abs() > 1e-6 || d < 1.0 {
                ok = false;
                break;
            }
            let vals: Vec<Complex64> = (0..r).map(|l| ((y[l] / h[l].sqrt()) / y0).conj() * d).collect();
            chars.push(OrdinaryCharacter::new(group.clone(), vals));
        }
        if !ok {
            last_err = "class-sum eigenvectors are not common eigenvectors within 1e-8".into();
            continue;
        }
        let sum_sq: usize = chars.iter().map(|c| c.degree() * c.degree()).sum();
        if sum_sq != n {
            last_err = format!("sum of squared degrees {sum_sq} differs from the order {n}");
            continue;
        }
        let orth = chars.iter().enumerate().all(|(i, a)| {
            chars.iter().enumerate().all(|(j, b)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (a.inner(b) - Complex64::new(target, 0.0)).norm() < ORTHOGONALITY_TOL
            })
        });
        if !orth {
            last_err = "row orthogonality fails at 1e-8".into();
            continue;
        }
        chars.sort_by(compare_characters);
        return Ok(CharacterTable { group: group.clone(), irreducibles: chars });
    }
    Err(Error::NumericalDegeneracy(last_err))
}

fn compare_characters(a: &OrdinaryCharacter, b: &OrdinaryCharacter) -> Ordering {
    let key = |v: f64| (v * 1e9).round() as i64;
    a.degree().cmp(&b.degree()).then_with(|| {
        for (x, y) in a.values().iter().zip(b.values()) {
            let o = key(y.re).cmp(&key(x.re)).then(key(y.im).cmp(&key(x.im)));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

/// `Ind_H^G(χ)(g) = |C_G(g)|/|H| · Σ_{h ∈ H, h ~ g} χ(h)`
pub fn induce_ordinary(h: &FiniteSubgroup, chi: &OrdinaryCharacter) -> OrdinaryCharacter {
    let g = h.parent();
    let cls = g.classes();
    let hg = h.group();
    let mut sums = vec![Complex64::new(0.0, 0.0); cls.len()];
    for i in 0..hg.order() {
        sums[g.class_of(h.embed(i))] += chi.at(i);
    }
    let vals = sums
        .iter()
        .zip(&cls.sizes)
        .map(|(s, &k)| s * (g.order() as f64 / (h.order() as f64 * k as f64)))
        .collect();
    OrdinaryCharacter::new(g.clone(), vals)
}

/// Multiplicity of the irreducible `chi` in the character `theta`.
pub fn multiplicity(chi: &OrdinaryCharacter, theta: &OrdinaryCharacter) -> Result<u64> {
    let ip = theta.inner(chi);
    let m = ip.re.round();
    if (ip - Complex64::new(m, 0.0)).norm() > INTEGRALITY_TOL || m < 0.0 {
        return Err(Error::NotIntegral { value: ip.re, tol: INTEGRALITY_TOL });
    }
    Ok(m as u64)
}

/// Frobenius reciprocity `m(Ind χ, θ) = m(χ, Res θ)` for irreducible `chi`
/// of `H` and irreducible `theta` of the parent.
pub fn frobenius_check(h: &FiniteSubgroup, chi: &OrdinaryCharacter, theta: &OrdinaryCharacter) -> Result<bool> {
    let left = multiplicity(theta, &induce_ordinary(h, chi))?;
    let right = multiplicity(chi, &theta.restrict(h))?;
    Ok(left == right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::{abelian, alternating, cyclic, dicyclic, dihedral, symmetric};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cyclic_tables() {
        let z2 = Arc::new(cyclic(2));
        let t = character_table(&z2).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t.get(0).values()[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((t.get(1).values()[1] - c(-1.0, 0.0)).norm() < 1e-12);

        let z3 = Arc::new(cyclic(3));
        let t = character_table(&z3).unwrap();
        for chi in t.irreducibles() {
            for v in chi.values() {
                assert!(((v * v * v) - c(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn s3_degrees_and_orthogonality() {
        let s3 = Arc::new(symmetric(3));
        let t = character_table(&s3).unwrap();
        let degs: Vec<usize> = t.irreducibles().iter().map(|c| c.degree()).collect();
        assert_eq!(degs, vec![1, 1, 2]);
        // brute-force row orthogonality over elements, not classes
        for a in t.irreducibles() {
            for b in t.irreducibles() {
                let s: Complex64 = (0..6).map(|x| a.at(x) * b.at(x).conj()).sum::<Complex64>() / 6.0;
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((s - c(expect, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn column_orthogonality_and_regular_decomposition() {
        for g in [dihedral(6), dicyclic(3), alternating(5), abelian(&[2, 4]), symmetric(4)] {
            let g = Arc::new(g);
            let t = character_table(&g).unwrap();
            let cls = g.classes();
            for a in 0..cls.len() {
                for b in 0..cls.len() {
                    let s: Complex64 = t.irreducibles().iter().map(|chi| chi.values()[a] * chi.values()[b].conj()).sum();
                    let expect = if a == b { (g.order() / cls.sizes[a]) as f64 } else { 0.0 };
                    assert!((s - c(expect, 0.0)).norm() < 1e-8);
                }
            }
            let reg = OrdinaryCharacter::regular(&g);
            for chi in t.irreducibles() {
                assert_eq!(multiplicity(chi, &reg).unwrap() as usize, chi.degree());
            }
        }
    }

    #[test]
    fn induction_from_order_two_subgroup() {
        let s3 = Arc::new(symmetric(3));
        let tr = (0..6).find(|&x| s3.element_order(x) == 2).unwrap();
        let h = FiniteSubgroup::generated(&s3, &[tr]);
        let triv = OrdinaryCharacter::trivial(h.group());
        let ind = induce_ordinary(&h, &triv);
        // coset action fixed-point count
        let (reps, which) = h.left_cosets();
        for x in 0..6 {
            let fixed = reps.iter().filter(|&&f| which[s3.mul(x, f)] == which[f]).count();
            assert!((ind.at(x) - c(fixed as f64, 0.0)).norm() < 1e-12);
        }
        assert_eq!(ind.degree(), 3);
        let t = character_table(&s3).unwrap();
        assert_eq!(multiplicity(t.get(0), &ind).unwrap(), 1);

        let trivial_sub = FiniteSubgroup::trivial(&s3);
        let reg = induce_ordinary(&trivial_sub, &OrdinaryCharacter::trivial(trivial_sub.group()));
        assert!((reg.values()[0] - c(6.0, 0.0)).norm() < 1e-12);
        assert!(reg.values()[1..].iter().all(|v| v.norm() < 1e-12));

        let whole = FiniteSubgroup::whole(&s3);
        let chi = t.get(2).restrict(&whole);
        let back = induce_ordinary(&whole, &chi);
        for x in 0..6 {
            assert!((back.at(x) - t.get(2).at(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn frobenius_on_small_groups() {
        for g in [symmetric(3), dihedral(4), dicyclic(2), symmetric(4), dihedral(6)] {
            let g = Arc::new(g);
            let tg = character_table(&g).unwrap();
            for x in 0..g.order() {
                let h = FiniteSubgroup::generated(&g, &[x]);
                let th = character_table(h.group()).unwrap();
                for chi in th.irreducibles() {
                    for theta in tg.irreducibles() {
                        assert!(frobenius_check(&h, chi, theta).unwrap());
                    }
                }
            }
        }
    }
}
