#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use l2mult_core::character_table::{character_table, frobenius_check};
use l2mult_core::equivariant::{quotient_complex, EquivariantCWData, QuotientComplex};
use l2mult_core::finite_group::{parse_group_spec, FiniteGroup, FiniteSubgroup};
use l2mult_core::group_ring::{GroupAlgebraMatrix, GroupRingElement, GroupRingMatrix};
use l2mult_core::quotient::{abelian_mod_chain, dihedral_chain, free_by_finite_chain, DihedralFiber, QuotientMap};
use l2mult_core::rational::{frac, int, Rational};
use l2mult_core::spectral::{
    moments_check, rank_nullity, spectral_measure, spectral_measure_word, FiniteRep, WordRep,
};
use l2mult_core::words::{BuiltinGroup, Word, WordSubgroup};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const SMALL_GROUPS: &[&str] = &[
    "cyclic:2",
    "cyclic:3",
    "cyclic:5",
    "cyclic:6",
    "dihedral:6",
    "dihedral:8",
    "dihedral:10",
    "quaternion:8",
    "abelian:2,2",
    "abelian:2,4",
    "symmetric:3",
    "alternating:4",
    "dicyclic:12",
    "symmetric:4",
    "dihedral:16",
];

pub fn small_group(rng: &mut impl Rng) -> Arc<FiniteGroup> {
    Arc::new(parse_group_spec(SMALL_GROUPS[rng.random_range(0..SMALL_GROUPS.len())]).unwrap())
}

pub fn random_algebra_matrix(g: &Arc<FiniteGroup>, rows: usize, cols: usize, rng: &mut impl Rng) -> GroupAlgebraMatrix {
    let mut a = GroupAlgebraMatrix::zeros(g, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            for _ in 0..rng.random_range(0..4) {
                let c = rng.random_range(-3i64..=3);
                if c != 0 {
                    a.add_term(i, j, rng.random_range(0..g.order()), int(c));
                }
            }
        }
    }
    a
}

pub fn random_rep(g: &Arc<FiniteGroup>, rng: &mut impl Rng) -> FiniteRep {
    match rng.random_range(0..3) {
        0 => FiniteRep::regular(g),
        1 => FiniteRep::trivial(g),
        _ => {
            let t = character_table(g).unwrap();
            let chi = t.get(rng.random_range(0..t.len()));
            FiniteRep::irreducible(chi, rng.random()).unwrap()
        }
    }
}

pub fn random_word(g: &BuiltinGroup, max_len: usize, rng: &mut impl Rng) -> Word {
    let mut s = String::new();
    for _ in 0..rng.random_range(0..=max_len) {
        s.push((b'a' + rng.random_range(0..g.generator_count()) as u8) as char);
        if rng.random_bool(0.5) {
            s.push('\'');
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    g.parse_word(&s).unwrap()
}

pub fn random_ring_matrix(g: &BuiltinGroup, n: usize, terms: usize, max_len: usize, rng: &mut impl Rng) -> GroupRingMatrix {
    let rows = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let t: Vec<(Rational, Word)> = (0..rng.random_range(1..=terms))
                        .map(|_| (int(rng.random_range(-2i64..=2)), random_word(g, max_len, rng)))
                        .collect();
                    GroupRingElement::from_terms(g, t)
                })
                .collect()
        })
        .collect();
    GroupRingMatrix::from_rows(rows)
}

/// Exact rank plus the kernel mass of the spectral measure of `A*A` equals the column count.
pub fn prop_rank_nullity(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let g = small_group(&mut r);
    let (k, l) = (r.random_range(1..=2), r.random_range(1..=2));
    let a = random_algebra_matrix(&g, k, l, &mut r);
    let rho = random_rep(&g, &mut r);
    let rn = rank_nullity(&a, &rho);
    let total = rn.rank.to_f64() + rn.nullity.to_f64();
    if (total - l as f64).abs() > 1e-9 {
        return Err(format!("rank + nullity = {total}, expected {l}"));
    }
    let mu = spectral_measure(&a.adjoint().mul(&a), &rho).map_err(|e| e.to_string())?;
    let other = rn.rank.to_f64() + mu.kernel_mass();
    if (other - l as f64).abs() > 1e-6 {
        return Err(format!("rank {} + spectral kernel {} ≠ {l}", rn.rank, mu.kernel_mass()));
    }
    Ok(())
}

/// Moments of the spectral measure match normalized traces of powers, k ≤ 6.
pub fn prop_moments(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let g = small_group(&mut r);
    let n = r.random_range(1..=2);
    let a = random_algebra_matrix(&g, n, n, &mut r);
    let rho = random_rep(&g, &mut r);
    let b = a.adjoint().mul(&a);
    for row in moments_check(&b, &rho, 6).map_err(|e| e.to_string())? {
        if (row.moment - row.trace).abs() > row.tolerance {
            return Err(format!("k = {}: moment {} vs trace {}", row.k, row.moment, row.trace));
        }
    }
    Ok(())
}

/// The spectral measure of `A` in `ρ∘φ` equals that of `φ(A)` in `ρ`.
pub fn prop_pullback(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let free = BuiltinGroup::free(2);
    let q = small_group(&mut r);
    let images = vec![r.random_range(0..q.order()), r.random_range(0..q.order())];
    let map = QuotientMap::new(free.clone(), q.clone(), images).map_err(|e| e.to_string())?;
    let a = random_ring_matrix(&free, r.random_range(1..=2), 3, 3, &mut r);
    let b = a.adjoint(&free).mul(&free, &a);
    let rho = random_rep(&q, &mut r);
    let direct = spectral_measure(&map.push_matrix(&b), &rho).map_err(|e| e.to_string())?;
    let pulled = spectral_measure_word(&b, &WordRep::Pullback { map, rep: rho }).map_err(|e| e.to_string())?;
    if !direct.approx_eq(&pulled) {
        return Err(format!("{direct:?} vs {pulled:?}"));
    }
    Ok(())
}

pub struct Instance {
    pub description: String,
    pub complex: QuotientComplex,
    pub orbifold_euler: Rational,
}

/// A quotient complex with an H-action from one of the built-in families.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    match rng.random_range(0..4) {
        0 => {
            let m = rng.random_range(2..=9);
            let g = BuiltinGroup::dihedral_infinite();
            let cw = EquivariantCWData::line_dinf();
            let chain = dihedral_chain(&[m], DihedralFiber::Kernel).unwrap();
            let h = WordSubgroup::generated(&g, &[g.parse_word("s").unwrap()], 4).unwrap();
            Instance {
                description: format!("D∞ mod {m}"),
                complex: quotient_complex(&cw, &chain.levels()[0], &h).unwrap(),
                orbifold_euler: cw.orbifold_euler(),
            }
        }
        1 | 2 => {
            let f = BuiltinGroup::free(2);
            let swap = rng.random_bool(0.5);
            let imgs = if swap { ["b", "a"] } else { ["a'", "b'"] };
            let action = vec![imgs.iter().map(|w| f.parse_word(w).unwrap()).collect()];
            let g = BuiltinGroup::free_by_finite(2, Arc::new(parse_group_spec("cyclic:2").unwrap()), &action).unwrap();
            let cw = EquivariantCWData::tree_free_by_finite(&g).unwrap();
            let m = rng.random_range(2..=5);
            let chain = free_by_finite_chain(&g, &[m]).unwrap();
            let h = WordSubgroup::generated(&g, &[g.generator(2)], 4).unwrap();
            Instance {
                description: format!("F2 ⋊ Z/2 ({}) mod {m}", if swap { "swap" } else { "inversion" }),
                complex: quotient_complex(&cw, &chain.levels()[0], &h).unwrap(),
                orbifold_euler: cw.orbifold_euler(),
            }
        }
        _ => {
            let rank = rng.random_range(1..=3);
            let g = BuiltinGroup::free(rank);
            let cw = EquivariantCWData::rose_free(rank);
            let m = rng.random_range(2..=4);
            let chain = abelian_mod_chain(&g, &[m]).unwrap();
            let h = WordSubgroup::generated(&g, &[], 1).unwrap();
            Instance {
                description: format!("rose F{rank} mod {m}"),
                complex: quotient_complex(&cw, &chain.levels()[0], &h).unwrap(),
                orbifold_euler: cw.orbifold_euler(),
            }
        }
    }
}

/// `Σ_χ χ(1)·m(χ, H_p) = b_p`
pub fn prop_sum_rule(seed: u64) -> Result<(), String> {
    let inst = random_instance(&mut rng(seed));
    let qc = &inst.complex;
    let table = character_table(qc.h_group()).unwrap();
    let report = qc.multiplicities(&table).map_err(|e| e.to_string())?;
    for p in 0..=qc.dimension() {
        let s: u64 = (0..table.len()).map(|k| table.get(k).degree() as u64 * report.multiplicities[p][k]).sum();
        if s != report.betti[p] as u64 {
            return Err(format!("{}: degree {p} sum {s} vs b = {}", inst.description, report.betti[p]));
        }
    }
    Ok(())
}

/// `∂ ∘ h = h ∘ ∂` for every `h ∈ H`.
pub fn prop_commutation(seed: u64) -> Result<(), String> {
    let inst = random_instance(&mut rng(seed));
    let qc = &inst.complex;
    for p in 1..=qc.dimension() {
        let d = qc.boundary(p).unwrap();
        for h in 0..qc.h_group().order() {
            let left = d.compose(&qc.action(p, h).as_matrix());
            let right = qc.action(p - 1, h).as_matrix().compose(d);
            if left.to_dense_f64() != right.to_dense_f64() {
                return Err(format!("{}: h = {h} does not commute with ∂_{p}", inst.description));
            }
        }
    }
    Ok(())
}

/// `χ(X/Γ) = [G:Γ]·χ_orb(X)`
pub fn prop_orbifold_euler(seed: u64) -> Result<(), String> {
    let inst = random_instance(&mut rng(seed));
    let qc = &inst.complex;
    let expected = &inst.orbifold_euler * int(qc.index() as i64);
    if int(qc.euler_characteristic()) != expected {
        return Err(format!("{}: χ = {} vs {}", inst.description, qc.euler_characteristic(), expected));
    }
    Ok(())
}

/// `m(Ind χ, θ) = m(χ, Res θ)` for irreducibles of a random subgroup.
pub fn prop_frobenius(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let g = small_group(&mut r);
    let gens: Vec<usize> = (0..r.random_range(0..=2)).map(|_| r.random_range(0..g.order())).collect();
    let h = FiniteSubgroup::generated(&g, &gens);
    let th = character_table(h.group()).map_err(|e| e.to_string())?;
    let tg = character_table(&g).map_err(|e| e.to_string())?;
    let chi = th.get(r.random_range(0..th.len()));
    for k in 0..tg.len() {
        if !frobenius_check(&h, chi, tg.get(k)).map_err(|e| e.to_string())? {
            return Err(format!("Frobenius reciprocity fails for θ #{k}"));
        }
    }
    Ok(())
}

pub type Property = fn(u64) -> Result<(), String>;

pub const PROPERTIES: &[(&str, Property)] = &[
    ("rank + nullity", prop_rank_nullity),
    ("moment identity", prop_moments),
    ("pullback of spectral measures", prop_pullback),
    ("sum rule", prop_sum_rule),
    ("H-action commutes with boundary", prop_commutation),
    ("orbifold Euler characteristic", prop_orbifold_euler),
    ("Frobenius reciprocity", prop_frobenius),
];

fn rank_f64(mut m: Vec<Vec<f64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) else { break };
        if m[piv][c].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, piv);
        for i in 0..rows {
            if i != rank {
                let f = m[i][c] / m[rank][c];
                if f != 0.0 {
                    for j in c..cols {
                        m[i][j] -= f * m[rank][j];
                    }
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Homology of the `(ℤ/m)²` torus grid graph with the involution
/// `v ↦ −v`, which reverses every edge: returns `(b_1, m(triv), m(sign))`.
pub fn torus_graph_oracle(m: usize) -> (usize, usize, usize) {
    let n = m * m;
    let vid = |i: usize, j: usize| (i % m) * m + (j % m);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            edges.push((vid(i, j), vid(i + 1, j), (i, j, 0)));
            edges.push((vid(i, j), vid(i, j + 1), (i, j, 1)));
        }
    }
    let e = edges.len();
    let eid = |i: usize, j: usize, k: usize| 2 * vid(i, j) + k;
    let mut d = vec![vec![0.0; e]; n];
    for (c, &(t, h, _)) in edges.iter().enumerate() {
        d[h][c] += 1.0;
        d[t][c] -= 1.0;
    }
    // σ(edge(v, k)) = −edge(−v − e_k, k)
    let mut p = vec![vec![0.0; e]; e];
    for (c, &(_, _, (i, j, k))) in edges.iter().enumerate() {
        let (ni, nj) = ((m - i) % m, (m - j) % m);
        let (ti, tj) = if k == 0 { ((ni + m - 1) % m, nj) } else { (ni, (nj + m - 1) % m) };
        p[eid(ti, tj, k)][c] -= 1.0;
    }
    let b1 = e - rank_f64(d.clone());
    let mut stacked = d;
    for (r, row) in p.iter().enumerate() {
        let mut row = row.clone();
        row[r] -= 1.0;
        stacked.push(row);
    }
    let triv = e - rank_f64(stacked);
    (b1, triv, b1 - triv)
}

pub fn frac_str(n: i64, d: i64) -> String {
    frac(n, d).to_string()
}
