mod common;

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::Rng;

use l2mult_core::character_table::character_table;
use l2mult_core::equivariant::{finite_group_crosscheck, FiniteCwComplex};
use l2mult_core::finite_group::{parse_group_spec, FiniteGroup, FiniteSubgroup};
use l2mult_core::group_ring::{GroupAlgebraMatrix, GroupRingMatrix};
use l2mult_core::quotient::cyclic_chain;
use l2mult_core::rational::{frac, int, parse_rational, Rational};
use l2mult_core::runner::{run, seed_from_env, Experiment, ExperimentConfig, ExperimentReport};
use l2mult_core::spectral::{luck_bound_check, luck_bound_check_word, rank_nullity, FiniteRep, VnDim, WordRep};
use l2mult_core::words::BuiltinGroup;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let t = start.elapsed();
    if t > limit {
        Err(format!("{detail}; took {:.2}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    } else {
        Ok(format!("{detail}; {:.2}s", t.as_secs_f64()))
    }
}

fn exact(v: &VnDim) -> Result<Rational, String> {
    v.exact().cloned().ok_or_else(|| format!("expected an exact value, got {v}"))
}

fn z_approximation() -> Outcome {
    let start = Instant::now();
    let z = BuiltinGroup::free_abelian(1);
    let moduli: Vec<usize> = (1..=10).map(|n| 1 << n).collect();
    let chain = cyclic_chain(&z, &moduli).map_err(|e| e.to_string())?;
    let laplacian = GroupRingMatrix::parse(&z, "2*1 + -1*a + -1*a'").unwrap();
    let difference = GroupRingMatrix::parse(&z, "1 + -1*a").unwrap();
    for (level, &n) in chain.levels().iter().zip(&moduli) {
        let rho = FiniteRep::regular(level.target());
        let ln = rank_nullity(&level.via.push_matrix(&laplacian), &rho);
        let dn = rank_nullity(&level.via.push_matrix(&difference), &rho);
        // kernel of the circulant 1 − g: the N-th roots of unity ζ with ζ = 1
        let roots = (0..n).filter(|&k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos() > 1.0 - 1e-12).count();
        let expected_null = frac(roots as i64, n as i64);
        if exact(&ln.nullity)? != expected_null || exact(&dn.nullity)? != expected_null {
            return Err(format!("N = {n}: nullity {} / {}", ln.nullity, dn.nullity));
        }
        if exact(&dn.rank)? != int(1) - frac(1, n as i64) {
            return Err(format!("N = {n}: rank of 1 − g is {}", dn.rank));
        }
        if (exact(&dn.rank)? - int(1)).abs() != frac(1, n as i64) {
            return Err(format!("N = {n}: rank does not approach 1 at rate 1/N"));
        }
    }
    within(Duration::from_secs(1), start, "nullity 1/2^n and rank 1 − 1/2^n for n = 1..10".into())
}

fn cyclic_laplacian(g: &Arc<FiniteGroup>) -> GroupAlgebraMatrix {
    let r = g.generators()[0];
    let mut a = GroupAlgebraMatrix::zeros(g, 1, 1);
    a.add_term(0, 0, 0, int(2));
    a.add_term(0, 0, r, int(-1));
    a.add_term(0, 0, g.inv(r), int(-1));
    a
}

fn fk_integrality() -> Outcome {
    let start = Instant::now();
    for n in 2..=64usize {
        let g = Arc::new(parse_group_spec(&format!("cyclic:{n}")).unwrap());
        let rep = luck_bound_check(&cyclic_laplacian(&g), &FiniteRep::regular(&g), 1).map_err(|e| e.to_string())?;
        let expected = (n * n).to_string();
        if rep.lowest_coefficient.as_deref() != Some(expected.as_str()) {
            return Err(format!("Z/{n}: lowest coefficient {:?}, expected {expected}", rep.lowest_coefficient));
        }
        let powered = rep.det.powi(n as i32);
        if (powered - (n * n) as f64).abs() > 1e-6 * (n * n) as f64 {
            return Err(format!("Z/{n}: det^N = {powered}"));
        }
    }
    let mut r = common::rng(seed_from_env());
    let free = BuiltinGroup::free(2);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (size, degree) = if i % 2 == 0 { (1, r.random_range(100..=200)) } else { (2, r.random_range(50..=100)) };
        let a = common::random_ring_matrix(&free, size, 3, 3, &mut r);
        let rho = WordRep::random_permutation(&free, degree, &mut r).map_err(|e| e.to_string())?;
        let b = a.adjoint(&free).mul(&free, &a);
        let rep = luck_bound_check_word(&b, &rho).map_err(|e| e.to_string())?;
        if rep.det < 1.0 - 1e-9 || !rep.pass {
            return Err(format!("instance {i} ({size}×{size}, degree {degree}): {rep:?}"));
        }
        worst = worst.max(rep.log_deviation.unwrap_or(0.0));
    }
    within(
        Duration::from_secs(30),
        start,
        format!("det^N = N² for N ≤ 64; 50 random A*A with det ≥ 1, worst log deviation {worst:.1e}"),
    )
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

fn cyclic_presentation_complex(g: &Arc<FiniteGroup>) -> FiniteCwComplex {
    let r = g.generators()[0];
    let mut d1 = GroupAlgebraMatrix::zeros(g, 1, 1);
    d1.add_term(0, 0, r, int(1));
    d1.add_term(0, 0, 0, int(-1));
    let mut d2 = GroupAlgebraMatrix::zeros(g, 1, 1);
    let mut x = 0;
    for _ in 0..g.order() {
        d2.add_term(0, 0, x, int(1));
        x = g.mul(x, r);
    }
    FiniteCwComplex::free(g, &[1, 1, 1], vec![d1, d2]).unwrap()
}

fn segment_with_fixed_vertex(g: &Arc<FiniteGroup>) -> FiniteCwComplex {
    let (r, s) = (g.generators()[0], g.generators()[1]);
    let mut b = GroupAlgebraMatrix::zeros(g, 1, 1);
    b.add_term(0, 0, r, int(1));
    b.add_term(0, 0, 0, int(-1));
    FiniteCwComplex::new(
        g,
        vec![vec!["v".into()], vec!["e".into()]],
        vec![vec![FiniteSubgroup::generated(g, &[s])], vec![FiniteSubgroup::trivial(g)]],
        vec![b],
    )
    .unwrap()
}

fn finite_crosscheck() -> Outcome {
    let start = Instant::now();
    let group = |s: &str| Arc::new(parse_group_spec(s).unwrap());
    let gen_sub = |g: &Arc<FiniteGroup>, k: usize| FiniteSubgroup::generated(g, &[g.generators()[k]]);
    let mut corpus: Vec<(String, FiniteCwComplex, FiniteSubgroup)> = Vec::new();
    for (spec, k) in [
        ("cyclic:4", None),
        ("cyclic:6", Some(0)),
        ("dihedral:6", Some(1)),
        ("symmetric:3", None),
        ("dihedral:8", Some(0)),
        ("quaternion:8", Some(0)),
        ("alternating:4", Some(0)),
        ("symmetric:4", Some(0)),
        ("abelian:2,4", None),
        ("dicyclic:12", Some(1)),
        ("dihedral:48", Some(1)),
    ] {
        let g = group(spec);
        let h = k.map_or_else(|| FiniteSubgroup::whole(&g), |k| gen_sub(&g, k));
        corpus.push((format!("Cayley graph of {spec}"), cayley_graph(&g), h));
    }
    let c4 = group("cyclic:4");
    let r2 = c4.mul(c4.generators()[0], c4.generators()[0]);
    corpus.push(("presentation complex of cyclic:4".into(), cyclic_presentation_complex(&c4), FiniteSubgroup::generated(&c4, &[r2])));
    let d8 = group("dihedral:8");
    corpus.push(("segment with stabilized vertex over dihedral:8".into(), segment_with_fixed_vertex(&d8), gen_sub(&d8, 0)));
    let mut checks = 0;
    for (i, (name, cx, h)) in corpus.iter().enumerate() {
        let t = character_table(h.group()).map_err(|e| e.to_string())?;
        for k in 0..t.len() {
            let rows = finite_group_crosscheck(cx, h, &t, k, seed_from_env() + i as u64).map_err(|e| format!("{name}: {e}"))?;
            checks += rows.len();
        }
    }
    within(Duration::from_secs(60), start, format!("{} instances, {checks} degree × character comparisons agree", corpus.len()))
}

fn load_and_run(name: &str) -> Result<ExperimentReport, String> {
    let path = common::config_path(name);
    let cfg = ExperimentConfig::from_file(&path).map_err(|e| e.to_string())?;
    let exp = Experiment::resolve(cfg, path.parent().unwrap_or(Path::new("."))).map_err(|e| e.to_string())?;
    run(&exp, None).map_err(|e| e.to_string())
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn dinf_experiment() -> Outcome {
    let start = Instant::now();
    let rep = load_and_run("dinf_kernel.json")?;
    if !rep.failures.is_empty() {
        return Err(format!("failed levels: {:?}", rep.failures));
    }
    for (level, m) in rep.levels.iter().zip([2i64, 4, 8, 16, 32]) {
        let raw: Vec<u64> = level.rows.iter().map(|r| r.raw).collect();
        if raw != [1, 0, 0, 1] {
            return Err(format!("m = {m}: raw table {raw:?}"));
        }
        for row in &level.rows {
            let expected = if row.raw == 1 { frac(1, 2 * m) } else { Rational::zero() };
            if q(&row.normalized) != expected {
                return Err(format!("m = {m}: normalized {} for {row:?}", row.normalized));
            }
            let dev = row.deviation.as_deref().map(q).ok_or("missing prediction")?;
            if dev > frac(1, 2 * m) {
                return Err(format!("m = {m}: deviation {dev}"));
            }
        }
    }
    within(Duration::from_secs(5), start, "raw table (1,0,0,1) at m = 2..32, normalized 1/(2m), deviation ≤ 1/(2m)".into())
}

/// Fixed points on `ℤ/m` of a word in `t: x ↦ x+1`, `s: x ↦ −x`.
fn fixed_points(word: &str, m: i64) -> usize {
    (0..m)
        .filter(|&x0| {
            let x = word.chars().fold(x0, |x, c| match c {
                't' => (x + 1).rem_euclid(m),
                's' => (-x).rem_euclid(m),
                _ => unreachable!(),
            });
            x == x0
        })
        .count()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn farber_table() -> Outcome {
    let start = Instant::now();
    let moduli = [2i64, 4, 8, 16, 32];
    let reflection = load_and_run("dinf_reflection.json")?;
    for row in &reflection.farber {
        let m = moduli[row.level];
        let expected = frac(fixed_points(&row.word, m) as i64, m);
        if q(&row.value) != expected {
            return Err(format!("m = {m}, g = {}: {} vs fixed-coset count {expected}", row.word, row.value));
        }
        let table = match row.word.as_str() {
            "s" => Some(gcd(2, m)),
            "t" => Some(0),
            _ => None,
        };
        if let Some(count) = table {
            if q(&row.value) * int(m) != int(count) {
                return Err(format!("m = {m}, g = {}: count {} vs {count}", row.word, q(&row.value) * int(m)));
            }
        }
    }
    if let Some(e) = &reflection.rel_farber_error {
        return Err(e.clone());
    }
    let persistent: Vec<_> = reflection.rel_farber.iter().filter(|r| r.g == "1" && r.h == "s").collect();
    if persistent.len() != moduli.len() || persistent.iter().any(|r| q(&r.deviation) != int(1)) {
        return Err(format!("non-normal chain deviations at (1,s): {persistent:?}"));
    }
    let kernel = load_and_run("dinf_kernel.json")?;
    for (n, &m) in moduli.iter().enumerate() {
        let dev = kernel.rel_farber.iter().filter(|r| r.level == n).map(|r| q(&r.deviation)).max().unwrap_or_default();
        if dev.clone() * int(m) != int(2) {
            return Err(format!("kernel chain at m = {m}: max deviation {dev} is not 2/m"));
        }
    }
    within(
        Duration::from_secs(5),
        start,
        "fixed-coset counts m / gcd(2,m) / 0 reproduced; deviation 1 at (1,s) persists; kernel chain deviations 2/m".into(),
    )
}

fn free_by_finite_experiment() -> Outcome {
    let start = Instant::now();
    let rep = load_and_run("free_by_finite_inversion.json")?;
    if !rep.failures.is_empty() {
        return Err(format!("failed levels: {:?}", rep.failures));
    }
    let half = frac(1, 2);
    for level in &rep.levels {
        let n = level.normalizer as i64;
        for row in level.rows.iter().filter(|r| r.p == 1) {
            let dev = (q(&row.normalized) - &half).abs();
            if dev > frac(2, n) {
                return Err(format!("N = {n}, χ #{}: deviation {dev} > 2/N", row.chi));
            }
        }
        if level.level < 3 {
            let m = 1usize << (level.level + 1);
            let (b1, triv, sign) = common::torus_graph_oracle(m);
            let raw: Vec<u64> = level.rows.iter().filter(|r| r.p == 1).map(|r| r.raw).collect();
            if level.betti[1] != b1 || raw != [triv as u64, sign as u64] {
                return Err(format!("N = {n}: b_1 {} and {raw:?} vs oracle {b1}, ({triv}, {sign})", level.betti[1]));
            }
        }
    }
    let deepest = rep.levels.last().ok_or("no levels")?;
    let worst = deepest.rows.iter().filter(|r| r.p == 1).map(|r| (q(&r.normalized) - &half).abs()).max().unwrap();
    if worst > frac(1, 500) {
        return Err(format!("deepest deviation {worst} > 0.002"));
    }
    within(
        Duration::from_secs(600),
        start,
        format!("H_1 multiplicities within 2/N of 1/2 at N = 4..1024, deepest deviation {worst}; graph oracle agrees for n ≤ 3"),
    )
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let base = seed_from_env();
    for (name, prop) in common::PROPERTIES {
        for i in 0..200u64 {
            prop(base.wrapping_add(i)).map_err(|e| format!("{name}, case {i}: {e}"))?;
        }
    }
    within(Duration::from_secs(120), start, format!("{} suites × 200 cases", common::PROPERTIES.len()))
}

fn trace_decay() -> Outcome {
    let mut violations = Vec::new();
    for name in ["dinf_kernel.json", "free_by_finite_inversion.json"] {
        let rep = load_and_run(name)?;
        for level in &rep.levels {
            for t in &level.traces {
                if q(&t.trace).abs() > int(2) {
                    violations.push(format!("{name} N = {}: Tr({}|H_{}) = {}", level.normalizer, t.h, t.p, t.trace));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok("|Tr(h|H_p)|/N ≤ 2/N at every level of both experiments".into())
    } else {
        Err(format!("{} violations, e.g. {}", violations.len(), violations[0]))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("Z-approximation", z_approximation),
        ("Fuglede-Kadison integrality", fk_integrality),
        ("finite-group cross-check", finite_crosscheck),
        ("D∞ experiment", dinf_experiment),
        ("Farber diagnostics", farber_table),
        ("free-by-finite experiment", free_by_finite_experiment),
        ("property suites", property_suites),
        ("trace decay", trace_decay),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
