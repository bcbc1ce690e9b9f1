//! Approximation experiments along quotient chains: per-level normalized
//! multiplicities, predictions, trace sequences, Farber diagnostics and
//! table emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::character_table::{character_table, CharacterTable};
use crate::characters::{biset_character, i_infinite};
use crate::equivariant::{builtin_for, quotient_complex, EquivariantCWData};
use crate::error::{Error, Result};
use crate::finite_group::{parse_group_spec, FiniteSubgroup};
use crate::quotient::{
    abelian_mod_chain, cyclic_chain, dihedral_chain, finite_word, free_by_finite_chain, DihedralFiber,
    FiniteIndexSubgroup, QuotientChain, QuotientMap,
};
use crate::rational::{parse_rational, Rational};
use crate::words::{BuiltinGroup, Family, Word, WordSubgroup};

pub const SEED_VAR: &str = "L2MULT_SEED";
const DEFAULT_SEED: u64 = 0x5eed;

/// Seed for randomized checks, from `L2MULT_SEED` when set.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupSpec {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    DihedralInfinite,
    /// `action[k][i]` is the image of free generator `i` under H generator `k`
    FreeByFinite { rank: usize, h: String, action: Vec<Vec<String>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<BuiltinGroup> {
        Ok(match self {
            GroupSpec::Free { rank } => BuiltinGroup::free(*rank),
            GroupSpec::FreeAbelian { rank } => BuiltinGroup::free_abelian(*rank),
            GroupSpec::DihedralInfinite => BuiltinGroup::dihedral_infinite(),
            GroupSpec::FreeByFinite { rank, h, action } => {
                let hg = Arc::new(parse_group_spec(h)?);
                let free = BuiltinGroup::free(*rank);
                let words = action
                    .iter()
                    .map(|imgs| imgs.iter().map(|w| free.parse_word(w)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                BuiltinGroup::free_by_finite(*rank, hg, &words)?
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Builtin(String),
    File { file: String },
    Inline(Value),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainTemplate {
    Dihedral,
    Cyclic,
    AbelianMod,
    FreeByFiniteMod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    /// finite group spec, e.g. `dihedral:8`
    pub target: String,
    /// images of the source generators as words over the target's generators
    pub images: Vec<String>,
    /// generators of the fiber, as words over the target's generators
    #[serde(default)]
    pub fiber: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainSpec {
    Template {
        template: ChainTemplate,
        moduli: Vec<usize>,
        #[serde(default)]
        fiber: Option<DihedralFiber>,
    },
    Explicit {
        levels: Vec<LevelSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IrreducibleSelection {
    All(String),
    Indices(Vec<usize>),
}

impl Default for IrreducibleSelection {
    fn default() -> Self {
        IrreducibleSelection::All("all".into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HSpec {
    #[serde(default)]
    pub words: Vec<String>,
    #[serde(default)]
    pub irreducibles: IrreducibleSelection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// asserted `b_p^{(2)}` per degree, as fractions
    #[serde(default)]
    pub l2_betti: BTreeMap<usize, String>,
    #[serde(default)]
    pub infinite_centralizers: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeBy {
    #[default]
    GroupIndex,
    FreePartIndex,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub group: GroupSpec,
    pub complex: ComplexSpec,
    pub chain: ChainSpec,
    #[serde(default)]
    pub h: HSpec,
    #[serde(default)]
    pub degrees: Option<Vec<usize>>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub normalize_by: NormalizeBy,
    #[serde(default)]
    pub probe_words: Vec<String>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "experiment".into()
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// A configuration with every reference resolved.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub group: BuiltinGroup,
    pub complex: EquivariantCWData,
    pub chain: QuotientChain,
    pub h: WordSubgroup,
    pub table: CharacterTable,
    pub characters: Vec<usize>,
    pub degrees: Vec<usize>,
    pub probes: Vec<Word>,
    pub l2_betti: BTreeMap<usize, Rational>,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::ConfigInvalid(_) => e,
        other => Error::ConfigInvalid(other.to_string()),
    }
}

fn build_chain(group: &BuiltinGroup, spec: &ChainSpec) -> Result<QuotientChain> {
    match spec {
        ChainSpec::Template { template, moduli, fiber } => match template {
            ChainTemplate::Dihedral => {
                if !matches!(group.family(), Family::DihedralInfinite) {
                    return Err(Error::UnsupportedFamily("dihedral chains need D∞".into()));
                }
                dihedral_chain(moduli, fiber.unwrap_or(DihedralFiber::Kernel))
            }
            ChainTemplate::Cyclic => cyclic_chain(group, moduli),
            ChainTemplate::AbelianMod => abelian_mod_chain(group, moduli),
            ChainTemplate::FreeByFiniteMod => free_by_finite_chain(group, moduli),
        },
        ChainSpec::Explicit { levels } => {
            let built = levels
                .iter()
                .map(|l| {
                    let q = Arc::new(parse_group_spec(&l.target)?);
                    if l.images.len() != group.generator_count() {
                        return Err(Error::ConfigInvalid(format!("level {} needs one image per generator", l.target)));
                    }
                    let images = l.images.iter().map(|w| finite_word(&q, w)).collect::<Result<Vec<_>>>()?;
                    let fiber_gens = l.fiber.iter().map(|w| finite_word(&q, w)).collect::<Result<Vec<_>>>()?;
                    let via = QuotientMap::new(group.clone(), q.clone(), images)?;
                    Ok(FiniteIndexSubgroup::new(via, FiniteSubgroup::generated(&q, &fiber_gens)))
                })
                .collect::<Result<Vec<_>>>()?;
            QuotientChain::new(built)
        }
    }
}

impl Experiment {
    /// Resolves references; file paths are relative to `base_dir`.
    pub fn resolve(config: ExperimentConfig, base_dir: &Path) -> Result<Experiment> {
        Self::resolve_inner(config, base_dir).map_err(config_err)
    }

    fn resolve_inner(config: ExperimentConfig, base_dir: &Path) -> Result<Experiment> {
        let group = config.group.build()?;
        let complex = match &config.complex {
            ComplexSpec::Builtin(name) => builtin_for(&group, name)?,
            ComplexSpec::File { file } => {
                let path = base_dir.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
                EquivariantCWData::from_json(&group, &v)?
            }
            ComplexSpec::Inline(v) => EquivariantCWData::from_json(&group, v)?,
        };
        let chain = build_chain(&group, &config.chain)?;
        let h_words = config.h.words.iter().map(|w| group.parse_word(w)).collect::<Result<Vec<_>>>()?;
        let h = WordSubgroup::generated(&group, &h_words, crate::equivariant::STABILIZER_CAP)?;
        let table = character_table(h.group())?;
        let characters = match &config.h.irreducibles {
            IrreducibleSelection::All(s) if s == "all" => (0..table.len()).collect(),
            IrreducibleSelection::All(s) => return Err(Error::ConfigInvalid(format!("unknown irreducible selection `{s}`"))),
            IrreducibleSelection::Indices(v) => {
                if let Some(bad) = v.iter().find(|&&i| i >= table.len()) {
                    return Err(Error::ConfigInvalid(format!("H has no irreducible #{bad}")));
                }
                v.clone()
            }
        };
        let degrees = config.degrees.clone().unwrap_or_else(|| (0..=complex.dimension()).collect());
        if let Some(bad) = degrees.iter().find(|&&p| p > complex.dimension()) {
            return Err(Error::ConfigInvalid(format!("degree {bad} exceeds the complex dimension")));
        }
        let probes = if config.probe_words.is_empty() {
            (0..group.generator_count()).map(|k| group.generator(k)).collect()
        } else {
            config.probe_words.iter().map(|w| group.parse_word(w)).collect::<Result<Vec<_>>>()?
        };
        let l2_betti = config
            .limits
            .l2_betti
            .iter()
            .map(|(p, v)| Ok((*p, parse_rational(v)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Experiment { config, group, complex, chain, h, table, characters, degrees, probes, l2_betti })
    }

    pub fn truncate(&mut self, levels: usize) {
        self.chain.truncate(levels);
    }

    /// `[G : free part]`
    fn free_part_index(&self) -> usize {
        match self.group.family() {
            Family::FreeByFinite(d) => d.h().order(),
            Family::DihedralInfinite => 2,
            _ => 1,
        }
    }

    /// Whether every nontrivial element of `H` has infinite centralizer
    /// index, by oracle or by assertion.
    pub fn centralizer_route(&self) -> bool {
        if self.config.limits.infinite_centralizers {
            return true;
        }
        self.h.words().iter().filter(|w| !self.group.is_identity(w)).all(|w| matches!(self.group.centralizer_index(w), Some(None)))
    }

    /// `(χ(1)/|H|)·b_p^{(2)}` when available, times `[G:F]` under free-part normalization.
    pub fn prediction(&self, p: usize, chi: usize) -> Option<Rational> {
        let b = self.l2_betti.get(&p)?;
        if !self.centralizer_route() {
            return None;
        }
        let scale = match self.config.normalize_by {
            NormalizeBy::GroupIndex => 1,
            NormalizeBy::FreePartIndex => self.free_part_index(),
        };
        let degree = self.table.get(chi).degree() * scale;
        Some(b * Rational::new((degree as i64).into(), (self.h.order() as i64).into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityRow {
    pub p: usize,
    pub chi: usize,
    pub degree: u64,
    pub raw: u64,
    pub normalized: String,
    pub normalized_decimal: f64,
    pub prediction: Option<String>,
    pub deviation: Option<String>,
    pub deviation_decimal: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub p: usize,
    pub h: String,
    pub trace: String,
    pub normalized: String,
    pub normalized_decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub group_index: usize,
    pub normalizer: usize,
    pub cells: Vec<usize>,
    pub betti: Vec<usize>,
    pub rows: Vec<MultiplicityRow>,
    pub traces: Vec<TraceRow>,
    /// `Σ_χ χ(1)·normalized = b_p/N` per reported degree, when every irreducible is selected
    pub sum_rule: Option<bool>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSummary {
    pub index: usize,
    pub degree: u64,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSequence {
    pub p: usize,
    pub chi: usize,
    pub values: Vec<String>,
    pub prediction: Option<String>,
    pub final_deviation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSequence {
    pub p: usize,
    pub h: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarberRow {
    pub level: usize,
    pub word: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelFarberRow {
    pub level: usize,
    pub g: String,
    pub h: String,
    pub value: String,
    pub limit: String,
    pub deviation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub word: String,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub level: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub group: String,
    pub h: Vec<String>,
    pub characters: Vec<CharacterSummary>,
    pub degrees: Vec<usize>,
    pub normalize_by: NormalizeBy,
    pub levels: Vec<LevelRecord>,
    pub convergence: Vec<ConvergenceSequence>,
    pub trace_sequences: Vec<TraceSequence>,
    pub farber: Vec<FarberRow>,
    pub rel_farber: Vec<RelFarberRow>,
    pub rel_farber_error: Option<String>,
    pub centralizer_growth: Vec<GrowthRow>,
    pub assumptions: Vec<String>,
    pub failures: Vec<Failure>,
}

impl ExperimentReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn frac(n: usize, d: usize) -> Rational {
    Rational::new((n as i64).into(), (d as i64).into())
}

fn dec(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `|{fK : f⁻¹ḡf ∈ K}| / [Q:K]` per level and probe word `g ≠ 1`.
pub fn farber_diagnostic(chain: &QuotientChain, probe_words: &[Word]) -> Vec<FarberRow> {
    let mut rows = Vec::new();
    for (n, level) in chain.levels().iter().enumerate() {
        let g = level.via.source();
        let q = level.target();
        let (reps, _) = level.fiber.left_cosets();
        for w in probe_words.iter().filter(|w| !g.is_identity(w)) {
            let x = level.via.evaluate(w);
            let count = reps.iter().filter(|&&f| level.fiber.contains(q.conj(x, q.inv(f)))).count();
            rows.push(FarberRow { level: n, word: g.format_word(w), value: frac(count, reps.len()).to_string() });
        }
    }
    rows
}

/// `i_G(g,h)`: conjugacy oracles, or `δ_{g,1}δ_{h,1}` under the
/// infinite-centralizer assertion.
fn i_limit(g: &BuiltinGroup, w: &Word, h: &Word, assertion: bool) -> Result<Rational> {
    match i_infinite(g, w, h) {
        Some(v) => Ok(v),
        None if assertion => {
            Ok(if g.is_identity(w) && g.is_identity(h) { Rational::from_integer(1.into()) } else { Rational::zero() })
        }
        None => Err(Error::UnsupportedFamily(format!("{} has no conjugacy oracle", g.name()))),
    }
}

/// `|ψ_n(g,h) − i_G(g,h)|` per level, probe word `g` (and the identity) and `h ∈ H`.
pub fn rel_farber_diagnostic(
    chain: &QuotientChain,
    h: &WordSubgroup,
    probe_words: &[Word],
    infinite_centralizers: bool,
) -> Result<Vec<RelFarberRow>> {
    let mut rows = Vec::new();
    for (n, level) in chain.levels().iter().enumerate() {
        let g = level.via.source();
        let psi = biset_character(level, h)?;
        let mut probes = vec![Word::identity()];
        probes.extend(probe_words.iter().filter(|w| !g.is_identity(w)).cloned());
        for w in &probes {
            let x = level.via.evaluate(w);
            for (k, hw) in h.words().iter().enumerate() {
                let value = psi.value(x, k).clone();
                let limit = i_limit(g, w, hw, infinite_centralizers)?;
                let deviation = (&value - &limit).abs();
                rows.push(RelFarberRow {
                    level: n,
                    g: g.format_word(w),
                    h: g.format_word(hw),
                    value: value.to_string(),
                    limit: limit.to_string(),
                    deviation: deviation.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

/// `[Q_n : C_{Q_n}(w̄)]` per level.
pub fn centralizer_growth(chain: &QuotientChain, w: &Word) -> Vec<u64> {
    chain.levels().iter().map(|l| l.target().centralizer_index(l.via.evaluate(w)) as u64).collect()
}

fn run_level(exp: &Experiment, n: usize) -> LevelRecord {
    let start = Instant::now();
    let level = &exp.chain.levels()[n];
    let group_index = level.index();
    let mut rec = LevelRecord {
        level: n,
        group_index,
        normalizer: group_index,
        cells: Vec::new(),
        betti: Vec::new(),
        rows: Vec::new(),
        traces: Vec::new(),
        sum_rule: None,
        seconds: 0.0,
        error: None,
    };
    let result = (|| -> Result<()> {
        let normalizer = match exp.config.normalize_by {
            NormalizeBy::GroupIndex => group_index,
            NormalizeBy::FreePartIndex => {
                let f = exp.free_part_index();
                if !group_index.is_multiple_of(f) {
                    return Err(Error::ConfigInvalid(format!("index {group_index} is not divisible by {f}")));
                }
                group_index / f
            }
        };
        rec.normalizer = normalizer;
        let qc = quotient_complex(&exp.complex, level, &exp.h)?;
        let report = qc.multiplicities(&exp.table)?;
        rec.cells = (0..=qc.dimension()).map(|p| qc.cell_count(p)).collect();
        rec.betti = report.betti.clone();
        let nr = Rational::from_integer((normalizer as i64).into());
        let all = exp.characters.len() == exp.table.len();
        let mut sum_ok = true;
        for &p in &exp.degrees {
            let mut sum = Rational::zero();
            for &chi in &exp.characters {
                let raw = report.multiplicities[p][chi];
                let normalized = Rational::from_integer((raw as i64).into()) / &nr;
                let degree = exp.table.get(chi).degree() as u64;
                sum += &normalized * Rational::from_integer((degree as i64).into());
                let prediction = exp.prediction(p, chi);
                let deviation = prediction.as_ref().map(|pr| (&normalized - pr).abs());
                rec.rows.push(MultiplicityRow {
                    p,
                    chi,
                    degree,
                    raw,
                    normalized_decimal: dec(&normalized),
                    normalized: normalized.to_string(),
                    prediction: prediction.map(|x| x.to_string()),
                    deviation_decimal: deviation.as_ref().map(dec),
                    deviation: deviation.map(|x| x.to_string()),
                });
            }
            sum_ok &= sum == Rational::from_integer((report.betti[p] as i64).into()) / &nr;
            for (h, t) in report.traces[p].iter().enumerate() {
                if h == 0 {
                    continue;
                }
                let normalized = t / &nr;
                rec.traces.push(TraceRow {
                    p,
                    h: exp.group.format_word(&exp.h.words()[h]),
                    trace: t.to_string(),
                    normalized_decimal: dec(&normalized),
                    normalized: normalized.to_string(),
                });
            }
        }
        if all {
            rec.sum_rule = Some(sum_ok);
        }
        Ok(())
    })();
    if let Err(e) = result {
        rec.error = Some(e.to_string());
    }
    rec.seconds = start.elapsed().as_secs_f64();
    rec
}

/// Runs every level, in parallel on `parallel` threads when given.
pub fn run(exp: &Experiment, parallel: Option<usize>) -> Result<ExperimentReport> {
    let indices: Vec<usize> = (0..exp.chain.len()).collect();
    let levels: Vec<LevelRecord> = match parallel {
        Some(k) if k > 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
            pool.install(|| indices.par_iter().map(|&n| run_level(exp, n)).collect())
        }
        _ => indices.iter().map(|&n| run_level(exp, n)).collect(),
    };
    let g = &exp.group;
    let ok: Vec<&LevelRecord> = levels.iter().filter(|l| l.error.is_none()).collect();
    let mut convergence = Vec::new();
    for &p in &exp.degrees {
        for &chi in &exp.characters {
            let row_of = |l: &LevelRecord| l.rows.iter().find(|r| r.p == p && r.chi == chi).cloned();
            let values: Vec<String> = ok.iter().filter_map(|l| row_of(l)).map(|r| r.normalized).collect();
            let prediction = exp.prediction(p, chi).map(|x| x.to_string());
            let final_deviation = ok.last().and_then(|l| row_of(l)).and_then(|r| r.deviation);
            convergence.push(ConvergenceSequence { p, chi, values, prediction, final_deviation });
        }
    }
    let mut trace_sequences = Vec::new();
    for &p in &exp.degrees {
        for hw in exp.h.words().iter().skip(1) {
            let label = g.format_word(hw);
            let values =
                ok.iter().filter_map(|l| l.traces.iter().find(|t| t.p == p && t.h == label)).map(|t| t.normalized.clone()).collect();
            trace_sequences.push(TraceSequence { p, h: label, values });
        }
    }
    let farber = farber_diagnostic(&exp.chain, &exp.probes);
    let (rel_farber, rel_farber_error) =
        match rel_farber_diagnostic(&exp.chain, &exp.h, &exp.probes, exp.config.limits.infinite_centralizers) {
            Ok(rows) => (rows, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
    let mut growth_words: Vec<Word> = exp.h.words().iter().filter(|w| !g.is_identity(w)).cloned().collect();
    for w in &exp.probes {
        if !growth_words.contains(&g.normal_form(w)) {
            growth_words.push(g.normal_form(w));
        }
    }
    let centralizer_growth =
        growth_words.iter().map(|w| GrowthRow { word: g.format_word(w), values: centralizer_growth(&exp.chain, w) }).collect();
    let mut assumptions = Vec::new();
    if exp.chain.levels().iter().all(FiniteIndexSubgroup::is_normal) {
        assumptions.push("every level is a kernel, so the chain is sofic relative to H by the normal-kernel criterion".into());
    } else {
        assumptions.push("the chain has non-normal levels; soficity relative to H is not checked".into());
    }
    if !exp.l2_betti.is_empty() {
        assumptions.push("L2-Betti numbers are supplied by the configuration, not computed".into());
    }
    if exp.config.limits.infinite_centralizers {
        assumptions.push("nontrivial elements of H are asserted to have infinite centralizer index; see centralizer_growth".into());
    } else if exp.centralizer_route() {
        assumptions.push("infinite centralizer indices of nontrivial elements of H are decided by the group's oracle".into());
    }
    if exp.config.normalize_by == NormalizeBy::FreePartIndex {
        assumptions.push(format!("values are normalized by the index in the free part, of index {} in G", exp.free_part_index()));
    }
    let failures = levels
        .iter()
        .filter_map(|l| l.error.as_ref().map(|e| Failure { level: l.level, reason: e.clone() }))
        .collect();
    let characters = exp
        .characters
        .iter()
        .map(|&i| {
            let chi = exp.table.get(i);
            CharacterSummary { index: i, degree: chi.degree() as u64, values: chi.values().iter().map(|v| [v.re, v.im]).collect() }
        })
        .collect();
    Ok(ExperimentReport {
        name: exp.config.name.clone(),
        group: g.name(),
        h: exp.h.words().iter().map(|w| g.format_word(w)).collect(),
        characters,
        degrees: exp.degrees.clone(),
        normalize_by: exp.config.normalize_by,
        levels,
        convergence,
        trace_sequences,
        farber,
        rel_farber,
        rel_farber_error,
        centralizer_growth,
        assumptions,
        failures,
    })
}

pub const CSV_HEADER: &str =
    "n,N_n,p,chi,degree,raw_m,normalized,normalized_decimal,prediction,deviation,deviation_decimal";

/// One row per level × degree × character.
pub fn to_csv(records: &[LevelRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for l in records {
        for r in &l.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                l.level,
                l.normalizer,
                r.p,
                r.chi,
                r.degree,
                r.raw,
                r.normalized,
                r.normalized_decimal,
                r.prediction.as_deref().unwrap_or("none"),
                r.deviation.as_deref().unwrap_or(""),
                r.deviation_decimal.map(|d| d.to_string()).unwrap_or_default(),
            ));
        }
    }
    out
}

/// Writes `<name>.csv` and/or `<name>.json` into `dir`.
pub fn emit(report: &ExperimentReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join(format!("{}.csv", report.name));
        std::fs::write(&path, to_csv(&report.levels))?;
        written.push(path);
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join(format!("{}.json", report.name));
        std::fs::write(&path, report.to_json_string())?;
        written.push(path);
    }
    Ok(written)
}
