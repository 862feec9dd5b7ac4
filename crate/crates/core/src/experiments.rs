//! Reproducible experiment bundles and the plumbing the command-line tool
//! shares with them: atomic writes, port and program selection, and report
//! formats.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{node_features, FeatureMatrix, FeatureSpec, Model, ModelKind};
use crate::graph::{
    consistent_port_numbering, generate, shuffled_port_numbering, weak_two_coloring, Coloring, DegreeBound, Graph,
    GraphKind, PortNumbering,
};
use crate::header::Header;
use crate::local::{
    constant_program, identity_program, run_rounds, single_leaf_program, wrap_gnn_as_program, DegreeSumProgram,
    DistinctDegreesProgram, Labeling,
};
use crate::oracles::{
    all_nodes_baseline, approx_ratio, greedy_maximal_matching, matching_vc_baseline, max_matching,
    min_dominating_set, min_vertex_cover, Problem, Ratio, Sense,
};
use crate::rl::{train, TrainConfig, TrainReport};

/// Writes `contents` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Which consistent port numbering to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortChoice {
    Canonical,
    Shuffle(u64),
}

impl PortChoice {
    pub fn numbering(self, g: &Graph) -> PortNumbering {
        match self {
            PortChoice::Canonical => consistent_port_numbering(g),
            PortChoice::Shuffle(seed) => shuffled_port_numbering(g, seed),
        }
    }
}

impl FromStr for PortChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "canonical" {
            return Ok(PortChoice::Canonical);
        }
        s.strip_prefix("shuffle:")
            .and_then(|seed| seed.parse().ok())
            .map(PortChoice::Shuffle)
            .ok_or_else(|| Error::InvalidParams(format!("ports must be canonical or shuffle:<seed>, got {s:?}")))
    }
}

impl fmt::Display for PortChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortChoice::Canonical => f.write_str("canonical"),
            PortChoice::Shuffle(seed) => write!(f, "shuffle:{seed}"),
        }
    }
}

/// Registered local programs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgramName {
    SingleLeaf,
    Constant(usize),
    Identity,
    DegreeSum,
    DistinctDegrees,
    Gnn(PathBuf),
}

impl FromStr for ProgramName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownProgram(s.to_string());
        Ok(match s {
            "single_leaf" => ProgramName::SingleLeaf,
            "constant" => ProgramName::Constant(0),
            "identity" => ProgramName::Identity,
            "degree_sum" => ProgramName::DegreeSum,
            "distinct_degrees" => ProgramName::DistinctDegrees,
            _ => {
                if let Some(k) = s.strip_prefix("constant:") {
                    ProgramName::Constant(k.parse().map_err(|_| unknown())?)
                } else if let Some(path) = s.strip_prefix("gnn:").filter(|p| !p.is_empty()) {
                    ProgramName::Gnn(PathBuf::from(path))
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

impl fmt::Display for ProgramName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramName::SingleLeaf => f.write_str("single_leaf"),
            ProgramName::Constant(k) => write!(f, "constant:{k}"),
            ProgramName::Identity => f.write_str("identity"),
            ProgramName::DegreeSum => f.write_str("degree_sum"),
            ProgramName::DistinctDegrees => f.write_str("distinct_degrees"),
            ProgramName::Gnn(p) => write!(f, "gnn:{}", p.display()),
        }
    }
}

/// Input features a checkpoint expects: one-hot degree, plus a weak
/// 2-coloring bit when the input is one wider than `delta`.
pub fn gnn_features(g: &Graph, model: &Model, coloring: Option<&Coloring>) -> Result<FeatureMatrix> {
    let delta = DegreeBound::new(model.delta)?;
    if model.input_dim == delta.get() {
        node_features(g, FeatureSpec::Degree, None, delta)
    } else if model.input_dim == delta.get() + 1 {
        let computed;
        let c = match coloring {
            Some(c) => c,
            None => {
                computed = weak_two_coloring(g)?;
                &computed
            }
        };
        node_features(g, FeatureSpec::DegreeWeak2, Some(c), delta)
    } else {
        Err(Error::ShapeError(format!(
            "model input width {} fits neither degree nor degree+weak2 features for delta {}",
            model.input_dim,
            delta.get()
        )))
    }
}

/// Runs a registered program on `g`.
pub fn run_program(g: &Graph, ports: &PortNumbering, prog: &ProgramName, coloring: Option<&Coloring>) -> Result<Labeling> {
    let blank = FeatureMatrix::new(vec![Vec::new(); g.n()])?;
    match prog {
        ProgramName::SingleLeaf => run_rounds(g, Some(ports), &blank, &single_leaf_program()),
        ProgramName::Constant(k) => run_rounds(g, Some(ports), &blank, &constant_program(*k)),
        ProgramName::Identity => run_rounds(g, Some(ports), &blank, &identity_program()),
        ProgramName::DegreeSum => run_rounds(g, Some(ports), &blank, &DegreeSumProgram),
        ProgramName::DistinctDegrees => run_rounds(g, Some(ports), &blank, &DistinctDegreesProgram),
        ProgramName::Gnn(path) => {
            let model = Model::read(path)?;
            let x = gnn_features(g, &model, coloring)?;
            run_rounds(g, Some(ports), &x, &wrap_gnn_as_program(model)?)
        }
    }
}

/// A family of graphs for the ratio experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    Star { k_min: usize, k_max: usize },
    Path { n_min: usize, n_max: usize },
    Cycle { n_min: usize, n_max: usize },
    RandomBounded { n: usize, delta: usize, count: usize },
    RandomBipartite { a: usize, b: usize, delta: usize, count: usize },
}

impl Family {
    /// Parses `star:2-8`, `path:2-10`, `cycle:3-9`, `random:<n>:<delta>`
    /// or `bipartite:<a>:<b>:<delta>`; random families take `count` graphs.
    pub fn parse(s: &str, count: usize) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("unrecognized family {s:?}"));
        let (name, rest) = s.split_once(':').ok_or_else(bad)?;
        let range = |r: &str| -> Result<(usize, usize)> {
            let (lo, hi) = r.split_once('-').unwrap_or((r, r));
            Ok((lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?))
        };
        let nums = |r: &str| -> Result<Vec<usize>> { r.split(':').map(|x| x.parse().map_err(|_| bad())).collect() };
        Ok(match name {
            "star" => {
                let (k_min, k_max) = range(rest)?;
                Family::Star { k_min, k_max }
            }
            "path" => {
                let (n_min, n_max) = range(rest)?;
                Family::Path { n_min, n_max }
            }
            "cycle" => {
                let (n_min, n_max) = range(rest)?;
                Family::Cycle { n_min, n_max }
            }
            "random" => match nums(rest)?[..] {
                [n, delta] => Family::RandomBounded { n, delta, count },
                _ => return Err(bad()),
            },
            "bipartite" => match nums(rest)?[..] {
                [a, b, delta] => Family::RandomBipartite { a, b, delta, count },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }

    /// Every member with the seed it is generated from.
    pub fn instances(&self, seed: u64) -> Vec<(GraphKind, u64)> {
        let fixed = |kinds: Vec<GraphKind>| kinds.into_iter().map(|k| (k, seed)).collect();
        match *self {
            Family::Star { k_min, k_max } => fixed((k_min..=k_max).map(|k| GraphKind::Star { k }).collect()),
            Family::Path { n_min, n_max } => fixed((n_min..=n_max).map(|n| GraphKind::Path { n }).collect()),
            Family::Cycle { n_min, n_max } => fixed((n_min..=n_max).map(|n| GraphKind::Cycle { n }).collect()),
            Family::RandomBounded { n, delta, count } => (0..count as u64)
                .map(|i| (GraphKind::RandomBounded { n, delta }, seed.wrapping_add(i)))
                .collect(),
            Family::RandomBipartite { a, b, delta, count } => (0..count as u64)
                .map(|i| (GraphKind::RandomBipartite { a, b, delta }, seed.wrapping_add(i)))
                .collect(),
        }
    }
}

/// Everything that determines an experiment's outputs. The output
/// directory is not part of the hash, so reruns elsewhere match byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub kinds: Vec<ModelKind>,
    pub train: TrainConfig,
    pub families: Vec<Family>,
    /// Distinct port numberings a trained policy is checked against.
    pub port_samples: usize,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn single_leaf(out_dir: impl Into<PathBuf>) -> Self {
        let train = TrainConfig::default();
        Self {
            name: "singleleaf".into(),
            seed: train.seed,
            kinds: vec![ModelKind::Vvc, ModelKind::Mb, ModelKind::Sb],
            port_samples: train.eval_port_numberings,
            train,
            families: Vec::new(),
            out_dir: out_dir.into(),
        }
    }

    pub fn ratios(out_dir: impl Into<PathBuf>, families: Vec<Family>, seed: u64) -> Self {
        Self {
            name: "ratios".into(),
            seed,
            kinds: Vec::new(),
            train: TrainConfig::default(),
            families,
            port_samples: 0,
            out_dir: out_dir.into(),
        }
    }

    pub fn header(&self) -> Header {
        Header::new(self, Some(self.seed))
    }

    /// The training configuration with the experiment's seed and port sample count.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            eval_port_numberings: self.port_samples,
            ..self.train.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: ModelKind,
    pub successes: usize,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleLeafReport {
    pub header: Header,
    pub spec: ExperimentSpec,
    pub summary: Vec<SummaryRow>,
    pub reports: Vec<TrainReport>,
}

impl SingleLeafReport {
    /// No MB or SB trial may succeed: their leaves are indistinguishable.
    pub fn separation_holds(&self) -> bool {
        self.summary
            .iter()
            .all(|r| r.kind == ModelKind::Vvc || r.successes == 0)
    }

    pub fn successes(&self, kind: ModelKind) -> Option<usize> {
        self.summary.iter().find(|r| r.kind == kind).map(|r| r.successes)
    }
}

pub const SINGLE_LEAF_REPORT: &str = "singleleaf_report.json";
pub const SINGLE_LEAF_REWARDS: &str = "singleleaf_rewards.csv";
pub const SINGLE_LEAF_SUMMARY: &str = "singleleaf_summary.csv";
pub const RATIOS_CSV: &str = "ratios.csv";

fn csv_bytes<R: Serialize>(header: &Header, columns: &[&str], rows: &[R]) -> Result<Vec<u8>> {
    let mut out = header.comment_lines().into_bytes();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    out.extend(w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    Ok(out)
}

#[derive(Serialize)]
struct RewardRow {
    kind: ModelKind,
    trial: usize,
    iteration: usize,
    mean_reward: f64,
}

/// Trains every kind in `spec.kinds` on `K_{1,3}` and writes the report
/// JSON, the reward curves, and the summary table into `spec.out_dir`.
pub fn run_single_leaf(spec: &ExperimentSpec) -> Result<SingleLeafReport> {
    let cfg = spec.train_config();
    let reports = spec
        .kinds
        .iter()
        .map(|&kind| train(&cfg, kind))
        .collect::<Result<Vec<_>>>()?;
    let summary: Vec<SummaryRow> = reports
        .iter()
        .map(|r| SummaryRow {
            kind: r.kind,
            successes: r.successes(),
            trials: r.trials.len(),
        })
        .collect();
    let header = spec.header();
    let rewards: Vec<RewardRow> = reports
        .iter()
        .flat_map(|r| {
            r.trials.iter().flat_map(move |t| {
                t.reward_curve.iter().map(move |c| RewardRow {
                    kind: r.kind,
                    trial: t.trial,
                    iteration: c.iteration,
                    mean_reward: c.mean_reward,
                })
            })
        })
        .collect();
    let report = SingleLeafReport {
        header: header.clone(),
        spec: spec.clone(),
        summary,
        reports,
    };
    let dir = &spec.out_dir;
    write_atomic(&dir.join(SINGLE_LEAF_REPORT), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    write_atomic(
        &dir.join(SINGLE_LEAF_REWARDS),
        &csv_bytes(&header, &["kind", "trial", "iteration", "mean_reward"], &rewards)?,
    )?;
    write_atomic(
        &dir.join(SINGLE_LEAF_SUMMARY),
        &csv_bytes(&header, &["kind", "successes", "trials"], &report.summary)?,
    )?;
    Ok(report)
}

/// One evaluated graph of the ratio experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub family: String,
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub mds_opt: usize,
    pub mds_all_nodes: usize,
    pub mds_ratio: Option<Ratio>,
    pub mvc_opt: usize,
    pub mvc_matching: usize,
    pub mvc_ratio: Option<Ratio>,
    pub matching_opt: usize,
    pub matching_greedy: usize,
    pub matching_ratio: Option<Ratio>,
}

pub const RATIO_COLUMNS: [&str; 15] = [
    "family",
    "index",
    "seed",
    "n",
    "m",
    "max_degree",
    "mds_opt",
    "mds_all_nodes",
    "mds_ratio",
    "mvc_opt",
    "mvc_matching",
    "mvc_ratio",
    "matching_opt",
    "matching_greedy",
    "matching_ratio",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RatiosOutcome {
    pub rows: Vec<RatioRow>,
    /// Instances over the oracle caps, with the reason.
    pub skipped: Vec<String>,
    pub violations: Vec<String>,
}

impl RatiosOutcome {
    pub fn max_mds_ratio(&self) -> Option<Ratio> {
        self.rows.iter().filter_map(|r| r.mds_ratio).max()
    }

    pub fn max_mvc_ratio(&self) -> Option<Ratio> {
        self.rows.iter().filter_map(|r| r.mvc_ratio).max()
    }
}

fn defined(r: Result<Ratio>) -> Result<Option<Ratio>> {
    match r {
        Ok(r) => Ok(Some(r)),
        Err(Error::Undefined) => Ok(None),
        Err(e) => Err(e),
    }
}

fn family_name(kind: &GraphKind) -> &'static str {
    match kind {
        GraphKind::Star { .. } => "star",
        GraphKind::Path { .. } => "path",
        GraphKind::Cycle { .. } => "cycle",
        GraphKind::RandomBounded { .. } => "random_bounded",
        GraphKind::RandomBipartite { .. } => "random_bipartite",
    }
}

/// Oracle optima, baseline sizes and exact ratios for one graph.
pub fn ratio_row(g: &Graph, family: &str, index: usize, seed: u64) -> Result<RatioRow> {
    let mds_opt = min_dominating_set(g)?.len();
    let mvc_opt = min_vertex_cover(g)?.len();
    let matching_opt = max_matching(g)?.len();
    let mds_all_nodes = all_nodes_baseline(g).len();
    let mvc_matching = matching_vc_baseline(g, None).len();
    let matching_greedy = greedy_maximal_matching(g, None).len();
    Ok(RatioRow {
        family: family.to_string(),
        index,
        seed,
        n: g.n(),
        m: g.m(),
        max_degree: g.max_degree(),
        mds_opt,
        mds_all_nodes,
        mds_ratio: defined(approx_ratio(mds_all_nodes, mds_opt, Sense::Min))?,
        mvc_opt,
        mvc_matching,
        mvc_ratio: defined(approx_ratio(mvc_matching, mvc_opt, Sense::Min))?,
        matching_opt,
        matching_greedy,
        matching_ratio: defined(approx_ratio(matching_greedy, matching_opt, Sense::Max))?,
    })
}

fn row_violations(r: &RatioRow) -> Vec<String> {
    let mut out = Vec::new();
    let tag = format!("{}#{} (seed {})", r.family, r.index, r.seed);
    let two = Ratio::integer(2);
    if let Some(x) = r.mds_ratio {
        if x > Ratio::integer(r.max_degree as u64 + 1) {
            out.push(format!("{tag}: all-nodes dominating set ratio {x} exceeds max degree + 1"));
        }
    }
    if let Some(x) = r.mvc_ratio.filter(|&x| x > two) {
        out.push(format!("{tag}: matching vertex cover ratio {x} exceeds 2"));
    }
    if let Some(x) = r.matching_ratio.filter(|&x| x > two) {
        out.push(format!("{tag}: greedy matching ratio {x} exceeds 2"));
    }
    out
}

/// Evaluates every family member in parallel, in canonical order, and
/// writes the per-graph CSV into `spec.out_dir`.
pub fn run_ratios(spec: &ExperimentSpec) -> Result<RatiosOutcome> {
    let instances: Vec<(usize, GraphKind, u64)> = spec
        .families
        .iter()
        .flat_map(|f| f.instances(spec.seed))
        .enumerate()
        .map(|(i, (k, s))| (i, k, s))
        .collect();
    let results = instances
        .par_iter()
        .map(|&(i, kind, seed)| {
            let g = generate(kind, seed)?;
            match ratio_row(&g, family_name(&kind), i, seed) {
                Ok(row) => Ok(Ok(row)),
                Err(e @ Error::TooLarge { .. }) => Ok(Err(format!("{}#{i} (seed {seed}): {e}", family_name(&kind)))),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outcome = RatiosOutcome {
        rows: Vec::new(),
        skipped: Vec::new(),
        violations: Vec::new(),
    };
    for r in results {
        match r {
            Ok(row) => {
                outcome.violations.extend(row_violations(&row));
                outcome.rows.push(row);
            }
            Err(skip) => outcome.skipped.push(skip),
        }
    }
    write_atomic(
        &spec.out_dir.join(RATIOS_CSV),
        &csv_bytes(&spec.header(), &RATIO_COLUMNS, &outcome.rows)?,
    )?;
    Ok(outcome)
}

/// An exact optimum as reported by the oracle command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleAnswer {
    pub header: Header,
    pub problem: Problem,
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
}

pub fn oracle_answer(g: &Graph, problem: Problem, header: Header) -> Result<OracleAnswer> {
    let (size, nodes, edges) = match problem {
        Problem::DominatingSet | Problem::VertexCover => {
            let s = if problem == Problem::DominatingSet {
                min_dominating_set(g)?
            } else {
                min_vertex_cover(g)?
            };
            (s.len(), Some(s.as_slice().to_vec()), None)
        }
        Problem::Matching => {
            let m = max_matching(g)?;
            (m.len(), None, Some(m.as_slice().iter().map(|&(u, v)| [u, v]).collect()))
        }
    };
    Ok(OracleAnswer {
        header,
        problem,
        size,
        nodes,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ports_and_programs() {
        assert_eq!("canonical".parse::<PortChoice>().unwrap(), PortChoice::Canonical);
        assert_eq!("shuffle:17".parse::<PortChoice>().unwrap(), PortChoice::Shuffle(17));
        assert!(matches!("shuffle:x".parse::<PortChoice>(), Err(Error::InvalidParams(_))));
        assert_eq!(PortChoice::Shuffle(3).to_string(), "shuffle:3");
        assert_eq!("constant:1".parse::<ProgramName>().unwrap(), ProgramName::Constant(1));
        assert_eq!("gnn:m.json".parse::<ProgramName>().unwrap(), ProgramName::Gnn("m.json".into()));
        for bad in ["nope", "gnn:", "constant:x"] {
            let e = bad.parse::<ProgramName>().unwrap_err();
            assert!(matches!(e, Error::UnknownProgram(_)));
            assert_eq!(e.exit_code(), 2);
        }
    }

    #[test]
    fn parse_families() {
        assert_eq!(Family::parse("star:2-8", 0).unwrap(), Family::Star { k_min: 2, k_max: 8 });
        assert_eq!(Family::parse("cycle:5", 0).unwrap(), Family::Cycle { n_min: 5, n_max: 5 });
        assert_eq!(
            Family::parse("random:12:3", 200).unwrap(),
            Family::RandomBounded { n: 12, delta: 3, count: 200 }
        );
        assert!(Family::parse("random:12", 1).is_err());
        assert!(Family::parse("wheel:4", 1).is_err());
        assert_eq!(Family::Star { k_min: 2, k_max: 8 }.instances(0).len(), 7);
        assert!(Family::Star { k_min: 5, k_max: 4 }.instances(0).is_empty());
    }

    #[test]
    fn ratio_row_on_a_star() {
        let g = generate(GraphKind::Star { k: 4 }, 0).unwrap();
        let r = ratio_row(&g, "star", 0, 0).unwrap();
        assert_eq!(r.mds_ratio, Some(Ratio::integer(5)));
        assert_eq!((r.mvc_opt, r.mvc_matching), (1, 2));
        assert_eq!(r.matching_ratio, Some(Ratio::integer(1)));
        assert!(row_violations(&r).is_empty());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
