//! Batch experiments: Turán-type deletion runs, robustness of `G(p)` on
//! dense hosts, and monochromatic cycles in edge colourings.
//!
//! A run is a pure function of its [`ExperimentConfig`]: trials are spread
//! over rayon on streams derived from the master seed and merged in trial
//! order, so `results.csv`, `summary.json` and every stored certificate are
//! byte-identical across re-runs. Wall times go to `timings.csv`, and to the
//! `seconds` column only when `record_seconds` is set.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embedder::LayoutChoice;
use crate::extremal::{self, binom2, ExtremalQuery, Parity};
use crate::generators;
use crate::graph::{self, Graph, Vertex, VertexSeq};
use crate::oracle;
use crate::ramsey::{self, ColoringPattern, OddCycleCertificate};
use crate::regularity::{Budget, ClusterPartition, Policy};
use crate::rng::RngStream;
use crate::stitcher::{self, CycleCertificate, FindConfig};
use crate::{Error, Rational, Result};

pub const CSV_HEADER: &str = "trial,t,parity,scenario,outcome,stage,edges_kept,threshold_num,threshold_den,seconds,cert_path";

/// Default `C` values for `p = C/n` when a random host is asked for without
/// an edge probability.
pub const DEFAULT_C_SWEEP: [f64; 3] = [10.0, 20.0, 40.0];

fn ri(x: usize) -> Rational {
    Rational::from_integer(x as i128)
}

/// Parses `"a/b"`, an integer or a plain decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::param(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i128 = a.trim().parse().map_err(|_| bad())?;
        let b: i128 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if s.contains(['e', 'E']) {
        let f: f64 = s.parse().map_err(|_| bad())?;
        if !f.is_finite() {
            return Err(bad());
        }
        // Display for f64 never uses an exponent.
        return parse_rational(&format!("{f}"));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 30 {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let r = Rational::new(digits, 10i128.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

/// A rational config value: `"a/b"` or a JSON number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frac(pub Rational);

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Num(f64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Str(s) => s,
            Raw::Num(f) => format!("{f}"),
        };
        parse_rational(&text).map(Frac).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Gnp,
    Regular,
    Complete,
    /// `k` contiguous clusters in a ring, consecutive clusters wired with
    /// probability `p` (default 1). The ring is handed to the search as its
    /// partition.
    Planted,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deletion {
    /// `G' = G`.
    None,
    /// A uniformly random subset of the threshold size.
    Random,
    /// The extremal construction, randomly placed, intersected with `G`,
    /// topped up with random edges of `G` to the threshold size.
    Adversarial,
    /// `G` intersected with the placed construction, nothing added.
    Overlay,
}

impl fmt::Display for Deletion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deletion::None => "none",
            Deletion::Random => "random",
            Deletion::Adversarial => "adversarial",
            Deletion::Overlay => "overlay",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Extremal construction plus `beta C(n, 2)` random extra edges.
    A,
    /// Balanced complete bipartite graph plus `f(n)/p` edges inside one side;
    /// odd `t` only.
    B,
    /// Two cliques of orders `(1+eps') t` and `n - (1+eps') t + 1` sharing a
    /// vertex.
    C,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TParity {
    #[default]
    Any,
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    #[default]
    Floor,
    Ceil,
}

/// `t = round(frac n)`, moved down (floor) or up (ceil) to the parity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TFraction {
    pub frac: Frac,
    #[serde(default)]
    pub parity: TParity,
    #[serde(default)]
    pub round: Rounding,
}

impl TFraction {
    pub fn resolve(&self, n: usize) -> usize {
        let x = self.frac.0 * ri(n);
        let (mut t, step) = match self.round {
            Rounding::Floor => (x.floor().to_integer().max(0) as usize, -1i64),
            Rounding::Ceil => (x.ceil().to_integer().max(0) as usize, 1),
        };
        let want = match self.parity {
            TParity::Any => return t,
            TParity::Even => 0,
            TParity::Odd => 1,
        };
        if t % 2 != want {
            t = (t as i64 + step).max(0) as usize;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TSweep {
    pub from: usize,
    pub to: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: Model,
    pub n: usize,
    /// Edge probability of the random host (Turán, Ramsey) or of the
    /// sparsification `G(p)` (robustness).
    pub p: Option<f64>,
    /// `p = c/n`, one sweep point per value.
    pub c: Vec<f64>,
    pub d: Option<usize>,
    pub path: Option<PathBuf>,
    pub beta: Frac,
    pub gamma: Option<Frac>,
    pub eps: Frac,
    pub k: usize,
    pub c1: f64,
    pub c2: Frac,
    /// Recorded only; defaults to `10 eps`.
    pub rho: Option<Frac>,
    /// Recorded only; defaults to `48 eps`.
    pub delta: Option<Frac>,
    pub t: Vec<usize>,
    pub t_sweep: Option<TSweep>,
    pub t_fractions: Vec<TFraction>,
    pub trials: usize,
    pub seed: u64,
    pub policy: Policy,
    pub exact_budget: u64,
    pub samples: u64,
    pub retries: usize,
    pub restarts: usize,
    pub layout: LayoutChoice,
    pub time_limit: Option<f64>,
    /// Cap on the depth of the large trees.
    pub max_depth: Option<usize>,
    pub deletions: Vec<Deletion>,
    pub scenarios: Vec<Scenario>,
    /// `f(n)` of the odd robustness scenario; defaults to `ln n`.
    pub f_n: Option<f64>,
    pub tight_eps: Frac,
    pub r: usize,
    pub coloring: ColoringPattern,
    /// Far-from-bipartite parameter of the monochromatic search; defaults to
    /// `1/(r 2^(r+2))`.
    pub mono_eps: Option<f64>,
    pub record_seconds: bool,
    /// Store every `G'`, not only the ones backing a certificate.
    pub save_graphs: bool,
    /// Vertex count up to which the exact oracle double-checks outcomes.
    pub oracle_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let budget = Budget::default();
        Self {
            model: Model::Gnp,
            n: 0,
            p: None,
            c: Vec::new(),
            d: None,
            path: None,
            beta: Frac(Rational::new(1, 10)),
            gamma: None,
            eps: Frac(Rational::new(1, 20)),
            k: 12,
            c1: stitcher::DEFAULT_C1,
            c2: Frac(Rational::new(48, 10_000)),
            rho: None,
            delta: None,
            t: Vec::new(),
            t_sweep: None,
            t_fractions: Vec::new(),
            trials: 1,
            seed: 0,
            policy: Policy::Auto,
            exact_budget: budget.exact,
            samples: budget.samples,
            retries: 5,
            restarts: 4,
            layout: LayoutChoice::Auto,
            time_limit: Some(60.0),
            max_depth: None,
            deletions: vec![Deletion::Random],
            scenarios: vec![Scenario::A],
            f_n: None,
            tight_eps: Frac(Rational::new(1, 10)),
            r: 2,
            coloring: ColoringPattern::Random,
            mono_eps: None,
            record_seconds: false,
            save_graphs: false,
            oracle_cap: oracle::DP_CAP,
        }
    }
}

/// One point of the edge-probability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PPoint {
    pub label: String,
    pub p: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn find_config(&self) -> FindConfig {
        let mut f = FindConfig::new(self.beta.0, self.eps.0, self.k);
        f.gamma = self.gamma.map(|g| g.0);
        f.c1 = self.c1;
        f.c2 = self.c2.0;
        f.retries = self.retries;
        f.policy = self.policy;
        f.budget = Budget {
            exact: self.exact_budget,
            samples: self.samples,
        };
        f.layout = self.layout;
        f.restarts = self.restarts;
        f.time_limit = self.time_limit;
        f.max_depth = self.max_depth;
        f
    }

    /// Requested lengths in order, duplicates removed.
    pub fn t_values(&self) -> Vec<usize> {
        let mut out = self.t.clone();
        if let Some(s) = self.t_sweep {
            out.extend((s.from..=s.to).step_by(s.step.max(1)));
        }
        out.extend(self.t_fractions.iter().map(|f| f.resolve(self.n)));
        let mut seen = HashSet::new();
        out.retain(|t| seen.insert(*t));
        out
    }

    /// `p` values; falls back to [`DEFAULT_C_SWEEP`] when `need` and none are
    /// given.
    pub fn p_points(&self, need: bool) -> Vec<PPoint> {
        if let Some(p) = self.p {
            return vec![PPoint { label: format!("p{p}"), p }];
        }
        let cs: Vec<f64> = if self.c.is_empty() && need { DEFAULT_C_SWEEP.to_vec() } else { self.c.clone() };
        if cs.is_empty() {
            return vec![PPoint { label: "p1".into(), p: 1.0 }];
        }
        cs.into_iter()
            .map(|c| PPoint {
                label: format!("c{c}"),
                p: if self.n == 0 { 0.0 } else { (c / self.n as f64).min(1.0) },
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::param("n must be at least 3"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be positive"));
        }
        if self.k == 0 || self.k > self.n || self.k > stitcher::S_EXACT_CAP {
            return Err(Error::param(format!("k must lie in [1, min(n, {})]", stitcher::S_EXACT_CAP)));
        }
        let probs = self.p.iter().copied().chain(self.c.iter().map(|c| c / self.n as f64));
        for p in probs {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::param(format!("edge probability {p} outside [0, 1]")));
            }
        }
        let eps = self.eps.0;
        if eps <= Rational::zero() || eps >= Rational::from_integer(1) {
            return Err(Error::param("eps must lie in (0, 1)"));
        }
        if self.beta.0 < Rational::zero() {
            return Err(Error::param("beta must be non-negative"));
        }
        if let Some(g) = self.gamma {
            if g.0 <= Rational::zero() || g.0 >= Rational::from_integer(1) {
                return Err(Error::param("gamma must lie in (0, 1)"));
            }
        }
        let ts = self.t_values();
        if ts.is_empty() {
            return Err(Error::param("no cycle lengths requested"));
        }
        if let Some(&t) = ts.iter().find(|&&t| t < 3 || t > self.n) {
            return Err(Error::param(format!("t = {t} outside [3, n]")));
        }
        match self.model {
            Model::Regular if self.d.is_none() => return Err(Error::param("model regular needs d")),
            Model::File if self.path.is_none() => return Err(Error::param("model file needs path")),
            _ => {}
        }
        Ok(())
    }

    fn gamma_value(&self) -> Rational {
        self.find_config().gamma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        })
    }
}

/// One line of `results.csv` plus the facts that only go to the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub trial: usize,
    pub t: usize,
    pub parity: Parity,
    pub scenario: String,
    pub outcome: Outcome,
    pub stage: String,
    pub edges_kept: usize,
    pub threshold: Rational,
    #[serde(skip)]
    pub seconds: f64,
    pub cert_path: Option<String>,
    pub cycle_verified: bool,
    pub reason: Option<String>,
    /// Cluster graph reached `(g^gamma + beta/32) C(k, 2)` edges.
    pub s_threshold_met: Option<bool>,
    pub failure_expected: Option<bool>,
    pub oracle_has_cycle: Option<bool>,
    /// Ramsey only: the monochromatic odd cycle meets `k/(r 2^(r+4))`.
    pub meets_bound: Option<bool>,
}

impl Row {
    pub fn csv_line(&self, with_seconds: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.t,
            self.parity,
            self.scenario,
            self.outcome,
            self.stage,
            self.edges_kept,
            self.threshold.numer(),
            self.threshold.denom(),
            if with_seconds { format!("{:.3}", self.seconds) } else { String::new() },
            self.cert_path.as_deref().unwrap_or("")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "certificate", rename_all = "kebab-case")]
pub enum CertDetail {
    Stitched(Box<CycleCertificate>),
    OddCycle(OddCycleCertificate),
}

/// Certificate file: the cycle, the graph it lives in (relative to the
/// report directory) and the producing certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCertificate {
    pub graph: String,
    pub t: usize,
    pub cycle: VertexSeq,
    pub detail: CertDetail,
}

impl StoredCertificate {
    pub fn verify(&self, g: &Graph) -> bool {
        let inner = match &self.detail {
            CertDetail::Stitched(c) => c.t == self.t && c.cycle == self.cycle && c.verify(g),
            CertDetail::OddCycle(c) => c.cycle == self.cycle && c.verify(g),
        };
        inner && graph::verify_cycle(g, &self.cycle, self.t).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub t: usize,
    pub scenario: String,
    pub runs: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Lengths guaranteed by the colouring theorems, for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyWindows {
    /// `(2/3 - beta) n`, `r = 2`.
    pub even: Option<f64>,
    /// `(1/2 - beta) n` for `r = 2`, `(1/4 - beta) n` for `r = 3`.
    pub odd: Option<f64>,
    /// `n / (r 2^(r+4))`.
    pub odd_general: f64,
    /// Per trial: longest certified even and odd monochromatic cycle.
    pub max_even: Vec<usize>,
    pub max_odd: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub config: ExperimentConfig,
    pub gamma: Rational,
    pub rho: Rational,
    pub delta: Rational,
    pub p_points: Vec<PPoint>,
    pub groups: Vec<GroupSummary>,
    pub success_rate: f64,
    pub ramsey: Option<RamseyWindows>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub kind: String,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    /// Relative path to file contents.
    pub files: BTreeMap<String, String>,
    pub p_points: Vec<PPoint>,
    pub ramsey: Option<RamseyWindows>,
}

impl Report {
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line(self.config.record_seconds));
            out.push('\n');
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("trial,t,scenario,seconds\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{:.6}\n", r.trial, r.t, r.scenario, r.seconds));
        }
        out
    }

    pub fn groups(&self) -> Vec<GroupSummary> {
        let mut map: BTreeMap<(String, usize), (usize, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = map.entry((r.scenario.clone(), r.t)).or_default();
            e.0 += 1;
            e.1 += usize::from(r.outcome == Outcome::Success);
        }
        map.into_iter()
            .map(|((scenario, t), (runs, successes))| GroupSummary {
                t,
                scenario,
                runs,
                successes,
                rate: successes as f64 / runs as f64,
            })
            .collect()
    }

    pub fn success_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.outcome == Outcome::Success).count() as f64 / self.rows.len() as f64
    }

    pub fn summary(&self) -> Summary {
        let eps = self.config.eps.0;
        Summary {
            kind: self.kind.clone(),
            config: self.config.clone(),
            gamma: self.config.gamma_value(),
            rho: self.config.rho.map_or(ri(10) * eps, |r| r.0),
            delta: self.config.delta.map_or(ri(48) * eps, |d| d.0),
            p_points: self.p_points.clone(),
            groups: self.groups(),
            success_rate: self.success_rate(),
            ramsey: self.ramsey.clone(),
            rows: self.rows.clone(),
        }
    }

    /// Re-checks every success row against the in-memory certificates.
    pub fn verify_in_memory(&self) -> Result<usize> {
        let mut checked = 0;
        for r in self.rows.iter().filter(|r| r.outcome == Outcome::Success) {
            let path = r.cert_path.as_ref().ok_or_else(|| Error::param("success row without certificate"))?;
            let cert: StoredCertificate = serde_json::from_str(&self.files[path])?;
            let g = Graph::read_text(self.files[&cert.graph].as_bytes())?;
            if cert.t != r.t || !cert.verify(&g) {
                return Err(Error::param(format!("certificate {path} does not verify")));
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// Writes `results.csv`, `summary.json`, `timings.csv` and the
    /// certificate and graph files under `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir.join("certs"))?;
        fs::create_dir_all(dir.join("graphs"))?;
        fs::write(dir.join("results.csv"), self.csv())?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.summary())? + "\n")?;
        fs::write(dir.join("timings.csv"), self.timings_csv())?;
        for (rel, text) in &self.files {
            fs::write(dir.join(rel), text)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirCheck {
    pub rows: usize,
    pub checked: usize,
    pub failed: Vec<String>,
}

/// Reloads `results.csv` from a report directory and re-verifies every
/// certificate referenced by a success row.
pub fn verify_report_dir(dir: impl AsRef<Path>) -> Result<DirCheck> {
    let dir = dir.as_ref();
    let csv = fs::read_to_string(dir.join("results.csv"))?;
    let mut lines = csv.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: "unexpected results.csv header".into(),
        });
    }
    let mut out = DirCheck {
        rows: 0,
        checked: 0,
        failed: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected 11 fields, found {}", f.len()),
            });
        }
        out.rows += 1;
        if f[4] != "success" {
            continue;
        }
        let t: usize = f[1].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: "bad t".into(),
        })?;
        let ok = (|| -> Result<bool> {
            if f[10].is_empty() {
                return Ok(false);
            }
            let cert: StoredCertificate = serde_json::from_str(&fs::read_to_string(dir.join(f[10]))?)?;
            let g = Graph::load(dir.join(&cert.graph))?;
            Ok(cert.t == t && cert.verify(&g))
        })()?;
        out.checked += 1;
        if !ok {
            out.failed.push(format!("row {}: {}", i + 2, f[10]));
        }
    }
    Ok(out)
}

/// Per-trial output before the merge.
struct TrialOut {
    rows: Vec<Row>,
    files: Vec<(String, String)>,
}

fn graph_text(g: &Graph) -> String {
    let mut buf = Vec::new();
    g.write_text(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("graph text is ascii")
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '-' }).collect()
}

/// Runs one search on `g` and turns the result into a row, storing the
/// certificate and graph when it succeeds.
struct Job<'a> {
    cfg: &'a ExperimentConfig,
    trial: usize,
    scenario: String,
    graph_name: String,
    threshold: Rational,
    partition: Option<&'a ClusterPartition>,
}

impl Job<'_> {
    fn run(&self, g: &Graph, t: usize, stream: RngStream, out: &mut TrialOut, graph_saved: &mut bool) -> Row {
        let fc = self.cfg.find_config();
        let started = Instant::now();
        let res = stitcher::find_cycle_of_length(g, t, &fc, self.partition, stream);
        let seconds = started.elapsed().as_secs_f64();
        let mut row = Row {
            trial: self.trial,
            t,
            parity: Parity::of(t),
            scenario: self.scenario.clone(),
            outcome: Outcome::Failure,
            stage: String::new(),
            edges_kept: g.edge_count(),
            threshold: self.threshold,
            seconds,
            cert_path: None,
            cycle_verified: false,
            reason: None,
            s_threshold_met: None,
            failure_expected: None,
            oracle_has_cycle: None,
            meets_bound: None,
        };
        match res {
            Ok(cert) => {
                row.cycle_verified = cert.verify(g);
                row.s_threshold_met = cert.context.as_ref().map(|c| c.s_threshold_met);
                if row.cycle_verified {
                    row.outcome = Outcome::Success;
                    let stored = StoredCertificate {
                        graph: format!("graphs/{}.txt", self.graph_name),
                        t,
                        cycle: cert.cycle.clone(),
                        detail: CertDetail::Stitched(Box::new(cert)),
                    };
                    let path = format!("certs/trial{}_{}_t{t}.json", self.trial, slug(&self.scenario));
                    out.files.push((path.clone(), serde_json::to_string_pretty(&stored).expect("serializable") + "\n"));
                    row.cert_path = Some(path);
                    *graph_saved = true;
                } else {
                    row.stage = "verification".into();
                    row.reason = Some("returned cycle failed verification".into());
                }
            }
            Err(f) => {
                row.stage = f.stage();
                row.s_threshold_met = f.attempts.first().map(|a| ri(a.s_edges) >= a.s_threshold);
                row.reason = Some(f.reason);
            }
        }
        row
    }
}

fn save_graph(out: &mut TrialOut, name: &str, g: &Graph, needed: bool, always: bool) {
    if needed || always {
        out.files.push((format!("graphs/{name}.txt"), graph_text(g)));
    }
}

fn host_graph(cfg: &ExperimentConfig, p: f64, stream: RngStream) -> Result<(Graph, Option<ClusterPartition>)> {
    let n = cfg.n;
    let mut rng = stream.rng();
    match cfg.model {
        Model::Gnp => Ok((generators::sample_gnp(n, p, &mut rng)?, None)),
        Model::Complete => Ok((Graph::complete(n), None)),
        Model::Regular => Ok((generators::random_regular(n, cfg.d.unwrap_or(0), &mut rng)?, None)),
        Model::File => {
            let g = Graph::load(cfg.path.as_ref().expect("validated"))?;
            if g.n() != n {
                return Err(Error::param(format!("graph file has {} vertices, config says {n}", g.n())));
            }
            Ok((g, None))
        }
        Model::Planted => {
            let k = cfg.k;
            let cluster = |v: usize| v * k / n;
            let part = ClusterPartition::from_assignment((0..n).map(cluster).collect(), k)?;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let (a, b) = (cluster(u), cluster(v));
                    let adjacent = b == a + 1 || (k >= 3 && a == 0 && b == k - 1);
                    if adjacent && (p >= 1.0 || rng.random_bool(p)) {
                        edges.push((u, v));
                    }
                }
            }
            Ok((Graph::from_edges(n, edges)?, Some(part)))
        }
    }
}

fn threshold_fraction(cfg: &ExperimentConfig, t: usize) -> Result<Rational> {
    let q = ExtremalQuery::new(cfg.n, t, cfg.gamma_value())?;
    Ok(extremal::g_function(&q).as_rational() + cfg.beta.0)
}

fn keep_count(frac: &Rational, m: usize) -> usize {
    let c = (*frac * ri(m)).ceil().to_integer();
    (c.max(0) as usize).min(m)
}

fn placed_construction(g: &Graph, t: usize, stream: RngStream) -> Result<Vec<(Vertex, Vertex)>> {
    let n = g.n();
    let (_, template) = extremal::extremal_example(n, t)?;
    let mut rng = stream.rng();
    let sigma: Vec<usize> = index::sample(&mut rng, n, n).into_vec();
    let mut kept: Vec<(Vertex, Vertex)> = template
        .edges()
        .map(|(u, v)| (sigma[u].min(sigma[v]), sigma[u].max(sigma[v])))
        .filter(|&(u, v)| g.has_edge(u, v))
        .collect();
    kept.sort_unstable();
    Ok(kept)
}

fn delete_to(g: &Graph, mode: Deletion, t: usize, count: usize, stream: RngStream) -> Result<Graph> {
    let n = g.n();
    let edges: Vec<_> = g.edges().collect();
    let mut rng = stream.child(0).rng();
    match mode {
        Deletion::None => Ok(g.clone()),
        Deletion::Random => {
            let mut idx = index::sample(&mut rng, edges.len(), count.min(edges.len())).into_vec();
            idx.sort_unstable();
            Graph::from_edges(n, idx.into_iter().map(|i| edges[i]))
        }
        Deletion::Overlay => Graph::from_edges(n, placed_construction(g, t, stream.child(1))?),
        Deletion::Adversarial => {
            let mut overlay = placed_construction(g, t, stream.child(1))?;
            if overlay.len() > count {
                let mut idx = index::sample(&mut rng, overlay.len(), count).into_vec();
                idx.sort_unstable();
                overlay = idx.into_iter().map(|i| overlay[i]).collect();
            }
            let chosen: HashSet<_> = overlay.iter().copied().collect();
            let rest: Vec<_> = edges.iter().copied().filter(|e| !chosen.contains(e)).collect();
            let extra = count.saturating_sub(overlay.len()).min(rest.len());
            let mut idx = index::sample(&mut rng, rest.len(), extra).into_vec();
            idx.sort_unstable();
            overlay.extend(idx.into_iter().map(|i| rest[i]));
            Graph::from_edges(n, overlay)
        }
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, kind: &str, p_points: Vec<PPoint>, trial: F) -> Result<Report>
where
    F: Fn(usize, RngStream) -> Result<TrialOut> + Sync,
{
    let master = RngStream::new(cfg.seed, 0);
    let outs: Vec<TrialOut> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| trial(i, master.child(i as u64)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut files = BTreeMap::new();
    for o in outs {
        rows.extend(o.rows);
        files.extend(o.files);
    }
    Ok(Report {
        kind: kind.into(),
        config: cfg.clone(),
        rows,
        files,
        p_points,
        ramsey: None,
    })
}

/// Deletion experiments: for each trial, host `G`, each deletion mode and
/// each `t`, keep `ceil((g^gamma(t, n) + beta) e(G))` edges and search for
/// `C_t` in what is left.
pub fn run_turan(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let ts = cfg.t_values();
    for &d in &cfg.deletions {
        if matches!(d, Deletion::Adversarial | Deletion::Overlay) {
            if let Some(t) = ts.iter().find(|&&t| extremal::extremal_example(cfg.n, t).is_err()) {
                return Err(Error::param(format!(
                    "{d} deletion needs an explicit extremal graph; none for t = {t}, n = {}",
                    cfg.n
                )));
            }
        }
    }
    let thresholds: Vec<Rational> = ts.iter().map(|&t| threshold_fraction(cfg, t)).collect::<Result<_>>()?;
    let points = cfg.p_points(cfg.model == Model::Gnp);
    let multi = points.len() > 1;
    run_trials(cfg, "turan", points.clone(), |trial, ts_stream| {
        let mut out = TrialOut {
            rows: Vec::new(),
            files: Vec::new(),
        };
        for (pi, pt) in points.iter().enumerate() {
            let ps = ts_stream.child(pi as u64);
            let (g, part) = host_graph(cfg, pt.p, ps.child(0))?;
            for (di, &del) in cfg.deletions.iter().enumerate() {
                let scenario = if multi { format!("{del}/{}", pt.label) } else { del.to_string() };
                for (ti, &t) in ts.iter().enumerate() {
                    let count = keep_count(&thresholds[ti], g.edge_count());
                    let ds = ps.child(1 + di as u64).child(t as u64);
                    let h = delete_to(&g, del, t, count, ds.child(0))?;
                    let graph_name = format!("trial{trial}_{}_t{t}", slug(&scenario));
                    let job = Job {
                        cfg,
                        trial,
                        scenario: scenario.clone(),
                        graph_name: graph_name.clone(),
                        threshold: thresholds[ti],
                        partition: part.as_ref(),
                    };
                    let mut saved = false;
                    let row = job.run(&h, t, ds.child(1), &mut out, &mut saved);
                    out.rows.push(row);
                    save_graph(&mut out, &graph_name, &h, saved, cfg.save_graphs);
                }
            }
        }
        Ok(out)
    })
}

/// `count` uniformly random non-edges of `g` satisfying `allowed`, added to
/// `g`. Rejection sampling while the pool is large, enumeration otherwise.
fn add_random_non_edges<R, F>(g: &Graph, count: usize, allowed: F, pool: usize, rng: &mut R) -> Result<Graph>
where
    R: Rng + ?Sized,
    F: Fn(Vertex, Vertex) -> bool,
{
    let n = g.n();
    if count == 0 {
        return Ok(g.clone());
    }
    let mut extra: Vec<(Vertex, Vertex)>;
    if count * 2 <= pool {
        let mut seen = HashSet::with_capacity(count);
        extra = Vec::with_capacity(count);
        while extra.len() < count {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            let e = (u.min(v), u.max(v));
            if u != v && allowed(e.0, e.1) && !g.has_edge(e.0, e.1) && seen.insert(e) {
                extra.push(e);
            }
        }
        extra.sort_unstable();
    } else {
        let all: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| allowed(u, v) && !g.has_edge(u, v))
            .collect();
        let mut idx = index::sample(rng, all.len(), count.min(all.len())).into_vec();
        idx.sort_unstable();
        extra = idx.into_iter().map(|i| all[i]).collect();
    }
    g.with_edges(extra)
}

/// Two cliques on `0..a` and `a-1..n`.
pub fn tight_construction(n: usize, t: usize, tight_eps: &Rational) -> Result<Graph> {
    let a = (ri(t) * (Rational::from_integer(1) + *tight_eps)).ceil().to_integer() as usize;
    if a > n || a < 2 {
        return Err(Error::param(format!("clique of order {a} does not fit n = {n}")));
    }
    let mut edges = Vec::new();
    for (lo, hi) in [(0, a), (a - 1, n)] {
        for u in lo..hi {
            for v in u + 1..hi {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Whether `C_t` is provably absent from a subgraph `h` of the two-clique
/// graph with first clique `0..a`. Every cycle lives in one clique; a clique
/// whose part of `h` has fewer than `t` vertices of degree at least two
/// cannot hold one, and a part small enough for the exact oracle is decided
/// outright. `None` when neither settles a clique.
pub fn tight_failure_predicted(h: &Graph, a: usize, t: usize) -> Option<bool> {
    let n = h.n();
    for (lo, hi) in [(0, a), (a - 1, n)] {
        let inside = |v: Vertex| (lo..hi).contains(&v);
        let core: Vec<Vertex> = (lo..hi)
            .filter(|&v| h.neighbors(v).iter().filter(|&&w| inside(w)).count() >= 2)
            .collect();
        if core.len() < t {
            continue;
        }
        if core.len() <= oracle::DP_CAP {
            let (sub, _) = graph::induced_subgraph(h, &core).ok()?;
            if oracle::has_cycle_of_length(&sub, t).ok()? {
                return Some(false);
            }
            continue;
        }
        return None;
    }
    Some(true)
}

/// Robustness experiments: a dense host built per scenario, sparsified to
/// `G(p)`, then searched for `C_t`.
pub fn run_robustness(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let ts = cfg.t_values();
    let n = cfg.n;
    for &sc in &cfg.scenarios {
        for &t in &ts {
            match sc {
                Scenario::A => {
                    extremal::extremal_example(n, t).map_err(|e| Error::param(format!("scenario a: {e}")))?;
                }
                Scenario::B if t % 2 == 0 => {
                    return Err(Error::param(format!("scenario b needs odd t, got {t}")));
                }
                Scenario::B => {}
                Scenario::C => {
                    let a = (ri(t) * (Rational::from_integer(1) + cfg.tight_eps.0)).ceil().to_integer();
                    if a as usize > n {
                        return Err(Error::param(format!("scenario c: clique of order {a} exceeds n = {n}")));
                    }
                }
            }
        }
    }
    let points = cfg.p_points(true);
    let multi = points.len() > 1;
    let c2 = binom2(n);
    run_trials(cfg, "robustness", points.clone(), |trial, trial_stream| {
        let mut out = TrialOut {
            rows: Vec::new(),
            files: Vec::new(),
        };
        for (pi, pt) in points.iter().enumerate() {
            let ps = trial_stream.child(pi as u64);
            for (si, &sc) in cfg.scenarios.iter().enumerate() {
                let scenario = if multi { format!("{sc}/{}", pt.label) } else { sc.to_string() };
                for &t in &ts {
                    let ss = ps.child(si as u64).child(t as u64);
                    let mut rng = ss.child(0).rng();
                    let (host, a) = match sc {
                        Scenario::A => {
                            let (_, base) = extremal::extremal_example(n, t)?;
                            let extra = (cfg.beta.0 * Rational::from_integer(c2 as i128)).ceil().to_integer() as usize;
                            let pool = c2 as usize - base.edge_count();
                            (add_random_non_edges(&base, extra.min(pool), |_, _| true, pool, &mut rng)?, 0)
                        }
                        Scenario::B => {
                            let base = extremal::build_bipartite_extremal(n)?;
                            let f = cfg.f_n.unwrap_or_else(|| (n as f64).ln());
                            let half = n / 2;
                            let pool = half * half.saturating_sub(1) / 2;
                            let extra = if pt.p > 0.0 { (f / pt.p).ceil() as usize } else { pool };
                            (add_random_non_edges(&base, extra.min(pool), |u, v| u < half && v < half, pool, &mut rng)?, 0)
                        }
                        Scenario::C => {
                            let a = (ri(t) * (Rational::from_integer(1) + cfg.tight_eps.0)).ceil().to_integer() as usize;
                            (tight_construction(n, t, &cfg.tight_eps.0)?, a)
                        }
                    };
                    let threshold = Rational::new(host.edge_count() as i128, c2.max(1) as i128);
                    let h = generators::keep_each_edge(&host, pt.p, &mut ss.child(1).rng())?;
                    let graph_name = format!("trial{trial}_{}_t{t}", slug(&scenario));
                    let job = Job {
                        cfg,
                        trial,
                        scenario: scenario.clone(),
                        graph_name: graph_name.clone(),
                        threshold,
                        partition: None,
                    };
                    let mut saved = false;
                    let mut row = job.run(&h, t, ss.child(2), &mut out, &mut saved);
                    if sc == Scenario::C {
                        row.failure_expected = tight_failure_predicted(&h, a, t);
                    }
                    if n <= cfg.oracle_cap.min(oracle::DP_CAP) {
                        row.oracle_has_cycle = Some(oracle::has_cycle_of_length(&h, t)?);
                    }
                    out.rows.push(row);
                    save_graph(&mut out, &graph_name, &h, saved, cfg.save_graphs);
                }
            }
        }
        Ok(out)
    })
}

fn ramsey_windows(cfg: &ExperimentConfig, rows: &[Row]) -> RamseyWindows {
    let n = cfg.n as f64;
    let beta = cfg.beta.0.to_f64().unwrap_or(0.0);
    let r = cfg.r;
    let mut max_even = vec![0; cfg.trials];
    let mut max_odd = vec![0; cfg.trials];
    for row in rows.iter().filter(|r| r.outcome == Outcome::Success) {
        let slot = if row.t % 2 == 0 { &mut max_even[row.trial] } else { &mut max_odd[row.trial] };
        *slot = (*slot).max(row.t);
    }
    RamseyWindows {
        even: (r == 2).then(|| (2.0 / 3.0 - beta) * n),
        odd: match r {
            2 => Some((0.5 - beta) * n),
            3 => Some((0.25 - beta) * n),
            _ => None,
        },
        odd_general: n / (r as f64 * 2f64.powi(r as i32 + 4)),
        max_even,
        max_odd,
    }
}

/// Colouring experiments: colour a random host, search every colour class
/// for each `t`, and run the monochromatic odd-cycle search once per host.
pub fn run_ramsey(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let r = cfg.r;
    if r == 0 {
        return Err(Error::param("r must be at least 1"));
    }
    if let Some(req) = cfg.coloring.required_r() {
        if req != r {
            return Err(Error::param(format!("colouring {:?} needs r = {req}", cfg.coloring)));
        }
    }
    let ts = cfg.t_values();
    let points = cfg.p_points(cfg.model == Model::Gnp);
    let multi = points.len() > 1;
    let pattern = serde_json::to_value(cfg.coloring)?.as_str().unwrap_or("pattern").to_string();
    let mono_eps = cfg.mono_eps.unwrap_or_else(|| ramsey::default_eps(r));
    let bound = Rational::new(cfg.n as i128, (r as i128) << (r + 4));
    let mut report = run_trials(cfg, "ramsey", points.clone(), |trial, trial_stream| {
        let mut out = TrialOut {
            rows: Vec::new(),
            files: Vec::new(),
        };
        for (pi, pt) in points.iter().enumerate() {
            let ps = trial_stream.child(pi as u64);
            let (g, _) = host_graph(cfg, pt.p, ps.child(0))?;
            let coloring = ramsey::pattern_coloring(&g, cfg.coloring, r, &mut ps.child(1).rng())?;
            let suffix = if multi { format!("/{}", pt.label) } else { String::new() };
            let classes: Vec<Graph> = (0..r).map(|i| ramsey::color_class(&g, &coloring, i)).collect::<Result<_>>()?;
            let mut class_saved = vec![false; r];
            let names: Vec<String> =
                (0..r).map(|i| format!("trial{trial}_{}-color{i}{}", slug(&pattern), slug(&suffix))).collect();
            for (i, h) in classes.iter().enumerate() {
                let scenario = format!("{pattern}/color{i}{suffix}");
                let job = Job {
                    cfg,
                    trial,
                    scenario,
                    graph_name: names[i].clone(),
                    threshold: Rational::new(h.edge_count() as i128, binom2(cfg.n).max(1) as i128),
                    partition: None,
                };
                for &t in &ts {
                    let row = job.run(h, t, ps.child(2 + i as u64).child(t as u64), &mut out, &mut class_saved[i]);
                    out.rows.push(row);
                }
            }
            let scenario = format!("{pattern}/mono-odd{suffix}");
            let started = Instant::now();
            let mono = ramsey::monochromatic_odd_cycle(&g, &coloring, mono_eps, ps.child(1000))?;
            let mut row = Row {
                trial,
                t: 0,
                parity: Parity::Odd,
                scenario: scenario.clone(),
                outcome: Outcome::Failure,
                stage: "bipartite".into(),
                edges_kept: 0,
                threshold: bound,
                seconds: started.elapsed().as_secs_f64(),
                cert_path: None,
                cycle_verified: false,
                reason: None,
                s_threshold_met: None,
                failure_expected: None,
                oracle_has_cycle: None,
                meets_bound: Some(mono.meets_bound),
            };
            if let (Some(c), Some(cert)) = (mono.color, mono.cycle) {
                row.t = cert.len();
                row.edges_kept = classes[c].edge_count();
                row.cycle_verified = cert.verify(&classes[c]);
                if row.cycle_verified {
                    row.outcome = Outcome::Success;
                    row.stage.clear();
                    let stored = StoredCertificate {
                        graph: format!("graphs/{}.txt", names[c]),
                        t: cert.len(),
                        cycle: cert.cycle.clone(),
                        detail: CertDetail::OddCycle(cert),
                    };
                    let path = format!("certs/trial{trial}_{}.json", slug(&scenario));
                    out.files.push((path.clone(), serde_json::to_string_pretty(&stored)? + "\n"));
                    row.cert_path = Some(path);
                    class_saved[c] = true;
                } else {
                    row.stage = "verification".into();
                }
            }
            out.rows.push(row);
            for (i, h) in classes.iter().enumerate() {
                save_graph(&mut out, &names[i], h, class_saved[i], cfg.save_graphs);
            }
        }
        Ok(out)
    })?;
    report.ramsey = Some(ramsey_windows(cfg, &report.rows));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Turan,
    Robustness,
    Ramsey,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "turan" => Ok(Kind::Turan),
            "robustness" => Ok(Kind::Robustness),
            "ramsey" => Ok(Kind::Ramsey),
            other => Err(Error::param(format!("unknown experiment {other:?}"))),
        }
    }
}

pub fn run(kind: Kind, cfg: &ExperimentConfig) -> Result<Report> {
    match kind {
        Kind::Turan => run_turan(cfg),
        Kind::Robustness => run_robustness(cfg),
        Kind::Ramsey => run_ramsey(cfg),
    }
}
