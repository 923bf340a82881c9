//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment line. Keys are dotted
//! (`space.kind`, `target.family`, …). Unknown keys, repeated keys and keys
//! that the chosen families do not use are all rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use mhlab::measure_space::{Density, StateSpace, TargetDensity};
use mhlab::mh_kernel::{MhKernel, ProposalFamily};
use mhlab::{presets, tolerances};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const KEYS: &[&str] = &[
    "space.kind",
    "space.points",
    "space.weights",
    "space.lower",
    "space.upper",
    "space.cells",
    "target.family",
    "target.p",
    "target.mean",
    "target.sd",
    "target.values",
    "proposal.family",
    "proposal.width",
    "proposal.blocks",
    "proposal.values",
    "initial.family",
    "initial.index",
    "initial.values",
    "run.suites",
    "run.steps",
    "run.sampler_steps",
    "run.replicas",
    "run.chain_steps",
    "run.seed",
    "tol.kernel",
    "tol.operator",
    "tol.monotone",
    "tol.constancy",
    "tol.tv_target",
    "tol.plateau",
    "tol.envelope_c",
    "tol.sigma",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    Counting {
        points: usize,
        weights: Option<Vec<f64>>,
    },
    Grid {
        lower: f64,
        upper: f64,
        cells: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TargetSpec {
    Uniform,
    TwoPoint { p: f64 },
    GridGaussian { mean: f64, sd: f64 },
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProposalSpec {
    Uniform,
    RandomWalk { width: f64 },
    Independence,
    Blocks { blocks: usize },
    Table { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialSpec {
    Point { index: usize },
    Target,
    Uniform,
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelChecks,
    Spectral,
    Convergence,
    Sampler,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::KernelChecks,
        Suite::Spectral,
        Suite::Convergence,
        Suite::Sampler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelChecks => "kernel-checks",
            Suite::Spectral => "spectral",
            Suite::Convergence => "convergence",
            Suite::Sampler => "sampler",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// Parses `all` or a comma-separated list of suite names; the result is
/// sorted in execution order without duplicates.
pub fn parse_suites(s: &str) -> Option<Vec<Suite>> {
    if s.trim() == "all" {
        return Some(Suite::ALL.to_vec());
    }
    let mut out = s
        .split(',')
        .map(|p| Suite::parse(p.trim()))
        .collect::<Option<Vec<_>>>()?;
    out.sort();
    out.dedup();
    (!out.is_empty()).then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Detailed balance, closed form, row closure, stationarity.
    pub kernel: f64,
    /// Contraction, self-adjointness, duality, operator inequalities.
    pub operator: f64,
    /// Allowed increase in sequences that must be non-increasing.
    pub monotone: f64,
    /// Spread of the normalized top eigenvector.
    pub constancy: f64,
    /// Total-variation level the convergence suite must reach.
    pub tv_target: f64,
    /// Smallest TV plateau accepted in negative-control mode.
    pub plateau: f64,
    pub envelope_c: f64,
    pub sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: tolerances::ALGEBRAIC,
            operator: tolerances::ACCUMULATED,
            monotone: tolerances::ALGEBRAIC,
            constancy: tolerances::GAP_SIMPLICITY,
            tv_target: 1e-6,
            plateau: 0.1,
            envelope_c: tolerances::ENVELOPE_C,
            sigma: tolerances::SIGMA_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub suites: Vec<Suite>,
    /// Convergence steps; `None` means `⌊10/gap⌋`.
    pub steps: Option<usize>,
    pub sampler_steps: usize,
    pub replicas: usize,
    pub chain_steps: usize,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            steps: None,
            sampler_steps: 10,
            replicas: 100_000,
            chain_steps: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    pub target: TargetSpec,
    pub proposal: ProposalSpec,
    pub initial: InitialSpec,
    pub run: RunSpec,
    pub tol: Tolerances,
}

/// The kernel and starting density a config describes.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub kernel: MhKernel,
    pub initial: Density,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn require(&mut self, key: &str) -> CliResult<String> {
        self.take(key)
            .ok_or_else(|| CliError::key(key, "required but missing"))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::key(key, format!("cannot parse `{v}`"))),
        }
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        self.parsed(key)?
            .ok_or_else(|| CliError::key(key, "required but missing"))
    }

    fn float(&mut self, key: &str) -> CliResult<Option<f64>> {
        let v: Option<f64> = self.parsed(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(CliError::key(key, "must be finite")),
            other => Ok(other),
        }
    }

    fn required_float(&mut self, key: &str) -> CliResult<f64> {
        self.float(key)?
            .ok_or_else(|| CliError::key(key, "required but missing"))
    }

    fn list(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.take(key).map(|v| parse_list(key, &v)).transpose()
    }
}

fn parse_list(key: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::key(key, format!("cannot parse number `{p}`")))
        })
        .collect()
}

fn split_lines(text: &str) -> CliResult<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::key(key, format!("unknown key (line {line_no})")));
        }
        if let Some((first, _)) = map.get(key) {
            return Err(CliError::key(
                key,
                format!("set twice (lines {first} and {line_no})"),
            ));
        }
        map.insert(key.to_string(), (line_no, value.trim().to_string()));
    }
    Ok(Entries { map })
}

/// Parses and validates a config, including construction of the kernel.
pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let mut e = split_lines(text)?;

    let space = match e.require("space.kind")?.as_str() {
        "counting" => {
            let weights = e.list("space.weights")?;
            let points = match (e.parsed::<usize>("space.points")?, &weights) {
                (Some(p), Some(w)) if p != w.len() => {
                    return Err(CliError::key(
                        "space.points",
                        format!("{p} points but {} weights", w.len()),
                    ))
                }
                (Some(p), _) => p,
                (None, Some(w)) => w.len(),
                (None, None) => return Err(CliError::key("space.points", "required but missing")),
            };
            SpaceSpec::Counting { points, weights }
        }
        "grid" => SpaceSpec::Grid {
            lower: e.required_float("space.lower")?,
            upper: e.required_float("space.upper")?,
            cells: e.required("space.cells")?,
        },
        other => {
            return Err(CliError::key(
                "space.kind",
                format!("unknown kind `{other}`"),
            ))
        }
    };

    let target = match e.require("target.family")?.as_str() {
        "uniform" => TargetSpec::Uniform,
        "two-point" => TargetSpec::TwoPoint {
            p: e.required_float("target.p")?,
        },
        "grid-gaussian" => TargetSpec::GridGaussian {
            mean: e.float("target.mean")?.unwrap_or(0.0),
            sd: e.float("target.sd")?.unwrap_or(1.0),
        },
        "table" => TargetSpec::Table {
            values: e
                .list("target.values")?
                .ok_or_else(|| CliError::key("target.values", "required but missing"))?,
        },
        other => {
            return Err(CliError::key(
                "target.family",
                format!("unknown family `{other}`"),
            ))
        }
    };

    let proposal = match e.require("proposal.family")?.as_str() {
        "uniform" => ProposalSpec::Uniform,
        "independence" => ProposalSpec::Independence,
        "random-walk" => ProposalSpec::RandomWalk {
            width: e.required_float("proposal.width")?,
        },
        "blocks" => ProposalSpec::Blocks {
            blocks: e.required("proposal.blocks")?,
        },
        "table" => {
            let text = e.require("proposal.values")?;
            let rows = text
                .split(';')
                .map(|r| parse_list("proposal.values", r))
                .collect::<CliResult<Vec<_>>>()?;
            ProposalSpec::Table { rows }
        }
        other => {
            return Err(CliError::key(
                "proposal.family",
                format!("unknown family `{other}`"),
            ))
        }
    };

    let initial = match e.take("initial.family").as_deref().unwrap_or("point") {
        "point" => InitialSpec::Point {
            index: e.parsed("initial.index")?.unwrap_or(0),
        },
        "target" => InitialSpec::Target,
        "uniform" => InitialSpec::Uniform,
        "table" => InitialSpec::Table {
            values: e
                .list("initial.values")?
                .ok_or_else(|| CliError::key("initial.values", "required but missing"))?,
        },
        other => {
            return Err(CliError::key(
                "initial.family",
                format!("unknown family `{other}`"),
            ))
        }
    };

    let defaults = RunSpec::default();
    let suites = match e.take("run.suites") {
        None => defaults.suites,
        Some(s) => parse_suites(&s)
            .ok_or_else(|| CliError::key("run.suites", format!("unknown suite list `{s}`")))?,
    };
    let steps = match e.take("run.steps").as_deref() {
        None | Some("auto") => None,
        Some(s) => Some(s.parse().map_err(|_| {
            CliError::key(
                "run.steps",
                format!("expected `auto` or a count, got `{s}`"),
            )
        })?),
    };
    let run = RunSpec {
        suites,
        steps,
        sampler_steps: e
            .parsed("run.sampler_steps")?
            .unwrap_or(defaults.sampler_steps),
        replicas: e.parsed("run.replicas")?.unwrap_or(defaults.replicas),
        chain_steps: e.parsed("run.chain_steps")?.unwrap_or(defaults.chain_steps),
        seed: e.parsed("run.seed")?.unwrap_or(defaults.seed),
    };
    if run.replicas == 0 {
        return Err(CliError::key("run.replicas", "must be positive"));
    }

    let d = Tolerances::default();
    let mut tol_value = |key: &str, default: f64| -> CliResult<f64> {
        match e.float(key)? {
            Some(v) if v < 0.0 => Err(CliError::key(key, "must be nonnegative")),
            Some(v) => Ok(v),
            None => Ok(default),
        }
    };
    let tol = Tolerances {
        kernel: tol_value("tol.kernel", d.kernel)?,
        operator: tol_value("tol.operator", d.operator)?,
        monotone: tol_value("tol.monotone", d.monotone)?,
        constancy: tol_value("tol.constancy", d.constancy)?,
        tv_target: tol_value("tol.tv_target", d.tv_target)?,
        plateau: tol_value("tol.plateau", d.plateau)?,
        envelope_c: tol_value("tol.envelope_c", d.envelope_c)?,
        sigma: tol_value("tol.sigma", d.sigma)?,
    };

    if let Some(key) = e.map.keys().next() {
        return Err(CliError::key(key, "not used by the selected families"));
    }

    let config = ExperimentConfig {
        space,
        target,
        proposal,
        initial,
        run,
        tol,
    };
    config.build()?;
    Ok(config)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Canonical text form listing every effective key; parses back to an
    /// equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.space {
            SpaceSpec::Counting { points, weights } => {
                put("space.kind", "counting".into());
                put("space.points", points.to_string());
                if let Some(w) = weights {
                    put("space.weights", join(w));
                }
            }
            SpaceSpec::Grid {
                lower,
                upper,
                cells,
            } => {
                put("space.kind", "grid".into());
                put("space.lower", lower.to_string());
                put("space.upper", upper.to_string());
                put("space.cells", cells.to_string());
            }
        }
        match &self.target {
            TargetSpec::Uniform => put("target.family", "uniform".into()),
            TargetSpec::TwoPoint { p } => {
                put("target.family", "two-point".into());
                put("target.p", p.to_string());
            }
            TargetSpec::GridGaussian { mean, sd } => {
                put("target.family", "grid-gaussian".into());
                put("target.mean", mean.to_string());
                put("target.sd", sd.to_string());
            }
            TargetSpec::Table { values } => {
                put("target.family", "table".into());
                put("target.values", join(values));
            }
        }
        match &self.proposal {
            ProposalSpec::Uniform => put("proposal.family", "uniform".into()),
            ProposalSpec::Independence => put("proposal.family", "independence".into()),
            ProposalSpec::RandomWalk { width } => {
                put("proposal.family", "random-walk".into());
                put("proposal.width", width.to_string());
            }
            ProposalSpec::Blocks { blocks } => {
                put("proposal.family", "blocks".into());
                put("proposal.blocks", blocks.to_string());
            }
            ProposalSpec::Table { rows } => {
                put("proposal.family", "table".into());
                let rows: Vec<String> = rows.iter().map(|r| join(r)).collect();
                put("proposal.values", rows.join(";"));
            }
        }
        match &self.initial {
            InitialSpec::Point { index } => {
                put("initial.family", "point".into());
                put("initial.index", index.to_string());
            }
            InitialSpec::Target => put("initial.family", "target".into()),
            InitialSpec::Uniform => put("initial.family", "uniform".into()),
            InitialSpec::Table { values } => {
                put("initial.family", "table".into());
                put("initial.values", join(values));
            }
        }
        let suites = if self.run.suites == Suite::ALL {
            "all".to_string()
        } else {
            self.run
                .suites
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join(",")
        };
        put("run.suites", suites);
        put(
            "run.steps",
            self.run
                .steps
                .map_or_else(|| "auto".to_string(), |s| s.to_string()),
        );
        put("run.sampler_steps", self.run.sampler_steps.to_string());
        put("run.replicas", self.run.replicas.to_string());
        put("run.chain_steps", self.run.chain_steps.to_string());
        put("run.seed", self.run.seed.to_string());
        let t = &self.tol;
        for (k, v) in [
            ("tol.kernel", t.kernel),
            ("tol.operator", t.operator),
            ("tol.monotone", t.monotone),
            ("tol.constancy", t.constancy),
            ("tol.tv_target", t.tv_target),
            ("tol.plateau", t.plateau),
            ("tol.envelope_c", t.envelope_c),
            ("tol.sigma", t.sigma),
        ] {
            put(k, format!("{v:e}"));
        }
        out
    }

    /// Builds the space, target, proposal, kernel and initial density.
    pub fn build(&self) -> CliResult<Experiment> {
        let space = Arc::new(
            match &self.space {
                SpaceSpec::Counting {
                    points,
                    weights: None,
                } => StateSpace::counting(*points),
                SpaceSpec::Counting {
                    weights: Some(w), ..
                } => StateSpace::from_weights(w.clone()),
                SpaceSpec::Grid {
                    lower,
                    upper,
                    cells,
                } => StateSpace::grid(*lower, *upper, *cells),
            }
            .map_err(|e| CliError::key("space.kind", e.to_string()))?,
        );
        let n = space.len();

        let target = match &self.target {
            TargetSpec::Uniform => Density::uniform(space.clone()).and_then(TargetDensity::new),
            TargetSpec::TwoPoint { p } => {
                if n != 2 {
                    return Err(CliError::key(
                        "target.p",
                        format!("two-point target needs 2 points, space has {n}"),
                    ));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(CliError::key(
                        "target.p",
                        format!("target must be strictly positive: p = {p} leaves a zero mass"),
                    ));
                }
                TargetDensity::from_unnormalized(space.clone(), vec![*p, 1.0 - p])
            }
            TargetSpec::GridGaussian { mean, sd } => {
                if *sd <= 0.0 {
                    return Err(CliError::key("target.sd", "must be positive"));
                }
                let values = (0..n)
                    .map(|i| presets::gaussian(space.coordinate(i), *mean, *sd))
                    .collect();
                TargetDensity::from_unnormalized(space.clone(), values)
            }
            TargetSpec::Table { values } => {
                if values.len() != n {
                    return Err(CliError::key(
                        "target.values",
                        format!("{} values for {n} points", values.len()),
                    ));
                }
                TargetDensity::from_unnormalized(space.clone(), values.clone())
            }
        }
        .map_err(|e| CliError::key(target_key(&self.target), e.to_string()))?;

        let proposal = match &self.proposal {
            ProposalSpec::Uniform => Ok(ProposalFamily::uniform(space.clone())),
            ProposalSpec::Independence => Ok(ProposalFamily::independence(&target)),
            ProposalSpec::RandomWalk { width } => {
                ProposalFamily::random_walk(space.clone(), *width)
            }
            ProposalSpec::Blocks { blocks } => {
                ProposalFamily::block_diagonal(space.clone(), *blocks)
            }
            ProposalSpec::Table { rows } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::key(
                        "proposal.values",
                        format!("expected {n} rows of {n} entries"),
                    ));
                }
                ProposalFamily::from_rows(space.clone(), rows.concat())
            }
        }
        .map_err(|e| CliError::key(proposal_key(&self.proposal), e.to_string()))?;

        let kernel = MhKernel::build(&target, &proposal)
            .map_err(|e| CliError::key("proposal.family", e.to_string()))?;

        let initial = match &self.initial {
            InitialSpec::Point { index } => Density::point_mass(space.clone(), *index)
                .map_err(|e| CliError::key("initial.index", e.to_string())),
            InitialSpec::Target => Ok(target.density().clone()),
            InitialSpec::Uniform => Density::uniform(space.clone())
                .map_err(|e| CliError::key("initial.family", e.to_string())),
            InitialSpec::Table { values } => {
                if values.len() != n {
                    return Err(CliError::key(
                        "initial.values",
                        format!("{} values for {n} points", values.len()),
                    ));
                }
                Density::probability(space.clone(), values.clone())
                    .map_err(|e| CliError::key("initial.values", e.to_string()))
            }
        }?;
        Ok(Experiment { kernel, initial })
    }
}

fn target_key(t: &TargetSpec) -> &'static str {
    match t {
        TargetSpec::Table { .. } => "target.values",
        TargetSpec::TwoPoint { .. } => "target.p",
        TargetSpec::GridGaussian { .. } => "target.sd",
        TargetSpec::Uniform => "target.family",
    }
}

fn proposal_key(p: &ProposalSpec) -> &'static str {
    match p {
        ProposalSpec::Table { .. } => "proposal.values",
        ProposalSpec::RandomWalk { .. } => "proposal.width",
        ProposalSpec::Blocks { .. } => "proposal.blocks",
        _ => "proposal.family",
    }
}

pub const TWO_POINT: &str = "\
# two points, pi = (3/4, 1/4), uniform proposal
space.kind = counting
space.points = 2
target.family = two-point
target.p = 0.75
proposal.family = uniform
initial.family = point
initial.index = 0
run.suites = all
run.steps = 20
run.seed = 20240601
";

pub const GRID_GAUSSIAN_RW: &str = "\
# standard normal on a 120-cell grid, unit-width random walk
space.kind = grid
space.lower = -6
space.upper = 6
space.cells = 120
target.family = grid-gaussian
target.mean = 0
target.sd = 1
proposal.family = random-walk
proposal.width = 1
initial.family = point
initial.index = 60
run.suites = all
run.steps = auto
run.seed = 20240601
";

pub const DISCONNECTED: &str = "\
# two blocks the proposal never connects
space.kind = counting
space.points = 4
target.family = uniform
proposal.family = blocks
proposal.blocks = 2
initial.family = point
initial.index = 0
run.suites = all
run.steps = 50
run.seed = 20240601
";

pub fn preset_text(name: &str) -> CliResult<&'static str> {
    match name {
        "two-point" => Ok(TWO_POINT),
        "grid-gaussian-rw" => Ok(GRID_GAUSSIAN_RW),
        "disconnected-negative-control" => Ok(DISCONNECTED),
        other => Err(CliError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: CliError) -> String {
        match err {
            CliError::Key { key, .. } => key,
            other => panic!("expected a key error, got {other}"),
        }
    }

    #[test]
    fn minimal_two_point() {
        let c = parse_config(
            "space.kind = counting\nspace.points = 2\ntarget.family = two-point\ntarget.p = 0.75\nproposal.family = uniform\nrun.suites = all\n",
        )
        .unwrap();
        assert_eq!(c.target, TargetSpec::TwoPoint { p: 0.75 });
        assert_eq!(c.initial, InitialSpec::Point { index: 0 });
        assert_eq!(c.run.suites, Suite::ALL.to_vec());
    }

    #[test]
    fn zero_target_entry_is_rejected() {
        let err = parse_config(
            "space.kind = counting\nspace.points = 3\ntarget.family = table\ntarget.values = 1,0,2\nproposal.family = uniform\n",
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("target must be strictly positive"),
            "{err}"
        );
        assert_eq!(key_of(err), "target.values");
    }

    #[test]
    fn strictness() {
        let base = "space.kind = counting\nspace.points = 2\ntarget.family = uniform\nproposal.family = uniform\n";
        assert_eq!(
            key_of(parse_config(&format!("{base}colour = red\n")).unwrap_err()),
            "colour"
        );
        assert_eq!(
            key_of(parse_config(&format!("{base}space.points = 3\n")).unwrap_err()),
            "space.points"
        );
        assert_eq!(
            key_of(parse_config(&format!("{base}proposal.width = 1\n")).unwrap_err()),
            "proposal.width"
        );
        assert_eq!(
            key_of(parse_config(&format!("{base}run.suites = kernel\n")).unwrap_err()),
            "run.suites"
        );
        assert!(matches!(
            parse_config(&format!("{base}not an assignment\n")),
            Err(CliError::Syntax { line: 5, .. })
        ));
    }

    #[test]
    fn suites_sorted_and_deduplicated() {
        assert_eq!(
            parse_suites("sampler, kernel-checks,sampler").unwrap(),
            vec![Suite::KernelChecks, Suite::Sampler]
        );
        assert!(parse_suites("").is_none());
    }

    #[test]
    fn presets_round_trip() {
        for name in presets::NAMES {
            let c = parse_config(preset_text(name).unwrap()).unwrap();
            let again = parse_config(&c.to_text()).unwrap();
            assert_eq!(c, again);
            assert_eq!(again.to_text(), c.to_text());
        }
    }

    #[test]
    fn table_proposal_rows() {
        let c = parse_config(
            "space.kind = counting\nspace.points = 2\ntarget.family = table\ntarget.values = 3,1\nproposal.family = table\nproposal.values = 0.5,0.5;0.25,0.75\n",
        )
        .unwrap();
        let e = c.build().unwrap();
        assert!((e.kernel.proposal().density(1, 1) - 0.75).abs() < 1e-15);
        let bad = "space.kind = counting\nspace.points = 2\ntarget.family = uniform\nproposal.family = table\nproposal.values = 0.5,0.5;0.25,0.25\n";
        assert_eq!(key_of(parse_config(bad).unwrap_err()), "proposal.values");
    }
}
