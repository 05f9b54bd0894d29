//! Experiment orchestration: TOML configuration, seeded runs, run
//! manifests, the AOIE trend harness and report rendering.
//!
//! Every run writes its data files plus `manifest.json` into one output
//! directory. Data files depend only on the resolved configuration; the
//! manifest additionally records wall-clock time.

pub mod cli;
pub mod experiments;
pub mod report;
pub mod trend;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algonet::TopologyKind;
use crate::complexity::{ctm_build, CtmTable, Estimator};
use crate::error::{LabError, Result};
use crate::evomodel::ReadBack;
use crate::observer::Channel;

pub use experiments::run_experiment;
pub use report::report;
pub use trend::{aoie_trend, Generator, RosterEntry, TrendResult};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ctm,
    PerturbGraph,
    Observe,
    Verdict,
    Evolve,
    Algonet,
    Ueinn,
    AoieTrend,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Ctm => "ctm",
            ExperimentKind::PerturbGraph => "perturb-graph",
            ExperimentKind::Observe => "observe",
            ExperimentKind::Verdict => "verdict",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Algonet => "algonet",
            ExperimentKind::Ueinn => "ueinn",
            ExperimentKind::AoieTrend => "aoie-trend",
        }
    }

    fn default_trials(&self) -> usize {
        match self {
            ExperimentKind::PerturbGraph | ExperimentKind::Algonet => 30,
            ExperimentKind::Observe | ExperimentKind::Verdict => 10,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub c_i: u32,
    pub c_o: u32,
    pub c_e: u32,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c_i: crate::complexity::DEFAULT_C_I,
            c_o: crate::observer::DEFAULT_C_O,
            c_e: crate::observer::DEFAULT_C_E,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum EstimatorChoice {
    #[default]
    Compress,
    Ctm {
        states: u32,
        steps: u64,
    },
    Bdm {
        states: u32,
        steps: u64,
        block: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtmParams {
    pub states: u32,
    pub steps: u64,
    pub workers: Option<usize>,
}

impl Default for CtmParams {
    fn default() -> Self {
        CtmParams {
            states: 2,
            steps: 1000,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbParams {
    pub n: usize,
    pub graph: TopologyKind,
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams {
            n: 16,
            graph: TopologyKind::Complete,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    Upper,
    #[default]
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserveParams {
    pub rule: u8,
    pub width: usize,
    pub t: u64,
    pub k: u64,
    pub channel: Channel,
    pub mode: ModeChoice,
    pub step_budget: u64,
    pub input_cap: usize,
    pub observer_budget: u64,
}

impl Default for ObserveParams {
    fn default() -> Self {
        ObserveParams {
            rule: 110,
            width: 8,
            t: 6,
            k: 2,
            channel: Channel::Identity,
            mode: ModeChoice::Exact,
            step_budget: 64,
            input_cap: 256,
            observer_budget: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FutureSource {
    /// The system's own continuation.
    #[default]
    System,
    /// Fresh uniformly random states after `S'_{t+1}`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictParams {
    pub rule: u8,
    pub width: usize,
    pub t: u64,
    pub k: u64,
    pub m: u64,
    /// Number of future states, so `t' = t + horizon`.
    pub horizon: u64,
    pub future: FutureSource,
    pub mode: ModeChoice,
    pub step_budget: u64,
    pub observer_budget: u64,
}

impl Default for VerdictParams {
    fn default() -> Self {
        VerdictParams {
            rule: 110,
            width: 8,
            t: 6,
            k: 2,
            m: 1,
            horizon: 4,
            future: FutureSource::Random,
            mode: ModeChoice::Upper,
            step_budget: 64,
            observer_budget: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub mutations: u64,
    pub budget: u64,
    pub s_max: u32,
    pub read_back: ReadBack,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            mutations: 10_000,
            budget: 1000,
            s_max: 2,
            read_back: ReadBack::Prefix,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolChoice {
    #[default]
    Plain,
    Sis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgonetSection {
    pub ns: Vec<usize>,
    pub topology: TopologyKind,
    pub protocol: ProtocolChoice,
    pub budget: u64,
    pub s_max: u32,
}

impl Default for AlgonetSection {
    fn default() -> Self {
        AlgonetSection {
            ns: vec![8, 16, 32, 64],
            topology: TopologyKind::Ba { m: 2 },
            protocol: ProtocolChoice::Plain,
            budget: 1000,
            s_max: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UeinnSection {
    pub width: usize,
    pub env_width: usize,
    pub env_rule: u8,
}

impl Default for UeinnSection {
    fn default() -> Self {
        UeinnSection {
            width: 3,
            env_width: 3,
            env_rule: 30,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    #[default]
    Evolution,
    Algonet,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendSection {
    pub generator: GeneratorKind,
    pub t: u64,
    pub k: u64,
    pub schedule: Vec<u64>,
    pub roster: Vec<RosterEntry>,
    pub step_budget: u64,
    /// Mutations for the evolution generator.
    pub mutations: u64,
    /// Network size for the algonet generator.
    pub n: usize,
    /// State width for the constant generator.
    pub width: usize,
}

impl Default for TrendSection {
    fn default() -> Self {
        TrendSection {
            generator: GeneratorKind::Evolution,
            t: 4,
            k: 2,
            schedule: (5..=12).collect(),
            roster: trend::default_roster(),
            step_budget: 64,
            mutations: 2000,
            n: 8,
            width: 8,
        }
    }
}

/// One experiment, fully resolved once loaded and merged with CLI flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub estimator: EstimatorChoice,
    /// A CTM table file to load instead of enumerating.
    #[serde(default)]
    pub ctm_cache: Option<PathBuf>,
    #[serde(default)]
    pub ctm: CtmParams,
    #[serde(default)]
    pub perturb: PerturbParams,
    #[serde(default)]
    pub observe: ObserveParams,
    #[serde(default)]
    pub verdict: VerdictParams,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub algonet: AlgonetSection,
    #[serde(default)]
    pub ueinn: UeinnSection,
    #[serde(default)]
    pub trend: TrendSection,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: 0,
            trials: None,
            out: None,
            constants: Constants::default(),
            estimator: EstimatorChoice::Compress,
            ctm_cache: None,
            ctm: CtmParams::default(),
            perturb: PerturbParams::default(),
            observe: ObserveParams::default(),
            verdict: VerdictParams::default(),
            evolve: EvolveSection::default(),
            algonet: AlgonetSection::default(),
            ueinn: UeinnSection::default(),
            trend: TrendSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills every defaulted field so the manifest echoes concrete values.
    pub fn resolved(mut self) -> Self {
        self.trials.get_or_insert(self.kind.default_trials());
        if self.out.is_none() {
            self.out = Some(PathBuf::from(format!("runs/{}-seed{}", self.kind.name(), self.seed)));
        }
        self
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(self.kind.default_trials())
    }

    /// sha256 of the canonical JSON of the resolved config, output
    /// directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone().resolved();
        c.out = None;
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub input_hashes: BTreeMap<String, String>,
    pub trial_seeds: Vec<u64>,
    pub wall_clock_ms: u64,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| LabError::Report(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LabError::Report(format!("corrupt manifest: {e}")))
    }

    pub fn output(&self, name: &str) -> Option<&OutputEntry> {
        self.outputs.iter().find(|o| o.path == name)
    }
}

/// Collects the data files of one run and their hashes.
pub struct RunWriter {
    dir: PathBuf,
    outputs: Vec<OutputEntry>,
    inputs: BTreeMap<String, String>,
    seeds: Vec<u64>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            inputs: BTreeMap::new(),
            seeds: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, data: impl AsRef<[u8]>) -> Result<()> {
        let data = data.as_ref();
        std::fs::write(self.dir.join(name), data)?;
        self.outputs.retain(|o| o.path != name);
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| LabError::Encoding(e.to_string()))?;
        s.push('\n');
        self.write(name, s)
    }

    pub fn input(&mut self, path: &Path, data: &[u8]) {
        self.inputs.insert(path.display().to_string(), sha256_hex(data));
    }

    pub fn seeds(&mut self, seeds: impl IntoIterator<Item = u64>) {
        self.seeds.extend(seeds);
    }

    pub fn finish(self, config: &ExperimentConfig, wall_clock_ms: u64) -> Result<RunManifest> {
        let m = RunManifest {
            config_hash: config.hash(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            config: config.clone(),
            input_hashes: self.inputs,
            trial_seeds: self.seeds,
            wall_clock_ms,
            outputs: self.outputs,
        };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| LabError::Encoding(e.to_string()))?;
        s.push('\n');
        std::fs::write(self.dir.join(MANIFEST_FILE), s)?;
        Ok(m)
    }
}

/// The CTM table a config asks for: loaded from `ctm_cache` when given,
/// otherwise enumerated.
pub fn load_ctm(cfg: &ExperimentConfig, states: u32, steps: u64, w: &mut RunWriter) -> Result<CtmTable> {
    if let Some(path) = &cfg.ctm_cache {
        let data = std::fs::read(path)?;
        w.input(path, &data);
        let text = String::from_utf8(data).map_err(|e| LabError::Encoding(e.to_string()))?;
        let t = CtmTable::from_text(&text)?;
        if t.states != states || t.step_budget != steps {
            return Err(LabError::Config(format!(
                "ctm cache holds s={} budget={}, config asks for s={states} budget={steps}",
                t.states, t.step_budget
            )));
        }
        return Ok(t);
    }
    Ok(ctm_build(states, steps, cfg.ctm.workers))
}

pub fn build_estimator(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<Estimator> {
    Ok(match cfg.estimator {
        EstimatorChoice::Compress => Estimator::Compress,
        EstimatorChoice::Ctm { states, steps } => Estimator::Ctm(Arc::new(load_ctm(cfg, states, steps, w)?)),
        EstimatorChoice::Bdm { states, steps, block } => Estimator::Bdm {
            table: Arc::new(load_ctm(cfg, states, steps, w)?),
            block,
        },
    })
}
