//! Algorithmic networks: node programs on a graph passing payloads for `c`
//! rounds, with emergent algorithmic complexity measured as networked minus
//! isolated complexity of a node's trace.
//!
//! Round protocol (both variants): a node runs its program on the payload it
//! currently holds; its champion becomes the fitter of the held payload and
//! the run's output. Champions are then exchanged and every node adopts the
//! fittest champion among itself and the neighbours it listens to this round.
//! Fitness is the payload read as a binary number, ties broken by comparing
//! payloads lexicographically. Runs that do not halt leave the payload as is.

use std::cmp::Ordering;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::complexity::{cond_upper, cond_upper_ctx, Estimator};
use crate::dynsys::{Fddds, Provenance, Trajectory};
use crate::error::{LabError, Result};
use crate::perturb::graph::SimpleGraph;
use crate::refmachine::{run, sample_program, tuple_encode, Context, Program, ProgramBits};
use crate::seeds::rng_for;

pub const DEFAULT_SIS_INFECT: f64 = 0.5;
pub const DEFAULT_SIS_RECOVER: f64 = 0.1;
pub const ER_RESAMPLE_CAP: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TopologyKind {
    Complete,
    Ring,
    Er { p: f64 },
    Ba { m: usize },
    Edgeless,
}

impl TopologyKind {
    pub fn name(&self) -> String {
        match self {
            TopologyKind::Complete => "complete".into(),
            TopologyKind::Ring => "ring".into(),
            TopologyKind::Er { p } => format!("er({p})"),
            TopologyKind::Ba { m } => format!("ba({m})"),
            TopologyKind::Edgeless => "edgeless".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub graph: SimpleGraph,
    pub diameter: Option<usize>,
}

/// Draws a graph; with `connected`, ER draws are resampled up to
/// `ER_RESAMPLE_CAP` times.
pub fn gen_topology<R: Rng>(kind: TopologyKind, n: usize, connected: bool, rng: &mut R) -> Result<Topology> {
    let graph = match kind {
        TopologyKind::Complete => SimpleGraph::complete(n),
        TopologyKind::Ring => SimpleGraph::ring(n),
        TopologyKind::Edgeless => SimpleGraph::edgeless(n),
        TopologyKind::Ba { m } => SimpleGraph::barabasi_albert(n, m, rng)?,
        TopologyKind::Er { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(LabError::Topology(format!("er probability {p} outside [0, 1]")));
            }
            let mut tries = 0;
            loop {
                let g = SimpleGraph::erdos_renyi(n, p, rng);
                tries += 1;
                if !connected || g.is_connected() {
                    break g;
                }
                if tries == ER_RESAMPLE_CAP {
                    return Err(LabError::Topology(format!(
                        "no connected er({p}) draw on {n} vertices in {tries} tries"
                    )));
                }
            }
        }
    };
    if connected && !graph.is_connected() {
        return Err(LabError::Topology(format!(
            "{} on {n} vertices is disconnected",
            kind.name()
        )));
    }
    let diameter = graph.diameter();
    Ok(Topology { graph, diameter })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Protocol {
    PlainDiffusion,
    /// Each round every edge carries a champion with probability `infect`;
    /// a node that adopted a neighbour's champion is infected and recovers
    /// with probability `recover`, falling back to its own candidate.
    Sis {
        infect: f64,
        recover: f64,
        seed: u64,
    },
}

impl Protocol {
    pub fn sis(seed: u64) -> Self {
        Protocol::Sis {
            infect: DEFAULT_SIS_INFECT,
            recover: DEFAULT_SIS_RECOVER,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoNet {
    pub graph: SimpleGraph,
    pub population: Vec<ProgramBits>,
    pub protocol: Protocol,
    pub rounds: usize,
    pub budget: u64,
}

impl AlgoNet {
    pub fn new(
        graph: SimpleGraph,
        population: Vec<ProgramBits>,
        protocol: Protocol,
        rounds: usize,
        budget: u64,
    ) -> Result<Self> {
        if population.len() != graph.n {
            return Err(LabError::Domain(format!(
                "{} programs for {} vertices",
                population.len(),
                graph.n
            )));
        }
        Ok(AlgoNet {
            graph,
            population,
            protocol,
            rounds,
            budget,
        })
    }
}

/// Payload order: binary value, then lexicographic.
pub fn fitness_cmp(a: &Bits, b: &Bits) -> Ordering {
    let (a, b) = (a.strip_leading_zeros(), b.strip_leading_zeros());
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn payload_cmp(a: &Bits, b: &Bits) -> Ordering {
    fitness_cmp(a, b).then_with(|| a.as_slice().cmp(b.as_slice()))
}

fn fitter<'a>(a: &'a Bits, b: &'a Bits) -> &'a Bits {
    if payload_cmp(b, a) == Ordering::Greater {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTrace {
    /// Champion sent to neighbours after each round, rounds `1..=c`.
    pub payloads: Vec<Bits>,
}

impl NodeTrace {
    /// The payload held after the last round; empty when `c = 0`.
    pub fn final_output(&self) -> Bits {
        self.payloads.last().cloned().unwrap_or_default()
    }

    pub fn encode(&self) -> Bits {
        tuple_encode(&self.payloads)
    }
}

fn decode_population(pop: &[ProgramBits]) -> Vec<Option<Program>> {
    pop.iter().map(|p| p.decode().ok()).collect()
}

fn candidate(program: &Option<Program>, held: &Bits, budget: u64) -> Bits {
    match program {
        Some(p) => {
            let r = run(p, held, budget);
            let out = if r.halted { r.output } else { held.clone() };
            fitter(held, &out).clone()
        }
        None => held.clone(),
    }
}

pub fn run_isolated(population: &[ProgramBits], c: usize, budget: u64) -> Vec<NodeTrace> {
    decode_population(population)
        .iter()
        .map(|p| {
            let mut held = Bits::new();
            let mut payloads = Vec::with_capacity(c);
            for _ in 0..c {
                held = candidate(p, &held, budget);
                payloads.push(held.clone());
            }
            NodeTrace { payloads }
        })
        .collect()
}

pub fn run_networked(net: &AlgoNet) -> Vec<NodeTrace> {
    let n = net.graph.n;
    let progs = decode_population(&net.population);
    let adj = net.graph.neighbours();
    let mut held = vec![Bits::new(); n];
    let mut traces = vec![
        NodeTrace {
            payloads: Vec::with_capacity(net.rounds)
        };
        n
    ];
    let mut infected = vec![false; n];
    let mut rng = match net.protocol {
        Protocol::Sis { seed, .. } => Some(rng_for(seed, "sis", 0)),
        Protocol::PlainDiffusion => None,
    };
    for _ in 0..net.rounds {
        let cand: Vec<Bits> = (0..n).map(|i| candidate(&progs[i], &held[i], net.budget)).collect();
        let mut next = cand.clone();
        match (&net.protocol, rng.as_mut()) {
            (Protocol::Sis { infect, recover, .. }, Some(rng)) => {
                let mut now_infected = vec![false; n];
                for i in 0..n {
                    let mut best = &cand[i];
                    for &j in &adj[i] {
                        if rng.gen_bool(*infect) && payload_cmp(&cand[j], best) == Ordering::Greater {
                            best = &cand[j];
                            now_infected[i] = true;
                        }
                    }
                    next[i] = best.clone();
                }
                for i in 0..n {
                    if infected[i] && !now_infected[i] && rng.gen_bool(*recover) {
                        next[i] = cand[i].clone();
                    } else if infected[i] {
                        now_infected[i] = true;
                    }
                }
                infected = now_infected;
            }
            _ => {
                for i in 0..n {
                    let mut best = &cand[i];
                    for &j in &adj[i] {
                        best = fitter(best, &cand[j]);
                    }
                    next[i] = best.clone();
                }
            }
        }
        for i in 0..n {
            traces[i].payloads.push(next[i].clone());
        }
        held = next;
    }
    traces
}

/// `K̂(trace_net) - K̂(trace_iso)` for one node.
pub fn eac(trace_net: &NodeTrace, trace_iso: &NodeTrace, estimator: &Estimator) -> Result<f64> {
    if trace_net.payloads.len() != trace_iso.payloads.len() {
        return Err(LabError::Domain("traces have different round counts".into()));
    }
    if trace_net == trace_iso {
        return Ok(0.0);
    }
    Ok(estimator.bits(&trace_net.encode())? - estimator.bits(&trace_iso.encode())?)
}

/// `ceil(log2 n) + 2`.
pub fn default_rounds(n: usize) -> usize {
    n.max(1).next_power_of_two().trailing_zeros() as usize + 2
}

#[derive(Clone, Debug)]
pub struct EeoeParams {
    pub ns: Vec<usize>,
    pub topology: TopologyKind,
    pub protocol: Protocol,
    pub trials: usize,
    pub budget: u64,
    pub s_max: u32,
    pub master_seed: u64,
}

impl EeoeParams {
    pub fn rounds(&self, n: usize) -> usize {
        default_rounds(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EacRow {
    pub n: usize,
    pub trial: usize,
    pub node: usize,
    pub eac_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EeoeRow {
    pub n: usize,
    pub mean: f64,
    /// 95% normal-approximation half-width over per-trial means.
    pub ci: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EeoeResult {
    pub rows: Vec<EacRow>,
    pub aggregate: Vec<EeoeRow>,
    pub topology_seeds: Vec<(usize, usize, u64)>,
}

impl EeoeResult {
    pub fn results_csv(&self) -> String {
        let mut s = String::from("N,trial,node,eac_bits\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.n, r.trial, r.node, r.eac_bits));
        }
        s
    }

    pub fn aggregate_csv(&self) -> String {
        let mut s = String::from("N,mean,ci\n");
        for r in &self.aggregate {
            s.push_str(&format!("{},{:.6},{:.6}\n", r.n, r.mean, r.ci));
        }
        s
    }

    pub fn means(&self) -> Vec<f64> {
        self.aggregate.iter().map(|r| r.mean).collect()
    }
}

/// Population for trial `trial` at size `n`; shared by every topology so
/// controls are paired with the main run.
pub fn population_for(master: u64, n: usize, trial: usize, s_max: u32) -> Vec<ProgramBits> {
    let mut rng = rng_for(master, &format!("population-{n}"), trial as u64);
    (0..n).map(|_| sample_program(&mut rng, s_max)).collect()
}

pub fn topology_seed(master: u64, n: usize, trial: usize) -> u64 {
    crate::seeds::derive_seed(master, &format!("topology-{n}"), trial as u64)
}

/// One trial: per-node EAC values.
pub fn eeoe_trial(p: &EeoeParams, n: usize, trial: usize, estimator: &Estimator) -> Result<Vec<f64>> {
    use rand::SeedableRng;
    let pop = population_for(p.master_seed, n, trial, p.s_max);
    let mut trng = rand_chacha::ChaCha8Rng::seed_from_u64(topology_seed(p.master_seed, n, trial));
    let topo = gen_topology(p.topology, n, false, &mut trng)?;
    let c = p.rounds(n);
    let protocol = match p.protocol {
        Protocol::Sis { infect, recover, .. } => Protocol::Sis {
            infect,
            recover,
            seed: crate::seeds::derive_seed(p.master_seed, &format!("sis-{n}"), trial as u64),
        },
        x => x,
    };
    let net = AlgoNet::new(topo.graph, pop.clone(), protocol, c, p.budget)?;
    let iso = run_isolated(&pop, c, p.budget);
    let nets = run_networked(&net);
    nets.iter().zip(&iso).map(|(a, b)| eac(a, b, estimator)).collect()
}

pub fn eeoe_curve(p: &EeoeParams, estimator: &Estimator) -> Result<EeoeResult> {
    use rayon::prelude::*;
    let mut rows = Vec::new();
    let mut aggregate = Vec::new();
    let mut topology_seeds = Vec::new();
    for &n in &p.ns {
        let per_trial: Vec<Vec<f64>> = (0..p.trials)
            .into_par_iter()
            .map(|t| eeoe_trial(p, n, t, estimator))
            .collect::<Result<_>>()?;
        let mut means = Vec::with_capacity(p.trials);
        for (trial, eacs) in per_trial.iter().enumerate() {
            topology_seeds.push((n, trial, topology_seed(p.master_seed, n, trial)));
            for (node, &e) in eacs.iter().enumerate() {
                rows.push(EacRow {
                    n,
                    trial,
                    node,
                    eac_bits: e,
                });
            }
            means.push(eacs.iter().sum::<f64>() / eacs.len().max(1) as f64);
        }
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let var = if means.len() > 1 {
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        aggregate.push(EeoeRow {
            n,
            mean,
            ci: 1.96 * (var / k).sqrt(),
        });
    }
    Ok(EeoeResult {
        rows,
        aggregate,
        topology_seeds,
    })
}

/// The network as one system: round `r`'s state is every node's payload in
/// a fixed arrangement, each written as a length field of `len_bits` bits
/// followed by the payload zero-padded to `slot` bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroSystem {
    pub arrangement: Vec<usize>,
    pub slot: usize,
    pub len_bits: usize,
    pub states: Vec<Bits>,
}

impl MacroSystem {
    pub fn unpack(&self, state: &Bits) -> Vec<Bits> {
        let w = self.len_bits + self.slot;
        (0..self.arrangement.len())
            .map(|k| {
                let cell = &state[k * w..(k + 1) * w];
                let len = Bits::from(&cell[..self.len_bits]).to_uint().unwrap_or(0) as usize;
                Bits::from(&cell[self.len_bits..self.len_bits + len])
            })
            .collect()
    }

    /// Payloads in original node order at round `r` (0-based).
    pub fn node_payloads(&self, r: usize) -> Vec<Bits> {
        let packed = self.unpack(&self.states[r]);
        let mut out = vec![Bits::new(); packed.len()];
        for (k, &node) in self.arrangement.iter().enumerate() {
            out[node] = packed[k].clone();
        }
        out
    }

    pub fn trajectory(&self) -> Trajectory {
        let mut t = Trajectory::new(0, self.state_width(), self.states.clone()).expect("uniform width");
        t.provenance = Provenance {
            system: self.id(),
            env: None,
            perturbations: Vec::new(),
        };
        t
    }
}

impl Fddds for MacroSystem {
    fn id(&self) -> String {
        format!("macro(n={},rounds={})", self.arrangement.len(), self.states.len())
    }

    fn state_width(&self) -> usize {
        self.arrangement.len() * (self.len_bits + self.slot)
    }

    /// Replays the recorded rounds; the last state is a fixed point.
    fn advance(&self, state: &Bits, _env: &Bits, t: u64) -> Bits {
        match self.states.get(t as usize + 1) {
            Some(next) if self.states.get(t as usize) == Some(state) => next.clone(),
            _ => state.clone(),
        }
    }
}

pub fn macro_fddds(traces: &[NodeTrace], arrangement: &[usize]) -> Result<MacroSystem> {
    let n = traces.len();
    let mut seen = vec![false; n];
    if arrangement.len() != n
        || arrangement
            .iter()
            .any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
    {
        return Err(LabError::Domain("arrangement is not a permutation of the nodes".into()));
    }
    let rounds = traces.first().map_or(0, |t| t.payloads.len());
    if traces.iter().any(|t| t.payloads.len() != rounds) {
        return Err(LabError::Domain("ragged traces".into()));
    }
    let slot = traces
        .iter()
        .flat_map(|t| &t.payloads)
        .map(|p| p.len())
        .max()
        .unwrap_or(0);
    let len_bits = (usize::BITS - slot.leading_zeros()).max(1) as usize;
    let states = (0..rounds)
        .map(|r| {
            let mut s = Bits::new();
            for &node in arrangement {
                let p = &traces[node].payloads[r];
                s.extend_bits(&Bits::from_uint(p.len() as u64, len_bits));
                s.extend_bits(p);
                s.extend_bits(&Bits::zeros(slot - p.len()));
            }
            s
        })
        .collect();
    Ok(MacroSystem {
        arrangement: arrangement.to_vec(),
        slot,
        len_bits,
        states,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausationShadow {
    pub n: usize,
    /// Mean over nodes of `cond_upper(trace_net | trace_iso)`.
    pub given_iso: f64,
    /// Mean over nodes of `cond_upper(trace_net | [trace_iso, champions sent by every node])`.
    pub given_broadcast: f64,
}

pub fn causation_shadow(net: &[NodeTrace], iso: &[NodeTrace]) -> CausationShadow {
    let log: Vec<Bits> = net.iter().map(NodeTrace::encode).collect();
    let n = net.len().max(1) as f64;
    let mut a = 0.0;
    let mut b = 0.0;
    for (tn, ti) in net.iter().zip(iso) {
        let z = tn.encode();
        a += cond_upper(&z, &ti.encode()).upper;
        let mut ctx = vec![ti.encode()];
        ctx.extend(log.iter().cloned());
        b += cond_upper_ctx(&z, &Context::new(ctx)).upper;
    }
    CausationShadow {
        n: net.len(),
        given_iso: a / n,
        given_broadcast: b / n,
    }
}

pub fn random_population<R: RngCore>(n: usize, s_max: u32, rng: &mut R) -> Vec<ProgramBits> {
    (0..n).map(|_| sample_program(rng, s_max)).collect()
}
