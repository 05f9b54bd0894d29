//! Finite-horizon trend harness for asymptotic observer-independent
//! emergence.
//!
//! For each roster observer and each horizon `t'` of a schedule, the
//! harness asks whether the future up to `t'` is emergent for that
//! observer. A reported `t_e` only says that every tested horizon from
//! `t_e` to the end of the schedule was Emergent under exhaustive search.
//! The asymptotic statement itself cannot be tested; nothing is claimed
//! past the last horizon.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algonet::{
    default_rounds, gen_topology, macro_fddds, random_population, run_networked, AlgoNet, Protocol, TopologyKind,
};
use crate::bits::Bits;
use crate::complexity::{SearchMode, MAX_LEN_CAP};
use crate::dynsys::{trajectory, Boundary, EcaSpec, Environment, Fddds, Trajectory};
use crate::error::{LabError, Result};
use crate::evomodel::{evolve, minimal_organism, EvolveParams};
use crate::observer::{extend_fat, observe, ode_verdict, Channel, Fat, ObserverSystem, Outcome, Probe};
use crate::refmachine::copy_program;
use crate::seeds::rng_for;

const OBSERVER_BUDGET: u64 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FatChoice {
    Empty,
    /// One uniformly random payload of this many bits.
    Noise {
        bits: usize,
    },
    /// Pre-extended with the target of every horizon in the schedule.
    Future,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterEntry {
    pub name: String,
    pub c_i: u32,
    pub c_o: u32,
    pub c_e: u32,
    pub fat: FatChoice,
}

impl RosterEntry {
    pub fn new(name: &str, c: (u32, u32, u32), fat: FatChoice) -> Self {
        RosterEntry {
            name: name.to_string(),
            c_i: c.0,
            c_o: c.1,
            c_e: c.2,
            fat,
        }
    }

    pub fn threshold(&self) -> u32 {
        self.c_i + self.c_o + self.c_e
    }
}

pub fn default_roster() -> Vec<RosterEntry> {
    vec![
        RosterEntry::new("blank", (4, 4, 4), FatChoice::Empty),
        RosterEntry::new("noisy", (4, 4, 4), FatChoice::Noise { bits: 16 }),
    ]
}

/// Replays a recorded state sequence; the last state is a fixed point.
#[derive(Clone, Debug)]
pub struct Replay {
    pub name: String,
    pub states: Vec<Bits>,
}

impl Fddds for Replay {
    fn id(&self) -> String {
        format!("replay({})", self.name)
    }

    fn state_width(&self) -> usize {
        self.states[0].len()
    }

    fn advance(&self, state: &Bits, _env: &Bits, t: u64) -> Bits {
        match self.states.get(t as usize + 1) {
            Some(next) if self.states.get(t as usize) == Some(state) => next.clone(),
            _ => state.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Generator {
    /// State `t` is the bit length of the fittest organism after mutation
    /// `t`, as an 8-bit number.
    Evolution {
        mutations: u64,
        budget: u64,
        s_max: u32,
        seed: u64,
    },
    /// The macro-level system of one networked population.
    Algonet {
        n: usize,
        topology: TopologyKind,
        budget: u64,
        s_max: u32,
        seed: u64,
    },
    /// Rule 204 from a random state.
    Constant { width: usize, seed: u64 },
}

pub const EVOLUTION_STATE_WIDTH: usize = 8;

impl Generator {
    /// The system and its trajectory `S_0 .. S_len`.
    pub fn build(&self, len: u64) -> Result<(Box<dyn Fddds + Send + Sync>, Trajectory)> {
        let env = Environment::none();
        let (sys, s0): (Box<dyn Fddds + Send + Sync>, Bits) = match self {
            Generator::Evolution {
                mutations,
                budget,
                s_max,
                seed,
            } => {
                let params = EvolveParams::new(*mutations, *budget, *s_max);
                let mut rng = rng_for(*seed, "trend-evolution", 0);
                let h = evolve(minimal_organism(), &params, &mut rng, None)?;
                let states: Vec<Bits> = h
                    .rows
                    .iter()
                    .map(|r| Bits::from_uint(r.fitness_bits.min(255) as u64, EVOLUTION_STATE_WIDTH))
                    .collect();
                let s0 = states[0].clone();
                let name = format!("evolution(n={mutations},seed={seed})");
                (Box::new(Replay { name, states }), s0)
            }
            Generator::Algonet {
                n,
                topology,
                budget,
                s_max,
                seed,
            } => {
                let pop = random_population(*n, *s_max, &mut rng_for(*seed, "trend-population", 0));
                let topo = gen_topology(*topology, *n, true, &mut rng_for(*seed, "trend-topology", 0))?;
                let net = AlgoNet::new(topo.graph, pop, Protocol::PlainDiffusion, default_rounds(*n), *budget)?;
                let arrangement: Vec<usize> = (0..*n).collect();
                let m = macro_fddds(&run_networked(&net), &arrangement)?;
                let s0 = m.trajectory().states[0].clone();
                (Box::new(m), s0)
            }
            Generator::Constant { width, seed } => {
                let mut rng = rng_for(*seed, "trend-constant", 0);
                let s0: Bits = (0..*width).map(|_| rand::Rng::gen::<bool>(&mut rng)).collect();
                (Box::new(EcaSpec::new(204, *width, Boundary::Periodic)), s0)
            }
        };
        let traj = trajectory(sys.as_ref(), &s0, &env, 0, len)?;
        Ok((sys, traj))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub observer: String,
    pub t_prime: u64,
    pub threshold: u32,
    pub mode: String,
    pub outcome: String,
    /// Exhaustion record of an Emergent verdict.
    pub programs_searched: Option<u64>,
    pub certificate_bits: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstFailure {
    At(u64),
    NotReached,
}

impl std::fmt::Display for FirstFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FirstFailure::At(t) => write!(f, "{t}"),
            FirstFailure::NotReached => f.write_str("NotReached"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub observer: String,
    pub threshold: u32,
    pub t_e: FirstFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub generator: Generator,
    pub t: u64,
    pub k: u64,
    pub schedule: Vec<u64>,
    pub rows: Vec<TrendRow>,
    pub summary: Vec<TrendSummary>,
}

impl TrendResult {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("observer,t_prime,threshold,mode,outcome,programs_searched,certificate_bits\n");
        for r in &self.rows {
            let opt = |v: Option<u64>| v.map_or("na".to_string(), |x| x.to_string());
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.observer,
                r.t_prime,
                r.threshold,
                r.mode,
                r.outcome,
                opt(r.programs_searched),
                opt(r.certificate_bits.map(|b| b as u64))
            ));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("observer,threshold,t_e\n");
        for r in &self.summary {
            s.push_str(&format!("{},{},{}\n", r.observer, r.threshold, r.t_e));
        }
        s
    }

    pub fn t_e(&self, observer: &str) -> Option<FirstFailure> {
        self.summary.iter().find(|s| s.observer == observer).map(|s| s.t_e)
    }
}

/// Least `t'` from which every row is Emergent through the end.
fn first_failure(rows: &[TrendRow]) -> FirstFailure {
    let tail = rows
        .iter()
        .rev()
        .take_while(|r| r.outcome == "emergent" && r.programs_searched.is_some());
    tail.last()
        .map_or(FirstFailure::NotReached, |r| FirstFailure::At(r.t_prime))
}

/// Observes the generator's system at `t` with window `k` and asks, for
/// every `t'` in `schedule`, whether `S_{t-k} .. S_{t'}` is emergent for
/// each roster observer. Upper certificates are tried first; otherwise the
/// threshold must be within the exact-search cap.
pub fn aoie_trend(
    generator: &Generator,
    roster: &[RosterEntry],
    t: u64,
    k: u64,
    schedule: &[u64],
    step_budget: u64,
    seed: u64,
) -> Result<TrendResult> {
    if k > t {
        return Err(LabError::Domain(format!(
            "window k = {k} reaches before time 0 at t = {t}"
        )));
    }
    if schedule.is_empty() || schedule[0] <= t || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Domain(
            "schedule must be strictly increasing with every horizon after t".into(),
        ));
    }
    let last = *schedule.last().expect("non-empty");
    let (sys, traj) = generator.build(last)?;
    let env = Environment::none();
    let observed = traj.window(0, t)?;
    let futures: Vec<Trajectory> = schedule
        .iter()
        .map(|&tp| traj.window(t + 1, tp))
        .collect::<Result<_>>()?;
    let window = traj.window(t - k, t)?;
    let targets: Vec<Bits> = futures
        .iter()
        .map(|f| Ok(window.extended(&f.states)?.encode()))
        .collect::<Result<_>>()?;

    // the register holds exactly the delivered window
    let input_cap = traj.window(t - k, t + 1)?.encode().len();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (idx, entry) in roster.iter().enumerate() {
        let fat = match &entry.fat {
            FatChoice::Empty => Fat::new(),
            FatChoice::Noise { bits } => {
                let mut rng = rng_for(seed, "trend-noise", idx as u64);
                Fat::new().appended((0..*bits).map(|_| rand::Rng::gen::<bool>(&mut rng)).collect())
            }
            FatChoice::Future => Fat::new(),
        };
        let mut obs = ObserverSystem::new(copy_program().encode(), fat, input_cap, OBSERVER_BUDGET)
            .with_constants(entry.c_i, entry.c_o, entry.c_e);
        if entry.fat == FatChoice::Future {
            for z in &targets {
                obs = extend_fat(&obs, z);
            }
        }
        let rec = observe(
            &obs,
            sys.as_ref(),
            &observed,
            &env,
            t,
            k,
            &Channel::Identity,
            &Probe::Identity,
        )?;
        let threshold = obs.threshold();
        let mine: Vec<TrendRow> = futures
            .par_iter()
            .map(|future| {
                let t_prime = future.end().expect("non-empty");
                let upper = ode_verdict(&rec, &obs, future, 1, SearchMode::Upper)?;
                let v = if upper.is_not_emergent() {
                    upper
                } else if threshold > MAX_LEN_CAP {
                    return Err(LabError::Cap {
                        threshold,
                        cap: MAX_LEN_CAP,
                    });
                } else {
                    let mode = SearchMode::BoundedExact {
                        len_cap: threshold,
                        step_budget,
                    };
                    ode_verdict(&rec, &obs, future, 1, mode)?
                };
                let (outcome, programs, cert) = match &v.outcome {
                    Outcome::NotEmergent { certificate } => ("not-emergent", None, Some(certificate.bits().len())),
                    Outcome::Emergent { programs_searched, .. } => ("emergent", Some(*programs_searched), None),
                    Outcome::Inconclusive { .. } => ("inconclusive", None, None),
                };
                Ok(TrendRow {
                    observer: entry.name.clone(),
                    t_prime,
                    threshold,
                    mode: v.mode.name().to_string(),
                    outcome: outcome.to_string(),
                    programs_searched: programs,
                    certificate_bits: cert,
                })
            })
            .collect::<Result<_>>()?;
        summary.push(TrendSummary {
            observer: entry.name.clone(),
            threshold,
            t_e: first_failure(&mine),
        });
        rows.extend(mine);
    }
    Ok(TrendResult {
        generator: generator.clone(),
        t,
        k,
        schedule: schedule.to_vec(),
        rows,
        summary,
    })
}
