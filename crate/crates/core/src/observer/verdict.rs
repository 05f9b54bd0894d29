//! Observer-dependent emergence verdicts.
//!
//! Compression can only certify `NotEmergent`; `Emergent` is claimed only
//! after an exhaustive bounded search, where it is a literal statement about
//! the resource-bounded reference machine.

use serde::{Deserialize, Serialize};

use super::{ObservationRecord, ObserverSystem};
use crate::bits::Bits;
use crate::complexity::{
    addressed_space_size, bounded_exact_ctx, compress, compressed_len, decompress, AicEstimate, EstimateMethod,
    SearchMode, MAX_LEN_CAP,
};
use crate::dynsys::{trajectory, Environment, Fddds, Trajectory};
use crate::error::{LabError, Result};
use crate::perturb::{apply_ap, AlgorithmicPerturbation};
use crate::refmachine::{AddressedProgram, Context, Selector, C_COPY};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "bits")]
pub enum Certificate {
    /// An addressed program that outputs the target from the context.
    Program(Bits),
    /// A compressed stream decoding to `context . target`.
    Joint(Bits),
    /// A compressed stream decoding to the target alone.
    Standalone(Bits),
}

impl Certificate {
    pub fn bits(&self) -> &Bits {
        match self {
            Certificate::Program(b) | Certificate::Joint(b) | Certificate::Standalone(b) => b,
        }
    }

    pub fn replays(&self, ctx: &Context, target: &Bits, step_budget: u64) -> bool {
        match self {
            Certificate::Program(p) => AddressedProgram::decode(p)
                .and_then(|ap| ap.run(ctx, step_budget))
                .is_some_and(|r| r.halted && r.output == *target),
            Certificate::Joint(code) => decompress(code).is_ok_and(|x| {
                let flat = ctx.encode();
                x.len() == flat.len() + target.len() && x[..flat.len()] == flat[..] && x[flat.len()..] == target[..]
            }),
            Certificate::Standalone(code) => decompress(code).is_ok_and(|x| x == *target),
        }
    }
}

/// The cheapest compression-side description of `z` given `ctx`, with the
/// same cost accounting as `cond_upper_ctx`.
pub fn upper_certificate(z: &Bits, ctx: &Context) -> (f64, Certificate) {
    let flat = ctx.encode();
    let mut joint = flat.clone();
    joint.extend_bits(z);
    let joint_cost = (compressed_len(&joint) as f64 - compressed_len(&flat) as f64).max(C_COPY as f64);
    let mut best = (joint_cost, Certificate::Joint(compress(&joint)));
    let alone = compress(z);
    if (alone.len() as f64) < best.0 {
        best = (alone.len() as f64, Certificate::Standalone(alone));
    }
    for sel in Selector::all(ctx.components.len()) {
        if ctx.select(sel).as_ref() == Some(z) {
            let ap = AddressedProgram {
                selector: sel,
                program: crate::refmachine::copy_program(),
            };
            let cost = (sel.encoded_len() + C_COPY) as f64;
            if cost < best.0 {
                best = (cost, Certificate::Program(ap.encode()));
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum Outcome {
    NotEmergent {
        certificate: Certificate,
    },
    /// No addressed program of length `<= len_cap` produces the target.
    Emergent {
        len_cap: u32,
        programs_searched: u64,
    },
    Inconclusive {
        upper: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmergenceVerdict {
    pub mode: SearchMode,
    pub threshold: u32,
    pub outcome: Outcome,
    pub estimate: AicEstimate,
}

impl EmergenceVerdict {
    pub fn is_emergent(&self) -> bool {
        matches!(self.outcome, Outcome::Emergent { .. })
    }

    pub fn is_not_emergent(&self) -> bool {
        matches!(self.outcome, Outcome::NotEmergent { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.outcome {
            Outcome::NotEmergent { certificate } => Some(certificate),
            _ => None,
        }
    }
}

/// Target and context of the emergence question for `rec` and a future
/// segment `S'_{t+1} .. S'_{t'}`.
pub fn ode_problem(
    rec: &ObservationRecord,
    obs: &ObserverSystem,
    future: &Trajectory,
    m: u64,
) -> Result<(Bits, Context)> {
    if m < 1 {
        return Err(LabError::Domain("observer steps m must be at least 1".into()));
    }
    if future.start != rec.t + 1 || future.states.first() != Some(&rec.s_prime_next) {
        return Err(LabError::Domain(
            "future must start at t + 1 with the perturbed successor".into(),
        ));
    }
    let t_prime = future.end().expect("non-empty");
    if t_prime < rec.t + m {
        return Err(LabError::Domain(format!(
            "t' = {t_prime} is before t + m = {}",
            rec.t + m
        )));
    }
    let target = rec.window.extended(&future.states)?.encode();
    Ok((target, rec.context(obs, m)?))
}

pub fn ode_verdict(
    rec: &ObservationRecord,
    obs: &ObserverSystem,
    future: &Trajectory,
    m: u64,
    mode: SearchMode,
) -> Result<EmergenceVerdict> {
    let threshold = obs.threshold();
    let (target, ctx) = ode_problem(rec, obs, future, m)?;
    match mode {
        SearchMode::Upper => {
            let (cost, cert) = upper_certificate(&target, &ctx);
            let estimate = AicEstimate::upper_only(cost, EstimateMethod::Composite);
            let outcome = if cost <= threshold as f64 {
                Outcome::NotEmergent { certificate: cert }
            } else {
                Outcome::Inconclusive { upper: cost }
            };
            Ok(EmergenceVerdict {
                mode,
                threshold,
                outcome,
                estimate,
            })
        }
        SearchMode::BoundedExact { step_budget, .. } => {
            if threshold > MAX_LEN_CAP {
                return Err(LabError::Cap {
                    threshold,
                    cap: MAX_LEN_CAP,
                });
            }
            let estimate = bounded_exact_ctx(&target, &ctx, threshold, step_budget)?;
            let outcome = match &estimate.witness {
                Some(w) => Outcome::NotEmergent {
                    certificate: Certificate::Program(w.clone()),
                },
                None => Outcome::Emergent {
                    len_cap: threshold,
                    programs_searched: addressed_space_size(ctx.components.len(), threshold),
                },
            };
            Ok(EmergenceVerdict {
                mode: SearchMode::BoundedExact {
                    len_cap: threshold,
                    step_budget,
                },
                threshold,
                outcome,
                estimate,
            })
        }
    }
}

/// The observer with `certificate` appended to its FAT as a new record.
pub fn extend_fat(obs: &ObserverSystem, certificate: &Bits) -> ObserverSystem {
    let mut o = obs.clone();
    o.fat = obs.fat.appended(certificate.clone());
    o
}

/// A registered halting program `p` with `U(<h, p>) = <S window, S' up to h>`.
pub trait Simulator: Send + Sync {
    fn name(&self) -> String;
    /// Encoding of the segment from the window start through time `h`, or
    /// `None` when `h` is out of the simulator's reach.
    fn simulate(&self, h: u64) -> Result<Option<Bits>>;
}

/// Replays a system from a known state with a fixed list of perturbations.
pub struct TrajectorySimulator<S> {
    pub sys: S,
    pub s0: Bits,
    pub t0: u64,
    pub env: Environment,
    pub from: u64,
    pub perturbations: Vec<AlgorithmicPerturbation>,
}

impl<S: Fddds + Send + Sync> Simulator for TrajectorySimulator<S> {
    fn name(&self) -> String {
        format!("replay({})", self.sys.id())
    }

    fn simulate(&self, h: u64) -> Result<Option<Bits>> {
        if h < self.from || self.from < self.t0 {
            return Ok(None);
        }
        let mut tr = trajectory(&self.sys, &self.s0, &self.env, self.t0, h)?;
        for ap in &self.perturbations {
            if ap.t < h {
                tr = apply_ap(&self.sys, &tr, ap, &self.env)?;
            }
        }
        Ok(Some(tr.window(self.from, h)?.encode()))
    }
}

#[derive(Default)]
pub struct SimulatorRegistry {
    pub entries: Vec<Box<dyn Simulator>>,
}

impl SimulatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, s: Box<dyn Simulator>) {
        self.entries.push(s);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum BedauOutcome {
    WeaklyEmergent {
        simulator: String,
        ode: EmergenceVerdict,
    },
    /// `a_failed`: no registered simulator reproduces every prefix;
    /// `b_failed`: the trajectory has a description under the threshold.
    NotWeaklyEmergent {
        a_failed: bool,
        b_failed: bool,
        ode: EmergenceVerdict,
    },
}

pub fn bedau_verdict(
    rec: &ObservationRecord,
    obs: &ObserverSystem,
    future: &Trajectory,
    m: u64,
    registry: &SimulatorRegistry,
    mode: SearchMode,
) -> Result<BedauOutcome> {
    let ode = ode_verdict(rec, obs, future, m, mode)?;
    let combined = rec.window.extended(&future.states)?;
    let from = combined.start;
    let to = combined.end().expect("non-empty");
    let mut simulator = None;
    for sim in &registry.entries {
        let mut ok = true;
        for h in from..=to {
            let expect = combined.window(from, h)?.encode();
            if sim.simulate(h)?.as_ref() != Some(&expect) {
                ok = false;
                break;
            }
        }
        if ok {
            simulator = Some(sim.name());
            break;
        }
    }
    let b_failed = ode.is_not_emergent();
    Ok(match simulator {
        Some(name) if !b_failed => BedauOutcome::WeaklyEmergent { simulator: name, ode },
        s => BedauOutcome::NotWeaklyEmergent {
            a_failed: s.is_none(),
            b_failed,
            ode,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchCaps {
    pub len_cap: Option<u32>,
    pub programs_searched: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub step_budget: Option<u64>,
    pub observer_budget: u64,
}

/// The JSON verdict record written by experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub mode: String,
    pub threshold_bits: u32,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_hex: Option<String>,
    pub search_caps: SearchCaps,
    pub budgets: Budgets,
    pub seeds: Vec<u64>,
    pub constants: Constants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_i: u32,
    pub c_o: u32,
    pub c_e: u32,
}

impl VerdictReport {
    pub fn new(v: &EmergenceVerdict, obs: &ObserverSystem, seeds: Vec<u64>) -> Self {
        let (outcome, certificate_hex, programs) = match &v.outcome {
            Outcome::NotEmergent { certificate } => ("not-emergent", Some(certificate.bits().to_len_hex()), None),
            Outcome::Emergent { programs_searched, .. } => ("emergent", None, Some(*programs_searched)),
            Outcome::Inconclusive { .. } => ("inconclusive", None, None),
        };
        let (len_cap, step_budget) = match v.mode {
            SearchMode::Upper => (None, None),
            SearchMode::BoundedExact { len_cap, step_budget } => (Some(len_cap), Some(step_budget)),
        };
        VerdictReport {
            mode: v.mode.name().to_string(),
            threshold_bits: v.threshold,
            outcome: outcome.to_string(),
            certificate_hex,
            search_caps: SearchCaps {
                len_cap,
                programs_searched: programs,
            },
            budgets: Budgets {
                step_budget,
                observer_budget: obs.budget,
            },
            seeds,
            constants: Constants {
                c_i: obs.c_i,
                c_o: obs.c_o,
                c_e: obs.c_e,
            },
        }
    }
}
