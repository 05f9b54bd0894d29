//! Formal observer systems.
//!
//! An observer is an OTM (a program reading the pair `<first tape, FAT>`)
//! compiled into a resetting dynamical system. Observation delivers a
//! string `w` through a channel; the observer then restarts its OTM on `w`.
//! Conditional quantities against the observer use the tuple context
//! `[w, observer trajectory, FAT payload 1, ..., FAT payload m]`.

pub mod verdict;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::complexity::{cond_estimate, AicEstimate, SearchMode};
use crate::dynsys::{CompiledTm, Environment, Fddds, InputFrame, Trajectory};
use crate::error::{LabError, Result};
use crate::perturb::{apply_ap, AlgorithmicPerturbation};
use crate::refmachine::codec::{push_gamma, BitSource, Cursor};
use crate::refmachine::{copy_program, AddressedProgram, Context, ProgramBits, Selector};

pub use verdict::{
    bedau_verdict, extend_fat, ode_problem, ode_verdict, BedauOutcome, Certificate, EmergenceVerdict, Outcome,
    Simulator, SimulatorRegistry, TrajectorySimulator, VerdictReport,
};

pub const DEFAULT_C_O: u32 = 8;
pub const DEFAULT_C_E: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FatRecord {
    pub key: Bits,
    pub payload: Bits,
}

/// An opaque knowledge base: self-delimiting records
/// `gamma(|key|+1) key gamma(|payload|+1) payload`, concatenated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fat {
    pub records: Vec<FatRecord>,
}

impl Fat {
    pub fn new() -> Self {
        Fat::default()
    }

    pub fn encode(&self) -> Bits {
        let mut out = Bits::new();
        for r in &self.records {
            push_gamma(&mut out, r.key.len() as u64 + 1);
            out.extend_bits(&r.key);
            push_gamma(&mut out, r.payload.len() as u64 + 1);
            out.extend_bits(&r.payload);
        }
        out
    }

    pub fn decode(bits: &[bool]) -> Result<Fat> {
        let bad = || LabError::Encoding("truncated FAT record".into());
        let mut c = Cursor::new(bits);
        let mut records = Vec::new();
        while c.remaining() > 0 {
            let kl = (c.read_gamma()?.ok_or_else(bad)? - 1) as usize;
            let key = Bits::from(c.take(kl).ok_or_else(bad)?);
            let pl = (c.read_gamma()?.ok_or_else(bad)? - 1) as usize;
            let payload = Bits::from(c.take(pl).ok_or_else(bad)?);
            records.push(FatRecord { key, payload });
        }
        Ok(Fat { records })
    }

    /// Appends a record keyed by its index.
    pub fn appended(&self, payload: Bits) -> Fat {
        let mut f = self.clone();
        let key = Bits::from_uint(f.records.len() as u64, 16);
        f.records.push(FatRecord { key, payload });
        f
    }

    /// Non-empty payloads, the FAT's contribution to conditioning contexts.
    pub fn payloads(&self) -> Vec<Bits> {
        self.records
            .iter()
            .filter(|r| !r.payload.is_empty())
            .map(|r| r.payload.clone())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverSystem {
    pub otm: ProgramBits,
    pub fat: Fat,
    pub c_i: u32,
    pub c_o: u32,
    pub c_e: u32,
    /// Capacity of the first-tape register.
    pub input_cap: usize,
    /// Step budget per simulation cycle.
    pub budget: u64,
    /// First-tape content before any observation.
    pub initial_input: Bits,
}

impl ObserverSystem {
    pub fn new(otm: ProgramBits, fat: Fat, input_cap: usize, budget: u64) -> Self {
        ObserverSystem {
            otm,
            fat,
            c_i: crate::complexity::DEFAULT_C_I,
            c_o: DEFAULT_C_O,
            c_e: DEFAULT_C_E,
            input_cap,
            budget,
            initial_input: Bits::new(),
        }
    }

    pub fn with_constants(mut self, c_i: u32, c_o: u32, c_e: u32) -> Self {
        self.c_i = c_i;
        self.c_o = c_o;
        self.c_e = c_e;
        self
    }

    pub fn threshold(&self) -> u32 {
        self.c_i + self.c_o + self.c_e
    }

    /// The observer as a dynamical system: the OTM on `<input, FAT>`,
    /// restarted after every halt.
    pub fn compiled(&self) -> Result<CompiledTm> {
        CompiledTm::new(
            self.otm.decode()?,
            InputFrame::Paired(self.fat.encode()),
            self.input_cap,
            self.budget,
        )
    }

    /// `O_t0 .. O_t1` with the register holding `input` from `O_t0`.
    pub fn run_from(&self, input: &Bits, t0: u64, t1: u64) -> Result<Trajectory> {
        let sys = self.compiled()?;
        let s0 = sys
            .initial_state(input)
            .map_err(|_| channel_overflow(input.len(), self.input_cap))?;
        crate::dynsys::trajectory(&sys, &s0, &Environment::none(), t0, t1)
    }
}

fn channel_overflow(len: usize, cap: usize) -> LabError {
    LabError::Channel(format!("{len} bits delivered, observer input capacity is {cap}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Identity,
    /// Deletes the bits at these positions.
    Mask(Vec<usize>),
    /// OR over consecutive blocks of `factor` bits.
    CoarseGrain(usize),
}

impl Channel {
    pub fn apply(&self, x: &Bits) -> Bits {
        match self {
            Channel::Identity => x.clone(),
            Channel::Mask(hidden) => x
                .iter()
                .enumerate()
                .filter(|(i, _)| !hidden.contains(i))
                .map(|(_, &b)| b)
                .collect(),
            Channel::CoarseGrain(f) => {
                let f = (*f).max(1);
                x.chunks(f).map(|c| c.iter().any(|&b| b)).collect()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Channel::Identity => "identity".into(),
            Channel::Mask(h) => format!("mask({})", h.len()),
            Channel::CoarseGrain(f) => format!("coarse-grain({f})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// Observation does not disturb the system.
    Identity,
    /// The observer's action on the system at `t`.
    Perturb(AlgorithmicPerturbation),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub t: u64,
    pub k: u64,
    pub channel: Channel,
    pub w: Bits,
    /// The observer's perturbation of the system, `S_t -> S'_{t+1}`.
    pub p_o_to_s: AlgorithmicPerturbation,
    /// The system's perturbation of the observer, `O_t -> O'_{t+1}`.
    pub p_s_to_o: AlgorithmicPerturbation,
    pub s_prime_next: Bits,
    /// `S_{t-k} .. S_t`.
    pub window: Trajectory,
    /// `O_0 .. O_t, O'_{t+1}`.
    pub observer: Trajectory,
}

impl ObservationRecord {
    /// `S_{t-k} .. S_t, S'_{t+1}` as one trajectory.
    pub fn observed(&self) -> Trajectory {
        self.window
            .extended(std::slice::from_ref(&self.s_prime_next))
            .expect("same width")
    }

    /// The target of the observation principle.
    pub fn target(&self) -> Bits {
        self.observed().encode()
    }

    /// Observer trajectory continued through `t + m`.
    pub fn observer_through(&self, obs: &ObserverSystem, m: u64) -> Result<Trajectory> {
        if m <= 1 {
            return Ok(self.observer.clone());
        }
        let sys = obs.compiled()?;
        let env = Environment::none();
        let last = self.observer.states.last().expect("non-empty").clone();
        let tail = crate::dynsys::trajectory(&sys, &last, &env, self.t + 1, self.t + m)?;
        self.observer.extended(&tail.states[1..])
    }

    /// `[w, observer trajectory through t + m, FAT payloads...]`.
    pub fn context(&self, obs: &ObserverSystem, m: u64) -> Result<Context> {
        let mut comps = vec![self.w.clone(), self.observer_through(obs, m)?.encode()];
        comps.extend(obs.fat.payloads());
        Ok(Context::new(comps))
    }
}

/// One observation event at time `t` of a system trajectory `traj` (which
/// must cover `t - k .. t`; `env` is indexed from `traj.start`).
#[allow(clippy::too_many_arguments)]
pub fn observe<S: Fddds + ?Sized>(
    obs: &ObserverSystem,
    sys: &S,
    traj: &Trajectory,
    env: &Environment,
    t: u64,
    k: u64,
    channel: &Channel,
    probe: &Probe,
) -> Result<ObservationRecord> {
    if k > t {
        return Err(LabError::Domain(format!("window k = {k} reaches before time 0")));
    }
    let window = traj.window(t - k, t)?;
    let s_t = traj.at(t).expect("window checked");
    let p_o_to_s = match probe {
        Probe::Identity => {
            let next = sys.step(s_t, env.at((t - traj.start) as usize)?, t)?;
            AlgorithmicPerturbation::delta(t, next)
        }
        Probe::Perturb(ap) => {
            if ap.t != t {
                return Err(LabError::Domain(format!("probe at {} for observation at {t}", ap.t)));
            }
            ap.clone()
        }
    };
    let s_prime_next = p_o_to_s.target(s_t)?;
    let observed = window.extended(std::slice::from_ref(&s_prime_next))?;
    let w = channel.apply(&observed.encode());
    if w.len() > obs.input_cap {
        return Err(channel_overflow(w.len(), obs.input_cap));
    }
    let osys = obs.compiled()?;
    let before = obs.run_from(&obs.initial_input, 0, t)?;
    let restarted = osys.initial_state(&w)?;
    let p_s_to_o = AlgorithmicPerturbation::delta(t, restarted.clone());
    let mut observer = before.extended(&[restarted])?;
    observer.provenance.perturbations.push(p_s_to_o.to_string());
    Ok(ObservationRecord {
        t,
        k,
        channel: channel.clone(),
        w,
        p_o_to_s,
        p_s_to_o,
        s_prime_next,
        window,
        observer,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum PrincipleVerdict {
    Satisfied {
        estimate: AicEstimate,
    },
    /// Exhaustive search up to `c_o` bits found nothing.
    Violated {
        estimate: AicEstimate,
    },
    Inconclusive {
        estimate: AicEstimate,
    },
}

impl PrincipleVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, PrincipleVerdict::Satisfied { .. })
    }
    pub fn is_violated(&self) -> bool {
        matches!(self, PrincipleVerdict::Violated { .. })
    }
}

/// Checks `K(<S window, S'_{t+1}> | <w, O trajectory>) <= c_o`; `None`
/// means an unbounded allowance.
pub fn check_observation_principle(
    rec: &ObservationRecord,
    obs: &ObserverSystem,
    c_o: Option<u32>,
    mode: SearchMode,
) -> Result<PrincipleVerdict> {
    let Some(c_o) = c_o else {
        return Ok(PrincipleVerdict::Satisfied {
            estimate: AicEstimate::upper_only(f64::INFINITY, crate::complexity::EstimateMethod::Composite),
        });
    };
    let ctx = rec.context(obs, 1)?;
    let target = rec.target();
    let mode = match mode {
        SearchMode::Upper => SearchMode::Upper,
        SearchMode::BoundedExact { step_budget, .. } => SearchMode::BoundedExact {
            len_cap: c_o,
            step_budget,
        },
    };
    let estimate = cond_estimate(&target, &ctx, mode)?;
    Ok(if estimate.upper <= c_o as f64 {
        PrincipleVerdict::Satisfied { estimate }
    } else if matches!(mode, SearchMode::BoundedExact { .. }) {
        PrincipleVerdict::Violated { estimate }
    } else {
        PrincipleVerdict::Inconclusive { estimate }
    })
}

/// Decoders fixed before any experiment; none depends on an observer or a
/// system.
pub struct DecoderRegistry;

impl DecoderRegistry {
    /// Selects the delivered string and copies it.
    pub fn extract_first() -> AddressedProgram {
        AddressedProgram {
            selector: Selector::Front(1),
            program: copy_program(),
        }
    }
}

/// Runs `decoder` on the context `[w, FAT, OTM]` and compares with the
/// observed window.
pub fn check_perfect_observation(
    rec: &ObservationRecord,
    obs: &ObserverSystem,
    decoder: &AddressedProgram,
    budget: u64,
) -> Result<bool> {
    let ctx = Context::new(vec![rec.w.clone(), obs.fat.encode(), obs.otm.0.clone()]);
    let r = decoder
        .run(&ctx, budget)
        .ok_or_else(|| LabError::Domain("decoder selector outside the context".into()))?;
    if !r.halted {
        return Err(LabError::PerfectCheckTimeout(budget));
    }
    Ok(r.output == rec.target())
}

/// Replaces `O_{t+1}` by the initial configuration on `w`; `t` must be a
/// cycle boundary (a halted configuration) of the observer trajectory.
pub fn inject_input(obs: &ObserverSystem, otraj: &Trajectory, t: u64, w: &Bits) -> Result<Trajectory> {
    let sys = obs.compiled()?;
    let state = otraj
        .at(t)
        .ok_or_else(|| LabError::Domain(format!("time {t} outside the observer trajectory")))?;
    if !sys.is_halted(state) {
        return Err(LabError::Boundary(t));
    }
    let restart = sys
        .initial_state(w)
        .map_err(|_| channel_overflow(w.len(), obs.input_cap))?;
    apply_ap(
        &sys,
        otraj,
        &AlgorithmicPerturbation::delta(t, restart),
        &Environment::none(),
    )
}

#[cfg(test)]
mod tests;
