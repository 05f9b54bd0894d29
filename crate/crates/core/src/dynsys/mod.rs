//! Finite discrete deterministic dynamical systems.
//!
//! A system maps `(state, environment state, time)` to the next state over
//! fixed-width bit-string states. Environments are explicit per-step input
//! sequences (or a constant); experiments declare which one they use.

pub mod eca;
pub mod tmsys;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{LabError, Result};
use crate::refmachine::codec::{push_gamma, BitSource, Cursor};

pub use eca::{Boundary, EcaSpec};
pub use tmsys::{compile_tm_to_fddds, CompiledTm, InputFrame};

pub trait Fddds {
    /// Short identifier recorded in trajectory provenance.
    fn id(&self) -> String;

    fn state_width(&self) -> usize;

    fn env_width(&self) -> usize {
        0
    }

    /// One application of the evolution rule. Implementations may assume
    /// the inputs passed [`Fddds::check`].
    fn advance(&self, state: &Bits, env: &Bits, t: u64) -> Bits;

    fn check(&self, state: &Bits, env: &Bits) -> Result<()> {
        if state.len() != self.state_width() {
            return Err(LabError::Domain(format!(
                "state has {} bits, system expects {}",
                state.len(),
                self.state_width()
            )));
        }
        if env.len() != self.env_width() {
            return Err(LabError::Domain(format!(
                "environment state has {} bits, system expects {}",
                env.len(),
                self.env_width()
            )));
        }
        Ok(())
    }

    fn step(&self, state: &Bits, env: &Bits, t: u64) -> Result<Bits> {
        self.check(state, env)?;
        Ok(self.advance(state, env, t))
    }
}

impl<T: Fddds + ?Sized> Fddds for &T {
    fn id(&self) -> String {
        (**self).id()
    }
    fn state_width(&self) -> usize {
        (**self).state_width()
    }
    fn env_width(&self) -> usize {
        (**self).env_width()
    }
    fn advance(&self, state: &Bits, env: &Bits, t: u64) -> Bits {
        (**self).advance(state, env, t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Environment {
    Constant(Bits),
    /// `seq[i]` drives the step from `t0 + i` to `t0 + i + 1`.
    Sequence(Vec<Bits>),
}

impl Environment {
    pub fn none() -> Self {
        Environment::Constant(Bits::new())
    }

    pub fn at(&self, i: usize) -> Result<&Bits> {
        match self {
            Environment::Constant(e) => Ok(e),
            Environment::Sequence(seq) => seq.get(i).ok_or_else(|| {
                LabError::Domain(format!(
                    "environment sequence has {} entries, step {i} needs more",
                    seq.len()
                ))
            }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: String,
    pub env: Option<Environment>,
    pub perturbations: Vec<String>,
}

/// A trajectory segment `(S_t0, ..., S_t1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: u64,
    pub width: usize,
    pub states: Vec<Bits>,
    pub provenance: Provenance,
}

impl Trajectory {
    pub fn new(start: u64, width: usize, states: Vec<Bits>) -> Result<Self> {
        if let Some(s) = states.iter().find(|s| s.len() != width) {
            return Err(LabError::Domain(format!("state {s} does not have width {width}")));
        }
        Ok(Trajectory {
            start,
            width,
            states,
            provenance: Provenance::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Last time index covered, if any state is present.
    pub fn end(&self) -> Option<u64> {
        (!self.states.is_empty()).then(|| self.start + self.states.len() as u64 - 1)
    }

    pub fn at(&self, t: u64) -> Option<&Bits> {
        t.checked_sub(self.start).and_then(|i| self.states.get(i as usize))
    }

    /// The sub-segment covering `[t0, t1]`.
    pub fn window(&self, t0: u64, t1: u64) -> Result<Trajectory> {
        let end = self.end().unwrap_or(0);
        if self.is_empty() || t0 < self.start || t1 > end || t0 > t1 {
            return Err(LabError::Domain(format!(
                "window [{t0}, {t1}] outside trajectory [{}, {end}]",
                self.start
            )));
        }
        let a = (t0 - self.start) as usize;
        let b = (t1 - self.start) as usize;
        Ok(Trajectory {
            start: t0,
            width: self.width,
            states: self.states[a..=b].to_vec(),
            provenance: self.provenance.clone(),
        })
    }

    /// Appends states following this segment.
    pub fn extended(&self, more: &[Bits]) -> Result<Trajectory> {
        let mut states = self.states.clone();
        states.extend_from_slice(more);
        let mut t = Trajectory::new(self.start, self.width, states)?;
        t.provenance = self.provenance.clone();
        Ok(t)
    }

    /// Canonical encoding
    /// `gamma(width+1) . gamma(len+1) . gamma(start+1) . S_t0 . S_t0+1 ...`,
    /// states as fixed-width blocks.
    pub fn encode(&self) -> Bits {
        let mut out = Bits::with_capacity(self.width * self.len() + 48);
        push_gamma(&mut out, self.width as u64 + 1);
        push_gamma(&mut out, self.len() as u64 + 1);
        push_gamma(&mut out, self.start + 1);
        for s in &self.states {
            out.extend_bits(s);
        }
        out
    }

    pub fn decode(bits: &[bool]) -> Result<Trajectory> {
        let bad = || LabError::Encoding("truncated trajectory encoding".into());
        let mut c = Cursor::new(bits);
        let width = (c.read_gamma()?.ok_or_else(bad)? - 1) as usize;
        let len = (c.read_gamma()?.ok_or_else(bad)? - 1) as usize;
        let start = c.read_gamma()?.ok_or_else(bad)? - 1;
        if c.remaining() != width * len {
            return Err(LabError::Encoding(format!(
                "trajectory payload has {} bits, header implies {}",
                c.remaining(),
                width * len
            )));
        }
        let states = (0..len)
            .map(|_| Bits::from(c.take(width).expect("length checked")))
            .collect();
        Trajectory::new(start, width, states)
    }

    /// CSV dump with columns `t,state_bits`, optionally preceded by
    /// `# key=value` comment lines.
    pub fn to_csv(&self, comments: &[(&str, String)]) -> String {
        let mut s = String::new();
        for (k, v) in comments {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("t,state_bits\n");
        for (i, st) in self.states.iter().enumerate() {
            s.push_str(&format!("{},{st}\n", self.start + i as u64));
        }
        s
    }
}

/// Iterates the rule from `s0` at time `t0` through `t1`.
pub fn trajectory<S: Fddds + ?Sized>(sys: &S, s0: &Bits, env: &Environment, t0: u64, t1: u64) -> Result<Trajectory> {
    if t1 < t0 {
        return Err(LabError::Domain(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let steps = (t1 - t0) as usize;
    // fail before simulating when the environment is too short
    if steps > 0 {
        env.at(steps - 1)?;
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(s0.clone());
    sys.check(s0, env.at(0).unwrap_or(&Bits::zeros(sys.env_width())))?;
    for i in 0..steps {
        let next = sys.step(&states[i], env.at(i)?, t0 + i as u64)?;
        states.push(next);
    }
    let mut tr = Trajectory::new(t0, sys.state_width(), states)?;
    tr.provenance = Provenance {
        system: sys.id(),
        env: Some(env.clone()),
        perturbations: Vec::new(),
    };
    Ok(tr)
}

/// Least `(preperiod, period)` with `S_{p+c} = S_p`, by Brent's cycle
/// detection under a constant environment. The rule must not depend on
/// time; the first revisit happens at `preperiod + period`.
pub fn recurrence_time<S: Fddds + ?Sized>(sys: &S, s0: &Bits, env: &Bits) -> Result<(u64, u64)> {
    sys.check(s0, env)?;
    let f = |x: &Bits| sys.advance(x, env, 0);
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = s0.clone();
    let mut hare = f(s0);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = f(&hare);
        lam += 1;
    }
    let mut tortoise = s0.clone();
    let mut hare = s0.clone();
    for _ in 0..lam {
        hare = f(&hare);
    }
    let mut mu = 0u64;
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    Ok((mu, lam))
}

/// i.i.d. uniform states; with overwhelming probability the encoding is
/// incompressible up to the compressor's header cost.
pub fn gen_incompressible_trajectory<R: Rng>(width: usize, length: usize, rng: &mut R) -> Trajectory {
    let states = (0..length)
        .map(|_| (0..width).map(|_| rng.gen::<bool>()).collect())
        .collect();
    let mut t = Trajectory::new(0, width, states).expect("uniform widths");
    t.provenance.system = format!("iid-uniform(width={width})");
    t
}
