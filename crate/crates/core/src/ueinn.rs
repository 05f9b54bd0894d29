//! Coupled cellular automata: a system ECA whose rule is chosen each step
//! by an environment ECA, compared against the atlas of every isolated
//! system of the same width.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::dynsys::{recurrence_time, trajectory, Boundary, EcaSpec, Environment, Fddds, Trajectory};
use crate::error::{LabError, Result};

pub const MAX_ATLAS_WIDTH: usize = 5;

/// Nominal description length of the index-expanding routine
/// [`expand_certificate`].
pub const P_EXPAND_LEN: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub rule: u8,
    pub s0: Bits,
    pub preperiod: u64,
    pub period: u64,
}

impl AtlasRecord {
    pub fn recurrence(&self) -> u64 {
        self.preperiod + self.period
    }
}

/// A cycle written from its least rotation.
pub type Cycle = Vec<Bits>;

fn canonical_cycle(states: &[Bits]) -> Cycle {
    let n = states.len();
    let best = (0..n)
        .min_by(|&a, &b| {
            (0..n)
                .map(|k| &states[(a + k) % n])
                .cmp((0..n).map(|k| &states[(b + k) % n]))
        })
        .unwrap_or(0);
    (0..n).map(|k| states[(best + k) % n].clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolatedAtlas {
    pub width: usize,
    /// Rule-major, then initial state in increasing binary value.
    pub records: Vec<AtlasRecord>,
    pub t_p: u64,
    /// Distinct periodic parts, each from its least rotation, sorted.
    pub cycles: Vec<Cycle>,
}

fn isolated(rule: u8, width: usize) -> EcaSpec {
    EcaSpec::new(rule, width, Boundary::Periodic)
}

pub fn build_atlas(n_s: usize) -> Result<IsolatedAtlas> {
    if n_s == 0 || n_s > MAX_ATLAS_WIDTH {
        return Err(LabError::Domain(format!(
            "atlas width must be in 1..={MAX_ATLAS_WIDTH}, got {n_s}"
        )));
    }
    let per_rule: Vec<Vec<(AtlasRecord, Cycle)>> = (0..=255u8)
        .into_par_iter()
        .map(|rule| {
            let sys = isolated(rule, n_s);
            (0..1u64 << n_s)
                .map(|v| {
                    let s0 = Bits::from_uint(v, n_s);
                    let (mu, lambda) = recurrence_time(&sys, &s0, &Bits::new()).expect("valid width");
                    let tr = trajectory(&sys, &s0, &Environment::none(), 0, mu + lambda - 1).expect("valid width");
                    let cycle = canonical_cycle(&tr.states[mu as usize..]);
                    let rec = AtlasRecord {
                        rule,
                        s0,
                        preperiod: mu,
                        period: lambda,
                    };
                    (rec, cycle)
                })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(256 << n_s);
    let mut cycles = BTreeSet::new();
    for (rec, cyc) in per_rule.into_iter().flatten() {
        records.push(rec);
        cycles.insert(cyc);
    }
    let t_p = records.iter().map(AtlasRecord::recurrence).max().unwrap_or(0);
    Ok(IsolatedAtlas {
        width: n_s,
        records,
        t_p,
        cycles: cycles.into_iter().collect(),
    })
}

impl IsolatedAtlas {
    /// CSV: `rule,s0_bits,preperiod,period`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rule,s0_bits,preperiod,period\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{},{}\n", r.rule, r.s0, r.preperiod, r.period));
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    /// Index of a cycle containing `window` as a contiguous cyclic segment,
    /// with the offset where it starts.
    pub fn containing_cycle(&self, window: &[Bits]) -> Option<(usize, usize)> {
        if window.is_empty() {
            return None;
        }
        self.cycles.iter().enumerate().find_map(|(ci, c)| {
            if window.len() > c.len() {
                return None;
            }
            (0..c.len())
                .find(|&o| window.iter().enumerate().all(|(k, w)| &c[(o + k) % c.len()] == w))
                .map(|o| (ci, o))
        })
    }
}

/// Maps each environment state (read as a binary number, cell 0 most
/// significant) to a rule number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub table: Vec<u8>,
}

impl Coupling {
    pub fn constant(rule: u8, n_e: usize) -> Self {
        Coupling {
            table: vec![rule; 1 << n_e],
        }
    }

    /// `g(e) = palette[e mod |palette|]`; `|palette|` must be a power of two
    /// no larger than the environment's state count.
    pub fn low_bits(palette: &[u8], n_e: usize) -> Result<Self> {
        let k = palette.len();
        if !k.is_power_of_two() || k > 1 << n_e {
            return Err(LabError::Domain(format!(
                "palette of {k} rules for a width-{n_e} environment"
            )));
        }
        Ok(Coupling {
            table: (0..1usize << n_e).map(|e| palette[e % k]).collect(),
        })
    }

    pub fn rule_for(&self, env_state: &Bits) -> u8 {
        self.table[env_state.to_uint().expect("narrow environment") as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledSpec {
    pub n_s: usize,
    pub env: EcaSpec,
    pub coupling: Coupling,
}

impl CoupledSpec {
    pub fn new(n_s: usize, env: EcaSpec, coupling: Coupling) -> Result<Self> {
        if coupling.table.len() != 1 << env.width {
            return Err(LabError::Domain(format!(
                "coupling has {} entries, environment has {} states",
                coupling.table.len(),
                1u64 << env.width
            )));
        }
        Ok(CoupledSpec { n_s, env, coupling })
    }

    /// Joint states `(A, E)`; every A-sequence of this length has revisited
    /// a state.
    pub fn joint_bound(&self) -> u64 {
        1u64 << (self.n_s + self.env.width)
    }

    pub fn id(&self) -> String {
        format!("coupled(ns={},{},g={:?})", self.n_s, self.env.id(), self.coupling.table)
    }
}

/// `A_0 .. A_horizon` and `E_0 .. E_horizon`.
pub fn coupled_run(spec: &CoupledSpec, s0: &Bits, e0: &Bits, horizon: u64) -> Result<(Trajectory, Trajectory)> {
    if horizon < 1 {
        return Err(LabError::Domain("horizon must be at least 1".into()));
    }
    if s0.len() != spec.n_s || e0.len() != spec.env.width {
        return Err(LabError::Domain("initial state widths do not match the coupled system".into()));
    }
    let mut a = vec![s0.clone()];
    let mut e = vec![e0.clone()];
    let none = Bits::new();
    for t in 0..horizon {
        let (at, et) = (&a[t as usize], &e[t as usize]);
        let rule = spec.coupling.rule_for(et);
        let next_a = isolated(rule, spec.n_s).advance(at, &none, t);
        let next_e = spec.env.advance(et, &none, t);
        a.push(next_a);
        e.push(next_e);
    }
    let mut ta = Trajectory::new(0, spec.n_s, a)?;
    ta.provenance.system = spec.id();
    let mut te = Trajectory::new(0, spec.env.width, e)?;
    te.provenance.system = spec.env.id();
    Ok((ta, te))
}

/// `(i, j)` with `j` the first index whose state already occurred, at `i`.
pub fn first_revisit(states: &[Bits]) -> Option<(usize, usize)> {
    let mut seen: HashMap<&Bits, usize> = HashMap::new();
    for (j, s) in states.iter().enumerate() {
        if let Some(&i) = seen.get(s) {
            return Some((i, j));
        }
        seen.insert(s, j);
    }
    None
}

fn revisit(a: &Trajectory) -> Result<(usize, usize)> {
    first_revisit(&a.states).ok_or(LabError::Horizon(a.len().saturating_sub(1)))
}

/// Recurrence time of the A-sequence exceeds every isolated one.
pub fn detect_ue(a: &Trajectory, atlas: &IsolatedAtlas) -> Result<bool> {
    check_width(a, atlas)?;
    let (_, j) = revisit(a)?;
    Ok(j as u64 > atlas.t_p)
}

/// The A-sequence's recurrent window appears in no isolated cycle.
pub fn detect_inn(a: &Trajectory, atlas: &IsolatedAtlas) -> Result<bool> {
    check_width(a, atlas)?;
    let (i, j) = revisit(a)?;
    Ok(atlas.containing_cycle(&a.states[i..j]).is_none())
}

fn check_width(a: &Trajectory, atlas: &IsolatedAtlas) -> Result<()> {
    if a.width != atlas.width {
        return Err(LabError::Domain(format!(
            "trajectory width {} against a width-{} atlas",
            a.width, atlas.width
        )));
    }
    Ok(())
}

/// Length of the Elias delta code of `n >= 1`.
pub fn delta_len(n: u64) -> u32 {
    let l = 64 - n.leading_zeros();
    let ll = 32 - l.leading_zeros();
    (l - 1) + 2 * (ll - 1) + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeBound {
    pub p_expand: u32,
    /// `log2(|X_S|^t_p) = n_s * t_p`.
    pub index_bits: f64,
    pub t_p_bits: u32,
    pub t_r_bits: u32,
}

impl CeBound {
    pub fn total(&self) -> f64 {
        self.p_expand as f64 + self.index_bits + self.t_p_bits as f64 + self.t_r_bits as f64
    }
}

/// `|p'| + log2(|X_S|^t_p) + |delta(t_p)| + |delta(t_r)|`.
pub fn ce_bound(atlas: &IsolatedAtlas, t_r: u64) -> Result<CeBound> {
    if t_r < 1 {
        return Err(LabError::Domain("t_r must be at least 1".into()));
    }
    Ok(CeBound {
        p_expand: P_EXPAND_LEN,
        index_bits: atlas.width as f64 * atlas.t_p as f64,
        t_p_bits: delta_len(atlas.t_p.max(1)),
        t_r_bits: delta_len(t_r),
    })
}

/// Input of the expanding routine: a recurrent window of at most `t_p`
/// states, written in the fixed `n_s * t_p`-bit index space, and the length
/// `t_r` to extend it to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandCertificate {
    pub window: Vec<Bits>,
    pub t_r: u64,
}

impl ExpandCertificate {
    pub fn input_bits(&self, atlas: &IsolatedAtlas) -> f64 {
        (atlas.width as u64 * atlas.t_p) as f64
            + delta_len(self.window.len() as u64) as f64
            + delta_len(self.t_r) as f64
    }
}

/// Repeats the window until `t_r` states are written.
pub fn expand_certificate(cert: &ExpandCertificate) -> Vec<Bits> {
    (0..cert.t_r as usize)
        .map(|k| cert.window[k % cert.window.len()].clone())
        .collect()
}

/// The recurrent trajectory of length `t_r` (the first-revisit index): the
/// recurrent window from its first occurrence, repeated.
pub fn recurrent_trajectory(a: &Trajectory) -> Result<Vec<Bits>> {
    let (i, j) = revisit(a)?;
    let w = &a.states[i..j];
    Ok((0..j).map(|k| w[k % w.len()].clone()).collect())
}

/// A description of the recurrent trajectory through the expanding
/// routine, available whenever the window fits the index space. Sequences
/// that are not both UE and INN always have one.
pub fn explain(a: &Trajectory, atlas: &IsolatedAtlas) -> Result<Option<ExpandCertificate>> {
    check_width(a, atlas)?;
    let (i, j) = revisit(a)?;
    let window = &a.states[i..j];
    Ok((window.len() as u64 <= atlas.t_p).then(|| ExpandCertificate {
        window: window.to_vec(),
        t_r: j as u64,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingHit {
    pub env_rule: u8,
    pub e0: Bits,
    pub palette: Vec<u8>,
    pub s0: Bits,
    pub recurrence: u64,
    pub ue: bool,
    pub inn: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSearch {
    pub n_s: usize,
    pub n_e: usize,
    pub env_rule: u8,
    pub palette_size: usize,
    pub runs: u64,
    pub ue_count: u64,
    pub inn_count: u64,
    pub both_count: u64,
    /// First run (in enumeration order) that is both UE and INN.
    pub positive: Option<CouplingHit>,
    /// First UE run and first INN run, when different from `positive`.
    pub first_ue: Option<CouplingHit>,
    pub first_inn: Option<CouplingHit>,
    /// Every run that is UE or INN, in enumeration order.
    #[serde(skip)]
    pub hits: Vec<CouplingHit>,
}

impl CouplingSearch {
    pub fn hits_for_r0(&self, r0: u8) -> impl Iterator<Item = &CouplingHit> {
        self.hits.iter().filter(move |h| h.palette[0] == r0)
    }
}

/// One periodic ECA step on a state packed as an integer, cell 0 in the
/// most significant of `n` bits.
pub fn step_packed(rule: u8, x: u32, n: usize) -> u32 {
    let mask = (1u32 << n) - 1;
    let left = (x >> 1) | ((x & 1) << (n - 1));
    let right = ((x << 1) | (x >> (n - 1))) & mask;
    let mut out = 0;
    for b in 0..n {
        let idx = ((left >> b) & 1) << 2 | ((x >> b) & 1) << 1 | ((right >> b) & 1);
        out |= (((rule >> idx) & 1) as u32) << b;
    }
    out
}

fn pack(b: &Bits) -> u32 {
    b.to_uint().expect("narrow state") as u32
}

/// Exhausts environment initial states, two-rule palettes keyed by the
/// environment's low bit, and system initial states.
pub fn coupling_search(atlas: &IsolatedAtlas, n_e: usize, env_rule: u8) -> Result<CouplingSearch> {
    let n_s = atlas.width;
    if n_e == 0 || n_e > 16 {
        return Err(LabError::Domain(format!("environment width {n_e} outside 1..=16")));
    }
    let cycles: Vec<Vec<u32>> = atlas.cycles.iter().map(|c| c.iter().map(pack).collect()).collect();
    let contained = |w: &[u32]| {
        cycles.iter().any(|c| {
            w.len() <= c.len() && (0..c.len()).any(|o| w.iter().enumerate().all(|(k, &x)| c[(o + k) % c.len()] == x))
        })
    };
    let horizon = 1usize << (n_s + n_e);
    let env_seq: Vec<Vec<u32>> = (0..1u32 << n_e)
        .map(|e0| {
            let mut e = vec![e0];
            for t in 0..horizon {
                e.push(step_packed(env_rule, e[t], n_e));
            }
            e
        })
        .collect();
    let per_r0: Vec<Vec<CouplingHit>> = (0..=255u8)
        .into_par_iter()
        .map(|r0| {
            let mut hits = Vec::new();
            let mut seen = vec![usize::MAX; 1 << n_s];
            let mut a = Vec::with_capacity(horizon + 1);
            for r1 in 0..=255u8 {
                let palette = [r0, r1];
                for (ev, es) in env_seq.iter().enumerate() {
                    for sv in 0..1u32 << n_s {
                        seen.iter_mut().for_each(|x| *x = usize::MAX);
                        a.clear();
                        a.push(sv);
                        let mut x = sv;
                        let (i, j) = loop {
                            let t = a.len() - 1;
                            if seen[x as usize] != usize::MAX {
                                break (seen[x as usize], t);
                            }
                            seen[x as usize] = t;
                            x = step_packed(palette[(es[t] & 1) as usize], x, n_s);
                            a.push(x);
                        };
                        let ue = j as u64 > atlas.t_p;
                        let inn = !contained(&a[i..j]);
                        if ue || inn {
                            hits.push(CouplingHit {
                                env_rule,
                                e0: Bits::from_uint(ev as u64, n_e),
                                palette: palette.to_vec(),
                                s0: Bits::from_uint(sv as u64, n_s),
                                recurrence: j as u64,
                                ue,
                                inn,
                            });
                        }
                    }
                }
            }
            hits
        })
        .collect();
    let all: Vec<CouplingHit> = per_r0.into_iter().flatten().collect();
    let pick = |f: &dyn Fn(&CouplingHit) -> bool| all.iter().find(|h| f(h)).cloned();
    Ok(CouplingSearch {
        n_s,
        n_e,
        env_rule,
        palette_size: 2,
        runs: 256 * 256 * (1u64 << n_e) * (1u64 << n_s),
        ue_count: all.iter().filter(|h| h.ue).count() as u64,
        inn_count: all.iter().filter(|h| h.inn).count() as u64,
        both_count: all.iter().filter(|h| h.ue && h.inn).count() as u64,
        positive: pick(&|h| h.ue && h.inn),
        first_ue: pick(&|h| h.ue),
        first_inn: pick(&|h| h.inn),
        hits: all,
    })
}
