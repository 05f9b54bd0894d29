//! Cumulative evolution of a single organism program.
//!
//! Each step draws a random mutation program, runs it on the organism's
//! encoding, and keeps the result when it decodes to a program whose output
//! on the empty condition names a strictly larger number.

use std::cmp::Ordering;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::complexity::{compress_upper, CtmTable, Estimator};
use crate::refmachine::{decode_prefix, run, sample_program, Entry, Move, Program, ProgramBits, TmSpec};

/// A natural number given by its binary digits, without leading zeros.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fitness(Bits);

impl Fitness {
    pub fn from_output(out: &Bits) -> Self {
        Fitness(Bits::from(out.strip_leading_zeros()))
    }

    /// Number of significant bits.
    pub fn bit_len(&self) -> usize {
        self.0.len()
    }

    pub fn digits(&self) -> &Bits {
        &self.0
    }
}

impl Ord for Fitness {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Fitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.to_uint() {
            Some(v) => write!(f, "Fitness({v})"),
            None => write!(f, "Fitness(2^{}..)", self.0.len() - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Organism {
    pub program: ProgramBits,
    /// `None` when the program does not halt within the budget.
    pub fitness: Option<Fitness>,
    /// The phenotype `run(program, "")`, when halting.
    pub output: Option<Bits>,
    pub generation: u64,
}

impl Organism {
    pub fn evaluate(program: ProgramBits, budget: u64, generation: u64) -> Organism {
        let r = program.decode().map(|p| run(&p, &Bits::new(), budget));
        let (fitness, output) = match r {
            Ok(r) if r.halted => (Some(Fitness::from_output(&r.output)), Some(r.output)),
            _ => (None, None),
        };
        Organism {
            program,
            fitness,
            output,
            generation,
        }
    }
}

/// The 8-bit 1-state machine that writes 0 and halts: output "0".
pub fn minimal_organism() -> ProgramBits {
    Program::new(
        TmSpec::new(
            1,
            vec![Entry::new(false, Move::Right, 0), Entry::new(false, Move::Right, 0)],
        )
        .expect("valid table"),
        Bits::new(),
    )
    .encode()
}

pub fn random_mutation<R: RngCore>(rng: &mut R, s_max: u32) -> ProgramBits {
    sample_program(rng, s_max)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidate {
    Valid(ProgramBits),
    Invalid,
}

/// How a mutation's output is read back as a program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadBack {
    /// The whole output must be one program.
    Exact,
    /// The program is the self-delimiting prefix of the output; the rest is
    /// dropped.
    #[default]
    Prefix,
}

/// `run(mutation, org.program)`, read back as a program.
pub fn mutate(org: &Organism, mutation: &ProgramBits, budget: u64) -> Candidate {
    mutate_with(org, mutation, budget, ReadBack::default())
}

pub fn mutate_with(org: &Organism, mutation: &ProgramBits, budget: u64, read: ReadBack) -> Candidate {
    let Ok(m) = mutation.decode() else {
        return Candidate::Invalid;
    };
    let r = run(&m, org.program.bits(), budget);
    if !r.halted {
        return Candidate::Invalid;
    }
    match read {
        ReadBack::Exact if ProgramBits::is_valid(&r.output) => Candidate::Valid(ProgramBits(r.output)),
        ReadBack::Prefix => match decode_prefix(&r.output) {
            Ok((_, used)) => Candidate::Valid(ProgramBits(Bits::from(&r.output[..used]))),
            Err(_) => Candidate::Invalid,
        },
        _ => Candidate::Invalid,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub t: u64,
    pub accepted: bool,
    pub program: ProgramBits,
    pub fitness_bits: usize,
    pub k_compress: f64,
    pub k_ctm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionHistory {
    pub budget: u64,
    pub s_max: u32,
    /// Row 0 is the initial organism; row `t` follows mutation `t`.
    pub rows: Vec<HistoryRow>,
    pub final_organism: Organism,
}

impl EvolutionHistory {
    pub fn accepted(&self) -> impl Iterator<Item = &HistoryRow> {
        self.rows.iter().filter(|r| r.accepted)
    }

    pub fn acceptances(&self) -> usize {
        self.accepted().count()
    }

    /// Snapshots of the lineage: the initial organism and every accepted one.
    pub fn lineage(&self) -> impl Iterator<Item = &HistoryRow> {
        self.rows.iter().filter(|r| r.t == 0 || r.accepted)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,accepted,fitness_bits,k_compress,k_ctm_or_na,program_len\n");
        for r in &self.rows {
            let ctm = r.k_ctm.map_or("na".to_string(), |v| format!("{v:.6}"));
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t,
                r.accepted as u8,
                r.fitness_bits,
                r.k_compress,
                ctm,
                r.program.len()
            ));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct EvolveParams {
    pub n_mutations: u64,
    pub budget: u64,
    pub s_max: u32,
    pub read_back: ReadBack,
}

impl EvolveParams {
    pub fn new(n_mutations: u64, budget: u64, s_max: u32) -> Self {
        EvolveParams {
            n_mutations,
            budget,
            s_max,
            read_back: ReadBack::default(),
        }
    }
}

fn measure(out: &Bits, ctm: Option<&CtmTable>) -> (f64, Option<f64>) {
    let kc = compress_upper(out).upper;
    let kt = ctm.and_then(|t| t.ctm_k(out).ok()).map(|e| e.upper);
    (kc, kt)
}

/// Runs `n_mutations` mutation/selection steps. Invalid candidates count as
/// steps but never as acceptances.
pub fn evolve<R: RngCore>(
    initial: ProgramBits,
    params: &EvolveParams,
    rng: &mut R,
    ctm: Option<&CtmTable>,
) -> crate::Result<EvolutionHistory> {
    let mut org = Organism::evaluate(initial, params.budget, 0);
    let Some(mut best) = org.fitness.clone() else {
        return Err(crate::LabError::Domain(
            "initial organism does not halt within the budget".into(),
        ));
    };
    let (mut kc, mut kt) = measure(org.output.as_ref().unwrap(), ctm);
    let mut rows = Vec::with_capacity(params.n_mutations as usize + 1);
    rows.push(HistoryRow {
        t: 0,
        accepted: false,
        program: org.program.clone(),
        fitness_bits: best.bit_len(),
        k_compress: kc,
        k_ctm: kt,
    });
    for t in 1..=params.n_mutations {
        let m = random_mutation(rng, params.s_max);
        let mut accepted = false;
        if let Candidate::Valid(p) = mutate_with(&org, &m, params.budget, params.read_back) {
            let cand = Organism::evaluate(p, params.budget, t);
            if let Some(f) = &cand.fitness {
                if *f > best {
                    best = f.clone();
                    (kc, kt) = measure(cand.output.as_ref().unwrap(), ctm);
                    org = cand;
                    accepted = true;
                }
            }
        }
        rows.push(HistoryRow {
            t,
            accepted,
            program: org.program.clone(),
            fitness_bits: best.bit_len(),
            k_compress: kc,
            k_ctm: kt,
        });
    }
    Ok(EvolutionHistory {
        budget: params.budget,
        s_max: params.s_max,
        rows,
        final_organism: org,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub t: u64,
    pub fitness_bits: usize,
    pub k: f64,
    pub cube_root_t: f64,
}

/// Per-snapshot series over the lineage, re-measured with `estimator`.
/// Outputs the estimator does not cover are skipped.
pub fn growth_curve(history: &EvolutionHistory, estimator: &Estimator) -> crate::Result<Vec<GrowthPoint>> {
    let mut out = Vec::new();
    for r in history.lineage() {
        let org = Organism::evaluate(r.program.clone(), history.budget, r.t);
        let Some(o) = org.output else { continue };
        let k = match estimator.bits(&o) {
            Ok(k) => k,
            Err(crate::LabError::NotCovered(_)) => continue,
            Err(e) => return Err(e),
        };
        out.push(GrowthPoint {
            t: r.t,
            fitness_bits: r.fitness_bits,
            k,
            cube_root_t: (r.t as f64).cbrt(),
        });
    }
    Ok(out)
}

pub fn growth_csv(points: &[GrowthPoint]) -> String {
    let mut s = String::from("t,fitness_bits,k,cube_root_t\n");
    for p in points {
        s.push_str(&format!("{},{},{},{:.6}\n", p.t, p.fitness_bits, p.k, p.cube_root_t));
    }
    s
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // tied values share the mean of their 1-based ranks
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either series is constant or shorter than two.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
