//! Computable estimators of algorithmic information content.
//!
//! Estimates are intervals `[lower, upper]` in bits. Compression and CTM
//! only ever supply upper-style evidence (`lower = 0` for compression, a
//! point value with no soundness claim for CTM). Genuine lower bounds
//! exist only inside the resource-bounded theory searched by
//! [`bounded_exact_k`]: "no program of length `<= cap` halts within the
//! step budget with output `z`" is a literal fact about the reference
//! machine.

pub mod compress;
pub mod ctm;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{LabError, Result};
use crate::refmachine::context::{programs_of_length, Context, Selector};
use crate::refmachine::{copy_program, run, Program, ProgramBits, C_COPY};

pub use compress::{compress, compressed_len, decompress, literal_header_bits};
pub use ctm::{ctm_build, CtmTable};

/// Default `c_I`: the slack allowed between equivalent estimators.
pub const DEFAULT_C_I: u32 = 8;

/// Largest length cap the exhaustive search accepts.
pub const MAX_LEN_CAP: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Ctm,
    Compress,
    Bdm,
    BoundedExact,
    Composite,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AicEstimate {
    pub lower: f64,
    /// `f64::INFINITY` marks "no upper bound within the searched resources".
    #[serde(with = "finite_or_null")]
    pub upper: f64,
    pub method: EstimateMethod,
    pub step_budget: Option<u64>,
    pub len_cap: Option<u32>,
    /// Program realizing `upper`, when one was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Bits>,
}

impl AicEstimate {
    pub fn upper_only(upper: f64, method: EstimateMethod) -> Self {
        AicEstimate {
            lower: 0.0,
            upper,
            method,
            step_budget: None,
            len_cap: None,
            witness: None,
        }
    }

    pub fn point(v: f64, method: EstimateMethod) -> Self {
        AicEstimate {
            lower: v,
            ..Self::upper_only(v, method)
        }
    }

    pub fn with_resources(mut self, step_budget: u64, len_cap: Option<u32>) -> Self {
        self.step_budget = Some(step_budget);
        self.len_cap = len_cap;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.upper.is_finite() && self.lower == self.upper
    }
}

pub fn compress_upper(x: &Bits) -> AicEstimate {
    AicEstimate::upper_only(compressed_len(x) as f64, EstimateMethod::Compress)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PadPolicy {
    /// Fill the last block with zeros and charge `log2(pad + 1)` bits.
    ZeroFill,
    /// Drop the trailing partial block.
    Truncate,
}

fn bdm_sum(blocks: Vec<Bits>, table: &CtmTable, pad: usize) -> Result<AicEstimate> {
    let mut mult: BTreeMap<Bits, u64> = BTreeMap::new();
    for b in blocks {
        *mult.entry(b).or_insert(0) += 1;
    }
    let mut total = (pad as f64 + 1.0).log2();
    for (b, m) in &mult {
        let k = table.ctm_k(b).map_err(|_| LabError::NotCovered(format!("block {b}")))?;
        total += k.upper + (*m as f64).log2();
    }
    Ok(AicEstimate::upper_only(total, EstimateMethod::Bdm).with_resources(table.step_budget, None))
}

/// Block decomposition of a string into `block`-bit pieces.
pub fn bdm(x: &Bits, table: &CtmTable, block: usize, pad: PadPolicy) -> Result<AicEstimate> {
    if block == 0 {
        return Err(LabError::Domain("block size must be positive".into()));
    }
    let mut blocks: Vec<Bits> = x.chunks(block).map(Bits::from).collect();
    let mut padded = 0;
    if let Some(last) = blocks.last_mut() {
        if last.len() < block {
            match pad {
                PadPolicy::ZeroFill => {
                    padded = block - last.len();
                    last.resize(block, false);
                }
                PadPolicy::Truncate => {
                    blocks.pop();
                }
            }
        }
    }
    bdm_sum(blocks, table, padded)
}

/// Block decomposition of a bit matrix into `block x block` tiles, each
/// flattened row-major and looked up in the one-dimensional table.
pub fn bdm_matrix(rows: &[Bits], table: &CtmTable, block: usize) -> Result<AicEstimate> {
    if block == 0 {
        return Err(LabError::Domain("block size must be positive".into()));
    }
    let h = rows.len();
    let w = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != w) {
        return Err(LabError::Domain("ragged matrix".into()));
    }
    let (hp, wp) = (h.div_ceil(block) * block, w.div_ceil(block) * block);
    let padded = hp * wp - h * w;
    let cell = |r: usize, c: usize| r < h && c < w && rows[r][c];
    let mut blocks = Vec::new();
    for br in (0..hp).step_by(block) {
        for bc in (0..wp).step_by(block) {
            let mut b = Bits::with_capacity(block * block);
            for r in br..br + block {
                for c in bc..bc + block {
                    b.push(cell(r, c));
                }
            }
            blocks.push(b);
        }
    }
    bdm_sum(blocks, table, padded)
}

/// Upper estimate of `K(z | w)`.
///
/// The minimum of the compression difference `C(w.z) - C(w)` (never
/// credited below `c_copy`), the unconditional `C(z)`, and `c_copy` itself
/// when the copy program maps `w` to `z`.
pub fn cond_upper(z: &Bits, w: &Bits) -> AicEstimate {
    let cz = compressed_len(z) as f64;
    let mut joint = w.clone();
    joint.extend_bits(z);
    let diff = compressed_len(&joint) as f64 - compressed_len(w) as f64;
    let mut best = diff.max(C_COPY as f64).min(cz);
    if run(&copy_program(), w, 1).output == *z {
        best = best.min(C_COPY as f64);
    }
    AicEstimate::upper_only(best, EstimateMethod::Composite)
}

/// `cond_upper` against a tuple context, using the flat encoding plus the
/// copy program applied to every addressable component.
pub fn cond_upper_ctx(z: &Bits, ctx: &Context) -> AicEstimate {
    let mut est = cond_upper(z, &ctx.encode());
    for sel in Selector::all(ctx.components.len()) {
        if ctx.select(sel).as_ref() == Some(z) {
            let cost = (sel.encoded_len() + C_COPY) as f64;
            if cost < est.upper {
                est.upper = cost;
            }
        }
    }
    est
}

type Cached = Vec<(ProgramBits, Program)>;

fn cached_programs(len: usize) -> &'static Cached {
    const N: usize = MAX_LEN_CAP as usize + 1;
    static CACHE: [OnceLock<Cached>; N] = [const { OnceLock::new() }; N];
    assert!(len < N, "program length {len} beyond the search cap");
    CACHE[len].get_or_init(|| {
        programs_of_length(len)
            .into_iter()
            .map(|p| {
                let d = p.decode().expect("enumerated programs decode");
                (p, d)
            })
            .collect()
    })
}

fn check_cap(len_cap: u32) -> Result<()> {
    if len_cap > MAX_LEN_CAP {
        return Err(LabError::Cap {
            threshold: len_cap,
            cap: MAX_LEN_CAP,
        });
    }
    Ok(())
}

fn first_match(progs: &Cached, cond: &Bits, z: &Bits, budget: u64) -> Option<usize> {
    // the output always covers the condition's cells
    if cond.len() > z.len() {
        return None;
    }
    progs.par_iter().position_first(|(_, p)| {
        let r = run(p, cond, budget);
        r.halted && r.output == *z
    })
}

fn exact_result(found: Option<Bits>, len_cap: u32, budget: u64) -> AicEstimate {
    let base = match &found {
        Some(w) => AicEstimate::point(w.len() as f64, EstimateMethod::BoundedExact),
        None => AicEstimate {
            lower: len_cap as f64 + 1.0,
            ..AicEstimate::upper_only(f64::INFINITY, EstimateMethod::BoundedExact)
        },
    };
    AicEstimate {
        witness: found,
        ..base.with_resources(budget, Some(len_cap))
    }
}

/// Exhaustive search for the shortest program `p` with `|p| <= len_cap`
/// whose run on condition `w` halts within `step_budget` with output `z`.
/// Ties are broken by lexicographic program order.
pub fn bounded_exact_k(z: &Bits, w: &Bits, len_cap: u32, step_budget: u64) -> Result<AicEstimate> {
    check_cap(len_cap)?;
    for len in 1..=len_cap as usize {
        let progs = cached_programs(len);
        if let Some(i) = first_match(progs, w, z, step_budget) {
            return Ok(exact_result(Some(progs[i].0 .0.clone()), len_cap, step_budget));
        }
    }
    Ok(exact_result(None, len_cap, step_budget))
}

/// As [`bounded_exact_k`], but the condition is a tuple and programs carry
/// a component selector (see [`crate::refmachine::context`]).
pub fn bounded_exact_ctx(z: &Bits, ctx: &Context, len_cap: u32, step_budget: u64) -> Result<AicEstimate> {
    check_cap(len_cap)?;
    let mut selectors: Vec<(Bits, Bits)> = Selector::all(ctx.components.len())
        .into_iter()
        .filter_map(|s| {
            let mut code = Bits::new();
            s.push(&mut code);
            ctx.select(s).map(|cond| (code, cond))
        })
        .collect();
    selectors.sort();
    for len in 1..=len_cap as usize {
        for (code, cond) in &selectors {
            if code.len() >= len {
                continue;
            }
            let progs = cached_programs(len - code.len());
            if let Some(i) = first_match(progs, cond, z, step_budget) {
                let mut witness = code.clone();
                witness.extend_bits(&progs[i].0 .0);
                return Ok(exact_result(Some(witness), len_cap, step_budget));
            }
        }
    }
    Ok(exact_result(None, len_cap, step_budget))
}

/// A named unconditional estimator, so experiments state their measurement
/// method.
#[derive(Clone, Debug)]
pub enum Estimator {
    Compress,
    Ctm(Arc<CtmTable>),
    Bdm { table: Arc<CtmTable>, block: usize },
}

impl Estimator {
    pub fn name(&self) -> String {
        match self {
            Estimator::Compress => "compress".into(),
            Estimator::Ctm(t) => format!("ctm(s={})", t.states),
            Estimator::Bdm { table, block } => format!("bdm(s={},block={block})", table.states),
        }
    }

    pub fn estimate(&self, x: &Bits) -> Result<AicEstimate> {
        match self {
            Estimator::Compress => Ok(compress_upper(x)),
            Estimator::Ctm(t) => t.ctm_k(x),
            Estimator::Bdm { table, block } => bdm(x, table, *block, PadPolicy::ZeroFill),
        }
    }

    /// The upper value, the number every difference-style measurement uses.
    pub fn bits(&self, x: &Bits) -> Result<f64> {
        Ok(self.estimate(x)?.upper)
    }
}

/// How a conditional quantity is measured: compression-based upper bounds
/// only, or exhaustive search inside the resource-bounded theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SearchMode {
    Upper,
    BoundedExact { len_cap: u32, step_budget: u64 },
}

impl SearchMode {
    pub fn name(&self) -> &'static str {
        match self {
            SearchMode::Upper => "upper",
            SearchMode::BoundedExact { .. } => "bounded-exact",
        }
    }
}

/// `K(z | ctx)` under the given mode.
pub fn cond_estimate(z: &Bits, ctx: &Context, mode: SearchMode) -> Result<AicEstimate> {
    match mode {
        SearchMode::Upper => Ok(cond_upper_ctx(z, ctx)),
        SearchMode::BoundedExact { len_cap, step_budget } => bounded_exact_ctx(z, ctx, len_cap, step_budget),
    }
}

/// Number of addressed programs of length `<= len_cap` over an
/// `n`-component context: the size of the space an exhaustive search
/// rules out.
pub fn addressed_space_size(n: usize, len_cap: u32) -> u64 {
    let mut total = 0u64;
    for sel in Selector::all(n) {
        let sl = sel.encoded_len();
        for len in sl + 1..=len_cap as usize {
            total += cached_programs(len - sl).len() as u64;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmachine::{Entry, Move, TmSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut impl Rng, n: usize) -> Bits {
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn compress_upper_examples() {
        assert_eq!(compress_upper(&Bits::new()).upper, 3.0);
        assert!(compress_upper(&Bits::zeros(256)).upper <= 40.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_bits(&mut rng, 100);
        assert!(compress_upper(&x).upper <= (100 + literal_header_bits(100)) as f64);
    }

    #[test]
    fn bdm_formula_cases() {
        let t = ctm_build(2, 1000, None);
        let b = Bits::lit("11");
        let kb = t.ctm_k(&b).unwrap().upper;
        let single = bdm(&b, &t, 2, PadPolicy::ZeroFill).unwrap();
        assert!((single.upper - kb).abs() < 1e-12);
        let repeated = bdm(&Bits::lit("111111"), &t, 2, PadPolicy::ZeroFill).unwrap();
        assert!((repeated.upper - (kb + 3f64.log2())).abs() < 1e-12);
        let a = Bits::lit("10");
        let ka = t.ctm_k(&a).unwrap().upper;
        let mixed = bdm(&Bits::lit("1011"), &t, 2, PadPolicy::ZeroFill).unwrap();
        assert!((mixed.upper - (ka + kb)).abs() < 1e-12);
        // zero-fill "1" -> "10", charged log2(2) = 1 bit
        let padded = bdm(&Bits::lit("1"), &t, 2, PadPolicy::ZeroFill).unwrap();
        assert!((padded.upper - (ka + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn bdm_reports_uncovered_block() {
        let t = ctm_build(1, 100, None);
        let err = bdm(&Bits::lit("0110100110010110"), &t, 16, PadPolicy::ZeroFill).unwrap_err();
        assert!(matches!(err, LabError::NotCovered(m) if m.contains("0110100110010110")));
    }

    #[test]
    fn bdm_matrix_tiles() {
        let t = ctm_build(2, 1000, None);
        let rows = vec![Bits::lit("11"), Bits::lit("11")];
        let m = bdm_matrix(&rows, &t, 2).unwrap();
        let k = t.ctm_k(&Bits::lit("1111")).unwrap().upper;
        assert!((m.upper - k).abs() < 1e-12);
    }

    #[test]
    fn cond_upper_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 5, 40, 300] {
            let w = random_bits(&mut rng, n);
            assert!(cond_upper(&w, &w).upper <= C_COPY as f64);
            let c = compress_upper(&w).upper;
            let e = cond_upper(&w, &Bits::new()).upper;
            assert!(e <= c && c - e <= literal_header_bits(0) as f64 + C_COPY as f64);
        }
        let z = Bits::zeros(512);
        assert!(cond_upper(&z, &Bits::zeros(256)).upper <= compress_upper(&z).upper);
    }

    #[test]
    fn exact_copy_program_found() {
        let w = Bits::lit("1100101");
        let e = bounded_exact_k(&w, &w, 12, 100).unwrap();
        assert!(e.is_exact());
        assert!(e.upper <= C_COPY as f64);
        let witness = ProgramBits(e.witness.clone().unwrap());
        assert_eq!(run(&witness.decode().unwrap(), &w, 100).output, w);
    }

    #[test]
    fn exact_search_exhausts_on_random_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let z = random_bits(&mut rng, 64);
        let e = bounded_exact_k(&z, &Bits::new(), 16, 200).unwrap();
        assert_eq!(e.lower, 17.0);
        assert!(e.upper.is_infinite());
        assert!(e.witness.is_none());
    }

    #[test]
    fn exact_search_finds_known_twelve_bit_witness() {
        // s = 1 with two data bits: 7 + gamma(3) + 2 = 12 bits
        let p0 = Program::new(
            TmSpec::new(
                1,
                vec![Entry::new(true, Move::Right, 1), Entry::new(false, Move::Right, 0)],
            )
            .unwrap(),
            Bits::lit("00"),
        );
        assert_eq!(p0.encode().len(), 12);
        let w = Bits::lit("0110");
        let z = run(&p0, &w, 50).output;
        let e = bounded_exact_k(&z, &w, 12, 50).unwrap();
        assert!(e.upper <= 12.0);
    }

    #[test]
    fn exact_search_cap_error() {
        assert!(matches!(
            bounded_exact_k(&Bits::new(), &Bits::new(), 25, 10),
            Err(LabError::Cap { .. })
        ));
    }

    #[test]
    fn addressed_search_extracts_component() {
        let ctx = Context::new(vec![Bits::lit("10110"), Bits::lit("0001111000")]);
        let e = bounded_exact_ctx(&Bits::lit("10110"), &ctx, 16, 100).unwrap();
        assert_eq!(e.upper, 12.0);
        let e = bounded_exact_ctx(&Bits::lit("0001111000"), &ctx, 16, 100).unwrap();
        assert_eq!(e.upper, 12.0);
    }
}
