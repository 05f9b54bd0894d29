//! Acceptance criteria AC1..AC12, one PASS/FAIL line each. Runs without the
//! libtest harness so every line is printed; exits non-zero if any fails.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use aidlab::algonet::{eeoe_curve, EeoeParams, Protocol, TopologyKind};
use aidlab::complexity::{compress, ctm_build, decompress, literal_header_bits, Estimator, SearchMode};
use aidlab::dynsys::{trajectory, Boundary, EcaSpec, Environment, InputFrame, Trajectory};
use aidlab::evomodel::{evolve, growth_curve, minimal_organism, spearman, EvolveParams, Fitness};
use aidlab::observer::{
    check_observation_principle, extend_fat, inject_input, observe, ode_verdict, Channel, Fat, ObserverSystem, Outcome,
    Probe,
};
use aidlab::perturb::{edge_perturb, random_edge, realized_edge_bound, EdgeMode, EdgeRewrite, SimpleGraph, EDGE_C_HAT};
use aidlab::refmachine::{copy_program, run, run_bits, Program, ProgramBits, TmSpec};
use aidlab::seeds::{derive_seed, rng_for};
use aidlab::ueinn::{build_atlas, coupled_run, coupling_search, detect_inn, detect_ue, CoupledSpec, Coupling};
use aidlab::Bits;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Verdict);

fn random_bits(rng: &mut impl Rng, n: usize) -> Bits {
    (0..n).map(|_| rng.gen::<bool>()).collect()
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let mut valid = 0u64;
    let mut violations = 0u64;
    for len in 1..=20usize {
        for v in 0u64..1 << len {
            let b = Bits::from_uint(v, len);
            if !ProgramBits::is_valid(&b) {
                continue;
            }
            valid += 1;
            if (1..len).any(|p| ProgramBits::is_valid(&b[..p])) {
                violations += 1;
            }
        }
    }
    let dt = start.elapsed();
    (
        violations == 0 && dt < Duration::from_secs(10),
        format!("{valid} valid programs up to 20 bits, {violations} prefix violations, {dt:.2?}"),
    )
}

fn ac2() -> Verdict {
    let start = Instant::now();
    let tables: Vec<String> = [1, 4, 8]
        .iter()
        .map(|&w| ctm_build(2, 1000, Some(w)).to_text())
        .collect();
    let dt = start.elapsed() / 3;
    let (mut max_steps, mut max_ones, mut machines) = (0, 0, 0u64);
    for idx in 0..TmSpec::space_size(2) {
        let r = run(
            &Program::new(TmSpec::from_index(2, idx), Bits::new()),
            &Bits::new(),
            1000,
        );
        machines += 1;
        if r.halted {
            max_steps = max_steps.max(r.steps);
            max_ones = max_ones.max(r.output.count_ones());
        }
    }
    let identical = tables.windows(2).all(|w| w[0] == w[1]);
    (
        machines == 20736 && max_steps == 6 && max_ones == 4 && identical && dt < Duration::from_secs(60),
        format!(
            "{machines} machines, max steps {max_steps}, max ones {max_ones}, tables identical across 1/4/8 workers: {identical}, {dt:.2?} per build"
        ),
    )
}

fn mixed_string(rng: &mut ChaCha8Rng) -> Bits {
    let n = rng.gen_range(0..600);
    match rng.gen_range(0..4) {
        0 => random_bits(rng, n),
        1 => {
            let b = rng.gen::<bool>();
            (0..n).map(|_| b).collect()
        }
        2 => {
            let plen = rng.gen_range(1..16);
            let period = random_bits(rng, plen);
            (0..n).map(|i| period[i % period.len()]).collect()
        }
        _ => {
            let mut x = Bits::new();
            while x.len() < n {
                let b = rng.gen::<bool>();
                for _ in 0..rng.gen_range(1..40) {
                    x.push(b);
                }
            }
            x
        }
    }
}

fn ac3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad_roundtrip = 0;
    let mut over_bound = 0;
    for _ in 0..10_000 {
        let x = mixed_string(&mut rng);
        let c = compress(&x);
        if decompress(&c).ok().as_ref() != Some(&x) {
            bad_roundtrip += 1;
        }
        if c.len() > x.len() + literal_header_bits(x.len()) {
            over_bound += 1;
        }
    }
    let zeros = compress(&Bits::zeros(256)).len();
    (
        bad_roundtrip == 0 && over_bound == 0 && zeros <= 40,
        format!(
            "10000 strings: {bad_roundtrip} roundtrip failures, {over_bound} over |x| + header; 0x256 -> {zeros} bits"
        ),
    )
}

fn ac4() -> Verdict {
    let mut within = 0;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let n = [8usize, 16, 32][seed as usize % 3];
        let mut rng = rng_for(seed, "ac4", 0);
        let g = SimpleGraph::erdos_renyi(n, 0.5, &mut rng);
        let Some(e) = random_edge(&g, &mut rng) else { continue };
        let rw = EdgeRewrite::new(EdgeMode::Delete, n, vec![e]);
        let g2 = rw.apply(&g).expect("edge present");
        let bound = 2.0 * (n as f64).log2() + EDGE_C_HAT;
        let realized = realized_edge_bound(&g, &g2, &rw);
        worst = worst.max(realized - 2.0 * (n as f64).log2());
        if realized <= bound {
            within += 1;
        }
    }
    (
        within >= 95,
        format!("{within}/100 within 2 log2 N + {EDGE_C_HAT}; worst excess {worst:.2} bits"),
    )
}

fn mean_abs_delta(g: &SimpleGraph, deletions: usize, rng: &mut ChaCha8Rng, est: &Estimator) -> f64 {
    let base = est.bits(&g.encode()).unwrap();
    let mut sum = 0.0;
    for _ in 0..deletions {
        let e = random_edge(g, rng).unwrap();
        let g2 = edge_perturb(g, &[e], EdgeMode::Delete).unwrap();
        sum += (est.bits(&g2.encode()).unwrap() - base).abs();
    }
    sum / deletions as f64
}

fn ac5() -> Verdict {
    let est = Estimator::Compress;
    let k16 = SimpleGraph::complete(16);
    let mut wins = 0;
    let (mut sum_k, mut sum_er) = (0.0, 0.0);
    for trial in 0..30u64 {
        let er = SimpleGraph::erdos_renyi(16, 0.5, &mut rng_for(0, "ac5-graph", trial));
        let a = mean_abs_delta(&k16, 10, &mut rng_for(0, "ac5-complete", trial), &est);
        let b = mean_abs_delta(&er, 10, &mut rng_for(0, "ac5-er", trial), &est);
        sum_k += a;
        sum_er += b;
        if a > b {
            wins += 1;
        }
    }
    (
        wins >= 24,
        format!(
            "K16 > ER(16,0.5) in {wins}/30 paired trials; mean |dK| {:.2} vs {:.2} bits",
            sum_k / 30.0,
            sum_er / 30.0
        ),
    )
}

fn copy_observer(c: (u32, u32, u32)) -> ObserverSystem {
    ObserverSystem::new(copy_program().encode(), Fat::new(), 256, 4).with_constants(c.0, c.1, c.2)
}

fn ac6() -> Verdict {
    let obs = copy_observer((8, 16, 16));
    let env = Environment::none();
    let (mut id_ok, mut mask_ok) = (0, 0);
    for seed in 0..50u64 {
        let mut rng = rng_for(seed, "ac6", 0);
        let sys = EcaSpec::new(rng.gen(), 8, Boundary::Periodic);
        let s0 = random_bits(&mut rng, 8);
        let traj = trajectory(&sys, &s0, &env, 0, 4).unwrap();
        let exact = |c: u32| SearchMode::BoundedExact {
            len_cap: c,
            step_budget: 64,
        };

        let rec = observe(&obs, &sys, &traj, &env, 2, 2, &Channel::Identity, &Probe::Identity).unwrap();
        if check_observation_principle(&rec, &obs, Some(16), exact(16))
            .unwrap()
            .is_satisfied()
        {
            id_ok += 1;
        }

        // hide S_0, which is random
        let enc_len = rec.target().len();
        let first = enc_len - 4 * 8;
        let mask = Channel::Mask((first..first + 8).collect());
        let rec = observe(&obs, &sys, &traj, &env, 2, 2, &mask, &Probe::Identity).unwrap();
        assert_eq!(rec.target().slice(first, first + 8), s0);
        if check_observation_principle(&rec, &obs, Some(4), exact(4))
            .unwrap()
            .is_violated()
        {
            mask_ok += 1;
        }
    }
    (
        id_ok == 50 && mask_ok == 50,
        format!("identity Satisfied at c_O=16: {id_ok}/50; mask of 8 hidden bits Violated at c_O=4: {mask_ok}/50"),
    )
}

fn ac7() -> Verdict {
    let start = Instant::now();
    let obs = copy_observer((4, 4, 4));
    let env = Environment::none();
    let mut fixtures = 0;
    let mut flipped = 0;
    let mut max_searched = 0;
    let mut seed = 0u64;
    while fixtures < 50 && seed < 10_000 {
        let mut rng = rng_for(seed, "ac7", 0);
        seed += 1;
        let sys = EcaSpec::new(rng.gen(), 6, Boundary::Periodic);
        let traj = trajectory(&sys, &random_bits(&mut rng, 6), &env, 0, 5).unwrap();
        let rec = observe(&obs, &sys, &traj, &env, 5, 2, &Channel::Identity, &Probe::Identity).unwrap();
        let mut states = vec![rec.s_prime_next.clone()];
        states.extend((0..3).map(|_| random_bits(&mut rng, 6)));
        let future = Trajectory::new(6, 6, states).unwrap();
        let mode = SearchMode::BoundedExact {
            len_cap: 12,
            step_budget: 64,
        };
        let v = ode_verdict(&rec, &obs, &future, 1, mode).unwrap();
        let Outcome::Emergent { programs_searched, .. } = v.outcome else {
            continue;
        };
        fixtures += 1;
        max_searched = max_searched.max(programs_searched);
        let target = rec.window.extended(&future.states).unwrap().encode();
        let ext = extend_fat(&obs, &target);
        let rec2 = observe(&ext, &sys, &traj, &env, 5, 2, &Channel::Identity, &Probe::Identity).unwrap();
        if ode_verdict(&rec2, &ext, &future, 1, mode).unwrap().is_not_emergent() {
            flipped += 1;
        }
    }
    let dt = start.elapsed();
    (
        fixtures == 50 && flipped == 50 && obs.threshold() <= 12 && max_searched <= 1 << 13 && dt < Duration::from_secs(600),
        format!(
            "{flipped}/{fixtures} Emergent fixtures flip after extend_fat; threshold {}, at most {max_searched} programs searched, {dt:.2?}",
            obs.threshold()
        ),
    )
}

fn two_phase_ok(otm: &Program, w1: &Bits, w2: &Bits) -> bool {
    let obs = ObserverSystem::new(otm.encode(), Fat::new(), 16, 64);
    let osys = obs.compiled().unwrap();
    let cond = |w: &Bits| InputFrame::Paired(obs.fat.encode()).condition(w);
    let (r1, r2) = (run(otm, &cond(w1), 64), run(otm, &cond(w2), 64));
    if !(r1.halted && r2.halted) {
        return false;
    }
    let base = obs.run_from(w1, 0, 3 * (r1.steps + r2.steps + 2)).unwrap();
    let Some(boundary) = base.states.iter().position(|s| osys.is_halted(s)) else {
        return false;
    };
    let boundary = boundary as u64;
    let injected = inject_input(&obs, &base, boundary, w2).unwrap();
    let outs = osys.cycle_outputs(&injected);
    outs.iter().any(|(t, _)| *t > boundary)
        && outs
            .iter()
            .all(|(t, out)| out == if *t <= boundary { &r1.output } else { &r2.output })
}

fn ac8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    for i in 0..10 {
        let otm = if i % 4 == 3 {
            copy_program()
        } else {
            aidlab::perturb::flip_bit_program(i % 4)
        };
        let (l1, l2) = (rng.gen_range(4..9), rng.gen_range(4..9));
        let w1 = random_bits(&mut rng, l1);
        let w2 = random_bits(&mut rng, l2);
        if two_phase_ok(&otm, &w1, &w2) {
            ok += 1;
        }
    }
    (ok == 10, format!("{ok}/10 two-phase injections match the interpreter"))
}

fn ac9() -> Verdict {
    let params = EvolveParams::new(10_000, 1000, 2);
    let est = Estimator::Compress;
    let (mut monotone, mut accepted, mut positive) = (0, 0, 0);
    let mut rises = Vec::new();
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0, "evolve", i));
        let h = evolve(minimal_organism(), &params, &mut rng, None).unwrap();
        let fits: Vec<Fitness> = h
            .lineage()
            .map(|r| Fitness::from_output(&run_bits(&r.program, &Bits::new(), 1000).unwrap().output))
            .collect();
        if fits.windows(2).all(|w| w[0] < w[1]) {
            monotone += 1;
        }
        if h.acceptances() >= 1 {
            accepted += 1;
        }
        let g = growth_curve(&h, &est).unwrap();
        rises.push(g.last().unwrap().k - g.first().unwrap().k);
        let ts: Vec<f64> = g.iter().map(|p| p.t as f64).collect();
        let ks: Vec<f64> = g.iter().map(|p| p.k).collect();
        if spearman(&ts, &ks).is_some_and(|r| r > 0.0) {
            positive += 1;
        }
    }
    rises.sort_by(f64::total_cmp);
    let median = (rises[9] + rises[10]) / 2.0;
    (
        monotone == 20 && accepted == 20 && median >= 8.0 && positive >= 18,
        format!(
            "monotone {monotone}/20, >=1 acceptance {accepted}/20, median K rise {median:.1} bits (need >= 8), Spearman > 0 in {positive}/20"
        ),
    )
}

fn eeoe_means(topology: TopologyKind) -> Vec<f64> {
    let p = EeoeParams {
        ns: vec![8, 16, 32, 64],
        topology,
        protocol: Protocol::PlainDiffusion,
        trials: 30,
        budget: 1000,
        s_max: 2,
        master_seed: 0,
    };
    eeoe_curve(&p, &Estimator::Compress).unwrap().means()
}

fn ac10() -> Verdict {
    let start = Instant::now();
    let ba = eeoe_means(TopologyKind::Ba { m: 2 });
    let ring = eeoe_means(TopologyKind::Ring);
    let edgeless = eeoe_means(TopologyKind::Edgeless);
    let dt = start.elapsed();
    let rounds: Vec<usize> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| aidlab::algonet::default_rounds(n))
        .collect();
    let c_ok = [8usize, 16, 32, 64]
        .iter()
        .zip(&rounds)
        .all(|(&n, &r)| r == (n as f64).log2().ceil() as usize + 2);
    let increasing = ba.windows(2).all(|w| w[0] < w[1]);
    let zero = edgeless.iter().all(|&m| m == 0.0);
    let ring_le = ring.iter().zip(&ba).all(|(r, b)| r <= b);
    let fmt = |v: &[f64]| v.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join(",");
    (
        c_ok && increasing && zero && ring_le && dt < Duration::from_secs(1800),
        format!(
            "BA means [{}] strictly increasing: {increasing}; ring [{}] <= BA: {ring_le}; edgeless [{}]; rounds {rounds:?}; {dt:.2?}",
            fmt(&ba),
            fmt(&ring),
            fmt(&edgeless)
        ),
    )
}

/// Every contiguous cyclic segment of every isolated width-3 cycle, found
/// by rerunning each isolated system.
fn isolated_segments() -> HashSet<Vec<Bits>> {
    let mut out = HashSet::new();
    for rule in 0..=255u8 {
        let sys = EcaSpec::new(rule, 3, Boundary::Periodic);
        for v in 0..8 {
            let tr = trajectory(&sys, &Bits::from_uint(v, 3), &Environment::none(), 0, 16).unwrap();
            let (i, j) = first_repeat(&tr.states);
            let cyc = &tr.states[i..j];
            for start in 0..cyc.len() {
                for len in 1..=cyc.len() {
                    out.insert((0..len).map(|k| cyc[(start + k) % cyc.len()].clone()).collect());
                }
            }
        }
    }
    out
}

fn first_repeat(states: &[Bits]) -> (usize, usize) {
    let mut seen = BTreeMap::new();
    for (j, s) in states.iter().enumerate() {
        if let Some(&i) = seen.get(s) {
            return (i, j);
        }
        seen.insert(s.clone(), j);
    }
    panic!("no repeat")
}

fn ac11() -> Verdict {
    let atlas = build_atlas(3).unwrap();
    let again = build_atlas(3).unwrap();
    let mut t_p = 0;
    let mut atlas_exact = atlas.records.len() == 2048;
    for r in &atlas.records {
        let tr = trajectory(
            &EcaSpec::new(r.rule, 3, Boundary::Periodic),
            &r.s0,
            &Environment::none(),
            0,
            16,
        )
        .unwrap();
        let (i, j) = first_repeat(&tr.states);
        atlas_exact &= (r.preperiod, r.period) == (i as u64, (j - i) as u64);
        t_p = t_p.max(j as u64);
    }
    atlas_exact &= atlas.t_p == t_p;
    let stable = atlas.hash() == again.hash() && atlas.to_csv() == again.to_csv();

    let segments = isolated_segments();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut cases, mut agree) = (0, 0);
    for _ in 0..20_000 {
        let env_rule: u8 = rng.gen();
        let palette = [rng.gen::<u8>(), rng.gen::<u8>()];
        let spec = CoupledSpec::new(
            3,
            EcaSpec::new(env_rule, 3, Boundary::Periodic),
            Coupling::low_bits(&palette, 3).unwrap(),
        )
        .unwrap();
        let s0 = Bits::from_uint(rng.gen_range(0..8), 3);
        let e0 = Bits::from_uint(rng.gen_range(0..8), 3);
        let (a, _) = coupled_run(&spec, &s0, &e0, spec.joint_bound() + 8).unwrap();
        let (i, j) = first_repeat(&a.states);
        let ue = j as u64 > t_p;
        let inn = !segments.contains(&a.states[i..j]);
        cases += 1;
        if detect_ue(&a, &atlas).unwrap() == ue && detect_inn(&a, &atlas).unwrap() == inn {
            agree += 1;
        }
    }

    let search = coupling_search(&atlas, 3, 30).unwrap();
    let space = 8u64 * 256 * 256 * 8;
    let search_ok = match &search.positive {
        Some(_) => true,
        None => search.both_count == 0 && search.runs == space,
    };
    let search_note = match &search.positive {
        Some(h) => format!("positive fixture env rule {} palette {:?}", h.env_rule, h.palette),
        None => format!(
            "none found over {} runs (env rule 30, 8 env states x 256^2 palettes x 8 system states; {} UE, {} INN)",
            search.runs, search.ue_count, search.inn_count
        ),
    };
    (
        atlas_exact && stable && agree == cases && search_ok,
        format!(
            "atlas exact: {atlas_exact}, stable: {stable}, t_p {t_p}; detectors agree {agree}/{cases}; {search_note}"
        ),
    )
}

fn labctl(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_labctl"))
        .args(args)
        .args(["--seed", "12", "--out", out.to_str().unwrap()])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if p.is_file() && name != "manifest.json" {
            map.insert(name, std::fs::read(&p).unwrap());
        }
    }
    map
}

fn ac12() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 8] = [
        &["ctm", "build"],
        &["perturb", "graph", "--n", "16", "--graph", "ba:2"],
        &["observe", "--trials", "5"],
        &["verdict", "--trials", "5"],
        &["evolve", "--trials", "3", "--mutations", "2000"],
        &["algonet", "--trials", "4", "--ns", "8,16"],
        &["ueinn"],
        &[
            "aoie-trend",
            "--generator",
            "evolution",
            "--schedule",
            "5,6,7",
            "--mutations",
            "500",
        ],
    ];
    let mut identical = 0;
    let mut failed = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let (a, b) = (tmp.path().join(format!("{i}a")), tmp.path().join(format!("{i}b")));
        if labctl(args, &a) && labctl(args, &b) {
            let (fa, fb) = (data_files(&a), data_files(&b));
            if !fa.is_empty() && fa == fb {
                identical += 1;
                continue;
            }
        }
        failed.push(args[0]);
    }
    (
        identical == commands.len(),
        format!(
            "{identical}/{} experiments byte-identical on rerun{}",
            commands.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; differing: {failed:?}")
            }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("AC1 prefix-freeness", ac1),
        ("AC2 CTM(2,2) enumeration", ac2),
        ("AC3 compressor", ac3),
        ("AC4 single-edge bound", ac4),
        ("AC5 reprogrammability asymmetry", ac5),
        ("AC6 observation principle", ac6),
        ("AC7 emergence flip", ac7),
        ("AC8 input injection", ac8),
        ("AC9 evolution", ac9),
        ("AC10 networked complexity trend", ac10),
        ("AC11 UE/INN", ac11),
        ("AC12 CLI determinism", ac12),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        let (pass, detail) = f();
        if !pass {
            failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
