//! One runner per experiment kind. Each writes its data files through a
//! [`RunWriter`]; trials draw from streams derived from the master seed and
//! the trial index, so parallel scheduling cannot change any output.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_estimator, load_ctm, EstimatorChoice, ExperimentConfig, ExperimentKind, FutureSource, ModeChoice,
    ProtocolChoice, RunManifest, RunWriter,
};
use crate::algonet::{eeoe_curve, gen_topology, EeoeParams, Protocol};
use crate::bits::Bits;
use crate::complexity::{CtmTable, SearchMode};
use crate::dynsys::{trajectory, Boundary, EcaSpec, Environment, Trajectory};
use crate::error::{LabError, Result};
use crate::evomodel::{evolve, growth_curve, minimal_organism, spearman, EvolveParams};
use crate::observer::{
    check_observation_principle, observe, ode_verdict, Fat, ObserverSystem, PrincipleVerdict, Probe, VerdictReport,
};
use crate::perturb::{profile_csv, reprogrammability_profile};
use crate::refmachine::copy_program;
use crate::seeds::{derive_seed, rng_for};
use crate::ueinn::{build_atlas, coupling_search};

use super::trend::{aoie_trend, Generator};

/// Runs `cfg` and writes its outputs and manifest into the resolved output
/// directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let cfg = cfg.clone().resolved();
    let started = Instant::now();
    let mut w = RunWriter::create(cfg.out.as_ref().expect("resolved"))?;
    match cfg.kind {
        ExperimentKind::Ctm => run_ctm(&cfg, &mut w)?,
        ExperimentKind::PerturbGraph => run_perturb(&cfg, &mut w)?,
        ExperimentKind::Observe => run_observe(&cfg, &mut w)?,
        ExperimentKind::Verdict => run_verdict(&cfg, &mut w)?,
        ExperimentKind::Evolve => run_evolve(&cfg, &mut w)?,
        ExperimentKind::Algonet => run_algonet(&cfg, &mut w)?,
        ExperimentKind::Ueinn => run_ueinn(&cfg, &mut w)?,
        ExperimentKind::AoieTrend => run_trend(&cfg, &mut w)?,
    }
    w.finish(&cfg, started.elapsed().as_millis() as u64)
}

pub fn ctm_file_name(states: u32, steps: u64) -> String {
    format!("ctm_s{states}_b{steps}.txt")
}

#[derive(Serialize)]
struct CtmSummary {
    states: u32,
    step_budget: u64,
    machines: u64,
    halters: u64,
    distinct_outputs: usize,
}

fn run_ctm(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.ctm;
    let table = load_ctm(cfg, p.states, p.steps, w)?;
    w.write(&ctm_file_name(p.states, p.steps), table.to_text())?;
    w.write_json(
        "ctm_summary.json",
        &CtmSummary {
            states: table.states,
            step_budget: table.step_budget,
            machines: table.machines,
            halters: table.halters,
            distinct_outputs: table.records.len(),
        },
    )
}

#[derive(Serialize)]
struct PerturbSummary {
    n: usize,
    graph: String,
    edges: usize,
    estimator: String,
    trials: usize,
    mean_abs_delta: f64,
}

fn run_perturb(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.perturb;
    let est = build_estimator(cfg, w)?;
    let (gs, ps) = (
        derive_seed(cfg.seed, "perturb-graph", 0),
        derive_seed(cfg.seed, "perturb-profile", 0),
    );
    w.seeds([gs, ps]);
    let topo = gen_topology(p.graph, p.n, false, &mut rng_for(cfg.seed, "perturb-graph", 0))?;
    let rows = reprogrammability_profile(
        &topo.graph,
        cfg.trials(),
        &mut rng_for(cfg.seed, "perturb-profile", 0),
        &est,
    )?;
    let mean = rows.iter().map(|r| r.delta_bits.abs()).sum::<f64>() / rows.len().max(1) as f64;
    w.write("graph.edges", topo.graph.to_edge_list())?;
    w.write("profile.csv", profile_csv(&rows))?;
    w.write_json(
        "perturb_summary.json",
        &PerturbSummary {
            n: p.n,
            graph: p.graph.name(),
            edges: topo.graph.edge_count(),
            estimator: est.name(),
            trials: rows.len(),
            mean_abs_delta: mean,
        },
    )
}

fn random_state<R: Rng>(rng: &mut R, width: usize) -> Bits {
    (0..width).map(|_| rng.gen::<bool>()).collect()
}

fn eca_run(rule: u8, width: usize, len: u64, seed: u64) -> Result<(EcaSpec, Trajectory)> {
    let sys = EcaSpec::new(rule, width, Boundary::Periodic);
    let s0 = random_state(&mut ChaCha8Rng::seed_from_u64(seed), width);
    let traj = trajectory(&sys, &s0, &Environment::none(), 0, len)?;
    Ok((sys, traj))
}

fn search_mode(mode: ModeChoice, len_cap: u32, step_budget: u64) -> SearchMode {
    match mode {
        ModeChoice::Upper => SearchMode::Upper,
        ModeChoice::Exact => SearchMode::BoundedExact { len_cap, step_budget },
    }
}

#[derive(Serialize)]
struct ObservationRow {
    trial: usize,
    seed: u64,
    channel: String,
    w_bits: usize,
    target_bits: usize,
    verdict: &'static str,
    upper_bits: f64,
}

fn run_observe(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.observe;
    let c = cfg.constants;
    let obs = ObserverSystem::new(copy_program().encode(), Fat::new(), p.input_cap, p.observer_budget)
        .with_constants(c.c_i, c.c_o, c.c_e);
    let seeds: Vec<u64> = (0..cfg.trials())
        .map(|i| derive_seed(cfg.seed, "observe", i as u64))
        .collect();
    w.seeds(seeds.iter().copied());
    let rows: Vec<ObservationRow> = seeds
        .par_iter()
        .enumerate()
        .map(|(trial, &seed)| {
            let (sys, traj) = eca_run(p.rule, p.width, p.t, seed)?;
            let rec = observe(
                &obs,
                &sys,
                &traj,
                &Environment::none(),
                p.t,
                p.k,
                &p.channel,
                &Probe::Identity,
            )?;
            let mode = search_mode(p.mode, c.c_o, p.step_budget);
            let v = check_observation_principle(&rec, &obs, Some(c.c_o), mode)?;
            let (verdict, est) = match &v {
                PrincipleVerdict::Satisfied { estimate } => ("satisfied", estimate),
                PrincipleVerdict::Violated { estimate } => ("violated", estimate),
                PrincipleVerdict::Inconclusive { estimate } => ("inconclusive", estimate),
            };
            Ok(ObservationRow {
                trial,
                seed,
                channel: p.channel.name(),
                w_bits: rec.w.len(),
                target_bits: rec.target().len(),
                verdict,
                upper_bits: est.upper,
            })
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("trial,seed,channel,w_bits,target_bits,verdict,upper_bits\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.trial, r.seed, r.channel, r.w_bits, r.target_bits, r.verdict, r.upper_bits
        ));
    }
    w.write("observations.csv", csv)?;
    w.write_json("observations.json", &rows)
}

fn run_verdict(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.verdict;
    let c = cfg.constants;
    if p.horizon < p.m {
        return Err(LabError::Domain(format!(
            "horizon {} is shorter than m = {}",
            p.horizon, p.m
        )));
    }
    let obs = ObserverSystem::new(copy_program().encode(), Fat::new(), 1 << 12, p.observer_budget)
        .with_constants(c.c_i, c.c_o, c.c_e);
    let seeds: Vec<u64> = (0..cfg.trials())
        .map(|i| derive_seed(cfg.seed, "verdict", i as u64))
        .collect();
    w.seeds(seeds.iter().copied());
    let reports: Vec<VerdictReport> = seeds
        .par_iter()
        .map(|&seed| {
            let (sys, traj) = eca_run(p.rule, p.width, p.t + p.horizon, seed)?;
            let env = Environment::none();
            let rec = observe(
                &obs,
                &sys,
                &traj.window(0, p.t)?,
                &env,
                p.t,
                p.k,
                &crate::observer::Channel::Identity,
                &Probe::Identity,
            )?;
            let future = match p.future {
                FutureSource::System => traj.window(p.t + 1, p.t + p.horizon)?,
                FutureSource::Random => {
                    let mut rng = rng_for(seed, "verdict-future", 0);
                    let mut states = vec![rec.s_prime_next.clone()];
                    states.extend((1..p.horizon).map(|_| random_state(&mut rng, p.width)));
                    Trajectory::new(p.t + 1, p.width, states)?
                }
            };
            let v = ode_verdict(
                &rec,
                &obs,
                &future,
                p.m,
                search_mode(p.mode, obs.threshold(), p.step_budget),
            )?;
            Ok(VerdictReport::new(&v, &obs, vec![seed]))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("trial,seed,mode,threshold_bits,outcome,programs_searched\n");
    for (i, r) in reports.iter().enumerate() {
        let ps = r.search_caps.programs_searched.map_or("na".into(), |v| v.to_string());
        csv.push_str(&format!(
            "{i},{},{},{},{},{ps}\n",
            r.seeds[0], r.mode, r.threshold_bits, r.outcome
        ));
    }
    w.write("verdicts.csv", csv)?;
    w.write_json("verdicts.json", &reports)
}

fn ctm_for(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<Option<CtmTable>> {
    match cfg.estimator {
        EstimatorChoice::Compress => Ok(None),
        EstimatorChoice::Ctm { states, steps } | EstimatorChoice::Bdm { states, steps, .. } => {
            load_ctm(cfg, states, steps, w).map(Some)
        }
    }
}

fn run_evolve(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.evolve;
    let params = EvolveParams {
        n_mutations: p.mutations,
        budget: p.budget,
        s_max: p.s_max,
        read_back: p.read_back,
    };
    let est = build_estimator(cfg, w)?;
    let table = ctm_for(cfg, w)?;
    let seeds: Vec<u64> = (0..cfg.trials())
        .map(|i| derive_seed(cfg.seed, "evolve", i as u64))
        .collect();
    w.seeds(seeds.iter().copied());
    let runs: Vec<_> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = evolve(minimal_organism(), &params, &mut rng, table.as_ref())?;
            let g = growth_curve(&h, &est)?;
            Ok((h, g))
        })
        .collect::<Result<_>>()?;
    let mut growth = String::from("trial,t,fitness_bits,k,cube_root_t\n");
    let mut summary = String::from("trial,seed,acceptances,final_fitness_bits,initial_k,final_k,spearman_t_k\n");
    for (i, (h, g)) in runs.iter().enumerate() {
        w.write(&format!("history_{i:03}.csv"), h.to_csv())?;
        for pt in g {
            growth.push_str(&format!(
                "{i},{},{},{},{}\n",
                pt.t, pt.fitness_bits, pt.k, pt.cube_root_t
            ));
        }
        let ts: Vec<f64> = g.iter().map(|p| p.t as f64).collect();
        let ks: Vec<f64> = g.iter().map(|p| p.k).collect();
        let rho = spearman(&ts, &ks).map_or("na".to_string(), |r| format!("{r:.6}"));
        let first = g.first().map_or("na".to_string(), |p| p.k.to_string());
        let last = g.last().map_or("na".to_string(), |p| p.k.to_string());
        let fit = h.rows.last().map_or(0, |r| r.fitness_bits);
        summary.push_str(&format!(
            "{i},{},{},{fit},{first},{last},{rho}\n",
            seeds[i],
            h.acceptances()
        ));
    }
    w.write("growth.csv", growth)?;
    w.write("evolve_summary.csv", summary)
}

fn run_algonet(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.algonet;
    let protocol = match p.protocol {
        ProtocolChoice::Plain => Protocol::PlainDiffusion,
        ProtocolChoice::Sis => Protocol::sis(derive_seed(cfg.seed, "sis", 0)),
    };
    let params = EeoeParams {
        ns: p.ns.clone(),
        topology: p.topology,
        protocol,
        trials: cfg.trials(),
        budget: p.budget,
        s_max: p.s_max,
        master_seed: cfg.seed,
    };
    let est = build_estimator(cfg, w)?;
    let r = eeoe_curve(&params, &est)?;
    w.seeds(r.topology_seeds.iter().map(|&(_, _, s)| s));
    let mut seeds = String::from("N,trial,topology_seed\n");
    for (n, t, s) in &r.topology_seeds {
        seeds.push_str(&format!("{n},{t},{s}\n"));
    }
    w.write("results.csv", r.results_csv())?;
    w.write("aggregate.csv", r.aggregate_csv())?;
    w.write("topology_seeds.csv", seeds)
}

#[derive(Serialize)]
struct AtlasSummary {
    width: usize,
    runs: usize,
    t_p: u64,
    cycles: usize,
    sha256: String,
}

fn run_ueinn(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let p = &cfg.ueinn;
    let atlas = build_atlas(p.width)?;
    let search = coupling_search(&atlas, p.env_width, p.env_rule)?;
    w.write("atlas.csv", atlas.to_csv())?;
    w.write_json(
        "atlas_summary.json",
        &AtlasSummary {
            width: atlas.width,
            runs: atlas.records.len(),
            t_p: atlas.t_p,
            cycles: atlas.cycles.len(),
            sha256: atlas.hash(),
        },
    )?;
    w.write_json("coupling_search.json", &search)
}

pub fn trend_generator(cfg: &ExperimentConfig) -> Generator {
    let t = &cfg.trend;
    match t.generator {
        super::GeneratorKind::Evolution => Generator::Evolution {
            mutations: t.mutations,
            budget: cfg.evolve.budget,
            s_max: cfg.evolve.s_max,
            seed: cfg.seed,
        },
        super::GeneratorKind::Algonet => Generator::Algonet {
            n: t.n,
            topology: cfg.algonet.topology,
            budget: cfg.algonet.budget,
            s_max: cfg.algonet.s_max,
            seed: cfg.seed,
        },
        super::GeneratorKind::Constant => Generator::Constant {
            width: t.width,
            seed: cfg.seed,
        },
    }
}

fn run_trend(cfg: &ExperimentConfig, w: &mut RunWriter) -> Result<()> {
    let t = &cfg.trend;
    w.seeds([cfg.seed]);
    let r = aoie_trend(
        &trend_generator(cfg),
        &t.roster,
        t.t,
        t.k,
        &t.schedule,
        t.step_budget,
        cfg.seed,
    )?;
    w.write("trend.csv", r.rows_csv())?;
    w.write("trend_summary.csv", r.summary_csv())?;
    w.write_json("trend.json", &r)
}
