use super::*;
use crate::complexity::{bounded_exact_ctx, SearchMode};
use crate::dynsys::{gen_incompressible_trajectory, trajectory, Boundary, EcaSpec};
use crate::perturb::flip_bit_program;
use crate::refmachine::context::addressed_programs_of_length;
use crate::refmachine::{run, Entry, Move, Program, TmSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT16: SearchMode = SearchMode::BoundedExact {
    len_cap: 16,
    step_budget: 64,
};

fn copy_observer() -> ObserverSystem {
    ObserverSystem::new(copy_program().encode(), Fat::new(), 256, 4)
}

fn random_state(rng: &mut impl Rng, width: usize) -> Bits {
    (0..width).map(|_| rng.gen::<bool>()).collect()
}

struct Fixture {
    sys: EcaSpec,
    traj: Trajectory,
    env: Environment,
}

fn eca_fixture(rule: u8, seed: u64, width: usize, len: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = EcaSpec::new(rule, width, Boundary::Periodic);
    let env = Environment::none();
    let traj = trajectory(&sys, &random_state(&mut rng, width), &env, 0, len).unwrap();
    Fixture { sys, traj, env }
}

fn observe_id(obs: &ObserverSystem, f: &Fixture, t: u64, k: u64, ch: &Channel) -> ObservationRecord {
    observe(obs, &f.sys, &f.traj, &f.env, t, k, ch, &Probe::Identity).unwrap()
}

#[test]
fn identity_observation_is_lossless() {
    let f = eca_fixture(110, 1, 8, 10);
    let obs = copy_observer();
    let rec = observe_id(&obs, &f, 5, 2, &Channel::Identity);
    assert_eq!(rec.s_prime_next, f.traj.states[6]);
    let decoded = Trajectory::decode(&rec.w).unwrap();
    assert_eq!(decoded.states, f.traj.states[3..=6].to_vec());
    assert_eq!(rec.observer.len(), 7);
    // O'_{t+1} is the observer restarted on w
    let osys = obs.compiled().unwrap();
    assert_eq!(osys.input_of(rec.observer.states.last().unwrap()), rec.w);
}

#[test]
fn bit_flip_probe_changes_one_bit() {
    let f = eca_fixture(110, 2, 8, 10);
    let obs = copy_observer();
    let probe = Probe::Perturb(AlgorithmicPerturbation::program(4, flip_bit_program(2).encode(), 20));
    let rec = observe(&obs, &f.sys, &f.traj, &f.env, 4, 1, &Channel::Identity, &probe).unwrap();
    // the flip program rewrites cell 2 of S_t in place of the rule
    let expect = run(&flip_bit_program(2), &f.traj.states[4], 20).output;
    assert_eq!(rec.s_prime_next, expect);
    let d2: Vec<usize> = (0..8).filter(|&i| rec.s_prime_next[i] != f.traj.states[4][i]).collect();
    assert_eq!(d2, vec![2]);
}

#[test]
fn channel_overflow_is_reported() {
    let f = eca_fixture(110, 3, 8, 10);
    let obs = ObserverSystem::new(copy_program().encode(), Fat::new(), 16, 4);
    let err = observe(
        &obs,
        &f.sys,
        &f.traj,
        &f.env,
        5,
        2,
        &Channel::Identity,
        &Probe::Identity,
    );
    assert!(matches!(err, Err(LabError::Channel(_))));
}

#[test]
fn principle_identity_channel_satisfied() {
    let f = eca_fixture(110, 4, 8, 12);
    let obs = copy_observer();
    let rec = observe_id(&obs, &f, 6, 3, &Channel::Identity);
    let v = check_observation_principle(&rec, &obs, Some(16), EXACT16).unwrap();
    let PrincipleVerdict::Satisfied { estimate } = v else {
        panic!("{v:?}")
    };
    assert!(estimate.upper <= 12.0);
    let w = AddressedProgram::decode(estimate.witness.as_ref().unwrap()).unwrap();
    let r = w.run(&rec.context(&obs, 1).unwrap(), 64).unwrap();
    assert_eq!(r.output, rec.target());
    let upper = check_observation_principle(&rec, &obs, Some(16), SearchMode::Upper).unwrap();
    assert!(upper.is_satisfied());
}

#[test]
fn principle_mask_prefix_needs_repair_bits() {
    let f = eca_fixture(110, 5, 8, 12);
    let obs = copy_observer();
    let rec = observe_id(&obs, &f, 6, 3, &Channel::Mask(vec![0, 1, 2, 3]));
    // Front(1) + copy carrying the 4 hidden bits as data
    let repair = AddressedProgram {
        selector: Selector::Front(1),
        program: Program::new(copy_program().spec, rec.target().slice(0, 4)),
    };
    assert_eq!(repair.encode().len(), 20);
    let exact = SearchMode::BoundedExact {
        len_cap: 20,
        step_budget: 64,
    };
    let v = check_observation_principle(&rec, &obs, Some(20), exact).unwrap();
    assert!(v.is_satisfied(), "{v:?}");
    assert!(check_observation_principle(&rec, &obs, Some(0), exact)
        .unwrap()
        .is_violated());
}

#[test]
fn principle_empty_delivery_violated() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let raw = gen_incompressible_trajectory(8, 9, &mut rng);
    let sys = EcaSpec::new(204, 8, Boundary::Periodic);
    let env = Environment::none();
    let obs = copy_observer();
    let target_len = raw.encode().len();
    let all: Vec<usize> = (0..target_len).collect();
    // S'_{t+1} supplied by a delta probe so the window holds 64 fresh bits
    let probe = Probe::Perturb(AlgorithmicPerturbation::delta(7, raw.states[8].clone()));
    let rec = observe(
        &obs,
        &sys,
        &raw.window(0, 7).unwrap(),
        &env,
        7,
        7,
        &Channel::Mask(all),
        &probe,
    )
    .unwrap();
    assert!(rec.w.is_empty());
    let exact = SearchMode::BoundedExact {
        len_cap: 8,
        step_budget: 64,
    };
    assert!(check_observation_principle(&rec, &obs, Some(8), exact)
        .unwrap()
        .is_violated());
    assert!(check_observation_principle(&rec, &obs, None, exact)
        .unwrap()
        .is_satisfied());
}

#[test]
fn perfect_observation_cases() {
    let f = eca_fixture(110, 7, 8, 12);
    let obs = copy_observer();
    let decoder = DecoderRegistry::extract_first();
    let rec = observe_id(&obs, &f, 6, 3, &Channel::Identity);
    assert!(check_perfect_observation(&rec, &obs, &decoder, 64).unwrap());
    // perfect implies the principle at |decoder|
    let c = decoder.encode().len() as u32;
    let exact = SearchMode::BoundedExact {
        len_cap: c,
        step_budget: 64,
    };
    assert!(check_observation_principle(&rec, &obs, Some(c), exact)
        .unwrap()
        .is_satisfied());
    let masked = observe_id(&obs, &f, 6, 3, &Channel::Mask(vec![20, 21]));
    assert!(!check_perfect_observation(&masked, &obs, &decoder, 64).unwrap());
    let spin = AddressedProgram {
        selector: Selector::Front(1),
        program: Program::new(
            TmSpec::new(1, vec![Entry::new(false, Move::Right, 1); 2]).unwrap(),
            Bits::new(),
        ),
    };
    assert!(matches!(
        check_perfect_observation(&rec, &obs, &spin, 64),
        Err(LabError::PerfectCheckTimeout(64))
    ));
}

#[test]
fn sandwich_bounded_form() {
    let f = eca_fixture(110, 8, 8, 12);
    let obs = copy_observer();
    let rec = observe_id(&obs, &f, 6, 3, &Channel::Identity);
    let v = check_observation_principle(&rec, &obs, Some(16), EXACT16).unwrap();
    let PrincipleVerdict::Satisfied { estimate } = v else {
        panic!()
    };
    let ctx = rec.context(&obs, 1).unwrap();
    let cond = bounded_exact_ctx(&rec.target(), &ctx, 16, 64).unwrap().upper;
    let k = bounded_exact_ctx(&rec.target(), &Context::new(vec![]), 16, 64).unwrap();
    // K - c_O <= K - cond, with K possibly beyond the cap
    assert!(cond <= 16.0 && estimate.upper == cond);
    assert!(k.lower - 16.0 <= k.lower - cond);
}

fn two_phase(otm: &Program, w1: &Bits, w2: &Bits) {
    let obs = ObserverSystem::new(otm.encode(), Fat::new(), 16, 64);
    let osys = obs.compiled().unwrap();
    let cond = |w: &Bits| InputFrame::Paired(obs.fat.encode()).condition(w);
    let r1 = run(otm, &cond(w1), 64);
    let r2 = run(otm, &cond(w2), 64);
    assert!(r1.halted && r2.halted);
    let horizon = 3 * (r1.steps + r2.steps + 2);
    let base = obs.run_from(w1, 0, horizon).unwrap();
    let boundary = base.states.iter().position(|s| osys.is_halted(s)).unwrap() as u64;
    let injected = inject_input(&obs, &base, boundary, w2).unwrap();
    for (t, out) in osys.cycle_outputs(&injected) {
        let expect = if t <= boundary { &r1.output } else { &r2.output };
        assert_eq!(&out, expect, "t={t}");
    }
    assert!(osys.cycle_outputs(&injected).iter().any(|(t, _)| *t > boundary));
    // same input: identical continuation
    assert_eq!(inject_input(&obs, &base, boundary, w1).unwrap().states, base.states);
    assert!(matches!(
        inject_input(&obs, &base, boundary - 1, w2),
        Err(LabError::Boundary(_))
    ));
}

#[test]
fn injection_switches_computation_at_boundary() {
    two_phase(&flip_bit_program(1), &Bits::lit("0110"), &Bits::lit("1"));
    two_phase(&copy_program(), &Bits::lit("111"), &Bits::lit("01"));
}

fn ode_observer() -> ObserverSystem {
    copy_observer().with_constants(4, 4, 4)
}

fn random_future(rec: &ObservationRecord, n: usize, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![rec.s_prime_next.clone()];
    states.extend((0..n).map(|_| random_state(&mut rng, rec.window.width)));
    Trajectory::new(rec.t + 1, rec.window.width, states).unwrap()
}

#[test]
fn ode_future_inside_record_is_not_emergent() {
    let f = eca_fixture(110, 9, 8, 12);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = f.traj.window(7, 7).unwrap();
    let exact = SearchMode::BoundedExact {
        len_cap: 0,
        step_budget: 64,
    };
    let v = ode_verdict(&rec, &obs, &future, 1, exact).unwrap();
    assert!(v.is_not_emergent());
    let ctx = rec.context(&obs, 1).unwrap();
    let target = rec.target();
    assert!(v.certificate().unwrap().replays(&ctx, &target, 64));
}

#[test]
fn ode_fresh_random_future_is_emergent_then_flips() {
    let f = eca_fixture(110, 10, 8, 12);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = random_future(&rec, 8, 99);
    let exact = SearchMode::BoundedExact {
        len_cap: 0,
        step_budget: 64,
    };
    let v = ode_verdict(&rec, &obs, &future, 2, exact).unwrap();
    let Outcome::Emergent {
        len_cap,
        programs_searched,
    } = v.outcome
    else {
        panic!("{v:?}")
    };
    assert_eq!(len_cap, 12);
    assert!(programs_searched <= 1 << 13);
    // independent re-enumeration: nothing up to 12 bits reproduces the target
    let (target, ctx) = verdict::ode_problem(&rec, &obs, &future, 2).unwrap();
    for len in 1..=12 {
        for code in addressed_programs_of_length(len, ctx.components.len()) {
            let ap = AddressedProgram::decode(&code).unwrap();
            if let Some(r) = ap.run(&ctx, 64) {
                assert!(!(r.halted && r.output == target));
            }
        }
    }
    // the observer that knows the target
    let ext = extend_fat(&obs, &target);
    assert_eq!(ext.fat.records.len(), obs.fat.records.len() + 1);
    let rec2 = observe_id(&ext, &f, 6, 2, &Channel::Identity);
    let v2 = ode_verdict(&rec2, &ext, &future, 2, exact).unwrap();
    assert!(v2.is_not_emergent(), "{v2:?}");
    let (t2, c2) = verdict::ode_problem(&rec2, &ext, &future, 2).unwrap();
    assert!(v2.certificate().unwrap().replays(&c2, &t2, 64));
    assert!(v2.certificate().unwrap().bits().len() <= 12);
}

#[test]
fn ode_exact_mode_cap_error() {
    let f = eca_fixture(110, 11, 8, 12);
    let obs = copy_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = random_future(&rec, 2, 1);
    let err = ode_verdict(&rec, &obs, &future, 1, EXACT16);
    assert!(matches!(err, Err(LabError::Cap { threshold: 32, .. })));
}

#[test]
fn ode_constant_trajectory_upper_mode() {
    let f = eca_fixture(204, 12, 8, 30);
    let obs = copy_observer().with_constants(8, 8, 64);
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = f.traj.window(7, 30).unwrap();
    let v = ode_verdict(&rec, &obs, &future, 2, SearchMode::Upper).unwrap();
    assert!(v.is_not_emergent(), "{v:?}");
    let (target, ctx) = verdict::ode_problem(&rec, &obs, &future, 2).unwrap();
    assert!(v.certificate().unwrap().replays(&ctx, &target, 64));
    // a fresh future of the same length stays above the threshold
    let random = random_future(&rec, future.len() - 1, 3);
    let v = ode_verdict(&rec, &obs, &random, 2, SearchMode::Upper).unwrap();
    assert!(matches!(v.outcome, Outcome::Inconclusive { .. }), "{v:?}");
}

#[test]
fn ode_rejects_bad_futures() {
    let f = eca_fixture(110, 13, 8, 12);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = f.traj.window(7, 8).unwrap();
    assert!(ode_verdict(&rec, &obs, &future, 0, SearchMode::Upper).is_err());
    assert!(ode_verdict(&rec, &obs, &future, 3, SearchMode::Upper).is_err());
    let shifted = f.traj.window(8, 9).unwrap();
    assert!(ode_verdict(&rec, &obs, &shifted, 1, SearchMode::Upper).is_err());
}

#[test]
fn empty_certificate_changes_nothing() {
    let f = eca_fixture(110, 14, 8, 12);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = random_future(&rec, 4, 5);
    let exact = SearchMode::BoundedExact {
        len_cap: 0,
        step_budget: 64,
    };
    let ext = extend_fat(&obs, &Bits::new());
    let rec2 = observe_id(&ext, &f, 6, 2, &Channel::Identity);
    let a = ode_verdict(&rec, &obs, &future, 1, exact).unwrap();
    let b = ode_verdict(&rec2, &ext, &future, 1, exact).unwrap();
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(Fat::decode(&ext.fat.encode()).unwrap(), ext.fat);
}

fn rule110_simulator(f: &Fixture, from: u64) -> Box<dyn Simulator> {
    Box::new(TrajectorySimulator {
        sys: f.sys,
        s0: f.traj.states[0].clone(),
        t0: 0,
        env: f.env.clone(),
        from,
        perturbations: vec![],
    })
}

#[test]
fn bedau_cases() {
    let f = eca_fixture(110, 15, 8, 20);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = f.traj.window(7, 14).unwrap();
    let exact = SearchMode::BoundedExact {
        len_cap: 0,
        step_budget: 64,
    };
    let mut reg = SimulatorRegistry::new();
    reg.register(rule110_simulator(&f, 4));
    let v = bedau_verdict(&rec, &obs, &future, 1, &reg, exact).unwrap();
    assert!(matches!(v, BedauOutcome::WeaklyEmergent { .. }), "{v:?}");

    let empty = SimulatorRegistry::new();
    let v = bedau_verdict(&rec, &obs, &future, 1, &empty, exact).unwrap();
    assert!(matches!(
        v,
        BedauOutcome::NotWeaklyEmergent {
            a_failed: true,
            b_failed: false,
            ..
        }
    ));

    // the future is the observed successor itself: compressible given w
    let short = f.traj.window(7, 7).unwrap();
    let v = bedau_verdict(&rec, &obs, &short, 1, &reg, exact).unwrap();
    assert!(
        matches!(
            v,
            BedauOutcome::NotWeaklyEmergent {
                a_failed: false,
                b_failed: true,
                ..
            }
        ),
        "{v:?}"
    );
}

#[test]
fn fat_append_and_decode() {
    let fat = Fat::new().appended(Bits::lit("101")).appended(Bits::lit("0"));
    let enc = fat.encode();
    let more = fat.appended(Bits::lit("1111"));
    assert_eq!(Fat::decode(&enc).unwrap(), fat);
    assert_eq!(Fat::decode(&more.encode()).unwrap().records.len(), 3);
    assert_eq!(more.encode()[..enc.len()], enc[..]);
    assert!(Fat::decode(&enc[..enc.len() - 1]).is_err());
}

#[test]
fn verdict_report_json() {
    let f = eca_fixture(110, 16, 8, 12);
    let obs = ode_observer();
    let rec = observe_id(&obs, &f, 6, 2, &Channel::Identity);
    let future = random_future(&rec, 4, 5);
    let exact = SearchMode::BoundedExact {
        len_cap: 0,
        step_budget: 64,
    };
    let v = ode_verdict(&rec, &obs, &future, 1, exact).unwrap();
    let json = serde_json::to_value(VerdictReport::new(&v, &obs, vec![16])).unwrap();
    assert_eq!(json["mode"], "bounded-exact");
    assert_eq!(json["threshold_bits"], 12);
    assert_eq!(json["outcome"], "emergent");
    assert_eq!(json["seeds"][0], 16);
    assert!(json["search_caps"]["programs_searched"].as_u64().unwrap() > 0);
}
