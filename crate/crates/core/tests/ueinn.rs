use aidlab::dynsys::{trajectory, Boundary, EcaSpec, Environment};
use aidlab::ueinn::{build_atlas, coupled_run, detect_inn, detect_ue, CoupledSpec, Coupling};
use aidlab::Bits;
use proptest::prelude::*;
use std::collections::HashMap;

fn first_repeat(states: &[Bits]) -> (usize, usize) {
    let mut seen = HashMap::new();
    for (j, s) in states.iter().enumerate() {
        if let Some(&i) = seen.get(s) {
            return (i, j);
        }
        seen.insert(s.clone(), j);
    }
    panic!("no repeat")
}

#[test]
fn atlas_records_are_exact_and_t_p_is_the_maximum() {
    let atlas = build_atlas(3).unwrap();
    assert_eq!(atlas.records.len(), 2048);
    let mut t_p = 0;
    for r in &atlas.records {
        let sys = EcaSpec::new(r.rule, 3, Boundary::Periodic);
        let tr = trajectory(&sys, &r.s0, &Environment::none(), 0, 20).unwrap();
        let (i, j) = first_repeat(&tr.states);
        assert_eq!((r.preperiod, r.period), (i as u64, (j - i) as u64));
        t_p = t_p.max(j as u64);
    }
    assert_eq!(atlas.t_p, t_p);
    assert_eq!(atlas.hash(), build_atlas(3).unwrap().hash());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detectors_agree_with_brute_force(env_rule in any::<u8>(), pal in proptest::array::uniform4(any::<u8>()), s in 0u64..8, e in 0u64..8) {
        let atlas = build_atlas(3).unwrap();
        let spec = CoupledSpec::new(3, EcaSpec::new(env_rule, 3, Boundary::Periodic), Coupling::low_bits(&pal, 3).unwrap()).unwrap();
        let (a, _) = coupled_run(&spec, &Bits::from_uint(s, 3), &Bits::from_uint(e, 3), spec.joint_bound() + 8).unwrap();
        let (i, j) = first_repeat(&a.states);
        prop_assert_eq!(detect_ue(&a, &atlas).unwrap(), j as u64 > atlas.t_p);
        // containment in some isolated cycle, by rerunning every isolated system
        let window = &a.states[i..j];
        let mut contained = false;
        for r in &atlas.records {
            let sys = EcaSpec::new(r.rule, 3, Boundary::Periodic);
            let tr = trajectory(&sys, &r.s0, &Environment::none(), 0, r.preperiod + 2 * r.period + window.len() as u64).unwrap();
            let cyc = &tr.states[r.preperiod as usize..];
            if window.len() <= r.period as usize && cyc.windows(window.len()).any(|w| w == window) {
                contained = true;
                break;
            }
        }
        prop_assert_eq!(detect_inn(&a, &atlas).unwrap(), !contained);
    }
}
