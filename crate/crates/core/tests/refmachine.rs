use aidlab::refmachine::{
    copy_program, enumerate_machines, run, run_bits, sample_program, ProgramBits, TmSpec, C_COPY,
};
use aidlab::Bits;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits_of(v: &[bool]) -> Bits {
    Bits::from_vec(v.to_vec())
}

#[test]
fn no_valid_program_prefixes_another_up_to_14_bits() {
    let mut valid = std::collections::HashSet::new();
    for len in 1..=14usize {
        for x in 0u32..(1 << len) {
            let b: Vec<bool> = (0..len).rev().map(|i| x >> i & 1 == 1).collect();
            if ProgramBits::is_valid(&b) {
                for cut in 1..len {
                    assert!(!valid.contains(&b[..cut]), "{b:?} extends a valid program");
                }
                valid.insert(b);
            }
        }
    }
    assert!(valid.iter().any(|b| b.len() == C_COPY));
}

#[test]
fn enumeration_visits_every_table_once() {
    for s in 1..=2u32 {
        let seen = std::sync::Mutex::new(Vec::new());
        let sum = enumerate_machines(s, 100, Some(2), |idx, spec, _| {
            assert_eq!(TmSpec::from_index(s, idx), *spec);
            seen.lock().unwrap().push(idx);
        });
        let expect = (4u64 * (s as u64 + 1)).pow(2 * s);
        assert_eq!(sum.machines, expect);
        let mut v = seen.into_inner().unwrap();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len() as u64, expect);
    }
}

proptest! {
    #[test]
    fn copy_program_returns_its_condition(w in proptest::collection::vec(any::<bool>(), 1..=32)) {
        let w = bits_of(&w);
        let p = copy_program();
        prop_assert_eq!(p.encode().len(), C_COPY);
        let r = run(&p, &w, 10);
        prop_assert!(r.halted);
        prop_assert_eq!(r.output, w);
    }

    #[test]
    fn sampled_programs_roundtrip_and_run_deterministically(seed in any::<u64>(), cond in proptest::collection::vec(any::<bool>(), 0..16)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pb = sample_program(&mut rng, 3);
        let p = pb.decode().unwrap();
        prop_assert_eq!(p.encode(), pb.clone());
        let c = bits_of(&cond);
        let a = run_bits(&pb, &c, 200).unwrap();
        let b = run_bits(&pb, &c, 200).unwrap();
        prop_assert_eq!(a, b);
    }
}
