use aidlab::algonet::{fitness_cmp, random_population, run_isolated, run_networked, AlgoNet, Protocol};
use aidlab::perturb::SimpleGraph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, p: f64, seed: u64) -> SimpleGraph {
    SimpleGraph::erdos_renyi(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn edgeless_network_matches_isolation(n in 1usize..12, seed in any::<u64>(), rounds in 0usize..6) {
        let pop = random_population(n, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let net = AlgoNet::new(SimpleGraph::edgeless(n), pop.clone(), Protocol::PlainDiffusion, rounds, 500).unwrap();
        prop_assert_eq!(run_networked(&net), run_isolated(&pop, rounds, 500));
    }

    #[test]
    fn best_payload_never_regresses(n in 2usize..12, p in 0.1f64..1.0, seed in any::<u64>()) {
        let pop = random_population(n, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let net = AlgoNet::new(graph(n, p, seed), pop, Protocol::PlainDiffusion, 6, 500).unwrap();
        let traces = run_networked(&net);
        let best = |r: usize| traces.iter().map(|t| t.payloads[r].clone()).max_by(fitness_cmp).unwrap();
        for r in 1..6 {
            prop_assert!(fitness_cmp(&best(r), &best(r - 1)).is_ge());
        }
    }

    #[test]
    fn round_one_champion_reaches_everyone_within_diameter(n in 2usize..12, p in 0.2f64..1.0, seed in any::<u64>()) {
        let g = graph(n, p, seed);
        prop_assume!(g.is_connected());
        let d = g.diameter().unwrap();
        let pop = random_population(n, 2, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let rounds = d + 1;
        let net = AlgoNet::new(g, pop.clone(), Protocol::PlainDiffusion, rounds, 500).unwrap();
        let traces = run_networked(&net);
        // the fittest first-round candidate of any node
        let iso = run_isolated(&pop, 1, 500);
        let champ = iso.iter().map(|t| t.payloads[0].clone()).max_by(fitness_cmp).unwrap();
        for t in &traces {
            prop_assert!(fitness_cmp(&t.payloads[d], &champ).is_ge());
        }
    }
}
