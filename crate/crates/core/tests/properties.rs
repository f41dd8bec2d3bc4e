use std::collections::HashMap;

use amex_mcts::env::{reachable_states, Chain, ChainLoop, Environment, FrozenLake, SyntheticTree};
use amex_mcts::grammar::{evaluate_expression, EvalError, GrammarEnv, Token};
use amex_mcts::harness::brute_force_values;
use amex_mcts::search::{NodeStatus, Search, SearchConfig, Variant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Classical), Just(Variant::AmEx), Just(Variant::AmExMax)]
}

/// Checks the counters and leaf values of a finished search.
fn check_search<E: Environment>(env: &E, variant: Variant, n_sims: usize, gamma: f64, seed: u64) -> Result<(), TestCaseError> {
    let config = SearchConfig::new(variant, n_sims).with_gamma(gamma).with_seed(seed);
    let mut search = Search::new(env, env.initial(), config).unwrap();
    search.run().unwrap();
    let iterations = search.iterations() as u64;
    let tree = search.tree();
    let root = tree.root();
    prop_assert_eq!(root.n_p(), iterations);
    let child_sum: u64 = root.children().iter().flatten().map(|&c| tree[c].n_c()).sum();
    prop_assert_eq!(child_sum, iterations);
    if variant == Variant::Classical {
        for (_, node) in tree.iter() {
            prop_assert_eq!(node.n_p(), node.n_c());
        }
    } else {
        // Every iteration adds exactly one node, and nothing closed is ever selected into.
        prop_assert_eq!(tree.len() as u64, iterations + 1);
        for (_, node) in tree.iter() {
            if node.status() == NodeStatus::ClosedTerminal {
                let r = env.reward(node.state());
                let q = node.mean().unwrap();
                prop_assert!((q - r).abs() <= 1e-12 * r.abs().max(1.0), "terminal Q {} vs reward {}", q, r);
            }
        }
        if search.iterations() < n_sims {
            prop_assert!(search.is_complete());
        }
    }
    let policy = search.policy();
    let total: f64 = policy.action_weights.iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-9);
    prop_assert!(policy.action_weights.iter().all(|&w| w >= 0.0));
    prop_assert!(policy.chosen_action < env.num_actions(&env.initial()));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_search_counters(v in variant(), b in 1usize..=4, d in 1usize..=6, n in 1usize..300, seed: u64, discounted: bool) {
        let env = SyntheticTree::new(b, d, seed).unwrap();
        check_search(&env, v, n, if discounted { 0.9 } else { 1.0 }, seed)?;
    }

    #[test]
    fn chain_search_counters(v in variant(), k in 1usize..12, n in 1usize..200, seed: u64) {
        let env = Chain::random(k, &mut ChaCha8Rng::seed_from_u64(seed));
        check_search(&env, v, n, 1.0, seed)?;
        let env = ChainLoop::random(k, k, &mut ChaCha8Rng::seed_from_u64(seed));
        check_search(&env, v, n, 1.0, seed)?;
    }

    #[test]
    fn lake_and_grammar_search_counters(v in variant(), n in 1usize..120, seed: u64) {
        check_search(&FrozenLake::standard(), v, n, 0.99, seed)?;
        check_search(&GrammarEnv::sqrt_benchmark(), v, n, 1.0, seed)?;
    }

    #[test]
    fn full_exploration_matches_oracle(max in prop::bool::ANY, b in 1usize..=3, d in 1usize..=4, seed: u64, gamma in 0.5f64..=1.0) {
        let env = SyntheticTree::new(b, d, seed).unwrap();
        let variant = if max { Variant::AmExMax } else { Variant::AmEx };
        let budget: usize = (1..=d as u32).map(|i| b.pow(i)).sum();
        let mut search = Search::new(&env, env.initial(), SearchConfig::new(variant, budget).with_gamma(gamma).with_seed(seed)).unwrap();
        search.run().unwrap();
        prop_assert!(search.is_complete());
        let oracle = brute_force_values(&env, &env.initial(), gamma, d + 1).unwrap();
        let tree = search.tree();
        for (a, exact) in oracle.action_values.iter().enumerate() {
            let q = tree[tree.root().child(a).unwrap()].mean().unwrap();
            prop_assert!((q - exact).abs() <= 1e-9, "action {}: {} vs {}", a, q, exact);
        }
        prop_assert!(oracle.is_optimal(search.policy().chosen_action));
    }
}

/// Walks random trajectories and checks that transitions, rewards and keys are pure.
fn probe_determinism<E: Environment>(env: &E, probes: usize, rng: &mut ChaCha8Rng) {
    let mut state = env.initial();
    for _ in 0..probes {
        if env.is_terminal(&state) {
            state = env.initial();
        }
        let a = rng.gen_range(0..env.num_actions(&state));
        let first = env.transition(&state, a).unwrap();
        let second = env.transition(&state, a).unwrap();
        assert_eq!(env.encode(&first), env.encode(&second));
        assert_eq!(env.reward(&first).to_bits(), env.reward(&second).to_bits());
        assert_eq!(env.is_terminal(&first), env.is_terminal(&second));
        assert_eq!(env.encode(&state), env.encode(&state.clone()));
        state = first;
    }
}

#[test]
fn environments_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    probe_determinism(&Chain::random(10, &mut rng), 10_000, &mut rng);
    probe_determinism(&ChainLoop::random(10, 10, &mut rng), 10_000, &mut rng);
    probe_determinism(&FrozenLake::standard(), 10_000, &mut rng);
    probe_determinism(&GrammarEnv::sqrt_benchmark(), 10_000, &mut rng);
    probe_determinism(&SyntheticTree::new(3, 8, 5).unwrap(), 10_000, &mut rng);
}

/// Distinct reachable states must get distinct keys.
fn check_injective<E: Environment>(env: &E, bound: usize)
where
    E::State: std::fmt::Debug,
{
    let states = reachable_states(env, bound).unwrap();
    let mut seen = HashMap::new();
    for s in &states {
        if let Some(prev) = seen.insert(env.encode(s), format!("{s:?}")) {
            panic!("{prev} and {s:?} share a key");
        }
    }
    assert_eq!(seen.len(), states.len());
}

#[test]
fn encodings_are_injective() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    check_injective(&Chain::random(8, &mut rng), 1_000);
    check_injective(&ChainLoop::random(6, 9, &mut rng), 1_000);
    check_injective(&FrozenLake::standard(), 100_000);
    check_injective(&SyntheticTree::new(3, 5, 1).unwrap(), 1_000);
    let small = GrammarEnv::new(
        amex_mcts::grammar::Grammar::benchmark(),
        amex_mcts::grammar::Dataset::sqrt_benchmark(),
        3,
    )
    .unwrap();
    check_injective(&small, 100_000);
}

fn random_expression(rng: &mut ChaCha8Rng, depth: usize, out: &mut Vec<Token>) {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        out.push(match rng.gen_range(0..4) {
            0 => Token::Var(0),
            1 => Token::Var(1),
            2 => Token::Const([0.5, 1.0, 2.0, 3.0, -1.5][rng.gen_range(0..5)]),
            _ => Token::Const(rng.gen_range(-3.0..3.0)),
        });
        return;
    }
    let op = [Token::Add, Token::Sub, Token::Mul, Token::Pow, Token::Sin, Token::Cos, Token::Log][rng.gen_range(0..7)];
    out.push(op);
    for _ in 0..op.arity() {
        random_expression(rng, depth - 1, out);
    }
}

/// Evaluates prefix notation by scanning right to left with an operand stack.
fn stack_evaluate(tokens: &[Token], row: &[f64]) -> Result<f64, EvalError> {
    let mut stack: Vec<f64> = Vec::new();
    for &t in tokens.iter().rev() {
        let v = match t {
            Token::Const(c) => c,
            Token::Var(i) => row[i],
            Token::Sin | Token::Cos | Token::Log => {
                let a = stack.pop().ok_or(EvalError::Malformed)?;
                match t {
                    Token::Sin => a.sin(),
                    Token::Cos => a.cos(),
                    _ => a.ln(),
                }
            }
            _ => {
                let first = stack.pop().ok_or(EvalError::Malformed)?;
                let second = stack.pop().ok_or(EvalError::Malformed)?;
                match t {
                    Token::Add => first + second,
                    Token::Sub => first - second,
                    Token::Mul => first * second,
                    _ => second.powf(first),
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalError::Domain);
        }
        stack.push(v);
    }
    match stack.as_slice() {
        [v] => Ok(*v),
        _ => Err(EvalError::Malformed),
    }
}

#[test]
fn evaluator_agrees_with_stack_machine() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut domain_errors = 0;
    for _ in 0..1_000 {
        let mut tokens = Vec::new();
        random_expression(&mut rng, 5, &mut tokens);
        let row = [rng.gen_range(0.0..4.0), rng.gen_range(-2.0..4.0)];
        let expected = stack_evaluate(&tokens, &row);
        let got = evaluate_expression(&tokens, &row);
        match (expected, got) {
            (Ok(a), Ok(b)) => assert_eq!(a.to_bits(), b.to_bits(), "{tokens:?} on {row:?}"),
            (Err(a), Err(b)) => {
                assert_eq!(a, b);
                domain_errors += 1;
            }
            (a, b) => panic!("{tokens:?} on {row:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(domain_errors > 0 && domain_errors < 1_000);
}
