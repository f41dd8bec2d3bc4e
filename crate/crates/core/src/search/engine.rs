use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{NodeId, NodeStatus, SearchNode, SearchTree};
use super::uct::{node_q, uct_score};
use super::{Policy, SearchConfig, SearchStats, Variant};
use crate::env::{Environment, StateKey};
use crate::error::{Error, Result};

/// One level of a selected path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub node: NodeId,
    /// Action actually followed: UCT argmax over the open actions.
    pub a_select: usize,
    /// Action plain UCT would have followed: argmax over all actions.
    pub a_max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionOutcome {
    /// Root first; the last step's `a_select` child is `leaf`.
    pub path: Vec<PathStep>,
    pub leaf: NodeId,
    /// True when `leaf` was added to the tree by this selection.
    pub new_leaf: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationKind {
    Transposition,
    Terminal,
    Rollout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub kind: EvaluationKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOutcome {
    pub leaf: NodeId,
    pub new_leaf: bool,
    pub evaluation: Evaluation,
}

/// A single search over a fixed root state.
///
/// [`Search::iterate`] runs one select / expand-and-simulate / backpropagate
/// cycle; [`Search::run`] iterates until the budget is spent or, for the
/// AmEx variants, until the root is completely explored.
pub struct Search<'e, E: Environment> {
    env: &'e E,
    config: SearchConfig,
    tree: SearchTree<E::State>,
    rng: ChaCha8Rng,
    iterations: usize,
    best_tree_reward: Option<f64>,
    best_reward: Option<f64>,
}

fn keep_max(slot: &mut Option<f64>, value: f64) {
    if slot.is_none_or(|best| value > best) {
        *slot = Some(value);
    }
}

impl<'e, E: Environment> Search<'e, E> {
    pub fn new(env: &'e E, state: E::State, config: SearchConfig) -> Result<Self> {
        config.validate()?;
        if env.is_terminal(&state) || env.num_actions(&state) == 0 {
            return Err(Error::PreconditionViolation(format!(
                "search root {} is terminal",
                env.describe(&state)
            )));
        }
        let reward = env.reward(&state);
        if reward < 0.0 {
            return Err(Error::RewardSignViolation {
                state: env.describe(&state),
                reward,
            });
        }
        let mut root = SearchNode::new(state, StateKey::new(Vec::new()), None, 0);
        root.key = env.encode(&root.state);
        root.expand(env.num_actions(&root.state));
        Ok(Search {
            env,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            tree: SearchTree::with_root(root),
            iterations: 0,
            best_tree_reward: None,
            best_reward: None,
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn tree(&self) -> &SearchTree<E::State> {
        &self.tree
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// True once every action below the root has been closed.
    pub fn is_complete(&self) -> bool {
        self.tree.root().status == NodeStatus::ClosedComplete
    }

    pub fn run(&mut self) -> Result<()> {
        while self.iterations < self.config.n_sims && !self.is_complete() {
            self.iterate()?;
        }
        Ok(())
    }

    pub fn iterate(&mut self) -> Result<IterationOutcome> {
        let outcome = self.select_path()?;
        let evaluation = self.expand_and_simulate(&outcome)?;
        self.backpropagate(&outcome, evaluation.value)?;
        self.iterations += 1;
        Ok(IterationOutcome {
            leaf: outcome.leaf,
            new_leaf: outcome.new_leaf,
            evaluation,
        })
    }

    fn uct_of(&self, parent: &SearchNode<E::State>, action: usize) -> Result<f64> {
        match parent.children[action] {
            Some(child) if self.tree[child].n_c > 0 => {
                let child = &self.tree[child];
                Ok(uct_score(
                    node_q(child, self.config.variant)?,
                    child.n_c,
                    parent.n_p,
                    self.config.c,
                ))
            }
            _ => Ok(f64::INFINITY),
        }
    }

    /// Argmax of `scores` over `candidates`, ties broken uniformly at random.
    fn argmax(&mut self, candidates: &[(usize, f64)]) -> usize {
        let best = candidates
            .iter()
            .map(|&(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = candidates
            .iter()
            .filter(|&&(_, s)| s == best)
            .map(|&(a, _)| a)
            .collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[self.rng.gen_range(0..ties.len())]
        }
    }

    /// Computes `(a_select, a_max)` at an open, expanded node.
    pub(crate) fn choose_actions(&mut self, id: NodeId) -> Result<(usize, usize)> {
        let node = &self.tree[id];
        let skips_closed = self.config.variant.skips_closed();
        let mut open = Vec::with_capacity(node.children.len());
        let mut closed = Vec::new();
        for a in 0..node.children.len() {
            let score = self.uct_of(node, a)?;
            if !skips_closed || node.open[a] {
                open.push((a, score));
            } else {
                closed.push((a, score));
            }
        }
        if open.is_empty() {
            return Err(Error::InvariantViolation(format!(
                "open node {} has no open actions",
                id.index()
            )));
        }
        let a_select = self.argmax(&open);
        let select_score = open
            .iter()
            .find(|&&(a, _)| a == a_select)
            .map(|&(_, s)| s)
            .unwrap_or(f64::NEG_INFINITY);
        // a_max only leaves a_select when a closed action strictly beats it;
        // an unvisited (infinite) a_select is therefore always its own a_max.
        let best_closed = closed
            .iter()
            .map(|&(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        let a_max = if best_closed > select_score {
            self.argmax(&closed)
        } else {
            a_select
        };
        Ok((a_select, a_max))
    }

    /// Descends from the root along `a_select` until it reaches a child that
    /// is not yet in the tree (which is inserted) or a closed child.
    pub fn select_path(&mut self) -> Result<SelectionOutcome> {
        let mut path = Vec::new();
        let mut current = NodeId::ROOT;
        loop {
            let node = &self.tree[current];
            if !node.status.is_open() {
                return Err(Error::InvariantViolation(format!(
                    "selection entered closed node {}",
                    current.index()
                )));
            }
            let (a_select, a_max) = self.choose_actions(current)?;
            path.push(PathStep {
                node: current,
                a_select,
                a_max,
            });
            match self.tree[current].children[a_select] {
                None => {
                    let parent = &self.tree[current];
                    let state = self.env.transition(&parent.state, a_select)?;
                    let key = self.env.encode(&state);
                    let depth = parent.depth + 1;
                    let leaf = self.tree.push(SearchNode::new(
                        state,
                        key,
                        Some((current, a_select)),
                        depth,
                    ));
                    self.tree[current].children[a_select] = Some(leaf);
                    return Ok(SelectionOutcome {
                        path,
                        leaf,
                        new_leaf: true,
                    });
                }
                Some(child) if !self.tree[child].status.is_open() => {
                    if self.config.variant.skips_closed() {
                        return Err(Error::InvariantViolation(format!(
                            "closed node {} is still listed as open",
                            child.index()
                        )));
                    }
                    return Ok(SelectionOutcome {
                        path,
                        leaf: child,
                        new_leaf: false,
                    });
                }
                Some(child) => current = child,
            }
        }
    }

    /// Evaluates the selected leaf: stored value for a known state, the
    /// reward of a terminal state, or a random rollout otherwise.
    pub fn expand_and_simulate(&mut self, outcome: &SelectionOutcome) -> Result<Evaluation> {
        let id = outcome.leaf;
        let use_table = self.config.variant.skips_closed();
        if use_table && outcome.new_leaf {
            if let Some(value) = self.tree.table.get(&self.tree[id].key) {
                self.tree[id].status = NodeStatus::ClosedTransposition;
                return Ok(Evaluation {
                    value,
                    kind: EvaluationKind::Transposition,
                });
            }
        }
        let env = self.env;
        let node = &self.tree[id];
        let num_actions = env.num_actions(&node.state);
        if env.is_terminal(&node.state) || num_actions == 0 {
            let value = env.reward(&node.state);
            self.tree[id].status = NodeStatus::ClosedTerminal;
            keep_max(&mut self.best_tree_reward, value);
            keep_max(&mut self.best_reward, value);
            return Ok(Evaluation {
                value,
                kind: EvaluationKind::Terminal,
            });
        }
        let state = node.state.clone();
        if outcome.new_leaf {
            self.tree[id].expand(num_actions);
        }
        let value = self.rollout(state)?;
        Ok(Evaluation {
            value,
            kind: EvaluationKind::Rollout,
        })
    }

    /// Uniform random playout, discounted per step and truncated at the cap.
    fn rollout(&mut self, mut state: E::State) -> Result<f64> {
        let env = self.env;
        let mut value = 0.0;
        let mut discount = 1.0;
        let mut steps = 0;
        loop {
            let reward = env.reward(&state);
            let n = env.num_actions(&state);
            if env.is_terminal(&state) || n == 0 {
                keep_max(&mut self.best_reward, reward);
                return Ok(value + discount * reward);
            }
            if reward < 0.0 {
                return Err(Error::RewardSignViolation {
                    state: env.describe(&state),
                    reward,
                });
            }
            value += discount * reward;
            if steps == self.config.rollout_cap {
                return Ok(value);
            }
            let action = self.rng.gen_range(0..n);
            state = env.transition(&state, action)?;
            discount *= self.config.gamma;
            steps += 1;
        }
    }

    /// Propagates `value` from the leaf to the root.
    ///
    /// At every level the reward is credited along the selected path while
    /// `n_c` follows `a_max`. When the two differ the reward is raised to the
    /// mean of the `a_max` child if it was lower, and the `a_max` child's
    /// reward sum is rescaled so that its mean is unchanged. Closing the
    /// last open action of a node closes the node and sets its value to the
    /// discounted best child value.
    pub fn backpropagate(&mut self, outcome: &SelectionOutcome, value: f64) -> Result<()> {
        let variant = self.config.variant;
        let gamma = self.config.gamma;
        let leaf = &mut self.tree[outcome.leaf];
        leaf.w += value;
        if variant == Variant::AmExMax {
            leaf.q_max = leaf.q_max.max(value);
        }

        let mut r = value;
        for (level, step) in outcome.path.iter().enumerate().rev() {
            r *= gamma;
            let s = step.node;
            let c_s = self.child(s, step.a_select)?;
            let is_root = level == 0;

            if !variant.skips_closed() {
                let child = &mut self.tree[c_s];
                child.n_p += 1;
                child.n_c += 1;
                let node = &mut self.tree[s];
                node.w += r;
                if is_root {
                    node.n_p += 1;
                    node.n_c += 1;
                }
                continue;
            }

            let c_m = self.child(s, step.a_max)?;
            if c_m != c_s {
                let max_child = &self.tree[c_m];
                if let Some(q) = max_child.mean() {
                    if r < q {
                        r = q;
                    }
                }
            }

            self.tree[c_s].n_p += 1;
            if c_m != c_s {
                let max_child = &mut self.tree[c_m];
                if max_child.n_c == 0 {
                    return Err(Error::InvariantViolation(format!(
                        "a_max child {} was never visited",
                        c_m.index()
                    )));
                }
                max_child.n_c += 1;
                let n = max_child.n_c as f64;
                max_child.w = max_child.w * n / (n - 1.0);
            } else {
                self.tree[c_s].n_c += 1;
            }

            let selected = &self.tree[c_s];
            let stored = selected.mean().ok_or_else(|| {
                Error::InvariantViolation(format!("selected child {} has n_c = 0", c_s.index()))
            })?;
            let key = selected.key.clone();
            let selected_closed = !selected.status.is_open();
            self.tree.table.insert(key, stored);

            let node = &mut self.tree[s];
            node.w += r;
            if variant == Variant::AmExMax {
                node.q_max = node.q_max.max(r);
            }

            if selected_closed {
                node.close_action(step.a_select);
                if node.open_count == 0 {
                    // n_c of this node is still bumped later in this pass when
                    // the parent's a_max coincides with its a_select, or at the
                    // root; the completed value must already account for it.
                    let pending = if is_root {
                        1
                    } else {
                        let parent_step = outcome.path[level - 1];
                        u64::from(parent_step.a_max == parent_step.a_select)
                    };
                    self.complete(s, pending)?;
                }
            }

            if is_root {
                let root = &mut self.tree[s];
                root.n_p += 1;
                root.n_c += 1;
            }
        }
        Ok(())
    }

    /// Closes a fully explored node, setting its mean to `gamma` times the
    /// best child mean (and likewise its running maximum).
    fn complete(&mut self, id: NodeId, pending_visits: u64) -> Result<()> {
        let gamma = self.config.gamma;
        let node = &self.tree[id];
        let mut best_mean = f64::NEG_INFINITY;
        let mut best_max = f64::NEG_INFINITY;
        for slot in &node.children {
            let child = slot.map(|c| &self.tree[c]).ok_or_else(|| {
                Error::InvariantViolation(format!(
                    "node {} closed with a missing child",
                    id.index()
                ))
            })?;
            let mean = child.mean().ok_or_else(|| {
                Error::InvariantViolation(format!("closed child of {} has n_c = 0", id.index()))
            })?;
            best_mean = best_mean.max(mean);
            best_max = best_max.max(child.q_max);
        }
        let n = (node.n_c + pending_visits) as f64;
        let node = &mut self.tree[id];
        node.status = NodeStatus::ClosedComplete;
        node.w = gamma * n * best_mean;
        if self.config.variant == Variant::AmExMax {
            node.q_max = gamma * best_max;
        }
        Ok(())
    }

    fn child(&self, id: NodeId, action: usize) -> Result<NodeId> {
        self.tree[id].child(action).ok_or_else(|| {
            Error::InvariantViolation(format!(
                "action {action} of node {} has no child",
                id.index()
            ))
        })
    }

    /// Root policy. A completely explored tree yields a one-hot policy on the
    /// best child mean; otherwise weights are proportional to `n_c` and the
    /// most counted action is chosen.
    pub fn policy(&mut self) -> Policy {
        let root = self.tree.root();
        let n = root.children.len();
        if self.is_complete() {
            let scored: Vec<(usize, f64)> = root
                .children
                .iter()
                .enumerate()
                .filter_map(|(a, c)| c.and_then(|c| self.tree[c].mean()).map(|q| (a, q)))
                .collect();
            let chosen = self.argmax(&scored);
            let mut weights = vec![0.0; n];
            weights[chosen] = 1.0;
            return Policy {
                action_weights: weights,
                chosen_action: chosen,
                from_complete_tree: true,
            };
        }
        let counts: Vec<(usize, f64)> = root
            .children
            .iter()
            .enumerate()
            .map(|(a, c)| (a, c.map_or(0.0, |c| self.tree[c].n_c as f64)))
            .collect();
        let total: f64 = counts.iter().map(|&(_, n)| n).sum();
        let weights = if total > 0.0 {
            counts.iter().map(|&(_, n)| n / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        };
        let chosen = self.argmax(&counts);
        Policy {
            action_weights: weights,
            chosen_action: chosen,
            from_complete_tree: false,
        }
    }

    pub fn state_keys(&self) -> impl Iterator<Item = &StateKey> {
        self.tree.iter().map(|(_, n)| &n.key)
    }

    pub fn stats(&self) -> SearchStats {
        let unique: HashSet<&StateKey> = self.state_keys().collect();
        let mut closed_nodes = 0;
        let mut closed_subtrees = 0;
        for (_, node) in self.tree.iter() {
            match node.status {
                NodeStatus::Open => {}
                NodeStatus::ClosedComplete => {
                    closed_nodes += 1;
                    closed_subtrees += 1;
                }
                _ => closed_nodes += 1,
            }
        }
        SearchStats {
            iterations: self.iterations,
            unique_states: unique.len(),
            tree_size: self.tree.len(),
            closed_subtrees,
            closed_nodes,
            root_complete: self.is_complete(),
            best_tree_reward: self.best_tree_reward,
            best_reward: self.best_reward,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Chain, ChainState, SyntheticTree};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn independent_uct(q: f64, n: f64, parent: f64) -> f64 {
        q + 2f64.sqrt() * (parent.ln() / n).sqrt()
    }

    /// Root with two visited children; `closed` marks child 0 as terminal.
    fn two_child_fixture<'e>(
        env: &'e SyntheticTree,
        variant: Variant,
        (w0, n0): (f64, u64),
        (w1, n1): (f64, u64),
        root_np: u64,
    ) -> Search<'e, SyntheticTree> {
        let mut search = Search::new(env, env.initial(), SearchConfig::new(variant, 10)).unwrap();
        for (a, (w, n)) in [(0, (w0, n0)), (1, (w1, n1))] {
            let state = env.transition(&env.initial(), a).unwrap();
            let key = env.encode(&state);
            let mut node = SearchNode::new(state, key, Some((NodeId::ROOT, a)), 1);
            node.w = w;
            node.n_c = n;
            node.n_p = n;
            node.q_max = w / n as f64;
            node.expand(2);
            let id = search.tree.push(node);
            search.tree[NodeId::ROOT].children[a] = Some(id);
        }
        search.tree[NodeId::ROOT].n_p = root_np;
        let child0 = search.tree.root().children[0].unwrap();
        search.tree[child0].status = NodeStatus::ClosedTerminal;
        search.tree[NodeId::ROOT].close_action(0);
        search
    }

    #[test]
    fn closed_child_is_never_selected() {
        let env = SyntheticTree::new(2, 3, 0).unwrap();
        let mut search = two_child_fixture(&env, Variant::AmEx, (0.9 * 5.0, 5), (0.1, 1), 10);
        // UCT of the closed child is lower here, so both choices agree.
        let closed = independent_uct(0.9, 5.0, 10.0);
        let open = independent_uct(0.1, 1.0, 10.0);
        assert!(open > closed);
        assert_eq!(search.choose_actions(NodeId::ROOT).unwrap(), (1, 1));
    }

    #[test]
    fn a_max_follows_a_better_closed_child() {
        let env = SyntheticTree::new(2, 3, 0).unwrap();
        let mut search = two_child_fixture(&env, Variant::AmEx, (0.9, 1), (0.5, 5), 10);
        let closed = independent_uct(0.9, 1.0, 10.0);
        let open = independent_uct(0.1, 5.0, 10.0);
        assert!(closed > open);
        assert_eq!(search.choose_actions(NodeId::ROOT).unwrap(), (1, 0));

        // The classical variant ignores the closed marker.
        let mut classical = two_child_fixture(&env, Variant::Classical, (0.9, 1), (0.5, 5), 10);
        assert_eq!(classical.choose_actions(NodeId::ROOT).unwrap(), (0, 0));
    }

    #[test]
    fn fresh_root_ties_are_seeded() {
        let env = Chain::with_fixed_action(1, 0);
        let mut seen = HashSet::new();
        for seed in 0..32 {
            let config = SearchConfig::new(Variant::AmEx, 1).with_seed(seed);
            let mut a = Search::new(&env, env.initial(), config.clone()).unwrap();
            let mut b = Search::new(&env, env.initial(), config).unwrap();
            let (sel, max) = a.choose_actions(NodeId::ROOT).unwrap();
            assert_eq!(sel, max);
            assert_eq!(b.choose_actions(NodeId::ROOT).unwrap(), (sel, max));
            seen.insert(sel);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn rescale_preserves_mean_of_a_max_child() {
        let env = SyntheticTree::new(2, 3, 0).unwrap();
        let mut search = two_child_fixture(&env, Variant::AmEx, (2.0, 2), (0.5, 5), 10);
        // child 0 has mean 1.0 and a much higher UCT than child 1.
        let child0 = search.tree.root().children[0].unwrap();
        let child1 = search.tree.root().children[1].unwrap();
        let outcome = SelectionOutcome {
            path: vec![
                PathStep {
                    node: NodeId::ROOT,
                    a_select: 1,
                    a_max: 0,
                },
                PathStep {
                    node: child1,
                    a_select: 0,
                    a_max: 0,
                },
            ],
            leaf: NodeId::ROOT, // replaced below
            new_leaf: true,
        };
        let state = env.transition(&search.tree[child1].state, 0).unwrap();
        let key = env.encode(&state);
        let leaf = search
            .tree
            .push(SearchNode::new(state, key, Some((child1, 0)), 2));
        search.tree[child1].children[0] = Some(leaf);
        let outcome = SelectionOutcome { leaf, ..outcome };

        search.backpropagate(&outcome, 0.2).unwrap();
        let c0 = &search.tree[child0];
        assert_eq!((c0.n_c, c0.w), (3, 3.0));
        assert_eq!(c0.mean(), Some(1.0));
        // The incoming 0.2 was raised to the a_max mean before reaching the root.
        assert_eq!(search.tree.root().w, 1.0);
        assert_eq!(search.tree[child1].n_p, 6);
        assert_eq!(search.tree[child1].n_c, 5);
        assert_eq!(search.tree[leaf].mean(), Some(0.2));
    }

    #[test]
    fn completion_sets_discounted_best_child_value() {
        // Node with two closed children of mean 0.5 and 0.7, gamma 0.9 and
        // n_c = 4 after this pass: w = 0.9 * 4 * 0.7 = 2.52, Q = 0.63.
        let env = SyntheticTree::new(2, 2, 0).unwrap();
        let config = SearchConfig::new(Variant::AmEx, 10).with_gamma(0.9);
        let mut search = Search::new(&env, env.initial(), config).unwrap();
        let root_state = env.initial();
        let s_state = env.transition(&root_state, 0).unwrap();
        let s_key = env.encode(&s_state);
        let mut s = SearchNode::new(s_state.clone(), s_key, Some((NodeId::ROOT, 0)), 1);
        s.expand(2);
        s.n_c = 3;
        s.n_p = 3;
        s.w = 1.0;
        let s_id = search.tree.push(s);
        search.tree[NodeId::ROOT].children[0] = Some(s_id);
        search.tree[NodeId::ROOT].n_p = 3;

        // Child 0 already closed with mean 0.5.
        let c0_state = env.transition(&s_state, 0).unwrap();
        let c0_key = env.encode(&c0_state);
        let mut c0 = SearchNode::new(c0_state, c0_key, Some((s_id, 0)), 2);
        c0.w = 1.0;
        c0.n_c = 2;
        c0.n_p = 2;
        c0.status = NodeStatus::ClosedTerminal;
        let c0_id = search.tree.push(c0);
        search.tree[s_id].children[0] = Some(c0_id);
        search.tree[s_id].close_action(0);

        // New leaf under action 1 evaluates to 0.7.
        let c1_state = env.transition(&s_state, 1).unwrap();
        let c1_key = env.encode(&c1_state);
        let c1 = SearchNode::new(c1_state, c1_key, Some((s_id, 1)), 2);
        let c1_id = search.tree.push(c1);
        search.tree[s_id].children[1] = Some(c1_id);
        search.tree[c1_id].status = NodeStatus::ClosedTerminal;

        let outcome = SelectionOutcome {
            path: vec![
                PathStep {
                    node: NodeId::ROOT,
                    a_select: 0,
                    a_max: 0,
                },
                PathStep {
                    node: s_id,
                    a_select: 1,
                    a_max: 1,
                },
            ],
            leaf: c1_id,
            new_leaf: true,
        };
        search.backpropagate(&outcome, 0.7).unwrap();
        let s = &search.tree[s_id];
        assert_eq!(s.status, NodeStatus::ClosedComplete);
        assert_eq!(s.n_c, 4);
        assert!((s.w - 2.52).abs() < 1e-12);
        assert!((s.mean().unwrap() - 0.63).abs() < 1e-12);
        // Brute force over the two leaves: 0.9 * max(0.5, 0.7).
        assert!((s.mean().unwrap() - 0.9 * 0.5f64.max(0.7)).abs() < 1e-12);
        assert_eq!(search.tree.table().get(&search.tree[s_id].key), s.mean());
    }

    #[test]
    fn transposition_leaf_uses_stored_value() {
        let env = SyntheticTree::new(2, 3, 0).unwrap();
        let mut search =
            Search::new(&env, env.initial(), SearchConfig::new(Variant::AmEx, 10)).unwrap();
        let state = env.transition(&env.initial(), 1).unwrap();
        let key = env.encode(&state);
        search.tree.table.insert(key.clone(), 0.4);
        let leaf = search
            .tree
            .push(SearchNode::new(state, key, Some((NodeId::ROOT, 1)), 1));
        search.tree[NodeId::ROOT].children[1] = Some(leaf);
        let outcome = SelectionOutcome {
            path: vec![PathStep {
                node: NodeId::ROOT,
                a_select: 1,
                a_max: 1,
            }],
            leaf,
            new_leaf: true,
        };
        let eval = search.expand_and_simulate(&outcome).unwrap();
        assert_eq!(eval.value, 0.4);
        assert_eq!(eval.kind, EvaluationKind::Transposition);
        assert_eq!(search.tree[leaf].status, NodeStatus::ClosedTransposition);
    }

    #[test]
    fn terminal_leaf_returns_its_reward() {
        let env = Chain::with_fixed_action(1, 0);
        let mut search =
            Search::new(&env, env.initial(), SearchConfig::new(Variant::AmEx, 10)).unwrap();
        let state = ChainState {
            position: 1,
            failed: false,
        };
        let key = env.encode(&state);
        let leaf = search
            .tree
            .push(SearchNode::new(state, key, Some((NodeId::ROOT, 0)), 1));
        search.tree[NodeId::ROOT].children[0] = Some(leaf);
        let outcome = SelectionOutcome {
            path: vec![PathStep {
                node: NodeId::ROOT,
                a_select: 0,
                a_max: 0,
            }],
            leaf,
            new_leaf: true,
        };
        let eval = search.expand_and_simulate(&outcome).unwrap();
        assert_eq!((eval.value, eval.kind), (1.0, EvaluationKind::Terminal));
        assert_eq!(search.tree[leaf].status, NodeStatus::ClosedTerminal);
    }

    #[test]
    fn rollout_discounts_each_step() {
        // From position 1 of a length-3 chain, a rollout that picks the
        // correct action twice is worth gamma^2. Enumerate seeds until the
        // rollout succeeds and check the value exactly.
        let env = Chain::with_fixed_action(3, 0);
        let start = ChainState {
            position: 1,
            failed: false,
        };
        let gamma = 0.9;
        let mut successes = 0;
        for seed in 0..64 {
            let config = SearchConfig::new(Variant::AmEx, 1)
                .with_gamma(gamma)
                .with_seed(seed);
            let mut search = Search::new(&env, env.initial(), config).unwrap();
            let value = search.rollout(start).unwrap();
            assert!(value == 0.0 || value == gamma * gamma, "value {value}");
            if value > 0.0 {
                successes += 1;
            }
        }
        assert!(successes > 0 && successes < 64);
    }

    #[test]
    fn rollout_cap_truncates_to_zero() {
        let env = Chain::with_fixed_action(3, 0);
        let config = SearchConfig::new(Variant::AmEx, 1).with_rollout_cap(1);
        for seed in 0..32 {
            let mut search =
                Search::new(&env, env.initial(), config.clone().with_seed(seed)).unwrap();
            // Needs three correct steps; the cap allows one.
            assert_eq!(search.rollout(env.initial()).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_interior_reward_aborts_search() {
        let env = SyntheticTree::new(2, 4, 3)
            .unwrap()
            .with_interior_reward(-0.1);
        let err = Search::new(&env, env.initial(), SearchConfig::new(Variant::AmEx, 5));
        assert!(matches!(err, Err(Error::RewardSignViolation { .. })));
    }

    #[test]
    fn terminal_root_is_rejected() {
        let env = Chain::with_fixed_action(1, 0);
        let done = env.transition(&env.initial(), 0).unwrap();
        let err = Search::new(&env, done, SearchConfig::new(Variant::AmEx, 5));
        assert!(matches!(err, Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn chain_of_one_is_solved_in_two_iterations() {
        for seed in 0..16 {
            for correct in 0..2u8 {
                let env = Chain::with_fixed_action(1, correct);
                let config = SearchConfig::new(Variant::AmEx, 2).with_seed(seed);
                let mut search = Search::new(&env, env.initial(), config).unwrap();
                search.run().unwrap();
                assert!(search.is_complete());
                assert_eq!(search.iterations(), 2);
                let policy = search.policy();
                assert!(policy.from_complete_tree);
                assert_eq!(policy.chosen_action, correct as usize);
                assert_eq!(policy.action_weights[correct as usize], 1.0);
            }
        }
    }

    #[test]
    fn single_iteration_policy_is_one_hot_on_visited_child() {
        let env = SyntheticTree::new(3, 3, 9).unwrap();
        for variant in Variant::ALL {
            let config = SearchConfig::new(variant, 1).with_seed(4);
            let mut search = Search::new(&env, env.initial(), config).unwrap();
            search.run().unwrap();
            assert_eq!(search.tree().len(), 2);
            let visited = search.tree().root().children().iter().position(Option::is_some);
            let policy = search.policy();
            assert_eq!(Some(policy.chosen_action), visited);
            assert_eq!(policy.action_weights[policy.chosen_action], 1.0);
        }
    }

    #[test]
    fn exploration_constant_is_used() {
        let c = 0.25;
        assert_eq!(uct_score(0.0, 4, 8, c), c * (8f64.ln() / 4.0).sqrt());
        assert_ne!(uct_score(0.0, 4, 8, SQRT2), uct_score(0.0, 4, 8, c));
    }
}
