use std::collections::HashMap;
use std::ops::{Index, IndexMut};

use crate::env::StateKey;

/// Index of a node in a [`SearchTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    /// The state is terminal in the environment.
    ClosedTerminal,
    /// The state was already known; the node holds the stored value.
    ClosedTransposition,
    /// Every action below the node has been closed.
    ClosedComplete,
}

impl NodeStatus {
    pub fn is_open(self) -> bool {
        self == NodeStatus::Open
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Open => "open",
            NodeStatus::ClosedTerminal => "terminal",
            NodeStatus::ClosedTransposition => "transposition",
            NodeStatus::ClosedComplete => "complete",
        }
    }
}

/// One node of the search tree.
///
/// `w` accumulates the rewards credited along selected paths, `n_c` counts
/// the visits plain MCTS would have made (it drives UCT and the output
/// policy) and `n_p` counts the real selections through the node.
#[derive(Debug, Clone)]
pub struct SearchNode<S> {
    pub(crate) state: S,
    pub(crate) key: StateKey,
    pub(crate) parent: Option<(NodeId, usize)>,
    pub(crate) children: Vec<Option<NodeId>>,
    pub(crate) open: Vec<bool>,
    pub(crate) open_count: usize,
    pub(crate) w: f64,
    pub(crate) n_c: u64,
    pub(crate) n_p: u64,
    pub(crate) q_max: f64,
    pub(crate) status: NodeStatus,
    pub(crate) depth: usize,
}

impl<S> SearchNode<S> {
    pub(crate) fn new(state: S, key: StateKey, parent: Option<(NodeId, usize)>, depth: usize) -> Self {
        SearchNode {
            state,
            key,
            parent,
            children: Vec::new(),
            open: Vec::new(),
            open_count: 0,
            w: 0.0,
            n_c: 0,
            n_p: 0,
            q_max: f64::NEG_INFINITY,
            status: NodeStatus::Open,
            depth,
        }
    }

    /// Allocates child slots and marks every action as not completely explored.
    pub(crate) fn expand(&mut self, num_actions: usize) {
        self.children = vec![None; num_actions];
        self.open = vec![true; num_actions];
        self.open_count = num_actions;
    }

    /// Returns true if `action` was still open.
    pub(crate) fn close_action(&mut self, action: usize) -> bool {
        if std::mem::replace(&mut self.open[action], false) {
            self.open_count -= 1;
            true
        } else {
            false
        }
    }

    pub fn state(&self) -> &S {
        &self.state
    }

    pub fn key(&self) -> &StateKey {
        &self.key
    }

    pub fn parent(&self) -> Option<(NodeId, usize)> {
        self.parent
    }

    pub fn child(&self, action: usize) -> Option<NodeId> {
        self.children.get(action).copied().flatten()
    }

    /// Child slots in action order; empty until the node is expanded.
    pub fn children(&self) -> &[Option<NodeId>] {
        &self.children
    }

    pub fn is_action_open(&self, action: usize) -> bool {
        self.open.get(action).copied().unwrap_or(false)
    }

    pub fn open_actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.open
            .iter()
            .enumerate()
            .filter_map(|(a, &open)| open.then_some(a))
    }

    pub fn open_count(&self) -> usize {
        self.open_count
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn n_c(&self) -> u64 {
        self.n_c
    }

    pub fn n_p(&self) -> u64 {
        self.n_p
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    /// Mean value `w / n_c`, if the node has been counted at least once.
    pub fn mean(&self) -> Option<f64> {
        (self.n_c > 0).then(|| self.w / self.n_c as f64)
    }

    pub fn status(&self) -> NodeStatus {
        self.status
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Values of already known states, keyed by their full encoding.
#[derive(Debug, Clone, Default)]
pub struct TranspositionTable {
    entries: HashMap<StateKey, f64>,
}

impl TranspositionTable {
    pub fn get(&self, key: &StateKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn insert(&mut self, key: StateKey, value: f64) {
        self.entries.insert(key, value);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Node arena rooted at [`NodeId::ROOT`] plus the transposition table of one search.
#[derive(Debug, Clone)]
pub struct SearchTree<S> {
    nodes: Vec<SearchNode<S>>,
    pub(crate) table: TranspositionTable,
}

impl<S> SearchTree<S> {
    pub(crate) fn with_root(root: SearchNode<S>) -> Self {
        SearchTree {
            nodes: vec![root],
            table: TranspositionTable::default(),
        }
    }

    pub(crate) fn push(&mut self, node: SearchNode<S>) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("search tree exceeds u32 nodes"));
        self.nodes.push(node);
        id
    }

    pub fn root(&self) -> &SearchNode<S> {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &SearchNode<S>)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (NodeId(i as u32), n))
    }

    pub fn table(&self) -> &TranspositionTable {
        &self.table
    }
}

impl<S> Index<NodeId> for SearchTree<S> {
    type Output = SearchNode<S>;

    fn index(&self, id: NodeId) -> &SearchNode<S> {
        &self.nodes[id.index()]
    }
}

impl<S> IndexMut<NodeId> for SearchTree<S> {
    fn index_mut(&mut self, id: NodeId) -> &mut SearchNode<S> {
        &mut self.nodes[id.index()]
    }
}
