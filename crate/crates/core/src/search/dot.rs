use std::collections::VecDeque;
use std::fmt::Write;

use super::tree::{NodeId, SearchTree};
use super::uct::node_q;
use super::Variant;
use crate::env::Environment;

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of a search tree.
///
/// Nodes are emitted breadth-first from the root with children in action
/// order and labelled `key|Q|N_c|N_p|status`; closed nodes are filled grey
/// and edges carry the action index.
pub fn to_dot<E: Environment>(tree: &SearchTree<E::State>, env: &E, variant: Variant) -> String {
    let mut out = String::from("digraph search_tree {\n  node [shape=box, fontname=\"monospace\"];\n");
    let mut queue = VecDeque::from([NodeId::ROOT]);
    let mut edges = Vec::new();
    while let Some(id) = queue.pop_front() {
        let node = &tree[id];
        let q = node_q(node, variant)
            .map(|q| format!("{q:.6}"))
            .unwrap_or_else(|_| "-".into());
        let label = format!(
            "{}|{}|{}|{}|{}",
            env.describe(node.state()),
            q,
            node.n_c(),
            node.n_p(),
            node.status().as_str()
        );
        let style = if node.status().is_open() {
            ""
        } else {
            ", style=filled, fillcolor=lightgrey"
        };
        let _ = writeln!(out, "  n{} [label=\"{}\"{}];", id.index(), escape(&label), style);
        for (action, child) in node.children().iter().enumerate() {
            if let Some(child) = child {
                edges.push((id, *child, action));
                queue.push_back(*child);
            }
        }
    }
    for (from, to, action) in edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            from.index(),
            to.index(),
            action
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Chain;
    use crate::search::{Search, SearchConfig};

    #[test]
    fn renders_every_node_and_edge() {
        let env = Chain::with_fixed_action(2, 1);
        let mut search =
            Search::new(&env, env.initial(), SearchConfig::new(Variant::AmEx, 50)).unwrap();
        search.run().unwrap();
        let dot = to_dot(search.tree(), &env, Variant::AmEx);
        assert!(dot.starts_with("digraph search_tree {"));
        assert_eq!(dot.matches("[label=\"p").count(), search.tree().len());
        assert_eq!(dot.matches(" -> ").count(), search.tree().len() - 1);
        // Fully explored: every node is closed.
        assert_eq!(dot.matches("fillcolor=lightgrey").count(), search.tree().len());
        assert!(dot.contains("n0 [label=\"p0|"));
        assert!(dot.contains("|complete\""));
    }

    #[test]
    fn output_is_deterministic() {
        let env = Chain::with_fixed_action(6, 0);
        let render = || {
            let mut s = Search::new(
                &env,
                env.initial(),
                SearchConfig::new(Variant::Classical, 30).with_seed(5),
            )
            .unwrap();
            s.run().unwrap();
            to_dot(s.tree(), &env, Variant::Classical)
        };
        assert_eq!(render(), render());
    }
}
