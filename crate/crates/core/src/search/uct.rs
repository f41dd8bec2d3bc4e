use super::tree::SearchNode;
use super::Variant;
use crate::error::{Error, Result};

/// UCT score `q + c * sqrt(ln(n_parent) / n_child)`.
///
/// Unvisited children score `+inf` so they are always tried first.
pub fn uct_score(q: f64, n_child: u64, n_parent: u64, c: f64) -> f64 {
    if n_child == 0 {
        return f64::INFINITY;
    }
    let ln_parent = (n_parent.max(1) as f64).ln();
    q + c * (ln_parent / n_child as f64).sqrt()
}

/// Value estimate of a node: the mean `w / n_c`, or the running maximum for
/// [`Variant::AmExMax`].
pub fn node_q<S>(node: &SearchNode<S>, variant: Variant) -> Result<f64> {
    match variant {
        Variant::Classical | Variant::AmEx => node
            .mean()
            .ok_or_else(|| Error::PreconditionViolation("Q of a node with n_c = 0".into())),
        Variant::AmExMax => {
            if node.q_max == f64::NEG_INFINITY {
                Err(Error::PreconditionViolation(
                    "Q_max of a node that received no backup".into(),
                ))
            } else {
                Ok(node.q_max)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::StateKey;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn zero_exploration_when_parent_visited_once() {
        assert_eq!(uct_score(1.0, 1, 1, SQRT2), 1.0);
    }

    #[test]
    fn matches_direct_evaluation() {
        // 0.5 + sqrt(2) * sqrt(ln 2)
        let expected = 0.5 + SQRT2 * 2f64.ln().sqrt();
        assert!((expected - 1.677_410).abs() < 1e-6);
        assert!((uct_score(0.5, 1, 2, SQRT2) - expected).abs() < 1e-15);
    }

    #[test]
    fn unvisited_child_is_infinite() {
        assert_eq!(uct_score(-3.0, 0, 7, SQRT2), f64::INFINITY);
        assert_eq!(uct_score(123.0, 0, 1, 0.1), f64::INFINITY);
    }

    #[test]
    fn node_q_by_variant() {
        let mut node = SearchNode::new((), StateKey::new(vec![]), None, 0);
        assert!(node_q(&node, Variant::AmEx).is_err());
        assert!(node_q(&node, Variant::AmExMax).is_err());
        node.w = 2.52;
        node.n_c = 4;
        assert!((node_q(&node, Variant::AmEx).unwrap() - 0.63).abs() < 1e-15);
        for r in [0.1, 0.9, 0.4] {
            node.q_max = node.q_max.max(r);
        }
        assert_eq!(node_q(&node, Variant::AmExMax).unwrap(), 0.9);
    }
}
