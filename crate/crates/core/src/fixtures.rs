//! Small named structures used throughout the tests and documentation.

use crate::multitree::MultiTree;
use crate::scalar::Codistance;
use crate::tree::FiniteTree;

fn build<D: Codistance>(
    t1: (&[&str], &[(&str, &str)]),
    t2: (&[&str], &[(&str, &str)]),
    entries: &[(&str, &str, u64)],
) -> MultiTree<D> {
    let trees = vec![
        FiniteTree::new(1, t1.0, t1.1).expect("fixture tree"),
        FiniteTree::new(2, t2.0, t2.1).expect("fixture tree"),
    ];
    MultiTree::from_fn(trees.clone(), |t| {
        let (x, y) = (trees[0].name(t[0]), trees[1].name(t[1]));
        let d = entries
            .iter()
            .find(|(a, b, _)| *a == x && *b == y)
            .expect("fixture table is total")
            .2;
        D::from_u64(d).expect("fixture value fits")
    })
    .expect("fixture shape")
}

/// `({a}, {p})` with `d*(a,p) = 0`.
pub fn base_ap() -> MultiTree {
    build((&["a"], &[]), (&["p"], &[]), &[("a", "p", 0)])
}

/// `({a,b}, {p})` with `d*(a,p) = 0`, `d*(b,p) = 1`.
pub fn fragment_a1() -> MultiTree {
    build((&["a", "b"], &[("a", "b")]), (&["p"], &[]), &[("a", "p", 0), ("b", "p", 1)])
}

/// The two-by-three fragment W: trees `a-b` and `q-p-r`.
pub fn fragment_w() -> MultiTree {
    build(
        (&["a", "b"], &[("a", "b")]),
        (&["p", "q", "r"], &[("p", "q"), ("p", "r")]),
        &[
            ("a", "p", 0),
            ("b", "p", 1),
            ("a", "q", 1),
            ("b", "q", 0),
            ("a", "r", 1),
            ("b", "r", 2),
        ],
    )
}

/// `A1` plus `q ~ p` by the fold rule: the smallest structure separating
/// the two readings of the double-raise axiom.
pub fn fragment_a1q() -> MultiTree {
    build(
        (&["a", "b"], &[("a", "b")]),
        (&["p", "q"], &[("p", "q")]),
        &[("a", "p", 0), ("b", "p", 1), ("a", "q", 1), ("b", "q", 0)],
    )
}
