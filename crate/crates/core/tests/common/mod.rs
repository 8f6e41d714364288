#![allow(dead_code)]

use multitree::extension::{enumerate_extensions, replay, ExtensionDescriptor};
use multitree::{base_structure, MultiTree};

/// Replays a sequence of extension choices from the base, picking
/// `choices[i] % (number of available descriptors)` at step `i`.
pub fn grow(n: usize, choices: &[u32]) -> (Vec<MultiTree>, Vec<ExtensionDescriptor>) {
    let mut cur: MultiTree = base_structure(n).expect("positive n");
    let mut stages = vec![cur.clone()];
    let mut descs = Vec::new();
    for &c in choices {
        let all = enumerate_extensions(&cur);
        let d = all[c as usize % all.len()].clone();
        cur = replay(&cur, &d).expect("enumerated descriptors replay");
        stages.push(cur.clone());
        descs.push(d);
    }
    (stages, descs)
}

/// Applies further choices to `start`, suffixing new vertex names so that
/// two independent extensions of the same base never share a fresh name.
pub fn grow_from(start: &MultiTree, choices: &[u32], suffix: &str) -> MultiTree {
    let mut cur = start.clone();
    for &c in choices {
        let all = enumerate_extensions(&cur);
        let d = all[c as usize % all.len()].clone();
        let d = d.renamed(format!("{}{suffix}", d.new_vertex));
        cur = replay(&cur, &d).expect("enumerated descriptors replay");
    }
    cur
}

/// Checks every product edge directly: neighbors differ by exactly one.
pub fn unit_steps_hold(a: &MultiTree) -> bool {
    a.tuples().all(|t| {
        (0..a.n()).all(|k| {
            a.tree(k).neighbors(t[k]).iter().all(|&y| {
                let mut s = t.clone();
                s[k] = y;
                a.at(&s).abs_diff(a.at(&t)) == 1
            })
        })
    })
}

/// Double raise at positive codistance lands exactly two higher.
pub fn double_raise_holds(a: &MultiTree) -> bool {
    a.tuples().filter(|t| a.at(t) > 0).all(|t| {
        let k = a.at(&t);
        (0..a.n()).all(|i| {
            (0..a.n()).filter(|&j| j != i).all(|j| {
                a.raising_neighbors(&t, i).iter().all(|&yi| {
                    a.raising_neighbors(&t, j).iter().all(|&yj| {
                        let mut s = t.clone();
                        s[i] = yi;
                        s[j] = yj;
                        a.at(&s) == k + 2
                    })
                })
            })
        })
    })
}

/// Every tuple sandwiched coordinatewise between a geodesic pair has a
/// codistance between theirs. Returns the number of triples checked.
pub fn geodesic_sandwich(a: &MultiTree) -> Result<usize, String> {
    let all: Vec<Vec<usize>> = a.tuples().collect();
    let mut checked = 0;
    for x in &all {
        for y in &all {
            if !a.is_geodesic(x, y) {
                continue;
            }
            let paths: Vec<Vec<usize>> = (0..a.n()).map(|j| a.tree(j).path(y[j], x[j])).collect();
            let sizes: Vec<usize> = paths.iter().map(Vec::len).collect();
            for pick in multitree::multitree::TupleIter::new(&sizes) {
                let z: Vec<usize> = pick.iter().enumerate().map(|(j, &c)| paths[j][c]).collect();
                checked += 1;
                let dz = a.at(&z);
                if dz < a.at(y) || dz > a.at(x) {
                    return Err(format!(
                        "x={:?} y={:?} z={:?}",
                        a.tuple_names(x),
                        a.tuple_names(y),
                        a.tuple_names(&z)
                    ));
                }
            }
        }
    }
    Ok(checked)
}
