//! Graphviz export: one cluster per tree.

use std::fmt::Write as _;

use crate::error::StructureError;
use crate::multitree::MultiTree;
use crate::scalar::Codistance;

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text for `a`. With a profile base, every vertex `v` of tree `j` is
/// labeled `v:d` where `d` is the codistance of the base with slot `j`
/// replaced by `v`.
pub fn export_dot<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    profile_base: Option<&[S]>,
) -> Result<String, StructureError> {
    let base = profile_base.map(|b| a.tuple(b)).transpose()?;
    let mut out = String::from("graph multitree {\n");
    for (slot, t) in a.trees().iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{} {{", slot + 1);
        let _ = writeln!(out, "    label=\"tree {}\";", slot + 1);
        for v in 0..t.len() {
            match &base {
                Some(b) => {
                    let d = a.substituted(b, &[(slot, v)])?;
                    let _ = writeln!(
                        out,
                        "    {} [label={}];",
                        quoted(t.name(v)),
                        quoted(&format!("{}:{}", t.name(v), d))
                    );
                }
                None => {
                    let _ = writeln!(out, "    {};", quoted(t.name(v)));
                }
            }
        }
        for (u, v) in t.edges() {
            let _ = writeln!(out, "    {} -- {};", quoted(t.name(u)), quoted(t.name(v)));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn labels_under_a_profile() {
        let dot = export_dot(&fixtures::fragment_w(), Some(&["a", "p"])).unwrap();
        for label in ["a:0", "b:1", "p:0", "q:1", "r:1"] {
            assert!(dot.contains(&format!("label=\"{label}\"")), "{label}");
        }
        assert!(export_dot(&fixtures::fragment_w(), Some(&["a", "zz"])).is_err());
    }

    #[test]
    fn unlabeled_counts() {
        let dot = export_dot::<u32, &str>(&fixtures::fragment_w(), None).unwrap();
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert_eq!(dot.matches(" -- ").count(), 3);
        assert_eq!(dot.matches("];").count(), 0);
    }
}
