//! Membership checker for the class of finite multiple-tree fragments.
//!
//! The four axioms are checked exhaustively and every violation is reported
//! with a certificate naming the tuple and the neighbors involved.

use serde::{Deserialize, Serialize};

use crate::multitree::MultiTree;
use crate::scalar::Codistance;

/// Switches for the two contested readings of the axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Check the double-raise axiom only at positive codistance.
    pub zero_guard: bool,
    /// Demand a tuple of codistance zero.
    pub require_zero_tuple: bool,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            zero_guard: true,
            require_zero_tuple: true,
        }
    }
}

impl ValidationConfig {
    pub fn unguarded() -> Self {
        ValidationConfig {
            zero_guard: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Structure,
    ZeroTuple,
    UnitStep,
    UniqueRaise,
    DoubleRaise,
}

impl Axiom {
    /// Axiom number, 0 for structural rejections.
    pub fn number(self) -> u8 {
        match self {
            Axiom::Structure => 0,
            Axiom::ZeroTuple => 1,
            Axiom::UnitStep => 2,
            Axiom::UniqueRaise => 3,
            Axiom::DoubleRaise => 4,
        }
    }
}

/// A single violation certificate. Tree indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The document does not describe n trees with a total table.
    Structural { reason: String },
    /// Axiom 1: no tuple has codistance zero.
    NoZeroTuple,
    /// Axiom 2: a neighbor move changed the codistance by something other
    /// than one.
    NotUnitStep {
        tuple: Vec<String>,
        tree: usize,
        neighbor: String,
        from: u64,
        to: u64,
    },
    /// Axiom 3: two or more raising neighbors at positive codistance.
    MultipleRaisers {
        tuple: Vec<String>,
        tree: usize,
        value: u64,
        neighbors: Vec<String>,
    },
    /// Axiom 4: raising in two coordinates separately but not jointly by two.
    DoubleRaise {
        tuple: Vec<String>,
        trees: [usize; 2],
        neighbors: [String; 2],
        value: u64,
        found: u64,
    },
}

impl Violation {
    pub fn axiom(&self) -> Axiom {
        match self {
            Violation::Structural { .. } => Axiom::Structure,
            Violation::NoZeroTuple => Axiom::ZeroTuple,
            Violation::NotUnitStep { .. } => Axiom::UnitStep,
            Violation::MultipleRaisers { .. } => Axiom::UniqueRaise,
            Violation::DoubleRaise { .. } => Axiom::DoubleRaise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub config: ValidationConfig,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>, config: ValidationConfig) -> Self {
        let verdict = if violations.is_empty() {
            Verdict::Accept
        } else {
            Verdict::Reject
        };
        ValidationReport {
            verdict,
            violations,
            config,
        }
    }

    pub fn structural(reason: impl Into<String>, config: ValidationConfig) -> Self {
        Self::from_violations(vec![Violation::Structural { reason: reason.into() }], config)
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom() == axiom).count()
    }
}

/// Checks every axiom on every tuple and reports all violations.
pub fn validate<D: Codistance>(a: &MultiTree<D>, config: ValidationConfig) -> ValidationReport {
    let mut out = Vec::new();
    visit_violations(a, config, &mut |v| {
        out.push(v);
        true
    });
    ValidationReport::from_violations(out, config)
}

/// Whether `a` satisfies the axioms; stops at the first violation.
pub fn is_member<D: Codistance>(a: &MultiTree<D>, config: ValidationConfig) -> bool {
    let mut ok = true;
    visit_violations(a, config, &mut |_| {
        ok = false;
        false
    });
    ok
}

/// Feeds violations to `sink` in canonical order until it returns `false`.
fn visit_violations<D: Codistance>(
    a: &MultiTree<D>,
    config: ValidationConfig,
    sink: &mut dyn FnMut(Violation) -> bool,
) {
    let n = a.n();
    if config.require_zero_tuple && !a.table().values().iter().any(|d| d.is_zero()) && !sink(Violation::NoZeroTuple) {
        return;
    }
    let mut probe = vec![0; n];
    let mut raisers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in a.tuples() {
        let here = a.at(&t);
        let up = here.raise();
        probe.copy_from_slice(&t);
        for slot in 0..n {
            raisers[slot].clear();
            for &y in a.tree(slot).neighbors(t[slot]) {
                probe[slot] = y;
                let there = a.at(&probe);
                if Some(there) == up {
                    raisers[slot].push(y);
                }
                // Each product edge is reported once, from its lower endpoint.
                if y > t[slot]
                    && there.as_u64().abs_diff(here.as_u64()) != 1
                    && !sink(Violation::NotUnitStep {
                        tuple: a.tuple_names(&t),
                        tree: slot + 1,
                        neighbor: a.tree(slot).name(y).to_string(),
                        from: here.as_u64(),
                        to: there.as_u64(),
                    })
                {
                    return;
                }
            }
            probe[slot] = t[slot];
            if !here.is_zero()
                && raisers[slot].len() > 1
                && !sink(Violation::MultipleRaisers {
                    tuple: a.tuple_names(&t),
                    tree: slot + 1,
                    value: here.as_u64(),
                    neighbors: raisers[slot].iter().map(|&y| a.tree(slot).name(y).to_string()).collect(),
                })
            {
                return;
            }
        }
        if config.zero_guard && here.is_zero() {
            continue;
        }
        let Some(up2) = up.and_then(|u| u.raise()) else {
            continue;
        };
        for i in 0..n {
            for j in (i + 1)..n {
                for &yi in &raisers[i] {
                    for &yj in &raisers[j] {
                        probe[i] = yi;
                        probe[j] = yj;
                        let found = a.at(&probe);
                        probe[i] = t[i];
                        probe[j] = t[j];
                        if found != up2
                            && !sink(Violation::DoubleRaise {
                                tuple: a.tuple_names(&t),
                                trees: [i + 1, j + 1],
                                neighbors: [
                                    a.tree(i).name(yi).to_string(),
                                    a.tree(j).name(yj).to_string(),
                                ],
                                value: here.as_u64(),
                                found: found.as_u64(),
                            })
                        {
                            return;
                        }
                    }
                }
            }
        }
    }
}
