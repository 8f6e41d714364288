//! Finite multiple-tree fragments.
//!
//! A multiple tree is an `n`-tuple of finite trees with a codistance table
//! on the product of their vertex sets. This crate validates such tables
//! against the four axioms of the class, builds members by elementary good
//! extensions, amalgamates extensions over a common base and grows bounded
//! stages of the limit structure.
//!
//! Every structure is generic over the unsigned integer type `D` storing
//! codistances; the aliases below fix the common choices.

pub mod amalgam;
pub mod document;
pub mod dot;
pub mod error;
pub mod extension;
pub mod fixtures;
pub mod generator;
pub mod geometry;
pub mod multitree;
pub mod scalar;
pub mod search;
pub mod tree;
pub mod validate;

pub use amalgam::{amalgamate, amalgamate_elementary, Amalgam, AmalgamCase, AmalgamError, Embedding};
pub use document::{parse_multitree, to_canonical_json, Document, DocumentError};
pub use error::StructureError;
pub use extension::{
    classify_extension, enumerate_extensions, extend_type1, extend_type2, good_filtration, replay,
    replay_all, ExtensionDescriptor, ExtensionError, ExtensionKind,
};
pub use generator::{base_structure, check_extension_property, generate, AuditReport, GenConfig, Generation};
pub use multitree::{CodistanceTable, MultiTree, Tuple};
pub use scalar::Codistance;
pub use tree::FiniteTree;
pub use validate::{is_member, validate, Axiom, ValidationConfig, ValidationReport, Verdict, Violation};

/// Tables stored in one byte per entry; enough for exhaustive small searches.
pub type CompactMultiTree = MultiTree<u8>;
/// The default storage.
pub type StandardMultiTree = MultiTree<u32>;
/// Tables stored in 64 bits, the widest supported codistance.
pub type WideMultiTree = MultiTree<u64>;
