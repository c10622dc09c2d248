//! Choreography extraction: recovering a global choreography from a network
//! of communicating processes by building a symbolic execution graph.

pub mod equivalence;
pub mod extraction;
pub mod projection;
pub mod semantics;
pub mod syntax;
pub mod testgen;

pub use equivalence::{bisimilar, simulates, SimVerdict};
pub use extraction::{
    extract, extract_detailed, ExtractOptions, Extraction, ExtractionFailure, FailureKind, Seg, Stats, Strategy,
};
pub use projection::{amend, merge, project, project_onto, MergeError, ProjectionError};
pub use semantics::{Action, Branch, Marking, TransitionLabel, Violation, ViolationKind};
pub use syntax::{
    parse_choreography, parse_network, print_choreography, print_network, Behaviour, Choreography, ChoreographyBody,
    Expression, Label, Network, ParseError, ProcedureName, ProcessName, ProcessTerm, Program, SyntaxError,
    ValidationError,
};
