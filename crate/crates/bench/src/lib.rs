//! Fixtures shared by the benchmarks.

use chorex_core::testgen::{generate, GenParams};
use chorex_core::{amend, project, Choreography, Network};

/// An amended generated choreography and its projection.
pub fn fixture(p: GenParams) -> (Choreography, Network) {
    let c = amend(&generate(&p).expect("feasible parameters"));
    let n = project(&c).expect("amended choreographies project");
    (c, n)
}
