use chorex_core::projection::{project_program, ProjectionError};
use chorex_core::testgen::{generate, GenParams};
use chorex_core::{amend, parse_choreography, parse_network, Program};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GenParams> {
    (2usize..7, 0usize..30, 0usize..5, 0usize..4, any::<u64>())
        .prop_map(|(p, a, c, d, seed)| GenParams::new(p, a, c, d).seed(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn choreography_print_parse(p in params()) {
        let Ok(c) = generate(&p) else { return Ok(()) };
        let text = c.to_string();
        prop_assert_eq!(parse_choreography(&text).unwrap(), Program::single(c));
    }

    #[test]
    fn network_print_parse(p in params()) {
        let Ok(c) = generate(&p) else { return Ok(()) };
        let n = match project_program(&Program::single(amend(&c))) {
            Ok(n) => n,
            Err(ProjectionError::NoProcesses) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let text = n.to_string();
        prop_assert_eq!(parse_network(&text).unwrap(), n);
    }
}

#[test]
fn parallel_program_round_trips() {
    let text = "def X1 { p.*->q; X1 } main { X1 } || def X2 { r.*->s; X2 } main { X2 }";
    let p = parse_choreography(text).unwrap();
    assert_eq!(p.components.len(), 2);
    assert_eq!(p.to_string(), text);
}
