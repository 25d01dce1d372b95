use std::path::Path;

use proptest::prelude::*;
use skeletal::mechfile::{parse_mechanism, same_content, write_mechanism, ParseError};
use skeletal_core::{ReactionKind, SourceTag};

fn corpus(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../mechanisms").join(name);
    std::fs::read_to_string(path).unwrap()
}

/// Elements and species of the hydrogen mechanism, ending just before the
/// reaction section.
fn preamble() -> String {
    let text = corpus("h2o2.mech");
    let cut = text.find("REACTIONS").unwrap();
    text[..cut].to_string()
}

/// `preamble` plus a reaction section; returns the text and the line number
/// of the first reaction.
fn with_reactions(reactions: &[&str]) -> (String, usize) {
    let pre = preamble();
    let first = pre.lines().count() + 2;
    let mut text = pre;
    text.push_str("REACTIONS\n");
    for r in reactions {
        text.push_str(r);
        text.push('\n');
    }
    text.push_str("END\n");
    (text, first)
}

#[test]
fn corpus_mechanisms_parse() {
    let h2 = parse_mechanism(&corpus("h2o2.mech")).unwrap();
    assert_eq!((h2.n_species(), h2.n_reactions(), h2.n_eq()), (9, 56, 10));
    let gri = parse_mechanism(&corpus("gri30.mech")).unwrap();
    assert_eq!(gri.n_species(), 53);
    assert!(gri.n_reactions() >= 300);
    assert!(gri.reactions().iter().any(|r| matches!(r.kind, ReactionKind::Falloff { .. })));
}

#[test]
fn reversible_reactions_expand_to_tagged_pairs() {
    let (text, _) = with_reactions(&[
        "H2 + O <=> H + OH | 38.7 2.7 26191840 | elementary",
        "2H + M => H2 + M | 1e12 -1 0 | three-body H2O=6   # shorthand coefficient",
        "H + OH (+M) <=> H2O (+M) | 1e10 0 0 | falloff low=1e16,-2,0 H2=2",
    ]);
    let m = parse_mechanism(&text).unwrap();
    let tags: Vec<SourceTag> = m.reactions().iter().map(|r| r.source_tag).collect();
    assert_eq!(
        tags,
        [
            SourceTag::Forward(1),
            SourceTag::Reverse(1),
            SourceTag::Irreversible(2),
            SourceTag::Forward(3),
            SourceTag::Reverse(3)
        ]
    );
    let h = m.species_index("H").unwrap();
    assert_eq!(m.reactions()[2].reactants.get(&h), Some(&2));
    assert!(m.reactions()[1].equilibrium_reverse && !m.reactions()[0].equilibrium_reverse);
    assert_eq!(m.reactions()[3].efficiencies.len(), 1);
}

/// Each invalid reaction line with the error it must produce.
#[test]
fn invalid_reactions_report_their_line() {
    type Check = fn(&ParseError) -> bool;
    let cases: &[(&str, Check)] = &[
        ("H2 + X <=> H + OH | 1 0 0 | elementary", |e| {
            matches!(e, ParseError::UnknownSpecies { name, .. } if name == "X")
        }),
        ("H2 + O => H2O + H | 1 0 0 | elementary", |e| {
            matches!(e, ParseError::Unbalanced { element, reaction: 2, .. } if element == "H")
        }),
        ("H + OH (+M) <=> H2O (+M) | 1 0 0 | troe", |e| matches!(e, ParseError::UnsupportedKind { .. })),
        ("H + OH (+M) <=> H2O (+M) | 1 0 0 | falloff low=1,0,0 troe=0.5", |e| {
            matches!(e, ParseError::UnsupportedKind { .. })
        }),
        ("H2 + O = H + OH | 1 0 0 | elementary", |e| matches!(e, ParseError::Syntax { .. })),
        ("H2 + O <=> H + OH | 1 0 | elementary", |e| matches!(e, ParseError::Syntax { .. })),
        ("H2 + O <=> H + OH | 1 0 inf | elementary", |e| matches!(e, ParseError::Syntax { .. })),
        ("H2 + O <=> H + OH | 1 0 0", |e| matches!(e, ParseError::Syntax { .. })),
        ("2 H <=> H2 | 1 0 0 | three-body", |e| matches!(e, ParseError::Syntax { .. })),
        ("H + OH (+M) <=> H2O (+M) | 1 0 0 | falloff", |e| matches!(e, ParseError::Syntax { .. })),
        ("2 H + M <=> H2 + M | 1 0 0 | elementary", |e| matches!(e, ParseError::Syntax { .. })),
        ("2 H + M <=> H2 + M | 1 0 0 | three-body Q=2", |e| matches!(e, ParseError::UnknownSpecies { .. })),
        ("2 H + M <=> H2 + M | 1 0 0 | three-body H2=2 H2=3", |e| matches!(e, ParseError::Syntax { .. })),
        ("0 H2 + O <=> H + OH | 1 0 0 | elementary", |e| matches!(e, ParseError::Syntax { .. })),
        ("H2 + O <=> H + OH | 1 0 0 | plog", |e| matches!(e, ParseError::UnsupportedKind { .. })),
        ("H2 + O <=> H + OH | 1 0 0 | magic", |e| matches!(e, ParseError::Syntax { .. })),
    ];
    for (bad, check) in cases {
        let (text, first) = with_reactions(&["H2 + O <=> H + OH | 38.7 2.7 26191840 | elementary", bad]);
        let err = parse_mechanism(&text).expect_err(bad);
        assert!(check(&err), "{bad}: {err}");
        assert_eq!(err.line(), first + 1, "{bad}: {err}");
    }
}

#[test]
fn invalid_headers_and_species_are_rejected() {
    let (good, _) = with_reactions(&["H2 + O <=> H + OH | 38.7 2.7 26191840 | elementary"]);
    parse_mechanism(&good).unwrap();
    let h2_line = good.lines().position(|l| l.trim_start().starts_with("H2 weight")).unwrap() + 1;
    let mutations: Vec<(String, Option<usize>)> = vec![
        // weight far from the element sum
        (good.replacen("H2 weight=2.01600", "H2 weight=3.0", 1), Some(h2_line)),
        // element not declared
        (good.replacen("  O H N\n", "  O H\n", 1), None),
        // duplicate species name
        (good.replacen("  H weight=1.00800", "  H2 weight=1.00800", 1), None),
        // six coefficients
        (good.replacen("    low   2.34433112E+00 ", "    low ", 1), Some(h2_line + 1)),
        // high before low
        (good.replacen("    low   2.34433112E+00", "    hgh   2.34433112E+00", 1), Some(h2_line + 1)),
        // missing temps
        (good.replacen(" temps=200,1000,3500", "", 1), Some(h2_line)),
        // unknown key
        (good.replacen("H2 weight=2.01600", "H2 weight=2.01600 phase=gas", 1), Some(h2_line)),
        // sections out of order
        (good.replacen("ELEMENTS", "SPECIES", 1), None),
        // missing END
        (good.trim_end().trim_end_matches("END").to_string(), None),
        // no sections at all
        (String::from("# nothing\n"), None),
    ];
    for (i, (text, line)) in mutations.iter().enumerate() {
        let err = parse_mechanism(text).expect_err(&format!("mutation {i}"));
        if let Some(line) = line {
            assert_eq!(err.line(), *line, "mutation {i}: {err}");
        }
    }
}

#[test]
fn corpus_round_trips_through_the_writer() {
    for name in ["h2o2.mech", "gri30.mech"] {
        let m = parse_mechanism(&corpus(name)).unwrap();
        let text = write_mechanism(&m, "round trip\nsecond line").unwrap();
        let again = parse_mechanism(&text).unwrap();
        assert!(same_content(&m, &again), "{name}");
        assert_eq!(write_mechanism(&again, "round trip\nsecond line").unwrap(), text, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_parameters_round_trip_exactly(
        a in 1e-3f64..1e20,
        b in -3.0f64..3.0,
        ea in -1e7f64..1e9,
        low_a in 1e5f64..1e25,
        reversible in any::<bool>(),
    ) {
        let arrow = if reversible { "<=>" } else { "=>" };
        let l1 = format!("H2 + O {arrow} H + OH | {a} {b} {ea} | elementary");
        let l2 = format!("H + OH (+M) {arrow} H2O (+M) | {a:e} {b:e} {ea:e} | falloff low={low_a},{b},{ea} H2O=6.5");
        let (text, _) = with_reactions(&[&l1, &l2]);
        let m = parse_mechanism(&text).unwrap();
        let r = &m.reactions()[0];
        prop_assert_eq!((r.arrhenius.a, r.arrhenius.b, r.arrhenius.ea), (a, b, ea));
        let again = parse_mechanism(&write_mechanism(&m, "").unwrap()).unwrap();
        prop_assert!(same_content(&m, &again));
    }
}
