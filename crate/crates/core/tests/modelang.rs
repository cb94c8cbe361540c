mod common;

use common::{naive_match, regex_strategy, word_strategy};
use copter_core::modelang::{compile_dfa, parse_regex, regex_text, ModeDfa, Nfa};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn dfa_agrees_with_backtracking(r in regex_strategy(), w in word_strategy()) {
        let dfa = compile_dfa(&r);
        prop_assert_eq!(dfa.accepts(&w), naive_match(&r, &w));
    }

    #[test]
    fn nfa_agrees_with_backtracking(r in regex_strategy(), w in word_strategy()) {
        prop_assert_eq!(Nfa::thompson(&r).accepts(&w), naive_match(&r, &w));
    }

    #[test]
    fn minimization_preserves_language(r in regex_strategy(), ws in prop::collection::vec(word_strategy(), 20)) {
        let full = ModeDfa::from_nfa(&Nfa::thompson(&r));
        let min = full.minimize();
        prop_assert!(min.state_count() <= full.state_count());
        for w in &ws {
            prop_assert_eq!(full.accepts(w), min.accepts(w));
        }
    }

    #[test]
    fn printed_pattern_reparses_to_same_language(r in regex_strategy(), ws in prop::collection::vec(word_strategy(), 20)) {
        let text = regex_text(&r);
        let back = parse_regex(&text).unwrap();
        prop_assert_eq!(regex_text(&back), text);
        let (a, b) = (compile_dfa(&r), compile_dfa(&back));
        for w in &ws {
            prop_assert_eq!(a.accepts(w), b.accepts(w));
        }
    }

    #[test]
    fn dead_states_never_accept(r in regex_strategy(), w in word_strategy()) {
        let dfa = compile_dfa(&r);
        let mut q = dfa.start();
        let mut died = false;
        for &m in &w {
            q = dfa.step(q, m);
            died |= !dfa.is_live(q);
        }
        if died {
            prop_assert!(!dfa.accepts(&w));
        }
    }

    #[test]
    fn garbage_never_panics(s in "[wcbsdrm()|*+ x]{0,12}") {
        let _ = parse_regex(&s);
    }
}
