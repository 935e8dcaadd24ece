use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use screenparse::parse_format::{
    char_length, deserialize, serialize, to_pretty, NodeIndex, ParseError,
};
use screenparse::synth::random_tree;
use screenparse::ParseNode;

fn tree_from_seed(seed: u64, max_nodes: usize) -> ParseNode {
    random_tree(&mut ChaCha8Rng::seed_from_u64(seed), max_nodes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn roundtrip(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 60);
        let s = serialize(&t);
        prop_assert_eq!(deserialize(&s).unwrap(), t);
    }

    #[test]
    fn char_length_is_serialized_length(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 60);
        prop_assert_eq!(char_length(&t), serialize(&t).chars().count());
        let index = NodeIndex::build(&t);
        for n in &index.nodes {
            prop_assert_eq!(n.char_len, serialize(n.node).chars().count());
        }
    }

    #[test]
    fn text_escaping_is_injective(a in "\\PC{1,12}", b in "\\PC{1,12}") {
        let (sa, sb) = (serialize(&ParseNode::text(a.clone())), serialize(&ParseNode::text(b.clone())));
        prop_assert_eq!(a == b, sa == sb);
        let back = deserialize(&sa).unwrap();
        prop_assert_eq!(back.as_text(), Some(a.as_str()));
    }

    #[test]
    fn group_is_longer_than_its_children(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 30);
        if !t.is_leaf() {
            let kids: usize = t.children().iter().map(char_length).sum();
            prop_assert_eq!(char_length(&t), kids + 2 + (t.children().len() - 1));
        }
    }

    #[test]
    fn pretty_form_parses_back(seed in any::<u64>()) {
        let t = tree_from_seed(seed, 40);
        prop_assert_eq!(deserialize(&to_pretty(&t)).unwrap(), t);
    }

    #[test]
    fn garbage_never_panics(s in "[<> a-c\\\\=x0-9]{0,24}") {
        if let Ok(t) = deserialize(&s) {
            prop_assert!(t.validate().is_ok());
        }
    }
}

#[test]
fn toy_examples() {
    assert_eq!(serialize(&ParseNode::text("Submit")), "<Submit>");
    assert_eq!(
        serialize(&ParseNode::image(Some("py_logo"), Some("Python"))),
        "<img_src=py_logo img_alt=Python>"
    );
    assert_eq!(
        serialize(&ParseNode::group(vec![ParseNode::text("a<b")])),
        r"<<a\<b>>"
    );
    assert_eq!(
        deserialize("<<a> <b>>").unwrap(),
        ParseNode::group(vec![ParseNode::text("a"), ParseNode::text("b")])
    );
    assert_eq!(char_length(&ParseNode::text("ab")), 4);
    assert_eq!(
        char_length(&ParseNode::group(vec![
            ParseNode::text("a"),
            ParseNode::text("b")
        ])),
        9
    );
}

#[test]
fn error_offsets() {
    assert!(matches!(
        deserialize("<<a>"),
        Err(ParseError::UnbalancedBrackets { .. })
    ));
    assert_eq!(deserialize("<<a>").unwrap_err().offset(), 4);
    assert!(matches!(
        deserialize("<a> <b>"),
        Err(ParseError::UnbalancedBrackets { .. })
    ));
    assert!(matches!(
        deserialize("<>"),
        Err(ParseError::EmptyNode { .. })
    ));
    assert!(matches!(
        deserialize(r"<a\q>"),
        Err(ParseError::BadEscape { .. })
    ));
}

#[test]
fn sibling_whitespace_is_normalized() {
    let canonical = deserialize("<<a> <b>>").unwrap();
    assert_eq!(deserialize("<<a>\n   <b>>").unwrap(), canonical);
    assert_eq!(deserialize("  <<a> <b>>\n").unwrap(), canonical);
}

#[test]
fn image_values_with_spaces() {
    let t = ParseNode::image(Some("logo"), Some("Thunderhawk Sports & Fitness"));
    let s = serialize(&t);
    assert_eq!(s, "<img_src=logo img_alt=Thunderhawk Sports & Fitness>");
    assert_eq!(deserialize(&s).unwrap(), t);
}

#[test]
fn nbsp_uses_hex_escape() {
    let t = ParseNode::text("a\u{a0}b");
    assert_eq!(serialize(&t), r"<a\xa0b>");
    assert_eq!(deserialize(r"<a\xa0b>").unwrap(), t);
}
