//! The condenser is checked against a naive rewrite system: build the whole DOM as a mutable
//! tree, then apply the pruning and collapsing rules anywhere until nothing changes.

use std::path::PathBuf;

use image::RgbImage;
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use screenparse::condense::{condense, image_stub, normalize_text};
use screenparse::parse_format::{serialize, NodeContent};
use screenparse::snapshot::{load_snapshot_dir, DomRecord, PageSnapshot};
use screenparse::synth::{random_page, SynthConfig};
use screenparse::{NodeId, ParseNode};

#[derive(Debug, Clone)]
struct Naive {
    id: NodeId,
    payload: Vec<ParseNode>,
    children: Vec<Naive>,
}

fn own_payload(r: &DomRecord) -> Vec<ParseNode> {
    let mut out = Vec::new();
    if !r.visible {
        return out;
    }
    let id = NodeId(r.id);
    if let Some(t) = r.text.as_deref().map(normalize_text) {
        if !t.is_empty() && !t.chars().all(char::is_whitespace) {
            out.push(ParseNode::text(t).with_source(id));
        }
    }
    let src = r.img_src.as_deref().and_then(image_stub);
    let alt = r
        .img_alt
        .as_deref()
        .map(normalize_text)
        .filter(|a| !a.is_empty() && !a.chars().all(char::is_whitespace));
    if src.is_some() || alt.is_some() {
        out.push(ParseNode {
            content: NodeContent::Image { src, alt },
            source_id: Some(id),
        });
    }
    out
}

fn build(records: &[DomRecord], id: u32) -> Naive {
    let r = records.iter().find(|r| r.id == id).unwrap();
    Naive {
        id: NodeId(id),
        payload: own_payload(r),
        children: r.children.iter().map(|&c| build(records, c)).collect(),
    }
}

fn has_payload(n: &Naive) -> bool {
    !n.payload.is_empty() || n.children.iter().any(has_payload)
}

/// One rewrite somewhere in the tree; returns whether anything changed.
fn rewrite(n: &mut Naive) -> bool {
    let before = n.children.len();
    n.children.retain(has_payload);
    if n.children.len() != before {
        return true;
    }
    for c in &mut n.children {
        if c.payload.is_empty() && c.children.len() == 1 {
            *c = c.children.pop().unwrap();
            return true;
        }
    }
    n.children.iter_mut().any(rewrite)
}

fn to_parse(n: Naive) -> ParseNode {
    if n.payload.len() == 1 && n.children.is_empty() {
        return n.payload.into_iter().next().unwrap();
    }
    let mut items = n.payload;
    items.extend(n.children.into_iter().map(to_parse));
    ParseNode::group(items).with_source(n.id)
}

fn oracle(records: &[DomRecord], root: u32) -> Option<ParseNode> {
    let mut tree = build(records, root);
    if !has_payload(&tree) {
        return None;
    }
    loop {
        if tree.payload.is_empty() && tree.children.len() == 1 {
            tree = tree.children.pop().unwrap();
            continue;
        }
        if !rewrite(&mut tree) {
            break;
        }
    }
    Some(to_parse(tree))
}

/// Arbitrary DOM forests, including hidden subtrees, blank text and odd image sources.
fn random_dom(seed: u64) -> (Vec<DomRecord>, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..40u32);
    let mut records: Vec<DomRecord> = (0..n)
        .map(|id| DomRecord {
            id,
            tag: "div".into(),
            children: Vec::new(),
            visible: rng.random_bool(0.8),
            bbox: [
                rng.random_range(0.0..150.0),
                rng.random_range(0.0..150.0),
                20.0,
                10.0,
            ],
            text: match rng.random_range(0..6) {
                0 | 1 => Some(format!("t{id}")),
                2 => Some(" \n\t ".into()),
                3 => Some(format!("  a\u{a0}b {id}\n")),
                _ => None,
            },
            img_src: match rng.random_range(0..8) {
                0 => Some(format!("/img/p{id}.png?x=1")),
                1 => Some("data:image/png;base64,AA".into()),
                _ => None,
            },
            img_alt: rng.random_bool(0.1).then(|| format!("alt {id}")),
        })
        .collect();
    // Random parent for every node but the root, chosen among earlier nodes.
    for id in 1..n {
        let parent = rng.random_range(0..id) as usize;
        records[parent].children.push(id);
    }
    records.shuffle(&mut rng);
    (records, 0)
}

fn snapshot(records: Vec<DomRecord>) -> PageSnapshot {
    PageSnapshot::new("p", "u", RgbImage::new(200, 200), records).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_rewrite_oracle(seed in any::<u64>()) {
        let (records, root) = random_dom(seed);
        let expected = oracle(&records, root);
        let got = condense(&snapshot(records)).ok().map(|(t, _)| t);
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn every_leaf_has_an_in_bounds_region(seed in any::<u64>()) {
        let (records, _) = random_dom(seed);
        if let Ok((tree, regions)) = condense(&snapshot(records)) {
            for leaf in tree.leaves() {
                let b = regions.get(leaf.source_id.unwrap()).expect("leaf region");
                prop_assert!(b.fits_within(200, 200));
            }
        }
    }

    #[test]
    fn condensing_a_condensed_page_changes_nothing(seed in 0u64..5000) {
        // Rebuild a DOM that mirrors the condensed tree and condense it again.
        let config = SynthConfig { paint: false, ..SynthConfig::default() };
        let page = random_page("p", seed, &config);
        let Ok((tree, regions)) = condense(&page) else { return Ok(()) };
        let mut records = Vec::new();
        mirror(&tree, &regions, &mut records);
        let again = condense(&PageSnapshot::new("p", "u", page.screenshot.clone(), records).unwrap()).unwrap().0;
        prop_assert_eq!(serialize(&again), serialize(&tree));
    }

    #[test]
    fn synthetic_pages_match_oracle(seed in 0u64..5000) {
        let config = SynthConfig { paint: false, ..SynthConfig::default() };
        let page = random_page("p", seed, &config);
        let records = page.to_records();
        let root = records[page.root()].id;
        let expected = oracle(&records, root);
        prop_assert_eq!(condense(&page).ok().map(|(t, _)| t), expected);
    }
}

fn mirror(node: &ParseNode, regions: &screenparse::RegionMap, out: &mut Vec<DomRecord>) -> u32 {
    let id = out.len() as u32;
    let bbox = regions
        .get(node.source_id.unwrap())
        .or_else(|| regions.leaf_union(node))
        .map(|b| {
            [
                f64::from(b.x),
                f64::from(b.y),
                f64::from(b.w.max(1)),
                f64::from(b.h.max(1)),
            ]
        })
        .unwrap();
    out.push(DomRecord {
        id,
        tag: "div".into(),
        children: Vec::new(),
        visible: true,
        bbox,
        text: None,
        img_src: None,
        img_alt: None,
    });
    match &node.content {
        NodeContent::Text(t) => out[id as usize].text = Some(t.clone()),
        NodeContent::Image { src, alt } => {
            out[id as usize].img_src = src.clone();
            out[id as usize].img_alt = alt.clone();
        }
        NodeContent::Group(children) => {
            let ids: Vec<u32> = children.iter().map(|c| mirror(c, regions, out)).collect();
            out[id as usize].children = ids;
        }
    }
    id
}

#[test]
fn toy_page_golden() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/snapshots/toy_page");
    let loaded = load_snapshot_dir(&dir).unwrap();
    let (tree, regions) = condense(&loaded.snapshot).unwrap();
    assert_eq!(
        serialize(&tree),
        "<<<Python> <img_src=py_logo img_alt=Python>> <<C++> <img_src=cpp_logo img_alt=C++>> \
         <<Java> <img_src=java_logo img_alt=Java>> <Submit>>"
    );
    for leaf in tree.leaves() {
        assert!(regions.get(leaf.source_id.unwrap()).is_some());
    }
}
