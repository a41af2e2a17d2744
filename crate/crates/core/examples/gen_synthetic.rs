//! Generates the synthetic separation fixture.
//!
//! Topic documents repeat many topic-specific "decoy" terms in the root
//! nodes of their independent claims, while the terms they share with their
//! relevant documents occur once each, deep inside dependent claims. Decoys
//! also fill a set of distractor documents.
//!
//! Usage: cargo run --example gen_synthetic -- <output dir>

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const TOPICS: usize = 10;
const RELEVANT_PER_TOPIC: usize = 2;
const DISTRACTORS: usize = 28;
const DECOYS_PER_TOPIC: usize = 75;
const DECOYS_PER_CLAIM: usize = 50;
const DISTRACTORS_PER_TOPIC: usize = 12;
const DECOY_SHARE: usize = 31;
const GENERIC_POOL: usize = 120;
const SEED: u64 = 20_181_105;

const ONSETS: [&str; 14] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 6] = ["n", "r", "l", "x", "m", "t"];
const VERBS: [&str; 6] = [
    "coupled", "fixed", "mounted", "joined", "bonded", "attached",
];

struct Words {
    rng: ChaCha8Rng,
    used: BTreeSet<String>,
}

impl Words {
    fn fresh(&mut self) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..3 {
                w.push_str(ONSETS.choose(&mut self.rng).unwrap());
                w.push_str(NUCLEI.choose(&mut self.rng).unwrap());
            }
            w.push_str(CODAS.choose(&mut self.rng).unwrap());
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

fn leaves(tag: &str, words: &[String]) -> String {
    words
        .iter()
        .map(|w| format!("({tag} {w})"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// "A device for the d1, d2, ... and dk, wherein the g1 g2 is V to the g3 g4."
fn independent_claim(decoys: &[String], g: &[String], verb: &str) -> (String, String) {
    let (last, rest) = decoys.split_last().unwrap();
    let text = format!(
        "A device for the {} and {}, wherein the {} {} is {verb} to the {} {}.",
        rest.join(", "),
        last,
        g[0],
        g[1],
        g[2],
        g[3]
    );
    let mut list = String::new();
    for d in rest {
        write!(list, "(NN {d}) (, ,) ").unwrap();
    }
    write!(list, "(CC and) (NN {last})").unwrap();
    let ptb = format!(
        "(ROOT (S (NP (NP (DT A) (NN device)) (PP (IN for) (NP (DT the) {list}))) (, ,) \
         (SBAR (WHADVP (WRB wherein)) (S (NP (DT the) {}) (VP (VBZ is) (VP (VBN {verb}) \
         (PP (TO to) (NP (DT the) {})))))) (. .)))",
        leaves("NN", &g[..2]),
        leaves("NN", &g[2..4])
    );
    (text, ptb)
}

/// "The device according to claim k, wherein the n1 n2 is V to the n3."
fn dependent_claim(parent: u32, n: &[String], verb: &str) -> (String, String) {
    let text = format!(
        "The device according to claim {parent}, wherein the {} {} is {verb} to the {}.",
        n[0], n[1], n[2]
    );
    let ptb = format!(
        "(ROOT (S (NP (NP (DT The) (NN device)) (VP (VBG according) (PP (TO to) \
         (NP (NN claim) (CD {parent}))))) (, ,) (SBAR (WHADVP (WRB wherein)) (S (NP (DT the) {}) \
         (VP (VBZ is) (VP (VBN {verb}) (PP (TO to) (NP (DT the) (NN {}))))))) (. .)))",
        leaves("NN", &n[..2]),
        n[2]
    );
    (text, ptb)
}

/// Free-text claims listing `words` in groups.
fn plain_claims(words: &[String], rng: &mut ChaCha8Rng) -> Vec<serde_json::Value> {
    let mut claims = Vec::new();
    for (i, chunk) in words.chunks(12).enumerate() {
        let num = i as u32 + 1;
        let body = chunk.join(", ");
        let text = if num == 1 {
            format!("A device comprising a {body}.")
        } else {
            let verb = VERBS.choose(rng).unwrap();
            format!(
                "The device according to claim {}, wherein the {body} is {verb}.",
                rng.random_range(1..num)
            )
        };
        claims.push(json!({"num": num, "text": text}));
    }
    claims
}

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .expect("usage: gen_synthetic <output dir>"),
    );
    fs::create_dir_all(&out).unwrap();
    let mut words = Words {
        rng: ChaCha8Rng::seed_from_u64(SEED),
        used: BTreeSet::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let generic = words.many(GENERIC_POOL);

    let mut corpus = String::new();
    let mut parses = String::new();
    let mut qrels = String::from("# synthetic separation fixture\n");
    let mut distractor_words: Vec<Vec<String>> = vec![Vec::new(); DISTRACTORS];

    for t in 0..TOPICS {
        let topic_id = format!("SYN-T{:02}", t + 1);
        let decoys = words.many(DECOYS_PER_TOPIC);
        let novelty = words.many(12);

        // Every decoy twice: claim 1 takes 0..50, claim 2 takes 25..75,
        // claim 3 the remaining quarter of each half.
        let spans: [Vec<String>; 3] = [
            decoys[..DECOYS_PER_CLAIM].to_vec(),
            decoys[25..].to_vec(),
            decoys[50..].iter().chain(&decoys[..25]).cloned().collect(),
        ];
        let mut claims = Vec::new();
        for (i, span) in spans.iter().enumerate() {
            let g: Vec<String> = generic.choose_multiple(&mut rng, 4).cloned().collect();
            let (text, ptb) = independent_claim(span, &g, VERBS.choose(&mut rng).unwrap());
            claims.push((i as u32 + 1, text, ptb));
        }
        for (i, parent) in [1u32, 4, 5, 2].into_iter().enumerate() {
            let (text, ptb) = dependent_claim(
                parent,
                &novelty[i * 3..i * 3 + 3],
                VERBS.choose(&mut rng).unwrap(),
            );
            claims.push((i as u32 + 4, text, ptb));
        }
        let claim_json: Vec<_> = claims
            .iter()
            .map(|(num, text, _)| json!({"num": num, "text": text}))
            .collect();
        writeln!(
            corpus,
            "{}",
            json!({"doc_id": topic_id, "family_id": format!("FAM-T{:02}", t + 1), "language": "en", "claims": claim_json})
        )
        .unwrap();
        for (num, _, ptb) in &claims {
            writeln!(
                parses,
                "{}",
                json!({"doc_id": topic_id, "claim_num": num, "ptb": ptb})
            )
            .unwrap();
        }

        for r in 0..RELEVANT_PER_TOPIC {
            let doc_id = format!("SYN-R{:02}-{}", t + 1, r + 1);
            let family = format!("FAM-R{:02}-{}", t + 1, r + 1);
            let mut bag: Vec<String> = novelty.choose_multiple(&mut rng, 8).cloned().collect();
            bag.extend(decoys.choose_multiple(&mut rng, 3).cloned());
            bag.extend(generic.choose_multiple(&mut rng, 14).cloned());
            bag.shuffle(&mut rng);
            let claims = plain_claims(&bag, &mut rng);
            writeln!(
                corpus,
                "{}",
                json!({"doc_id": doc_id, "family_id": family, "language": "en", "claims": claims})
            )
            .unwrap();
            writeln!(qrels, "{topic_id}\t{family}").unwrap();
        }

        let mut slots: Vec<usize> = (0..DISTRACTORS).collect();
        slots.shuffle(&mut rng);
        for &d in &slots[..DISTRACTORS_PER_TOPIC] {
            distractor_words[d].extend(decoys.choose_multiple(&mut rng, DECOY_SHARE).cloned());
        }
    }

    for (d, bag) in distractor_words.iter_mut().enumerate() {
        bag.extend(generic.choose_multiple(&mut rng, 40).cloned());
        bag.shuffle(&mut rng);
        let claims = plain_claims(bag, &mut rng);
        // Two distractors share a family to exercise family deduplication.
        let family = format!("FAM-D{:02}", d.min(DISTRACTORS - 2) + 1);
        writeln!(
            corpus,
            "{}",
            json!({"doc_id": format!("SYN-D{:02}", d + 1), "family_id": family, "language": "en", "claims": claims})
        )
        .unwrap();
    }

    fs::write(out.join("corpus.jsonl"), corpus).unwrap();
    fs::write(out.join("parses.jsonl"), parses).unwrap();
    fs::write(out.join("qrels.tsv"), qrels).unwrap();
}
