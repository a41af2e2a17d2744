use claimtree_core::scoring::stem;

const VECTORS: &str = include_str!("../fixtures/porter_vectors.tsv");

#[test]
fn matches_reference_vectors() {
    let mut mismatches = Vec::new();
    let mut count = 0;
    for line in VECTORS.lines() {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        count += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    assert!(count > 2000);
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}
