//! Level-wise Apriori over per-article role sets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::TaskAssignment;
use crate::taxonomy::CreditCategory;

pub const DEFAULT_MIN_SUPPORT: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub article_id: String,
    pub items: BTreeSet<CreditCategory>,
}

impl Transaction {
    fn mask(&self) -> u16 {
        mask_of(self.items.iter().copied())
    }
}

fn mask_of(items: impl IntoIterator<Item = CreditCategory>) -> u16 {
    items.into_iter().fold(0u16, |m, c| m | (1 << c.index()))
}

fn items_of(mask: u16) -> Vec<CreditCategory> {
    CreditCategory::ALL
        .iter()
        .copied()
        .filter(|c| mask & (1 << c.index()) != 0)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequentItemset {
    /// In taxonomy order.
    pub items: Vec<CreditCategory>,
    /// Number of transactions containing every item.
    pub count: usize,
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociationPair {
    pub antecedent: CreditCategory,
    pub consequent: CreditCategory,
    /// Support of the unordered pair; identical for both directions.
    pub support: f64,
}

/// One transaction per article, holding the union of its assigned roles.
pub fn build_transactions(assignments: &[TaskAssignment]) -> Vec<Transaction> {
    let mut by_article: BTreeMap<&str, BTreeSet<CreditCategory>> = BTreeMap::new();
    for a in assignments {
        by_article
            .entry(&a.article_id)
            .or_default()
            .insert(a.category);
    }
    by_article
        .into_iter()
        .map(|(id, items)| Transaction {
            article_id: id.to_string(),
            items,
        })
        .collect()
}

fn is_frequent(count: usize, total: usize, min_support: f64) -> bool {
    count > 0 && count as f64 / total as f64 >= min_support
}

/// Sorted by size, then descending support, then item order.
pub fn sort_itemsets(itemsets: &mut [FrequentItemset]) {
    itemsets.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then(b.count.cmp(&a.count))
            .then_with(|| a.items.cmp(&b.items))
    });
}

pub fn mine(transactions: &[Transaction], min_support: f64) -> Result<Vec<FrequentItemset>> {
    if transactions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(Error::Invalid(format!(
            "min_support must be in (0, 1], got {min_support}"
        )));
    }
    let masks: Vec<u16> = transactions.iter().map(Transaction::mask).collect();
    let total = masks.len();

    let count = |candidate: u16| {
        masks
            .iter()
            .filter(|&&m| m & candidate == candidate)
            .count()
    };

    let mut out = Vec::new();
    let mut level: Vec<u16> = CreditCategory::ALL
        .iter()
        .map(|c| 1u16 << c.index())
        .filter(|&m| is_frequent(count(m), total, min_support))
        .collect();

    while !level.is_empty() {
        for &m in &level {
            let c = count(m);
            out.push(FrequentItemset {
                items: items_of(m),
                count: c,
                support: c as f64 / total as f64,
            });
        }

        // Join itemsets that share all but their last item, then prune any
        // candidate with an infrequent subset.
        let previous: HashSet<u16> = level.iter().copied().collect();
        let mut sorted: Vec<Vec<CreditCategory>> = level.iter().map(|&m| items_of(m)).collect();
        sorted.sort();
        let mut candidates = BTreeSet::new();
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                let (a, b) = (&sorted[i], &sorted[j]);
                let k = a.len();
                if a[..k - 1] != b[..k - 1] {
                    break;
                }
                let joined = mask_of(a.iter().chain(std::iter::once(&b[k - 1])).copied());
                let all_subsets_frequent = items_of(joined)
                    .iter()
                    .all(|c| previous.contains(&(joined & !(1 << c.index()))));
                if all_subsets_frequent {
                    candidates.insert(joined);
                }
            }
        }
        level = candidates
            .into_iter()
            .filter(|&m| is_frequent(count(m), total, min_support))
            .collect();
    }

    sort_itemsets(&mut out);
    Ok(out)
}

/// Both directions of every frequent pair, by descending support.
pub fn top_pairs(itemsets: &[FrequentItemset]) -> Vec<AssociationPair> {
    let mut out: Vec<(usize, AssociationPair)> = Vec::new();
    for set in itemsets.iter().filter(|s| s.items.len() == 2) {
        let (x, y) = (set.items[0], set.items[1]);
        for (antecedent, consequent) in [(x, y), (y, x)] {
            out.push((
                set.count,
                AssociationPair {
                    antecedent,
                    consequent,
                    support: set.support,
                },
            ));
        }
    }
    out.sort_by(|(ca, a), (cb, b)| {
        b.support
            .total_cmp(&a.support)
            .then(cb.cmp(ca))
            .then((a.antecedent, a.consequent).cmp(&(b.antecedent, b.consequent)))
    });
    out.into_iter().map(|(_, p)| p).collect()
}

pub fn itemsets_csv(itemsets: &[FrequentItemset]) -> String {
    let mut s = String::from("items,size,support\n");
    for set in itemsets {
        let items: Vec<&str> = set.items.iter().map(|c| c.name()).collect();
        let _ = writeln!(
            s,
            "{},{},{:.4}",
            items.join("|"),
            set.items.len(),
            set.support
        );
    }
    s
}

/// Directed rows for presentation; support is that of the unordered pair
/// (no confidence is computed).
pub fn pairs_csv(pairs: &[AssociationPair]) -> String {
    let mut s = String::from("antecedent,consequent,pair_support\n");
    for p in pairs {
        let _ = writeln!(s, "{},{},{:.4}", p.antecedent, p.consequent, p.support);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Layer;
    use CreditCategory as C;

    fn tx(items: &[CreditCategory]) -> Transaction {
        Transaction {
            article_id: String::new(),
            items: items.iter().copied().collect(),
        }
    }

    #[test]
    fn builds_set_transactions() {
        let mk = |id: &str, author: usize, c: CreditCategory| TaskAssignment {
            article_id: id.into(),
            author_index: author,
            author_name: String::new(),
            category: c,
            layer: Layer::Keyword,
            evidence: String::new(),
        };
        let t = build_transactions(&[
            mk("a", 1, C::Investigation),
            mk("a", 2, C::Investigation),
            mk("a", 1, C::Software),
            mk("b", 1, C::Software),
        ]);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].items, BTreeSet::from([C::Investigation, C::Software]));
    }

    #[test]
    fn small_example() {
        let (a, b, c) = (C::Methodology, C::Investigation, C::Conceptualization);
        let t = [tx(&[a, b]), tx(&[a, b, c]), tx(&[a, c]), tx(&[b])];
        let got: Vec<(Vec<CreditCategory>, f64)> = mine(&t, 0.5)
            .unwrap()
            .into_iter()
            .map(|s| (s.items, s.support))
            .collect();
        assert_eq!(
            got,
            [
                (vec![a], 0.75),
                (vec![b], 0.75),
                (vec![c], 0.5),
                (vec![a, b], 0.5),
                (vec![a, c], 0.5),
            ]
        );
    }

    #[test]
    fn threshold_edges() {
        let t = vec![tx(&[C::Software]); 3];
        let got = mine(&t, 1.0).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].support, 1.0);

        let t = [tx(&[C::Software]), tx(&[C::Validation]), tx(&[C::Software])];
        assert!(mine(&t, 2.0 / 3.0 + 1e-9).unwrap().is_empty());
        assert!(matches!(mine(&[], 0.2), Err(Error::EmptyInput)));
        assert!(mine(&t, 0.0).is_err());
    }

    #[test]
    fn pairs_both_directions() {
        let sets = [FrequentItemset {
            items: vec![C::WritingReviewEditing, C::Investigation],
            count: 304,
            support: 0.304,
        }];
        let pairs = top_pairs(&sets);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].antecedent, C::WritingReviewEditing);
        assert_eq!(pairs[1].antecedent, C::Investigation);
        assert!(pairs.iter().all(|p| p.support == 0.304));
        assert!(pairs_csv(&pairs).contains("investigation,writing – review editing,0.3040"));
        assert!(top_pairs(&sets[..0]).is_empty());
    }

    #[test]
    fn equal_support_pairs_in_item_order() {
        let mk = |a, b| FrequentItemset {
            items: vec![a, b],
            count: 5,
            support: 0.5,
        };
        let pairs = top_pairs(&[
            mk(C::Validation, C::Software),
            mk(C::Methodology, C::Software),
        ]);
        let keys: Vec<(C, C)> = pairs.iter().map(|p| (p.antecedent, p.consequent)).collect();
        assert_eq!(
            keys,
            [
                (C::Methodology, C::Software),
                (C::Validation, C::Software),
                (C::Software, C::Methodology),
                (C::Software, C::Validation),
            ]
        );
    }

    #[test]
    fn csv_format() {
        let t = [tx(&[C::Software, C::Validation]), tx(&[C::Software])];
        let csv = itemsets_csv(&mine(&t, 0.5).unwrap());
        assert_eq!(
            csv,
            "items,size,support\nsoftware,1,1.0000\nvalidation,1,0.5000\nvalidation|software,2,0.5000\n"
        );
    }
}
