//! Transactional datasets and frequent closed pattern enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::label::Label;

pub type ItemId = Label;
pub type TransactionId = Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MiningError {
    #[error("dataset has no transactions")]
    Empty,
    #[error("transaction `{0}` has no items")]
    EmptyTransaction(TransactionId),
    #[error("duplicate transaction id `{0}`")]
    DuplicateTransaction(TransactionId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pattern is empty")]
    EmptyPattern,
    #[error("item `{0}` is not in the dataset")]
    UnknownItem(ItemId),
    #[error("unsupported pattern: no transaction contains it")]
    UnsupportedPattern,
    #[error("minimum frequency must lie in (0, 1], got {0}")]
    BadFrequency(String),
}

/// Minimum frequency threshold held as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MinFrequency {
    num: u64,
    den: u64,
}

impl MinFrequency {
    pub fn new(num: u64, den: u64) -> Result<Self, MiningError> {
        if num == 0 || den == 0 || num > den {
            return Err(MiningError::BadFrequency(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(MinFrequency {
            num: num / g,
            den: den / g,
        })
    }

    /// Converts a float on a parts-per-billion grid. Values above 1 are read
    /// as percentages (`20.0` is `0.2`).
    pub fn from_f64(x: f64) -> Result<Self, MiningError> {
        if !x.is_finite() || x <= 0.0 {
            return Err(MiningError::BadFrequency(x.to_string()));
        }
        let (scaled, den) = if x > 1.0 {
            ((x * 1e7).round(), 1_000_000_000u64)
        } else {
            ((x * 1e9).round(), 1_000_000_000u64)
        };
        MinFrequency::new(scaled as u64, den).map_err(|_| MiningError::BadFrequency(x.to_string()))
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Smallest support count `k` with `k / n >= self`.
    pub fn min_support(self, n: usize) -> usize {
        let n = n as u64;
        (self.num * n).div_ceil(self.den) as usize
    }

    pub fn admits(self, support: usize, n: usize) -> bool {
        support as u64 * self.den >= self.num * n as u64
    }
}

impl FromStr for MinFrequency {
    type Err = MiningError;

    /// Accepts `0.2`, `20`, `20%`. Values above 1 are percentages.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MiningError::BadFrequency(s.to_owned());
        let t = s.trim();
        let (t, percent) = match t.strip_suffix('%') {
            Some(rest) => (rest.trim(), true),
            None => (t, false),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 9
        {
            return Err(bad());
        }
        let scale = 10u64.pow(frac.len() as u32);
        let digits = format!("{int}{frac}");
        let num: u64 = digits.parse().map_err(|_| bad())?;
        let value_gt_one = num > scale;
        let den = if percent || value_gt_one { scale * 100 } else { scale };
        MinFrequency::new(num, den).map_err(|_| bad())
    }
}

impl TryFrom<f64> for MinFrequency {
    type Error = MiningError;
    fn try_from(x: f64) -> Result<Self, Self::Error> {
        MinFrequency::from_f64(x)
    }
}

impl From<MinFrequency> for f64 {
    fn from(m: MinFrequency) -> f64 {
        m.as_f64()
    }
}

impl fmt::Display for MinFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Transactions keyed by id, each a non-empty set of items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionDataset {
    items: BTreeSet<ItemId>,
    transactions: BTreeMap<TransactionId, BTreeSet<ItemId>>,
}

impl TransactionDataset {
    pub fn new<I, S>(transactions: I) -> Result<Self, MiningError>
    where
        I: IntoIterator<Item = (TransactionId, S)>,
        S: IntoIterator<Item = ItemId>,
    {
        let mut map = BTreeMap::new();
        let mut items = BTreeSet::new();
        for (id, its) in transactions {
            let its: BTreeSet<ItemId> = its.into_iter().collect();
            if its.is_empty() {
                return Err(MiningError::EmptyTransaction(id));
            }
            if map.contains_key(&id) {
                return Err(MiningError::DuplicateTransaction(id));
            }
            items.extend(its.iter().cloned());
            map.insert(id, its);
        }
        if map.is_empty() {
            return Err(MiningError::Empty);
        }
        Ok(TransactionDataset {
            items,
            transactions: map,
        })
    }

    /// Parses `<transaction-id>: <item> <item> ...` lines; `#` comments.
    pub fn parse(text: &str) -> Result<Self, MiningError> {
        let mut rows = Vec::new();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| MiningError::Parse { line: lineno, message };
            let (id, rest) = line
                .split_once(':')
                .ok_or_else(|| err("expected `<id>: <items>`".into()))?;
            let id = id.trim();
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(err(format!("bad transaction id `{id}`")));
            }
            let items: Vec<ItemId> = rest.split_whitespace().map(Label::from).collect();
            if items.is_empty() {
                return Err(err(format!("transaction `{id}` has no items")));
            }
            if let Some(first) = seen.insert(id.to_owned(), lineno) {
                return Err(err(format!("duplicate transaction `{id}` (first on line {first})")));
            }
            rows.push((Label::from(id), items));
        }
        TransactionDataset::new(rows)
    }

    pub fn items(&self) -> &BTreeSet<ItemId> {
        &self.items
    }

    pub fn transactions(&self) -> &BTreeMap<TransactionId, BTreeSet<ItemId>> {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Transactions containing every item of `x`.
    pub fn support(&self, x: &BTreeSet<ItemId>) -> BTreeSet<TransactionId> {
        self.transactions
            .iter()
            .filter(|(_, its)| x.is_subset(its))
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, its) in &self.transactions {
            out.push_str(id.as_str());
            out.push(':');
            for i in its {
                out.push(' ');
                out.push_str(i.as_str());
            }
            out.push('\n');
        }
        out
    }
}

/// Intersection of all transactions containing `x`.
pub fn closure(d: &TransactionDataset, x: &BTreeSet<ItemId>) -> Result<BTreeSet<ItemId>, MiningError> {
    if x.is_empty() {
        return Err(MiningError::EmptyPattern);
    }
    if let Some(unknown) = x.iter().find(|i| !d.items.contains(*i)) {
        return Err(MiningError::UnknownItem(unknown.clone()));
    }
    let mut acc: Option<BTreeSet<ItemId>> = None;
    for its in d.transactions.values().filter(|its| x.is_subset(its)) {
        acc = Some(match acc {
            None => its.clone(),
            Some(a) => a.intersection(its).cloned().collect(),
        });
    }
    acc.ok_or(MiningError::UnsupportedPattern)
}

/// A closed itemset together with its exact support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedPattern {
    pub pattern: BTreeSet<ItemId>,
    pub support: BTreeSet<TransactionId>,
    pub frequency: f64,
}

impl ClosedPattern {
    /// Canonical order: pattern size, then items lexicographically.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.pattern
            .len()
            .cmp(&other.pattern.len())
            .then_with(|| self.pattern.iter().cmp(other.pattern.iter()))
    }
}

impl fmt::Display for ClosedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {:.6}",
            braced(&self.pattern),
            braced(&self.support),
            self.frequency
        )
    }
}

pub(crate) fn braced(s: &BTreeSet<Label>) -> String {
    let inner: Vec<&str> = s.iter().map(Label::as_str).collect();
    format!("{{{}}}", inner.join(" "))
}

/// Dense view of a dataset: items and transactions as bit positions.
pub(crate) struct DenseDataset<'a> {
    pub items: Vec<&'a ItemId>,
    pub tids: Vec<&'a TransactionId>,
    pub item_tids: Vec<BitSet>,
    pub rows: Vec<BitSet>,
}

impl<'a> DenseDataset<'a> {
    pub fn new(d: &'a TransactionDataset) -> Self {
        let items: Vec<&ItemId> = d.items.iter().collect();
        let index: BTreeMap<&ItemId, usize> = items.iter().enumerate().map(|(i, &it)| (it, i)).collect();
        let tids: Vec<&TransactionId> = d.transactions.keys().collect();
        let m = items.len();
        let n = tids.len();
        let mut item_tids = vec![BitSet::new(n); m];
        let mut rows = Vec::with_capacity(n);
        for (t, its) in d.transactions.values().enumerate() {
            let row = BitSet::from_indices(m, its.iter().map(|i| index[i]));
            for i in row.iter() {
                item_tids[i].insert(t);
            }
            rows.push(row);
        }
        DenseDataset {
            items,
            tids,
            item_tids,
            rows,
        }
    }

    fn closure_of(&self, tids: &BitSet) -> BitSet {
        let mut it = tids.iter();
        let first = it.next().expect("closure of an empty tidset");
        let mut acc = self.rows[first].clone();
        for t in it {
            acc.intersect_with(&self.rows[t]);
        }
        acc
    }
}

/// All non-empty closed patterns with frequency `>= minfr`, canonically sorted.
///
/// Depth-first closure extension with prefix-preservation: a child is
/// generated from parent `P` by adding item `i` and closing; it is kept only
/// if the closure adds no item smaller than `i` that `P` lacks. Every closed
/// set then has exactly one generating parent, so no duplicate check is needed.
pub fn frequent_closed_patterns(d: &TransactionDataset, minfr: MinFrequency) -> Vec<ClosedPattern> {
    let dense = DenseDataset::new(d);
    let n = dense.tids.len();
    let minsup = minfr.min_support(n).max(1);
    let mut out = Vec::new();
    let all = BitSet::full(n);
    let root = dense.closure_of(&all);
    if !root.is_empty() {
        out.push((root.clone(), all.clone()));
    }
    extend(&dense, &root, &all, 0, minsup, &mut out);

    let mut patterns: Vec<ClosedPattern> = out
        .into_iter()
        .map(|(items, tids)| ClosedPattern {
            pattern: items.iter().map(|i| dense.items[i].clone()).collect(),
            support: tids.iter().map(|t| dense.tids[t].clone()).collect(),
            frequency: tids.len() as f64 / n as f64,
        })
        .collect();
    patterns.sort_by(ClosedPattern::canonical_cmp);
    patterns
}

fn extend(
    dense: &DenseDataset<'_>,
    parent: &BitSet,
    tids: &BitSet,
    start: usize,
    minsup: usize,
    out: &mut Vec<(BitSet, BitSet)>,
) {
    for i in start..dense.items.len() {
        if parent.contains(i) {
            continue;
        }
        let sub = tids.intersection(&dense.item_tids[i]);
        if sub.len() < minsup {
            continue;
        }
        let closed = dense.closure_of(&sub);
        if !closed.agrees_below(parent, i) {
            continue;
        }
        out.push((closed.clone(), sub.clone()));
        extend(dense, &closed, &sub, i + 1, minsup, out);
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn set(xs: &[&str]) -> BTreeSet<Label> {
        xs.iter().map(|s| Label::from(*s)).collect()
    }

    pub(crate) fn d1() -> TransactionDataset {
        TransactionDataset::parse(include_str!("../testdata/d1.txt")).unwrap()
    }

    /// Exhaustive oracle: every itemset, kept when frequent and closed.
    pub(crate) fn brute_force_closed(
        d: &TransactionDataset,
        minfr: MinFrequency,
    ) -> Vec<(BTreeSet<Label>, BTreeSet<Label>)> {
        let items: Vec<&Label> = d.items().iter().collect();
        assert!(items.len() <= 16);
        let n = d.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << items.len()) {
            let x: BTreeSet<Label> = (0..items.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| items[i].clone())
                .collect();
            let sup: BTreeSet<Label> = d
                .transactions()
                .iter()
                .filter(|(_, t)| x.is_subset(t))
                .map(|(id, _)| id.clone())
                .collect();
            if sup.is_empty() || !minfr.admits(sup.len(), n) {
                continue;
            }
            let mut inter: Option<BTreeSet<Label>> = None;
            for id in &sup {
                let t = &d.transactions()[id];
                inter = Some(match inter {
                    None => t.clone(),
                    Some(a) => a.intersection(t).cloned().collect(),
                });
            }
            if inter.unwrap() == x {
                out.push((x, sup));
            }
        }
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.iter().cmp(b.0.iter())));
        out
    }

    #[test]
    fn min_frequency_parsing() {
        let twenty: MinFrequency = "20".parse().unwrap();
        assert_eq!(twenty, MinFrequency::new(1, 5).unwrap());
        assert_eq!("0.2".parse::<MinFrequency>().unwrap(), twenty);
        assert_eq!("20%".parse::<MinFrequency>().unwrap(), twenty);
        assert_eq!("1".parse::<MinFrequency>().unwrap(), MinFrequency::new(1, 1).unwrap());
        assert_eq!("100".parse::<MinFrequency>().unwrap(), MinFrequency::new(1, 1).unwrap());
        assert!("0".parse::<MinFrequency>().is_err());
        assert!("150".parse::<MinFrequency>().is_err());
        assert!("abc".parse::<MinFrequency>().is_err());
        assert_eq!(MinFrequency::from_f64(0.3).unwrap(), MinFrequency::new(3, 10).unwrap());
        assert_eq!(MinFrequency::from_f64(20.0).unwrap(), twenty);
    }

    #[test]
    fn min_support_is_exact_ceiling() {
        let twenty = MinFrequency::new(1, 5).unwrap();
        assert_eq!(twenty.min_support(8), 2);
        assert_eq!(twenty.min_support(10), 2);
        let thirty = MinFrequency::new(3, 10).unwrap();
        assert_eq!(thirty.min_support(10), 3);
        assert!(thirty.admits(3, 10));
        assert!(!thirty.admits(2, 10));
    }

    #[test]
    fn closure_on_table1() {
        let d = d1();
        assert_eq!(closure(&d, &set(&["W4"])).unwrap(), set(&["W4", "W5"]));
        assert_eq!(closure(&d, &set(&["W1", "W2"])).unwrap(), set(&["W1", "W2", "W3"]));
        assert_eq!(closure(&d, &set(&["W2", "W9"])), Err(MiningError::UnsupportedPattern));
        assert_eq!(closure(&d, &set(&["W99"])), Err(MiningError::UnknownItem("W99".into())));
        assert_eq!(closure(&d, &BTreeSet::new()), Err(MiningError::EmptyPattern));
    }

    #[test]
    fn closure_of_identical_transactions() {
        let t = set(&["a", "b", "c"]);
        let d = TransactionDataset::new((0..4).map(|i| (Label::from(format!("t{i}")), t.clone()))).unwrap();
        assert_eq!(closure(&d, &set(&["b"])).unwrap(), t);
    }

    #[test]
    fn table1_contains_reported_clusters() {
        let d = d1();
        let pats = frequent_closed_patterns(&d, "20".parse().unwrap());
        let find = |p: &[&str]| pats.iter().find(|c| c.pattern == set(p)).map(|c| c.support.clone());
        assert_eq!(find(&["W1", "W2", "W3"]), Some(set(&["SP1", "SP2", "SP3"])));
        assert_eq!(find(&["W4", "W5"]), Some(set(&["SP4", "SP5", "SP6"])));
        assert_eq!(find(&["W1", "W6", "W7"]), Some(set(&["SP6", "SP7"])));
        assert_eq!(find(&["W9"]), Some(set(&["SP7", "SP8"])));
    }

    #[test]
    fn table1_matches_oracle() {
        let d = d1();
        let minfr = "20".parse().unwrap();
        let got: Vec<_> = frequent_closed_patterns(&d, minfr)
            .into_iter()
            .map(|c| (c.pattern, c.support))
            .collect();
        assert_eq!(got, brute_force_closed(&d, minfr));
    }

    #[test]
    fn full_frequency_without_common_item_is_empty() {
        let pats = frequent_closed_patterns(&d1(), MinFrequency::new(1, 1).unwrap());
        assert!(pats.is_empty());
    }

    #[test]
    fn parse_errors_name_lines() {
        assert_eq!(TransactionDataset::parse(""), Err(MiningError::Empty));
        assert_eq!(TransactionDataset::parse("# nothing\n"), Err(MiningError::Empty));
        assert!(matches!(
            TransactionDataset::parse("a: x\nb x y\n"),
            Err(MiningError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            TransactionDataset::parse("a: x\na: y\n"),
            Err(MiningError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            TransactionDataset::parse("a:\n"),
            Err(MiningError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let d = d1();
        assert_eq!(TransactionDataset::parse(&d.to_text()).unwrap(), d);
    }

    fn arb_dataset() -> impl Strategy<Value = TransactionDataset> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(n_items, n_tx)| {
            prop::collection::vec(prop::collection::btree_set(0..n_items, 1..=n_items), n_tx).prop_map(|rows| {
                TransactionDataset::new(rows.into_iter().enumerate().map(|(t, its)| {
                    (
                        Label::from(format!("t{t}")),
                        its.into_iter()
                            .map(|i| Label::from(format!("i{i}")))
                            .collect::<Vec<_>>(),
                    )
                }))
                .unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn enumeration_matches_oracle(d in arb_dataset(), pct in 1u64..=100) {
            let minfr = MinFrequency::new(pct, 100).unwrap();
            let got: Vec<_> = frequent_closed_patterns(&d, minfr)
                .into_iter()
                .map(|c| (c.pattern, c.support))
                .collect();
            prop_assert_eq!(got, brute_force_closed(&d, minfr));
        }

        #[test]
        fn closure_is_a_closure_operator(d in arb_dataset(), seed in any::<u64>()) {
            // pick x as a non-empty subset of some transaction, y ⊆ x
            let rows: Vec<_> = d.transactions().values().collect();
            let row = rows[(seed as usize) % rows.len()];
            let items: Vec<_> = row.iter().cloned().collect();
            let x: BTreeSet<Label> = items.iter().enumerate()
                .filter(|(i, _)| (seed >> (i % 60)) & 1 == 1 || *i == 0)
                .map(|(_, l)| l.clone()).collect();
            let y: BTreeSet<Label> = x.iter().take(1).cloned().collect();
            let cx = closure(&d, &x).unwrap();
            prop_assert!(x.is_subset(&cx));
            prop_assert_eq!(closure(&d, &cx).unwrap(), cx.clone());
            prop_assert!(closure(&d, &y).unwrap().is_subset(&cx));
        }

        #[test]
        fn patterns_are_closed_with_exact_support(d in arb_dataset()) {
            for p in frequent_closed_patterns(&d, MinFrequency::new(1, 10).unwrap()) {
                prop_assert_eq!(closure(&d, &p.pattern).unwrap(), p.pattern.clone());
                prop_assert_eq!(d.support(&p.pattern), p.support.clone());
                prop_assert!((p.frequency - p.support.len() as f64 / d.len() as f64).abs() < 1e-12);
            }
        }
    }
}
