//! Exhaustive retrieval and the precision / recall / ANMRR protocol.
//!
//! Every database image serves once as a query against the full database,
//! itself included. For a query of class `i` and cut-off `γ`, precision is
//! the share of the top `γ` that belong to class `i` and recall is the same
//! count over the class size. Per-class means of those (`AP`, `AR`) are
//! averaged over classes to give `ARP` and `ARR`. All figures are in
//! percent.
//!
//! ANMRR follows MPEG-7 with window `K(q) = 2·NG(q)`, where `NG(q)` is the
//! size of the query's class: ranks beyond `K` are replaced by `1.25·K`,
//! `AVR` is their mean, `MRR = AVR − 0.5 − NG/2`, and
//! `NMRR = MRR / (1.25·K − 0.5 − NG/2)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::descriptor::{Descriptor, DescriptorSet, Layout};
use crate::distance::DistanceMeasure;
use crate::error::{Error, Result};

/// An immutable, labelled collection of descriptors stored contiguously.
#[derive(Clone, Debug)]
pub struct DatasetIndex {
    layout: Layout,
    ids: Vec<String>,
    classes: Vec<usize>,
    class_names: Vec<String>,
    class_sizes: Vec<usize>,
    values: Vec<f64>,
}

/// One retrieved database entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub distance: f64,
}

impl DatasetIndex {
    /// Builds an index from `(id, label, descriptor)` triples, keeping their
    /// order. Class ids are assigned in order of first appearance.
    pub fn build<I, S, L>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, L, Descriptor)>,
        S: Into<String>,
        L: Into<String>,
    {
        let mut iter = entries.into_iter();
        let (id, label, first) = iter
            .next()
            .ok_or_else(|| Error::argument("cannot index an empty dataset"))?;
        let mut index = DatasetIndex::empty(first.layout().clone());
        index.push(id.into(), label.into(), first.values())?;
        for (id, label, d) in iter {
            let id = id.into();
            if d.layout() != &index.layout {
                return Err(Error::argument(format!(
                    "descriptor {id} has a different layout"
                )));
            }
            index.push(id, label.into(), d.values())?;
        }
        Ok(index)
    }

    pub fn from_set(set: &DescriptorSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::argument("cannot index an empty dataset"));
        }
        let mut index = DatasetIndex::empty(set.layout.clone());
        for rec in &set.records {
            index.push(rec.path.clone(), rec.label.clone(), &rec.values)?;
        }
        Ok(index)
    }

    fn empty(layout: Layout) -> Self {
        DatasetIndex {
            layout,
            ids: Vec::new(),
            classes: Vec::new(),
            class_names: Vec::new(),
            class_sizes: Vec::new(),
            values: Vec::new(),
        }
    }

    fn push(&mut self, id: String, label: String, values: &[f64]) -> Result<()> {
        if values.len() != self.layout.len() {
            return Err(Error::argument(format!(
                "descriptor {id} has the wrong length"
            )));
        }
        let class = match self.class_names.iter().position(|c| *c == label) {
            Some(c) => c,
            None => {
                self.class_names.push(label);
                self.class_sizes.push(0);
                self.class_names.len() - 1
            }
        };
        self.class_sizes[class] += 1;
        self.classes.push(class);
        self.ids.push(id);
        self.values.extend_from_slice(values);
        Ok(())
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.class_names[self.classes[i]]
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Class labels in order of first appearance.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn class_size(&self, label: &str) -> Option<usize> {
        self.class_names
            .iter()
            .position(|c| c == label)
            .map(|c| self.class_sizes[c])
    }

    pub fn values(&self, i: usize) -> &[f64] {
        let n = self.layout.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// The `gamma` nearest entries, nearest first. `gamma` is clamped to the
    /// index size; equal distances keep insertion order.
    pub fn query(
        &self,
        q: &Descriptor,
        gamma: usize,
        measure: DistanceMeasure,
    ) -> Result<Vec<Hit>> {
        if gamma == 0 {
            return Err(Error::argument("gamma must be at least 1"));
        }
        if q.layout() != &self.layout {
            return Err(Error::argument("query layout does not match the index"));
        }
        Ok(self.rank(q.values(), gamma, measure, None))
    }

    /// Top `limit` hits. `prefer` wins ties at equal distance, which keeps a
    /// database image ahead of exact duplicates when it is its own query.
    fn rank(
        &self,
        q: &[f64],
        limit: usize,
        measure: DistanceMeasure,
        prefer: Option<usize>,
    ) -> Vec<Hit> {
        let mut hits: Vec<Hit> = (0..self.len())
            .map(|i| Hit {
                index: i,
                distance: measure.eval(q, self.values(i)),
            })
            .collect();
        let cmp = |a: &Hit, b: &Hit| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| match prefer {
                    Some(p) if a.index == p && b.index != p => Ordering::Less,
                    Some(p) if b.index == p && a.index != p => Ordering::Greater,
                    _ => Ordering::Equal,
                })
                .then(a.index.cmp(&b.index))
        };
        let limit = limit.min(hits.len());
        if limit < hits.len() {
            hits.select_nth_unstable_by(limit - 1, cmp);
            hits.truncate(limit);
        }
        hits.sort_unstable_by(cmp);
        hits
    }
}

/// Precision and recall (percent) of a ranked list for a query of class
/// `label`. The cut-off is `min(gamma, index size)`.
pub fn precision_recall(
    retrieved: &[Hit],
    label: &str,
    index: &DatasetIndex,
    gamma: usize,
) -> Result<(f64, f64)> {
    let class_size = index
        .class_size(label)
        .ok_or_else(|| Error::argument(format!("unknown class {label:?}")))?;
    if gamma == 0 {
        return Err(Error::argument("gamma must be at least 1"));
    }
    let cut = gamma.min(index.len());
    if retrieved.len() < cut {
        return Err(Error::argument(format!(
            "{} hits retrieved, {cut} needed",
            retrieved.len()
        )));
    }
    let matches = retrieved[..cut]
        .iter()
        .filter(|h| index.label(h.index) == label)
        .count() as f64;
    Ok((
        100.0 * matches / cut as f64,
        100.0 * matches / class_size as f64,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub gamma: usize,
    pub arp: f64,
    pub arr: f64,
    pub f_score: f64,
}

/// Retrieval figures per cut-off plus one ANMRR value, all in percent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub measure: DistanceMeasure,
    pub rows: Vec<MetricsRow>,
    pub anmrr: f64,
}

impl MetricsReport {
    pub fn row(&self, gamma: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.gamma == gamma)
    }

    /// `gamma,arp,arr,f_score` rows followed by an `anmrr` footer.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "gamma,arp,arr,f_score")?;
        for r in &self.rows {
            writeln!(w, "{},{:.6},{:.6},{:.6}", r.gamma, r.arp, r.arr, r.f_score)?;
        }
        writeln!(w, "anmrr,{:.6}", self.anmrr)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics always serialise")
    }
}

pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-query tallies produced in parallel and folded in query order.
struct QueryOutcome {
    class: usize,
    matches: Vec<usize>,
    nmrr: f64,
}

/// Runs every image as a query and aggregates ARP, ARR, F-score and ANMRR.
///
/// Work fans out over the current rayon pool; aggregation happens
/// sequentially in query order so results do not depend on thread count.
pub fn evaluate(
    index: &DatasetIndex,
    gammas: &[usize],
    measure: DistanceMeasure,
) -> Result<MetricsReport> {
    if gammas.iter().any(|&g| g == 0) {
        return Err(Error::argument("gamma values must be at least 1"));
    }
    let n = index.len();
    let max_gamma = gammas.iter().copied().max().unwrap_or(1).min(n);
    let max_class = index.class_sizes.iter().copied().max().unwrap_or(1);
    let depth = max_gamma.max(2 * max_class).min(n);

    let outcomes: Vec<QueryOutcome> = (0..n)
        .into_par_iter()
        .map(|q| {
            let hits = index.rank(index.values(q), depth, measure, Some(q));
            let class = index.classes[q];
            let relevant: Vec<bool> = hits
                .iter()
                .map(|h| index.classes[h.index] == class)
                .collect();
            let matches = gammas
                .iter()
                .map(|&g| relevant[..g.min(n)].iter().filter(|&&r| r).count())
                .collect();
            QueryOutcome {
                class,
                matches,
                nmrr: nmrr(&relevant, index.class_sizes[class]),
            }
        })
        .collect();

    let classes = index.class_count();
    // per class: summed precision fractions and summed match counts; scaled
    // once at the end so perfect retrieval comes out as exactly 100
    let mut precision = vec![vec![0.0f64; classes]; gammas.len()];
    let mut matches = vec![vec![0usize; classes]; gammas.len()];
    let mut nmrr_sum = 0.0;
    for o in &outcomes {
        for (gi, &g) in gammas.iter().enumerate() {
            precision[gi][o.class] += o.matches[gi] as f64 / g.min(n) as f64;
            matches[gi][o.class] += o.matches[gi];
        }
        nmrr_sum += o.nmrr;
    }

    let sizes = &index.class_sizes;
    let rows = gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let arp = (0..classes)
                .map(|c| 100.0 * precision[gi][c] / sizes[c] as f64)
                .sum::<f64>()
                / classes as f64;
            let arr = (0..classes)
                .map(|c| 100.0 * matches[gi][c] as f64 / (sizes[c] * sizes[c]) as f64)
                .sum::<f64>()
                / classes as f64;
            MetricsRow {
                gamma,
                arp,
                arr,
                f_score: f_score(arp, arr),
            }
        })
        .collect();
    Ok(MetricsReport {
        measure,
        rows,
        anmrr: 100.0 * nmrr_sum / n as f64,
    })
}

/// ANMRR (percent) alone.
pub fn anmrr(index: &DatasetIndex, measure: DistanceMeasure) -> Result<f64> {
    Ok(evaluate(index, &[1], measure)?.anmrr)
}

/// Normalised modified retrieval rank of one query. `relevant[i]` marks
/// whether the hit at rank `i + 1` belongs to the query's class; the list
/// must cover at least `min(2·ng, n)` ranks.
pub fn nmrr(relevant: &[bool], ng: usize) -> f64 {
    let ng_f = ng as f64;
    let window = 2 * ng;
    let penalty = 1.25 * window as f64;
    let mut found = 0usize;
    let mut rank_sum = 0.0;
    for (i, _) in relevant.iter().enumerate().take(window).filter(|(_, &r)| r) {
        rank_sum += (i + 1) as f64;
        found += 1;
    }
    rank_sum += (ng - found.min(ng)) as f64 * penalty;
    let avr = rank_sum / ng_f;
    let mrr = avr - 0.5 - ng_f / 2.0;
    mrr / (penalty - 0.5 - ng_f / 2.0)
}

/// Class sizes keyed by label.
pub fn class_histogram(index: &DatasetIndex) -> HashMap<&str, usize> {
    index
        .class_names
        .iter()
        .map(String::as_str)
        .zip(index.class_sizes.iter().copied())
        .collect()
}
