//! Cascade counts by direct scans of the edge list.

use std::collections::HashSet;

use super::RawCorpus;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub doc: String,
    pub t1: i32,
    pub r: usize,
    pub ic: usize,
    pub ec: usize,
    pub d_total: usize,
    pub i: usize,
    pub total: usize,
}

fn month(c: &RawCorpus, id: &str) -> i32 {
    c.docs.iter().find(|d| d.0 == id).unwrap().1
}

/// Rows for every non-censored document, ordered by `(month, id)`.
pub fn cascade_rows(c: &RawCorpus, latency: i32, exposure: i32, infection: i32, distinct: bool) -> Vec<OracleRow> {
    let mut docs = c.docs.clone();
    docs.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    let mut rows = Vec::new();
    for (x, t1) in &docs {
        let (t1, t2) = (*t1, t1 + latency);
        let (t3, t4) = (t2 + exposure, t2 + infection);
        if t4 > c.horizon {
            continue;
        }
        let red: Vec<&str> = c
            .edges
            .iter()
            .filter(|(citing, cited)| cited == x && (t1..t2).contains(&month(c, citing)))
            .map(|(citing, _)| citing.as_str())
            .collect();
        let exposing: Vec<&str> = c
            .edges
            .iter()
            .filter(|(g, r)| red.contains(&r.as_str()) && (t2..t3).contains(&month(c, g)))
            .map(|(g, _)| g.as_str())
            .collect();
        let ec = if distinct {
            exposing.iter().collect::<HashSet<_>>().len()
        } else {
            exposing.len()
        };
        let d_total = red
            .iter()
            .map(|r| c.edges.iter().filter(|(citing, _)| citing == r).count() - 1)
            .sum();
        let i = c
            .edges
            .iter()
            .filter(|(g, cited)| cited == x && (t2..t4).contains(&month(c, g)) && !red.contains(&g.as_str()))
            .count();
        rows.push(OracleRow {
            doc: x.clone(),
            t1,
            r: c.edges.iter().filter(|(citing, _)| citing == x).count(),
            ic: red.len(),
            ec,
            d_total,
            i,
            total: c.edges.iter().filter(|(_, cited)| cited == x).count(),
        });
    }
    rows
}
