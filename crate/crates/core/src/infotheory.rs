//! Discrete plug-in estimators over binned samples. All results are in nats.
//!
//! Conditional mutual information is evaluated through the chain identity
//! `I(X;Y|Z) = I(X;Y,Z) - I(X;Z)`, with `(Y,Z)` treated as one joint variable.
//! Cell frequencies are accumulated in sorted order so results are
//! bit-for-bit reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Bin = i64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Integer values kept as their own bins.
    Identity,
    /// `v -> floor(log2(v + 1))`: 0 -> 0, 1..2 -> 1, 3..6 -> 2, ...
    #[default]
    Log2Bins,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    PlugIn,
    /// Plug-in plus the Miller–Madow bias term `(m - 1) / 2n` per entropy.
    MillerMadow,
}

/// Log2 bin index of a nonnegative value.
pub fn log2_bin(v: f64) -> Bin {
    // Exact for integers: (v + 1) has bit length b + 1 where b = floor(log2(v + 1)).
    if v.fract() == 0.0 && v < 9.0e15 {
        let n = v as u64 + 1;
        return (63 - n.leading_zeros()) as Bin;
    }
    (v + 1.0).log2().floor() as Bin
}

pub fn discretize(values: &[f64], scheme: Discretization) -> Result<Vec<Bin>> {
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                return Err(Error::Degenerate(format!("non-finite value {v}")));
            }
            match scheme {
                Discretization::Identity => {
                    if v.fract() != 0.0 {
                        return Err(Error::Degenerate(format!("identity binning needs integers, got {v}")));
                    }
                    Ok(v as Bin)
                }
                Discretization::Log2Bins => {
                    if v < 0.0 {
                        return Err(Error::Degenerate(format!("log2 binning needs nonnegative values, got {v}")));
                    }
                    Ok(log2_bin(v))
                }
            }
        })
        .collect()
}

/// Joint frequency table of two or three binned variables, stored as sorted
/// sparse cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointTable {
    arity: usize,
    cells: Vec<(Vec<Bin>, u64)>,
    n: u64,
}

impl JointTable {
    pub fn new(columns: &[&[Bin]]) -> Result<Self> {
        let arity = columns.len();
        if !(2..=3).contains(&arity) {
            return Err(Error::InvalidConfig(format!("joint table arity must be 2 or 3, got {arity}")));
        }
        let n = columns[0].len();
        for c in &columns[1..] {
            if c.len() != n {
                return Err(Error::LengthMismatch(n, c.len()));
            }
        }
        if n == 0 {
            return Err(Error::Empty("no samples".into()));
        }
        let mut keys: Vec<Vec<Bin>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
        keys.sort_unstable();
        let mut cells: Vec<(Vec<Bin>, u64)> = Vec::new();
        for k in keys {
            match cells.last_mut() {
                Some((last, count)) if *last == k => *count += 1,
                _ => cells.push((k, 1)),
            }
        }
        Ok(JointTable {
            arity,
            cells,
            n: n as u64,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Nonzero cells, sorted by bin tuple.
    pub fn cells(&self) -> &[(Vec<Bin>, u64)] {
        &self.cells
    }

    /// Marginal counts over the listed variable positions, sorted by key.
    pub fn marginal(&self, vars: &[usize]) -> Vec<(Vec<Bin>, u64)> {
        let mut keyed: Vec<(Vec<Bin>, u64)> = self
            .cells
            .iter()
            .map(|(k, c)| (vars.iter().map(|&v| k[v]).collect(), *c))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Vec<Bin>, u64)> = Vec::new();
        for (k, c) in keyed {
            match out.last_mut() {
                Some((last, count)) if *last == k => *count += c,
                _ => out.push((k, c)),
            }
        }
        out
    }
}

/// Sums terms in ascending order so the result depends only on the multiset
/// of terms, not on how the cells were labelled.
fn canonical_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut terms: Vec<f64> = terms.collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn entropy_of_counts(counts: impl Iterator<Item = u64>, n: u64) -> f64 {
    let n = n as f64;
    -canonical_sum(counts.filter(|&c| c > 0).map(|c| {
        let p = c as f64 / n;
        p * p.ln()
    }))
}

/// Shannon entropy of a binned sample.
pub fn entropy(x: &[Bin]) -> Result<f64> {
    let t = JointTable::new(&[x, x])?;
    let m = t.marginal(&[0]);
    Ok(entropy_of_counts(m.iter().map(|(_, c)| *c), t.n()))
}

/// Plug-in mutual information between two discrete columns given as
/// per-sample keys; both slices are already validated to equal length.
fn mi_keys<K: Ord + Clone>(x: &[K], y: &[K], estimator: Estimator) -> f64 {
    let n = x.len();
    let mut joint: Vec<(K, K)> = x.iter().cloned().zip(y.iter().cloned()).collect();
    joint.sort_unstable();
    let mut xs: Vec<K> = x.to_vec();
    xs.sort_unstable();
    let mut ys: Vec<K> = y.to_vec();
    ys.sort_unstable();
    let x_counts = run_counts(&xs);
    let y_counts = run_counts(&ys);
    let joint_counts = run_counts(&joint);

    let nf = n as f64;
    let terms = joint_counts.iter().map(|(key, c)| {
        let cx = lookup(&x_counts, &key.0) as f64;
        let cy = lookup(&y_counts, &key.1) as f64;
        let c = *c as f64;
        c / nf * (nf * c / (cx * cy)).ln()
    });
    // Plug-in MI is nonnegative; rounding can leave a -1e-17 residue.
    let mut mi = canonical_sum(terms).max(0.0);
    if estimator == Estimator::MillerMadow {
        let (mx, my, mxy) = (x_counts.len() as f64, y_counts.len() as f64, joint_counts.len() as f64);
        mi += ((mx - 1.0) + (my - 1.0) - (mxy - 1.0)) / (2.0 * nf);
    }
    mi
}

fn run_counts<K: Ord + Clone>(sorted: &[K]) -> Vec<(K, u64)> {
    let mut out: Vec<(K, u64)> = Vec::new();
    for k in sorted {
        match out.last_mut() {
            Some((last, c)) if last == k => *c += 1,
            _ => out.push((k.clone(), 1)),
        }
    }
    out
}

fn lookup<K: Ord>(counts: &[(K, u64)], key: &K) -> u64 {
    let i = counts.binary_search_by(|(k, _)| k.cmp(key)).expect("marginal key present");
    counts[i].1
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(Error::Empty("no samples".into()));
    }
    Ok(())
}

pub fn mutual_information(x: &[Bin], y: &[Bin]) -> Result<f64> {
    mutual_information_with(x, y, Estimator::PlugIn)
}

pub fn mutual_information_with(x: &[Bin], y: &[Bin], estimator: Estimator) -> Result<f64> {
    check_len(x.len(), y.len())?;
    Ok(mi_keys(x, y, estimator))
}

/// `I(X; Y, Z)`, the information `x` shares with the pair `(y, z)`.
pub fn joint_mutual_information(x: &[Bin], y: &[Bin], z: &[Bin]) -> Result<f64> {
    joint_mutual_information_with(x, y, z, Estimator::PlugIn)
}

pub fn joint_mutual_information_with(x: &[Bin], y: &[Bin], z: &[Bin], estimator: Estimator) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_len(x.len(), z.len())?;
    let xk: Vec<(Bin, Bin)> = x.iter().map(|&v| (v, 0)).collect();
    let yz: Vec<(Bin, Bin)> = y.iter().zip(z).map(|(&a, &b)| (a, b)).collect();
    Ok(mi_keys(&xk, &yz, estimator))
}

/// `I(X;Y|Z) = I(X;Y,Z) - I(X;Z)`.
pub fn conditional_mi(x: &[Bin], y: &[Bin], z: &[Bin]) -> Result<f64> {
    conditional_mi_with(x, y, z, Estimator::PlugIn)
}

pub fn conditional_mi_with(x: &[Bin], y: &[Bin], z: &[Bin], estimator: Estimator) -> Result<f64> {
    let joint = joint_mutual_information_with(x, y, z, estimator)?;
    let xz = mutual_information_with(x, z, estimator)?;
    Ok(joint - xz)
}

/// `I(X;Y|Z) - I(X;Y)`: negative when `z` explains away the x–y dependence,
/// positive for synergy.
pub fn interaction_information(x: &[Bin], y: &[Bin], z: &[Bin]) -> Result<f64> {
    interaction_information_with(x, y, z, Estimator::PlugIn)
}

pub fn interaction_information_with(x: &[Bin], y: &[Bin], z: &[Bin], estimator: Estimator) -> Result<f64> {
    Ok(conditional_mi_with(x, y, z, estimator)? - mutual_information_with(x, y, estimator)?)
}

/// MI, CMI and interaction information for one `(x, y | z)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiTriple {
    pub mi: f64,
    pub cmi: f64,
    pub ii: f64,
}

pub fn mi_triple(x: &[Bin], y: &[Bin], z: &[Bin], estimator: Estimator) -> Result<MiTriple> {
    let mi = mutual_information_with(x, y, estimator)?;
    let cmi = conditional_mi_with(x, y, z, estimator)?;
    Ok(MiTriple { mi, cmi, ii: cmi - mi })
}
