//! Pairwise robust tests and crit-minimizing selection.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{Density, DensityTable};
use crate::error::{DppError, Result};
use crate::estimator::candidates::CandidateFamily;
use crate::ground::Config;
use crate::sampling::SampleSet;

/// One summand of the test statistic; 0 when both densities vanish.
fn term(u: f64, v: f64) -> f64 {
    let s = u + v;
    if s == 0.0 {
        0.0
    } else {
        (v.sqrt() - u.sqrt()) / s.sqrt()
    }
}

/// `T(u, v) = Σ_i (√v(N_i) − √u(N_i)) / √(u(N_i) + v(N_i))`. Positive values favour `v`.
pub fn test_statistic(u: &DensityTable, v: &DensityTable, samples: &SampleSet) -> Result<f64> {
    if u.ground() != v.ground() || u.ground().size() != samples.ground.size() {
        return Err(DppError::DimensionMismatch(
            "tables and samples must share a ground set".into(),
        ));
    }
    Ok(statistic_from_counts(
        &samples.counts(),
        |c| u.get(c),
        |c| v.get(c),
    ))
}

fn statistic_from_counts(
    counts: &[(Config, usize)],
    u: impl Fn(Config) -> f64,
    v: impl Fn(Config) -> f64,
) -> f64 {
    counts
        .iter()
        .map(|&(c, k)| k as f64 * term(u(c), v(c)))
        .sum()
}

/// Outcome of [`select`].
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub chosen: usize,
    /// `crit(u) = max{h(u, v) : v beats u}`, 0 when nothing beats `u`.
    pub crit: Vec<f64>,
    /// `test_matrix[u][v] = 1` when `v` beats `u`, `-1` when `u` beats `v`, 0 on the diagonal.
    pub test_matrix: Vec<Vec<i8>>,
}

impl SelectionResult {
    /// Square CSV: header `candidate,0,1,…`, then one row per `u`.
    pub fn write_matrix_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.test_matrix.len();
        let header: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        writeln!(out, "candidate,{}", header.join(","))?;
        for (u, row) in self.test_matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{u},{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn is_antisymmetric(&self) -> bool {
        let m = &self.test_matrix;
        (0..m.len()).all(|u| (0..m.len()).all(|v| m[u][v] == -m[v][u]))
    }
}

/// Square roots of a density table restricted to its support, ascending by index.
struct SparseRoot {
    entries: Vec<(u32, f64)>,
}

impl SparseRoot {
    fn new(table: &DensityTable) -> Self {
        let entries = table
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (i as u32, v.sqrt()))
            .collect();
        Self { entries }
    }

    fn h2(&self, other: &SparseRoot) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(&(ia, va)), Some(&(ib, vb))) => match ia.cmp(&ib) {
                    Ordering::Less => {
                        i += 1;
                        va
                    }
                    Ordering::Greater => {
                        j += 1;
                        vb
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        va - vb
                    }
                },
                (Some(&(_, va)), None) => {
                    i += 1;
                    va
                }
                (None, Some(&(_, vb))) => {
                    j += 1;
                    vb
                }
                (None, None) => unreachable!(),
            };
            sum += d * d;
        }
        (0.5 * sum).clamp(0.0, 1.0)
    }
}

/// Runs every pairwise test and returns the crit-minimizer. `v` beats `u` iff
/// `T(u, v) > 0`; exact ties go to the larger prior, then to the lower index. The
/// minimizer of crit is chosen with the same tie rule.
pub fn select(family: &CandidateFamily, samples: &SampleSet) -> Result<SelectionResult> {
    let tables = family
        .entries()
        .par_iter()
        .map(|c| c.density.table())
        .collect::<Result<Vec<_>>>()?;
    select_tables(&tables, &family.priors(), samples)
}

/// [`select`] over explicit tables and prior weights.
pub fn select_tables(
    tables: &[DensityTable],
    priors: &[f64],
    samples: &SampleSet,
) -> Result<SelectionResult> {
    let Some(first) = tables.first() else {
        return Err(DppError::EmptyFamily("nothing to select from".into()));
    };
    if priors.len() != tables.len() {
        return Err(DppError::DimensionMismatch(format!(
            "{} priors for {} candidates",
            priors.len(),
            tables.len()
        )));
    }
    if tables.iter().any(|t| t.ground() != first.ground())
        || first.ground().size() != samples.ground.size()
    {
        return Err(DppError::DimensionMismatch(
            "candidates and samples must share a ground set".into(),
        ));
    }
    let counts = samples.counts();
    let at_samples: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| counts.iter().map(|&(c, _)| t.get(c)).collect())
        .collect();
    let roots: Vec<SparseRoot> = tables.par_iter().map(SparseRoot::new).collect();
    let weights: Vec<f64> = counts.iter().map(|&(_, k)| k as f64).collect();
    let m = tables.len();

    let rows: Vec<(Vec<i8>, f64)> = (0..m)
        .into_par_iter()
        .map(|u| {
            let mut row = vec![0i8; m];
            let mut crit = 0.0f64;
            for v in 0..m {
                if u == v {
                    continue;
                }
                let t: f64 = weights
                    .iter()
                    .zip(at_samples[u].iter().zip(&at_samples[v]))
                    .map(|(&k, (&pu, &pv))| k * term(pu, pv))
                    .sum();
                let v_wins = if t != 0.0 {
                    t > 0.0
                } else {
                    prefers(v, u, priors)
                };
                if v_wins {
                    row[v] = 1;
                    crit = crit.max(roots[u].h2(&roots[v]).sqrt());
                } else {
                    row[v] = -1;
                }
            }
            (row, crit)
        })
        .collect();

    let (test_matrix, crit): (Vec<Vec<i8>>, Vec<f64>) = rows.into_iter().unzip();
    let chosen = (1..m).fold(0, |best, u| {
        if crit[u] < crit[best] || (crit[u] == crit[best] && prefers(u, best, priors)) {
            u
        } else {
            best
        }
    });
    Ok(SelectionResult {
        chosen,
        crit,
        test_matrix,
    })
}

/// Tie rule: larger prior first, then lower index.
fn prefers(a: usize, b: usize, priors: &[f64]) -> bool {
    match priors[a].partial_cmp(&priors[b]) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => a < b,
    }
}
