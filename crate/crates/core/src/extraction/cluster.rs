use nalgebra::DMatrix;
use num_complex::Complex64;

use super::select::ChirpSet;
use super::ExtractionError;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Positions of the members within the chirp set.
    pub members: Vec<usize>,
    /// Frame chirp indices of the members.
    pub source_indices: Vec<usize>,
    /// Complex mean of the members' range profiles.
    pub profile: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub rx: usize,
    /// Largest first; ties broken by the lowest member position.
    pub clusters: Vec<Cluster>,
    pub module_thresh: f64,
    pub phase_thresh: f64,
}

/// Groups coherent chirps.
///
/// Two chirps are linked when both their module and phase correlations reach
/// the thresholds; clusters are the connected components of that graph and
/// each is summarised by the complex mean of its members.
pub fn cluster_chirps(
    module_corr: &DMatrix<f64>,
    phase_corr: &DMatrix<f64>,
    module_thresh: f64,
    phase_thresh: f64,
    set: &ChirpSet,
) -> Result<ClusterSet, ExtractionError> {
    check_threshold("module_thresh", module_thresh)?;
    check_threshold("phase_thresh", phase_thresh)?;
    let n = set.len();
    if module_corr.shape() != (n, n) || phase_corr.shape() != (n, n) {
        return Err(ExtractionError::invalid(
            "correlation matrices",
            format!("expected {n}x{n} for {n} chirps"),
        ));
    }
    let groups = components(n, |i, j| module_corr[(i, j)] >= module_thresh && phase_corr[(i, j)] >= phase_thresh);
    let clusters = groups
        .into_iter()
        .map(|members| Cluster {
            source_indices: members.iter().map(|&m| set.source_indices[m]).collect(),
            profile: complex_mean(members.iter().map(|&m| set.chirps[m].as_slice()), set.n_bins()),
            members,
        })
        .collect();
    Ok(ClusterSet {
        rx: set.rx,
        clusters,
        module_thresh,
        phase_thresh,
    })
}

pub(crate) fn check_threshold(name: &'static str, v: f64) -> Result<(), ExtractionError> {
    if (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ExtractionError::invalid(name, format!("{v} is outside [-1, 1]")))
    }
}

/// Connected components, each sorted, ordered by size (desc) then first member.
fn components(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut groups = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX && linked(i, j) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    groups
}

pub(crate) fn complex_mean<'a>(rows: impl Iterator<Item = &'a [Complex64]>, n: usize) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut count = 0usize;
    for r in rows {
        for (a, z) in acc.iter_mut().zip(r) {
            *a += z;
        }
        count += 1;
    }
    if count > 0 {
        let inv = 1.0 / count as f64;
        acc.iter_mut().for_each(|a| *a *= inv);
    }
    acc
}
