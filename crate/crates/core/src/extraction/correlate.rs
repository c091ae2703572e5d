use nalgebra::DMatrix;

use super::select::{argmax, ChirpSet};
use super::ExtractionError;

/// Pairwise chirp similarity in magnitude and in LOS phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub module_corr: DMatrix<f64>,
    pub phase_corr: DMatrix<f64>,
    pub los_bin: usize,
}

/// Pearson correlation between the magnitude profiles of every pair of chirps.
pub fn module_correlation(set: &ChirpSet) -> Result<DMatrix<f64>, ExtractionError> {
    let n = set.len();
    let centred: Vec<(Vec<f64>, f64)> = set
        .chirps
        .iter()
        .zip(&set.source_indices)
        .map(|(c, &src)| {
            let mags: Vec<f64> = c.iter().map(|z| z.norm()).collect();
            let mean = mags.iter().sum::<f64>() / mags.len().max(1) as f64;
            let d: Vec<f64> = mags.iter().map(|m| m - mean).collect();
            let ss = d.iter().map(|x| x * x).sum::<f64>();
            if ss > 0.0 {
                Ok((d, ss.sqrt()))
            } else {
                Err(ExtractionError::DegenerateChirp { chirp: src })
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(symmetric(n, |i, j| {
        let (a, na) = &centred[i];
        let (b, nb) = &centred[j];
        let r = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
        r.clamp(-1.0, 1.0)
    }))
}

/// Cosine of the phase difference at the LOS bin and its two neighbours,
/// weighted by mean power. The LOS bin is the bin of maximum mean power.
pub fn phase_correlation(set: &ChirpSet) -> Result<(DMatrix<f64>, usize), ExtractionError> {
    let n_bins = set.n_bins();
    if n_bins == 0 {
        return Err(ExtractionError::invalid("chirps", "empty chirp set"));
    }
    let power = set.mean_power();
    let los = argmax(&power);
    let bins: Vec<usize> = [los as isize - 1, los as isize, los as isize + 1]
        .into_iter()
        .filter(|&b| b >= 0 && (b as usize) < n_bins)
        .map(|b| b as usize)
        .collect();
    for (c, &src) in set.chirps.iter().zip(&set.source_indices) {
        if bins.iter().all(|&b| c[b].norm() == 0.0) {
            return Err(ExtractionError::DegenerateChirp { chirp: src });
        }
    }
    let m = symmetric(set.len(), |i, j| {
        let (mut num, mut den) = (0.0, 0.0);
        for &b in &bins {
            let (x, y) = (set.chirps[i][b], set.chirps[j][b]);
            if x.norm() == 0.0 || y.norm() == 0.0 {
                continue;
            }
            let cos = (x * y.conj()).re / (x.norm() * y.norm());
            num += power[b] * cos;
            den += power[b];
        }
        if den > 0.0 {
            (num / den).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    });
    Ok((m, los))
}

pub fn correlate(set: &ChirpSet) -> Result<CorrelationReport, ExtractionError> {
    let module_corr = module_correlation(set)?;
    let (phase_corr, los_bin) = phase_correlation(set)?;
    Ok(CorrelationReport {
        module_corr,
        phase_corr,
        los_bin,
    })
}

/// Element-wise mean of per-antenna reports. The LOS bin is taken from the first.
pub fn average_reports(reports: &[CorrelationReport]) -> Option<CorrelationReport> {
    let first = reports.first()?;
    let k = reports.len() as f64;
    let sum = |f: fn(&CorrelationReport) -> &DMatrix<f64>| {
        reports.iter().skip(1).fold(f(first).clone(), |acc, r| acc + f(r)) / k
    };
    Some(CorrelationReport {
        module_corr: sum(|r| &r.module_corr),
        phase_corr: sum(|r| &r.phase_corr),
        los_bin: first.los_bin,
    })
}

fn symmetric(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = f(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}
