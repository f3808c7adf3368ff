use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::codes::BitString;
use crate::matmul::DepthHistogram;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeMean {
    pub size: u64,
    pub count: u64,
    pub mean: f64,
}

/// Least-squares line through `(ln size, ln mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log space.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: u64,
    pub mean: f64,
    /// Sample standard deviation; absent for fewer than two values.
    pub std_dev: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub per_size: Vec<SizeMean>,
    /// Present when at least two distinct sizes have positive means.
    pub slope: Option<SlopeFit>,
}

fn mean_of(sorted: &[f64]) -> f64 {
    sorted.iter().sum::<f64>() / sorted.len() as f64
}

/// Fits `ln y = slope · ln x + intercept` by least squares.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Some(SlopeFit { slope, intercept, residual: (sse / k).sqrt() })
}

/// Statistics of `(size, value)` pairs; the result does not depend on their order.
pub fn summarize(points: &[(u64, f64)]) -> Result<StatSummary, HarnessError> {
    if points.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let values: Vec<f64> = {
        let mut v: Vec<f64> = sorted.iter().map(|p| p.1).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let count = values.len();
    let mean = mean_of(&values);
    let std_dev = (count > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (count - 1) as f64).sqrt()
    });
    let per_size: Vec<SizeMean> = sorted
        .chunk_by(|a, b| a.0 == b.0)
        .map(|group| {
            let vals: Vec<f64> = group.iter().map(|p| p.1).collect();
            SizeMean { size: group[0].0, count: group.len() as u64, mean: mean_of(&vals) }
        })
        .collect();
    let slope = log_log_fit(&per_size.iter().map(|s| (s.size as f64, s.mean)).collect::<Vec<_>>());
    Ok(StatSummary { count: count as u64, mean, std_dev, min: values[0], max: values[count - 1], per_size, slope })
}

/// Reads `size_column` and `measure_column` from CSV with a header row and summarizes them.
pub fn summarize_csv<R: Read>(reader: R, size_column: &str, measure_column: &str) -> Result<StatSummary, HarnessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| HarnessError::InvalidConfig(format!("no column {name:?}")))
    };
    let (si, mi) = (find(size_column)?, find(measure_column)?);
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let parse = |i: usize| {
            record.get(i).unwrap_or("").parse::<f64>().map_err(|e| HarnessError::InvalidConfig(e.to_string()))
        };
        points.push((parse(si)? as u64, parse(mi)?));
    }
    summarize(&points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStats {
    pub len: usize,
    /// `|#ones − n/2|`.
    pub ones_deviation: f64,
    /// Pairs `(x_{2i−1}, x_{2i})` with different bits.
    pub discordant_pairs: usize,
    /// Depth of the first one along each probe list (1-based positions into `x`).
    pub first_one_depths: DepthHistogram,
}

pub fn block_stats(x: &BitString, probe_lists: &[Vec<usize>]) -> BlockStats {
    let bits = x.as_slice();
    let ones = x.count_ones();
    let discordant_pairs = bits.chunks_exact(2).filter(|p| p[0] != p[1]).count();
    let mut first_one_depths = DepthHistogram::default();
    for list in probe_lists {
        let depth = list.iter().position(|&p| p >= 1 && x.get(p - 1) == Some(true));
        first_one_depths.record(depth.map(|d| d as u32 + 1));
    }
    BlockStats {
        len: x.len(),
        ones_deviation: (ones as f64 - x.len() as f64 / 2.0).abs(),
        discordant_pairs,
        first_one_depths,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_bits, stream};

    #[test]
    fn single_value() {
        let s = summarize(&[(4, 7.5)]).unwrap();
        assert_eq!((s.count, s.mean, s.min, s.max), (1, 7.5, 7.5, 7.5));
        assert_eq!(s.std_dev, None);
        assert_eq!(s.slope, None);
        assert!(matches!(summarize(&[]), Err(HarnessError::EmptyInput)));
    }

    #[test]
    fn slope_two() {
        let s = summarize(&[(2, 4.0), (4, 16.0)]).unwrap();
        let fit = s.slope.unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn order_independent() {
        let mut rng = stream(1, 1);
        let points: Vec<(u64, f64)> =
            (0..200).map(|i| (8 << (i % 4), (rand::RngCore::next_u32(&mut rng) % 1000) as f64 / 7.0)).collect();
        let mut shuffled = points.clone();
        shuffled.reverse();
        shuffled.rotate_left(37);
        assert_eq!(summarize(&points).unwrap(), summarize(&shuffled).unwrap());
    }

    #[test]
    fn std_dev_matches_definition() {
        let s = summarize(&[(1, 2.0), (1, 4.0), (1, 4.0), (1, 4.0), (1, 5.0), (1, 5.0), (1, 7.0), (1, 9.0)]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.std_dev.unwrap() - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let data = "n,trial,probes\n2,0,3\n2,1,5\n4,0,16\n";
        let s = summarize_csv(data.as_bytes(), "n", "probes").unwrap();
        assert_eq!(
            s.per_size,
            vec![SizeMean { size: 2, count: 2, mean: 4.0 }, SizeMean { size: 4, count: 1, mean: 16.0 }]
        );
        assert!(summarize_csv(data.as_bytes(), "n", "missing").is_err());
    }

    #[test]
    fn block_examples() {
        let s = block_stats(&"0101".parse().unwrap(), &[]);
        assert_eq!((s.ones_deviation, s.discordant_pairs), (0.0, 2));
        let s = block_stats(&BitString::repeat(true, 10), &[vec![3, 4], vec![]]);
        assert_eq!((s.ones_deviation, s.discordant_pairs), (5.0, 0));
        assert_eq!(s.first_one_depths.count(1), 1);
        assert_eq!(s.first_one_depths.unresolved, 1);
    }

    #[test]
    fn discordant_mean_concentrates() {
        let mut rng = stream(2, 2);
        let trials = 2000;
        let total: usize = (0..trials).map(|_| block_stats(&random_bits(&mut rng, 4096), &[]).discordant_pairs).sum();
        let mean = total as f64 / trials as f64;
        // Binomial(2048, 1/2): sd 22.6, standard error 0.51.
        assert!((mean - 1024.0).abs() <= 3.0 * 22.63 / (trials as f64).sqrt(), "{mean}");
    }

    #[test]
    fn ones_deviation_tail() {
        // |ones − n/2| > 3√n is six standard deviations; allow 1% of trials.
        let n = 1024;
        let over = (0..10_000u64)
            .filter(|&t| block_stats(&crate::rng::seeded_bits(3, t, n), &[]).ones_deviation > 3.0 * (n as f64).sqrt())
            .count();
        assert!(over <= 100, "{over}");
    }
}
