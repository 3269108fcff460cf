use std::f64::consts::PI;

pub const PEAK_GRID_POINTS: usize = 201;

const MIN_BANDWIDTH: f64 = 0.01;
const PROMINENCE_FLOOR: f64 = 0.1;

/// Silverman's rule of thumb, `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, floored at 0.01.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return MIN_BANDWIDTH;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    (0.9 * spread * (n as f64).powf(-0.2)).max(MIN_BANDWIDTH)
}

/// Linear-interpolated quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn gaussian_kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    grid.iter()
        .map(|&g| {
            values
                .iter()
                .map(|&v| {
                    let z = (g - v) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Indices of local maxima. A plateau counts once (at its midpoint);
/// positions outside the slice count as negative infinity.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < y.len() {
        let mut j = i;
        while j + 1 < y.len() && y[j + 1] == y[i] {
            j += 1;
        }
        let left_lower = i == 0 || y[i - 1] < y[i];
        let right_lower = j + 1 == y.len() || y[j + 1] < y[j];
        if left_lower && right_lower {
            out.push((i + j) / 2);
        }
        i = j + 1;
    }
    out
}

/// Number of opinion clusters: KDE modes on `[-1, 1]` above 10% of the tallest.
pub fn opinion_peaks(opinions: &[f64]) -> usize {
    if opinions.is_empty() {
        return 0;
    }
    let grid: Vec<f64> = (0..PEAK_GRID_POINTS)
        .map(|k| -1.0 + 2.0 * k as f64 / (PEAK_GRID_POINTS - 1) as f64)
        .collect();
    let density = gaussian_kde(opinions, silverman_bandwidth(opinions), &grid);
    let top = density.iter().copied().fold(0.0, f64::max);
    local_maxima(&density)
        .into_iter()
        .filter(|&i| density[i] >= PROMINENCE_FLOOR * top)
        .count()
}
