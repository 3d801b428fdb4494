//! Locally weighted scatterplot smoothing with a tricube kernel and one
//! local-linear pass, for covariate vectors of any fixed dimension.

use super::RobustnessError;

/// Minimum observations for a meaningful local fit.
pub const MIN_POINTS: usize = 5;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

/// Solves the small weighted least-squares normal equations by Gaussian
/// elimination with partial pivoting; `None` on rank deficiency.
fn solve_normal_equations(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale: f64 = m
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut beta = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = rhs[col];
        for k in col + 1..n {
            v -= m[col][k] * beta[k];
        }
        beta[col] = v / m[col][col];
    }
    Some(beta)
}

/// Local-linear prediction at one query point. Centering the design at the
/// query makes the intercept the fitted value; falls back to the weighted
/// mean when the local design is singular.
fn fit_at(train_x: &[Vec<f64>], train_y: &[f64], query: &[f64], span: f64) -> f64 {
    let n = train_x.len();
    let d = query.len();
    let k = ((span * n as f64).ceil() as usize).clamp(2, n);

    let mut dist: Vec<f64> = train_x.iter().map(|x| euclidean(x, query)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
    let h = dist[order[k - 1]];

    if h == 0.0 {
        // all selected neighbours coincide with the query
        let ties: Vec<usize> = order.iter().copied().filter(|&i| dist[i] == 0.0).collect();
        return ties.iter().map(|&i| train_y[i]).sum::<f64>() / ties.len() as f64;
    }
    for v in dist.iter_mut() {
        *v = tricube(*v / h);
    }

    // weighted normal equations for [1, x - query]
    let p = d + 1;
    let mut m = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    let mut wsum = 0.0;
    let mut wy = 0.0;
    for i in 0..n {
        let w = dist[i];
        if w == 0.0 {
            continue;
        }
        let mut row = Vec::with_capacity(p);
        row.push(1.0);
        for j in 0..d {
            row.push(train_x[i][j] - query[j]);
        }
        for a in 0..p {
            for b in 0..p {
                m[a][b] += w * row[a] * row[b];
            }
            rhs[a] += w * row[a] * train_y[i];
        }
        wsum += w;
        wy += w * train_y[i];
    }
    match solve_normal_equations(m, rhs) {
        Some(beta) => beta[0],
        None => wy / wsum,
    }
}

/// Fitted values at each training point.
pub fn lowess(xs: &[Vec<f64>], ys: &[f64], span: f64) -> Result<Vec<f64>, RobustnessError> {
    if xs.len() != ys.len() {
        return Err(RobustnessError::DomainError(format!(
            "{} covariate vectors vs {} responses",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < MIN_POINTS {
        return Err(RobustnessError::TooFewPoints {
            got: xs.len(),
            need: MIN_POINTS,
        });
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(RobustnessError::DomainError(format!(
            "span must lie in (0,1], got {span}"
        )));
    }
    let d = xs[0].len();
    if d == 0 || xs.iter().any(|x| x.len() != d) {
        return Err(RobustnessError::DomainError(
            "covariate vectors must share a positive dimension".to_string(),
        ));
    }
    Ok(xs.iter().map(|q| fit_at(xs, ys, q, span)).collect())
}

/// Fitted values at arbitrary query points (used by the bootstrap, which
/// re-smooths resampled players but predicts at the original ones).
pub fn lowess_at(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    queries: &[Vec<f64>],
    span: f64,
) -> Vec<f64> {
    queries
        .iter()
        .map(|q| fit_at(train_x, train_y, q, span))
        .collect()
}
