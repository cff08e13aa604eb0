//! Spatial decay curve `Δ(d) = α + β·exp(−κd) + γ·hops + ε`.
//!
//! Given κ the model is linear in (α, β, γ), so the residual sum of squares
//! profiles out to a function of κ alone. That function is scanned on a
//! log-spaced grid and the best grid cell refined by golden-section search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bootstrap::block_bootstrap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayObservation {
    pub distance_km: f64,
    /// Shortest-path hop count between the pair.
    pub network_distance: f64,
    pub delta_outcome: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub grid_points: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// Golden-section stops once the bracket is this narrow relative to κ.
    pub relative_width: f64,
    /// Replications for the κ interval; 0 skips the bootstrap.
    pub bootstrap_reps: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            grid_points: 60,
            kappa_min: 1e-7,
            kappa_max: 1.0,
            relative_width: 1e-4,
            bootstrap_reps: 200,
            level: 0.95,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub gamma_net: f64,
    pub kappa_ci: (f64, f64),
    /// Distance at which the decay term falls to 1% of its origin value,
    /// `ln(100) / κ`, in km.
    pub d_star: f64,
    pub r_squared: f64,
    pub rss: f64,
    /// `false` when the profile is flat, meaning κ is not identified by the
    /// data. The interval then spans the whole search range.
    pub identified: bool,
    /// `(κ, RSS)` at every grid point.
    pub profile: Vec<(f64, f64)>,
    pub n_obs: usize,
}

struct Profile<'a> {
    obs: &'a [DecayObservation],
    y: DVector<f64>,
}

impl<'a> Profile<'a> {
    fn new(obs: &'a [DecayObservation]) -> Self {
        let y = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.delta_outcome));
        Self { obs, y }
    }

    /// Least-squares `(α, β, γ)` and RSS at fixed κ.
    fn solve(&self, kappa: f64) -> ([f64; 3], f64) {
        let n = self.obs.len();
        let x = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => (-kappa * self.obs[i].distance_km).exp(),
            _ => self.obs[i].network_distance,
        });
        let svd = x.clone().svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let coef = svd.solve(&self.y, cutoff).unwrap_or_else(|_| DVector::zeros(3));
        let rss = (&self.y - x * &coef).norm_squared();
        ([coef[0], coef[1], coef[2]], rss)
    }

    fn rss(&self, kappa: f64) -> f64 {
        self.solve(kappa).1
    }
}

fn log_grid(opts: &DecayOptions) -> Vec<f64> {
    let (a, b) = (opts.kappa_min.ln(), opts.kappa_max.ln());
    let m = opts.grid_points;
    (0..m).map(|k| (a + (b - a) * k as f64 / (m - 1) as f64).exp()).collect()
}

/// Best κ: grid scan then golden-section in log κ around the best cell.
fn profile_min(profile: &Profile<'_>, grid: &[f64], opts: &DecayOptions) -> (f64, Vec<(f64, f64)>) {
    let values: Vec<(f64, f64)> = grid.iter().map(|&k| (k, profile.rss(k))).collect();
    let best = (0..values.len()).min_by(|&i, &j| values[i].1.total_cmp(&values[j].1)).unwrap_or(0);
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let f = |u: f64| profile.rss(u.exp());
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    // in log space the relative width of the κ bracket is about b − a
    while b - a > opts.relative_width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let (u, fu) = if fc <= fd { (c, fc) } else { (d, fd) };
    let kappa = if fu <= values[best].1 { u.exp() } else { values[best].0 };
    (kappa, values)
}

/// Fits the decay curve by profile least squares.
///
/// Needs at least 10 observations with positive distances spanning a factor of
/// 10 or more; anything less raises [`Error::Identification`].
pub fn fit_spatial_decay(obs: &[DecayObservation], opts: &DecayOptions) -> Result<DecayFit> {
    if obs.len() < 10 {
        return Err(Error::Identification(format!("{} observations; need at least 10", obs.len())));
    }
    if obs.iter().any(|o| !(o.distance_km.is_finite() && o.network_distance.is_finite() && o.delta_outcome.is_finite())) {
        return Err(Error::InvalidInput("decay observations must be finite".into()));
    }
    let dmin = obs.iter().map(|o| o.distance_km).fold(f64::INFINITY, f64::min);
    let dmax = obs.iter().map(|o| o.distance_km).fold(0.0, f64::max);
    if !(dmin > 0.0) || dmax < 10.0 * dmin {
        return Err(Error::Identification(format!(
            "distances span [{dmin}, {dmax}] km; need positive distances covering at least one decade"
        )));
    }
    if !(opts.kappa_min > 0.0 && opts.kappa_max > opts.kappa_min && opts.grid_points >= 3) {
        return Err(Error::Param("kappa grid needs 0 < kappa_min < kappa_max and at least 3 points".into()));
    }

    let profile = Profile::new(obs);
    let grid = log_grid(opts);
    let (kappa, values) = profile_min(&profile, &grid, opts);
    let ([alpha, beta, gamma_net], rss) = profile.solve(kappa);
    let mean = profile.y.mean();
    let tss: f64 = profile.y.iter().map(|v| (v - mean).powi(2)).sum();
    let spread = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max)
        - values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let identified = spread > 1e-8 * tss;

    let kappa_ci = if !identified {
        (opts.kappa_min, opts.kappa_max)
    } else if opts.bootstrap_reps >= 2 {
        let draws = block_bootstrap(obs.len(), opts.bootstrap_reps, opts.seed, |idx| {
            let sample: Vec<DecayObservation> = idx.iter().map(|&i| obs[i]).collect();
            Ok(vec![profile_min(&Profile::new(&sample), &grid, opts).0])
        })?;
        draws.percentile_ci(0, opts.level)
    } else {
        (kappa, kappa)
    };

    Ok(DecayFit {
        alpha,
        beta,
        kappa,
        gamma_net,
        kappa_ci,
        d_star: 100f64.ln() / kappa,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        rss,
        identified,
        profile: values,
        n_obs: obs.len(),
    })
}
