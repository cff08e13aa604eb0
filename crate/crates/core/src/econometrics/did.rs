//! Difference-in-differences estimators on the quarterly network series.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::bootstrap::{block_bootstrap, stratified_bootstrap, BootstrapDraws};
use super::ols::{ols, OlsFit};
use super::{t_p_value, CoefficientEstimate, EstimateReport, JointTest, PanelSeries};
use crate::error::{Error, Result};
use crate::graph::Quarter;

const LEVEL: f64 = 0.95;
const MIN_SIDE: usize = 3;

/// Regressors evaluated on a subset of panel rows.
struct Design {
    names: Vec<String>,
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Design {
    /// `columns` hold full-panel series; `rows` selects the estimation sample.
    fn new(panel: &PanelSeries, rows: &[usize], columns: Vec<(String, Vec<f64>)>) -> Self {
        let x = DMatrix::from_fn(rows.len(), columns.len(), |r, c| columns[c].1[rows[r]]);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&r| panel.lambda2[r]));
        Self { names: columns.into_iter().map(|(n, _)| n).collect(), x, y }
    }

    fn fit(&self) -> Result<OlsFit> {
        ols(&self.x, &self.y, &self.names)
    }

    fn fit_rows(&self, idx: &[usize]) -> Result<Vec<f64>> {
        let x = self.x.select_rows(idx);
        let y = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.y[i]));
        Ok(ols(&x, &y, &self.names)?.coefficients.iter().copied().collect())
    }

    fn without(&self, drop: &[usize]) -> Design {
        let keep: Vec<usize> = (0..self.names.len()).filter(|k| !drop.contains(k)).collect();
        Design {
            names: keep.iter().map(|&k| self.names[k].clone()).collect(),
            x: self.x.select_columns(&keep),
            y: self.y.clone(),
        }
    }

    fn dof(&self) -> usize {
        self.y.len() - self.names.len()
    }
}

fn control_columns(panel: &PanelSeries, controls: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    controls.iter().map(|c| Ok((c.clone(), panel.control(c)?))).collect()
}

fn constant(panel: &PanelSeries) -> (String, Vec<f64>) {
    ("const".into(), vec![1.0; panel.len()])
}

fn indicator(panel: &PanelSeries, name: String, f: impl Fn(Quarter) -> bool) -> (String, Vec<f64>) {
    (name, panel.quarters.iter().map(|&q| if f(q) { 1.0 } else { 0.0 }).collect())
}

fn summarize(names: &[String], fit: &OlsFit, draws: &BootstrapDraws, dof: usize) -> Vec<CoefficientEstimate> {
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let estimate = fit.coefficients[k];
            let std_error = draws.std_error(k);
            let (ci_low, ci_high) = draws.percentile_ci(k, LEVEL);
            CoefficientEstimate {
                name: name.clone(),
                estimate,
                std_error,
                ci_low,
                ci_high,
                p_value: t_p_value(estimate, std_error, dof),
            }
        })
        .collect()
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::Param(format!("need at least 2 bootstrap replications, got {reps}")));
    }
    Ok(())
}

/// `y* = base + √(n/(n−k)) · e[idx]`: fixed-design residual resampling.
fn residual_draws<F>(base: &DVector<f64>, resid: &DVector<f64>, k: usize, reps: usize, seed: u64, f: F) -> Result<BootstrapDraws>
where
    F: Fn(&DVector<f64>) -> Result<Vec<f64>> + Sync,
{
    let n = resid.len();
    let inflate = (n as f64 / (n - k) as f64).sqrt();
    block_bootstrap(n, reps, seed, |idx| {
        let y = DVector::from_iterator(n, (0..n).map(|i| base[i] + inflate * resid[idx[i]]));
        f(&y)
    })
}

fn f_statistic(rss_restricted: f64, rss_full: f64, q: usize, dof: usize) -> f64 {
    let num = (rss_restricted - rss_full).max(0.0) / q as f64;
    let den = rss_full / dof as f64;
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Classical F test that the columns `tested` are jointly zero, with a
/// bootstrap p-value from residuals resampled under the null.
fn joint_test(design: &Design, full: &OlsFit, tested: &[usize], reps: usize, seed: u64) -> Result<JointTest> {
    let restricted = design.without(tested);
    let rfit = restricted.fit()?;
    let q = tested.len();
    let dof = design.dof();
    let f_stat = f_statistic(rfit.rss, full.rss, q, dof);
    let p_value = match FisherSnedecor::new(q as f64, dof as f64) {
        Ok(dist) if f_stat.is_finite() => dist.sf(f_stat),
        _ => 0.0,
    };
    let draws = residual_draws(&rfit.fitted, &rfit.residuals, restricted.names.len(), reps, seed, |y| {
        let u = ols(&design.x, y, &design.names)?.rss;
        let r = ols(&restricted.x, y, &restricted.names)?.rss;
        Ok(vec![f_statistic(r, u, q, dof)])
    })?;
    let exceed = draws.estimates.iter().filter(|e| e[0] >= f_stat).count();
    Ok(JointTest {
        coefficients: tested.iter().map(|&k| design.names[k].clone()).collect(),
        f_stat,
        df1: q,
        df2: dof,
        p_value,
        bootstrap_p: Some((exceed + 1) as f64 / (draws.estimates.len() + 1) as f64),
    })
}

fn side_counts(panel: &PanelSeries, rows: &[usize], brk: Quarter) -> (usize, usize) {
    let pre = rows.iter().filter(|&&r| panel.quarters[r] < brk).count();
    let post = rows.iter().filter(|&&r| panel.quarters[r] > brk).count();
    (pre, post)
}

/// DID on `rows` with the post-period starting after `brk`.
fn did_on_rows(
    panel: &PanelSeries,
    rows: Vec<usize>,
    brk: Quarter,
    controls: &[String],
    reps: usize,
    seed: u64,
    estimator: &str,
) -> Result<EstimateReport> {
    check_reps(reps)?;
    let rows: Vec<usize> = rows.into_iter().filter(|&r| panel.quarters[r] != brk).collect();
    let (pre, post) = side_counts(panel, &rows, brk);
    if pre < MIN_SIDE || post < MIN_SIDE {
        return Err(Error::Window(format!(
            "break {brk} leaves {pre} quarters before and {post} after; need {MIN_SIDE} on each side"
        )));
    }
    let mut columns = vec![constant(panel), indicator(panel, "post".into(), |q| q > brk)];
    columns.extend(control_columns(panel, controls)?);
    let design = Design::new(panel, &rows, columns);
    let fit = design.fit()?;
    let draws = block_bootstrap(rows.len(), reps, seed, |idx| design.fit_rows(idx))?;
    Ok(EstimateReport {
        estimator: estimator.into(),
        coefficients: summarize(&design.names, &fit, &draws, design.dof()),
        r_squared: fit.r_squared,
        n_obs: rows.len(),
        bootstrap_reps: reps,
        bootstrap_failures: draws.failures,
        seed,
        break_quarter: Some(brk),
        joint_test: None,
    })
}

/// Network-level DID: `λ₂,t = α + β·Post_t + γ′X_t + ε_t` with a
/// quarter-resampling bootstrap.
///
/// The crisis quarter itself is left out; `Post` is 1 for later quarters.
pub fn spatial_did(panel: &PanelSeries, controls: &[String], reps: usize, seed: u64) -> Result<EstimateReport> {
    did_on_rows(panel, (0..panel.len()).collect(), panel.crisis_quarter, controls, reps, seed, "spatial_did")
}

/// Event year of quarter `q`: year-long bins counted from the crisis quarter,
/// with bin 0 holding the crisis quarter and the three after it.
fn event_year(q: Quarter, crisis: Quarter) -> i32 {
    (q.0 - crisis.0).div_euclid(4)
}

/// Event study with one indicator per event year in `[-before, after]`,
/// omitting year −1 (reported as exactly zero).
///
/// Bootstrap replications resample quarters within each event year so that no
/// indicator loses its support. The joint test covers every event-year
/// coefficient.
pub fn event_study(
    panel: &PanelSeries,
    window: (i32, i32),
    controls: &[String],
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    check_reps(reps)?;
    let (before, after) = window;
    let crisis = panel.crisis_quarter;
    if before < 1 || after < 0 {
        return Err(Error::Window(format!("window ({before}, {after}) must include event years -1 and 0")));
    }
    let (first, last) = match (panel.quarters.first(), panel.quarters.last()) {
        (Some(&f), Some(&l)) => (event_year(f, crisis), event_year(l, crisis)),
        _ => return Err(Error::Window("empty panel".into())),
    };
    if first > -before || last < after {
        return Err(Error::Window(format!(
            "window [-{before}, {after}] exceeds panel event years [{first}, {last}]"
        )));
    }
    let rows: Vec<usize> = (0..panel.len())
        .filter(|&r| {
            let q = panel.quarters[r];
            let s = event_year(q, crisis);
            q != crisis && (-before..=after).contains(&s)
        })
        .collect();
    let years: Vec<i32> = (-before..=after).collect();
    let mut strata = Vec::new();
    for &s in &years {
        let bin: Vec<usize> =
            (0..rows.len()).filter(|&i| event_year(panel.quarters[rows[i]], crisis) == s).collect();
        if bin.is_empty() {
            return Err(Error::MissingYear(s));
        }
        strata.push(bin);
    }

    let mut columns = vec![constant(panel)];
    for &s in years.iter().filter(|&&s| s != -1) {
        columns.push(indicator(panel, format!("event_{s}"), |q| q != crisis && event_year(q, crisis) == s));
    }
    columns.extend(control_columns(panel, controls)?);
    let design = Design::new(panel, &rows, columns);
    let fit = design.fit()?;
    let draws = stratified_bootstrap(&strata, reps, seed, |idx| design.fit_rows(idx))?;
    let mut coefficients = summarize(&design.names, &fit, &draws, design.dof());
    let base_pos = coefficients.iter().position(|c| c.name == "event_0").unwrap_or(1);
    coefficients.insert(
        base_pos,
        CoefficientEstimate {
            name: "event_-1".into(),
            estimate: 0.0,
            std_error: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            p_value: 1.0,
        },
    );
    let tested: Vec<usize> = (0..design.names.len()).filter(|&k| design.names[k].starts_with("event_")).collect();
    let joint = joint_test(&design, &fit, &tested, reps, crate::rng::sub_seed(seed, u64::MAX))?;
    Ok(EstimateReport {
        estimator: "event_study".into(),
        coefficients,
        r_squared: fit.r_squared,
        n_obs: rows.len(),
        bootstrap_reps: reps,
        bootstrap_failures: draws.failures,
        seed,
        break_quarter: Some(crisis),
        joint_test: Some(joint),
    })
}

/// Regression on single-quarter lead indicators (quarters `crisis − k` for each
/// `k` in `leads`) plus `Post` and controls, with a joint F test on the leads.
///
/// Inference uses fixed-design residual resampling, since a single-quarter
/// indicator has no support in most quarter resamples.
pub fn pretrends_test(
    panel: &PanelSeries,
    leads: &[i32],
    controls: &[String],
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    check_reps(reps)?;
    if leads.is_empty() {
        return Err(Error::InvalidInput("no leads requested".into()));
    }
    let crisis = panel.crisis_quarter;
    for &k in leads {
        if k < 1 {
            return Err(Error::Index(format!("lead {k} is not strictly before the crisis quarter")));
        }
        if panel.quarters.binary_search(&crisis.offset(-k)).is_err() {
            return Err(Error::Index(format!("lead {k} ({}) is outside the panel", crisis.offset(-k))));
        }
    }
    let rows: Vec<usize> = (0..panel.len()).filter(|&r| panel.quarters[r] != crisis).collect();
    let (pre, post) = side_counts(panel, &rows, crisis);
    if pre < MIN_SIDE + leads.len() || post < MIN_SIDE {
        return Err(Error::Window(format!("{pre} pre-crisis and {post} post-crisis quarters are too few")));
    }
    let mut columns = vec![constant(panel)];
    for &k in leads {
        let target = crisis.offset(-k);
        columns.push(indicator(panel, format!("lead_{k}"), move |q| q == target));
    }
    columns.push(indicator(panel, "post".into(), |q| q > crisis));
    columns.extend(control_columns(panel, controls)?);
    let design = Design::new(panel, &rows, columns);
    let fit = design.fit()?;
    let k = design.names.len();
    let draws = residual_draws(&fit.fitted, &fit.residuals, k, reps, seed, |y| {
        Ok(ols(&design.x, y, &design.names)?.coefficients.iter().copied().collect())
    })?;
    let tested: Vec<usize> = (1..=leads.len()).collect();
    let joint = joint_test(&design, &fit, &tested, reps, crate::rng::sub_seed(seed, u64::MAX))?;
    Ok(EstimateReport {
        estimator: "pretrends".into(),
        coefficients: summarize(&design.names, &fit, &draws, design.dof()),
        r_squared: fit.r_squared,
        n_obs: rows.len(),
        bootstrap_reps: reps,
        bootstrap_failures: draws.failures,
        seed,
        break_quarter: Some(crisis),
        joint_test: Some(joint),
    })
}

/// Re-estimates the DID with the break moved to each placebo date.
///
/// Pre-crisis placebos use only quarters before the true crisis, post-crisis
/// placebos only quarters after it, so the true break never enters a placebo
/// regression. A placebo at the true date uses the full panel.
pub fn placebo_test(
    panel: &PanelSeries,
    placebo_dates: &[Quarter],
    controls: &[String],
    reps: usize,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let crisis = panel.crisis_quarter;
    placebo_dates
        .iter()
        .map(|&date| {
            let rows: Vec<usize> = (0..panel.len())
                .filter(|&r| {
                    let q = panel.quarters[r];
                    match date.cmp(&crisis) {
                        std::cmp::Ordering::Less => q < crisis,
                        std::cmp::Ordering::Greater => q > crisis,
                        std::cmp::Ordering::Equal => true,
                    }
                })
                .collect();
            did_on_rows(panel, rows, date, controls, reps, seed, "placebo")
        })
        .collect()
}

/// One institution's outcome series aligned with the panel quarters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionSeries {
    pub id: String,
    pub outcomes: Vec<f64>,
}

/// Institution-level comparator that treats every institution as an
/// independent unit: the average of each institution's post-minus-pre mean
/// outcome, bootstrapped over institutions.
pub fn naive_did(
    quarters: &[Quarter],
    institutions: &[InstitutionSeries],
    crisis: Quarter,
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    check_reps(reps)?;
    const MIN_INSTITUTIONS: usize = 10;
    let m = institutions.len();
    if m < MIN_INSTITUTIONS {
        return Err(Error::SampleTooSmall(format!("{m} institutions; need at least {MIN_INSTITUTIONS}")));
    }
    let pre: Vec<usize> = (0..quarters.len()).filter(|&t| quarters[t] < crisis).collect();
    let post: Vec<usize> = (0..quarters.len()).filter(|&t| quarters[t] > crisis).collect();
    if pre.len() < MIN_SIDE || post.len() < MIN_SIDE {
        return Err(Error::Window(format!("{} pre and {} post quarters", pre.len(), post.len())));
    }
    let mean = |s: &InstitutionSeries, idx: &[usize]| idx.iter().map(|&t| s.outcomes[t]).sum::<f64>() / idx.len() as f64;
    let mut deltas = Vec::with_capacity(m);
    let (mut pooled_pre, mut pooled_post) = (0.0, 0.0);
    for s in institutions {
        if s.outcomes.len() != quarters.len() {
            return Err(Error::Shape { expected: quarters.len(), actual: s.outcomes.len() });
        }
        let (a, b) = (mean(s, &pre), mean(s, &post));
        pooled_pre += a / m as f64;
        pooled_post += b / m as f64;
        deltas.push(b - a);
    }
    let estimate = deltas.iter().sum::<f64>() / m as f64;

    // pooled fit of y_it on a constant and Post
    let (mut rss, mut tss) = (0.0, 0.0);
    let used: Vec<usize> = pre.iter().chain(&post).copied().collect();
    let grand = institutions.iter().map(|s| mean(s, &used)).sum::<f64>() / m as f64;
    for s in institutions {
        for &t in &used {
            let fit = if quarters[t] > crisis { pooled_post } else { pooled_pre };
            rss += (s.outcomes[t] - fit).powi(2);
            tss += (s.outcomes[t] - grand).powi(2);
        }
    }

    let draws = block_bootstrap(m, reps, seed, |idx| Ok(vec![idx.iter().map(|&i| deltas[i]).sum::<f64>() / m as f64]))?;
    let std_error = draws.std_error(0);
    let (ci_low, ci_high) = draws.percentile_ci(0, LEVEL);
    Ok(EstimateReport {
        estimator: "naive_did".into(),
        coefficients: vec![CoefficientEstimate {
            name: "post".into(),
            estimate,
            std_error,
            ci_low,
            ci_high,
            p_value: t_p_value(estimate, std_error, m - 1),
        }],
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        n_obs: m * used.len(),
        bootstrap_reps: reps,
        bootstrap_failures: draws.failures,
        seed,
        break_quarter: Some(crisis),
        joint_test: None,
    })
}
