//! Completes a partially observed exposure matrix from its row and column
//! totals by RAS, keeping observed cells fixed.

use fragility::imputer::{entropy_closed_form, ras_impute, ImputationProblem};
use rand::Rng;

fn main() -> fragility::Result<()> {
    let n = 8;
    let mut rng = fragility::rng::stream(7, 0);
    let mut truth = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                truth[(i, j)] = rng.random_range(1.0..50.0);
            }
        }
    }
    let rows: Vec<f64> = truth.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = truth.column_iter().map(|c| c.sum()).collect();

    // hide roughly half of the off-diagonal cells
    let observed: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && rng.random_bool(0.5))
        .map(|(i, j)| (i, j, truth[(i, j)]))
        .collect();

    let problem = ImputationProblem::new(rows.clone(), cols.clone()).with_observed(observed.clone());
    let result = ras_impute(&problem)?;
    println!("observed {} of {} off-diagonal cells", observed.len(), n * (n - 1));
    println!("converged {} after {} sweeps", result.converged, result.iterations);
    println!("max marginal deviation {:.2e}", result.max_marginal_deviation);
    for (k, d) in result.deviation_history.iter().take(6).enumerate() {
        println!("  sweep {k}: {d:.3e}");
    }
    let kept = observed.iter().all(|&(i, j, v)| result.matrix[(i, j)] == v);
    println!("observed cells untouched: {kept}");

    let hidden_err: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !observed.iter().any(|&(a, b, _)| (a, b) == (i, j)))
        .map(|(i, j)| (result.matrix[(i, j)] - truth[(i, j)]).abs())
        .fold(0.0, f64::max);
    println!("largest error on a hidden cell {hidden_err:.2}");

    // with nothing observed the answer is the product form
    let blind = ras_impute(&ImputationProblem { zero_diagonal: false, ..ImputationProblem::new(rows.clone(), cols.clone()) })?;
    let closed = entropy_closed_form(&rows, &cols)?;
    println!("no observations: {} sweeps, distance to closed form {:.1e}", blind.iterations, (blind.matrix - closed).amax());
    Ok(())
}
