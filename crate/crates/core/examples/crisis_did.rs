//! Difference-in-differences on a simulated λ₂ series with a known crisis
//! effect, followed by the event study, pre-trend test, placebo dates, and
//! the institution-level comparator that double counts spillovers.

use fragility::econometrics::{event_study, naive_did, placebo_test, pretrends_test, spatial_did, EstimateReport};
use fragility::synthgen::{crisis_panel, CrisisPanelSpec, CONTROL_NAMES};

fn show(label: &str, r: &EstimateReport) {
    println!("{label} (n = {}, R² = {:.3})", r.n_obs, r.r_squared);
    for c in &r.coefficients {
        println!("  {:<16} {:>10.2} ± {:>7.2}  [{:>9.2}, {:>9.2}]  p = {:.3}", c.name, c.estimate, c.std_error, c.ci_low, c.ci_high, c.p_value);
    }
}

fn main() -> fragility::Result<()> {
    let spec = CrisisPanelSpec { spillover_per_link: 700.0, seed: 2, ..Default::default() };
    let data = crisis_panel(&spec)?;
    let mut controls: Vec<String> = CONTROL_NAMES.iter().map(|s| s.to_string()).collect();
    controls.push("trend".into());

    let did = spatial_did(&data.panel, &controls, 499, 1)?;
    show("difference in differences", &did);
    println!("  true effect {}", data.truth.direct_effect);

    let event = event_study(&data.panel, (3, 3), &controls, 299, 1)?;
    println!();
    show("event study", &event);

    let pre = pretrends_test(&data.panel, &[1, 2, 3, 4], &controls, 299, 1)?;
    if let Some(joint) = &pre.joint_test {
        println!();
        println!("pre-trend leads: F = {:.3}, p = {:.3}", joint.f_stat, joint.p_value);
    }

    let c = data.panel.crisis_quarter;
    let dates = [c.offset(-8), c.offset(-4), c, c.offset(4), c.offset(8)];
    println!();
    println!("placebo dates:");
    for (d, r) in dates.iter().zip(placebo_test(&data.panel, &dates, &controls, 199, 1)?) {
        let post = r.coefficients.iter().find(|x| x.name == "post").expect("post coefficient");
        println!("  {d}  {:>9.2}  p = {:.3}", post.estimate, post.p_value);
    }

    let naive = naive_did(&data.panel.quarters, &data.institutions, c, 499, 1)?;
    println!();
    show("institution-level comparator", &naive);
    println!("  converges to {:.1}, not {}", data.truth.naive_effect, data.truth.direct_effect);
    Ok(())
}
