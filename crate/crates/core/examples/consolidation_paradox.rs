//! Shrinks a ring-lattice banking system from 296 to 156 institutions while
//! the average bilateral intensity rises, and compares the realized λ₂ ratio
//! with the `(n0/n1)(w1/w0)` prediction.
//!
//! Also prints the mechanical effect of removing nodes at fixed intensity,
//! which on a fixed-degree ring lattice *raises* λ₂.

use fragility::spectral::{lambda2_lanczos, LanczosOptions};
use fragility::synthgen::{consolidation_pair, ConsolidationScenario, Topology};

fn lambda2(g: &fragility::graph::WeightedGraph) -> fragility::Result<f64> {
    Ok(lambda2_lanczos(g, &LanczosOptions::default())?.lambda2)
}

fn main() -> fragility::Result<()> {
    let scenario = ConsolidationScenario {
        n0: 296,
        n1: 156,
        w0: 12.6,
        w1: 47.3,
        topology: Topology::RingLattice { d: 12 },
        seed: 3,
    };
    let (before, after) = consolidation_pair(&scenario)?;
    let (l0, l1) = (lambda2(&before)?, lambda2(&after)?);
    println!("before: n = {:>3}  w = {:.1}  λ₂ = {l0:.6e}", scenario.n0, before.average_bilateral_intensity());
    println!("after:  n = {:>3}  w = {:.1}  λ₂ = {l1:.6e}", scenario.n1, after.average_bilateral_intensity());
    println!("realized ratio  {:.3}", l1 / l0);
    println!("predicted ratio {:.3}", scenario.predicted_ratio());
    println!("w1/w0 > n0/n1?  {}", scenario.paradox_condition());

    let fewer = ConsolidationScenario { w1: scenario.w0, ..scenario };
    let (b, a) = consolidation_pair(&fewer)?;
    println!();
    println!("node reduction alone: λ₂ {:.4e} -> {:.4e}", lambda2(&b)?, lambda2(&a)?);
    Ok(())
}
