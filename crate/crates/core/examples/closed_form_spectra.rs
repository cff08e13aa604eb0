//! Compares the Lanczos λ₂ of regular ring lattices against the circulant
//! closed form, then checks a random graph against the dense solver.
//!
//! ```text
//! cargo run --release --example closed_form_spectra
//! ```

use fragility::rng;
use fragility::spectral::{lambda2_dense, lambda2_lanczos, mixing_time, LanczosOptions};
use fragility::synthgen::{generate_network, make_regular, ring_lattice_lambda2, Topology};

fn main() -> fragility::Result<()> {
    println!("{:>5} {:>3} {:>14} {:>14} {:>10}", "n", "d", "lanczos", "closed form", "abs err");
    for (n, d) in [(8, 2), (20, 4), (100, 6), (296, 12), (1000, 10)] {
        let g = make_regular(n, d, 1.0)?;
        let s = lambda2_lanczos(&g, &LanczosOptions::default())?;
        let exact = ring_lattice_lambda2(n, d, 1.0);
        println!("{n:>5} {d:>3} {:>14.10} {exact:>14.10} {:>10.1e}", s.lambda2, (s.lambda2 - exact).abs());
    }

    let mut r = rng::stream(42, 0);
    let g = generate_network(60, 0.2, Topology::ErdosRenyi { p: 0.1 }, &mut r)?;
    let fast = lambda2_lanczos(&g, &LanczosOptions::default())?;
    let dense = lambda2_dense(&g)?;
    println!();
    println!("random graph, 60 nodes");
    println!("  lanczos  {:.12} ({} iterations, residual {:.1e})", fast.lambda2, fast.iterations, fast.residual);
    println!("  dense    {:.12}", dense.lambda2);
    println!("  mixing time 1/λ₂ = {:.2}", mixing_time(fast.lambda2)?);
    Ok(())
}
