//! Null decomposition of a 2-form and its reconstruction.

use mkg_lab::fields::{electromagnetic_norm_sq, null_decompose, Frame};

fn main() -> mkg_lab::Result<()> {
    let frame = Frame::at([0.3, -1.2, 0.8]);
    // The Coulomb 2-form q r^{-2} dt∧dr at this point, in (t, x, y, z).
    let q = 2.0;
    let r2: f64 = 0.09 + 1.44 + 0.64;
    let n = frame.omega;
    let mut f = [[0.0; 4]; 4];
    for i in 0..3 {
        f[0][i + 1] = q / r2 * n[i];
        f[i + 1][0] = -f[0][i + 1];
    }
    let d = null_decompose(&f, &frame)?;
    println!("alpha {:?} alpha_bar {:?} rho {:.6} sigma {:.2e}", d.alpha, d.alpha_bar, d.rho, d.sigma);
    println!("|F|^2 = {:.6}, from components {:.6}", electromagnetic_norm_sq(&f), d.norm_sq());
    Ok(())
}
