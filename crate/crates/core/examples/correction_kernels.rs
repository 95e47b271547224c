//! The correction kernels on one triangle: the vectors sum to zero and
//! their anchored wedge sum equals the requested defect.
//!
//! cargo run --example correction_kernels

use rd_angular::bezier::cross;
use rd_angular::correction::{ho_correction, triangle_correction};
use rd_angular::selftest;

fn main() -> rd_angular::Result<()> {
    let x = [[0.0, 0.0], [2.0, 0.5], [0.3, 1.7]];
    let psi = 0.8;
    let r = triangle_correction(psi, x)?;
    let sum = r.iter().fold([0.0, 0.0], |s, v| [s[0] + v[0], s[1] + v[1]]);
    let wedge: f64 = x.iter().zip(&r).map(|(xi, ri)| cross(*xi, *ri)).sum();
    println!("triangle: r = {r:?}\n  sum = {sum:?}, sum x ^ r = {wedge} (psi = {psi})");

    let anchors = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]];
    let r = ho_correction(psi, &anchors)?;
    let wedge: f64 = anchors.iter().zip(&r).map(|(xi, ri)| cross(*xi, *ri)).sum();
    println!("six anchors: sum x ^ r = {wedge}");

    for rep in selftest::run_all(1000, 7) {
        println!("{rep}");
    }
    Ok(())
}
