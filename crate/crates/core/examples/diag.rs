//! Scratch diagnostic: subsample sensitivity of the classical entropy.

use catsep::*;

fn main() {
    let n = 64usize;
    let space = TorusHilbert::new(n).unwrap();
    let (m1, m2) = MapCase::HyperbolicHyperbolic.maps(0.25);
    let cm = CoupledMap::new(m1, m2, 0.5);

    for s in [1usize, 2, 3] {
        let mut grid =
            LiouvilleGrid::gaussian(PhasePoint4D::new(0.5, 0.5, 0.5, 0.5), &space, n).unwrap();
        let ev = LiouvilleEvolver::new(cm, n, s).unwrap();
        let mut line = format!("s={s}:");
        for _t in 0..=3 {
            line += &format!(" {:.4}", cse(&grid).unwrap());
            let (g, mass) = ev.step(&grid).unwrap();
            line += &format!("(m={mass:.3})");
            grid = g;
        }
        println!("{line}");
    }
    println!("quantum (kick-on-input): 0.0000 0.2126 1.0861 2.5374");
}
