//! Prune and cap a Gaussian mixture, then moment-match it.

use nalgebra::{DMatrix, DVector};
use rgpo_track::gaussmix::{mixture_moments, reduce_mixture, GaussianComponent, Mixture};

fn main() -> rgpo_track::Result<()> {
    let comps = [0.6, 0.3, 0.09, 1e-7]
        .iter()
        .enumerate()
        .map(|(i, w)| GaussianComponent::new(*w, DVector::from_vec(vec![i as f64, 0.0]), DMatrix::identity(2, 2)))
        .collect();
    let mix = Mixture::new(comps)?;
    let reduced = reduce_mixture(&mix, 1e-5, 2);
    println!("{} components -> {}", mix.len(), reduced.len());
    for c in reduced.components() {
        println!("  w={:.4} mean={:?}", c.weight, c.mean.as_slice());
    }
    let (m, p) = mixture_moments(&reduced);
    println!("moment-matched mean {:?}, var_x {:.4}", m.as_slice(), p[(0, 0)]);
    Ok(())
}
