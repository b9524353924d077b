//! Small datasets that ship with the crate or are generated on the fly.

use brownne_core::mlp::{Dataset, Matrix};
use brownne_core::rng::{Seed, Tag};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::idx;

const DIGIT_IMAGES: &[u8] = include_bytes!("../data/digits-images-idx3-ubyte");
const DIGIT_LABELS: &[u8] = include_bytes!("../data/digits-labels-idx1-ubyte");

/// 1797 handwritten digits, 8x8 grey levels, 10 classes.
pub fn digits() -> Dataset {
    let images = idx::parse(DIGIT_IMAGES, 3).expect("bundled image file is valid");
    let labels = idx::parse(DIGIT_LABELS, 1).expect("bundled label file is valid");
    idx::to_dataset(&images, &labels).expect("bundled files agree")
}

/// Two Gaussian clusters centred at `0.3` and `0.7` on every axis with
/// standard deviation `spread`, clipped to `[0, 1]`. Classes alternate.
pub fn blobs(rows: usize, width: usize, spread: f64, seed: Seed) -> Dataset {
    let mut rng = seed.stream(Tag::Points, 0);
    let mut data = Vec::with_capacity(rows * width);
    let mut labels = Vec::with_capacity(rows);
    for r in 0..rows {
        let class = (r % 2) as u32;
        let centre = if class == 0 { 0.3 } else { 0.7 };
        for _ in 0..width {
            let z: f64 = rng.sample(StandardNormal);
            data.push((centre + spread * z).clamp(0.0, 1.0));
        }
        labels.push(class);
    }
    let features = Matrix::from_vec(rows, width, data).expect("sizes agree");
    Dataset::new(features, labels, 2).expect("labels are 0 or 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_digits_shape() {
        let d = digits();
        assert_eq!(d.len(), 1797);
        assert_eq!(d.width(), 64);
        assert_eq!(d.class_count(), 10);
        assert!(d.features().data.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn blobs_are_balanced_and_deterministic() {
        let a = blobs(100, 3, 0.1, Seed(4));
        assert_eq!(a, blobs(100, 3, 0.1, Seed(4)));
        assert_eq!(a.labels().iter().filter(|&&l| l == 1).count(), 50);
    }
}
