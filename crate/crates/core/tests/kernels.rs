use brownne_core::rng::{Seed, Tag};
use brownne_core::stats::{ks_distance, Summary};
use brownne_core::{Family, Kernel};

const FAMILIES: [Family; 3] = [Family::Gaussian, Family::LinearRect, Family::ExponentialRect];

/// Composite Simpson rule, kept independent of the library quadrature.
fn simpson(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn analytic_cdf(k: &Kernel, t: f64) -> f64 {
    match k.rect_bounds() {
        Some((a, b)) => ((t - a) / (b - a)).clamp(0.0, 1.0),
        None => 0.5 * libm::erfc(-(k.n() as f64) * t / std::f64::consts::SQRT_2),
    }
}

#[test]
fn densities_integrate_to_one() {
    for family in FAMILIES {
        for n in 2..=64 {
            let k = Kernel::new(family, n).unwrap();
            let iv = k.quadrature_interval();
            let mass = simpson(iv.lo, iv.hi, 4000, |t| k.pdf(t));
            assert!((mass - 1.0).abs() < 1e-10, "{family:?} n={n}: {mass}");
        }
    }
}

#[test]
fn densities_are_nonnegative() {
    for family in FAMILIES {
        for n in [2, 5, 17, 64] {
            let k = Kernel::new(family, n).unwrap();
            for i in -200..=200 {
                assert!(k.pdf(i as f64 / 100.0) >= 0.0);
            }
        }
    }
}

#[test]
fn gaussian_support_keeps_all_but_1e8_of_the_mass() {
    for n in [1, 3, 10] {
        let k = Kernel::gaussian(n).unwrap();
        let s = k.support();
        let outside = libm::erfc(n as f64 * s.hi / std::f64::consts::SQRT_2);
        assert!(outside < 1e-8);
        assert!((s.hi - 6.0 / n as f64).abs() < 1e-15);
        assert_eq!(s.lo, -s.hi);
    }
}

#[test]
fn tails_shrink_with_n() {
    for family in FAMILIES {
        for delta in [0.5, 0.1, 0.01] {
            let tails: Vec<f64> = (2..=64)
                .map(|n| Kernel::new(family, n).unwrap().tail(delta).unwrap())
                .collect();
            for w in tails.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "{family:?} delta={delta}: {w:?}");
            }
            for (i, &t) in tails.iter().enumerate() {
                let k = Kernel::new(family, i as u32 + 2).unwrap();
                assert!((0.0..=1.0).contains(&t));
                if family.is_rectangle() && k.support().hi < delta {
                    assert_eq!(t, 0.0);
                }
            }
        }
    }
}

#[test]
fn tail_values() {
    assert_eq!(Kernel::exponential_rect(5).unwrap().tail(1.0).unwrap(), 0.0);
    // uniform on [1/4, 1/2] has mass 4 * (0.5 - 0.3) above 0.3
    let t = Kernel::exponential_rect(2).unwrap().tail(0.3).unwrap();
    assert!((t - 0.8).abs() < 1e-12);
    let g = Kernel::gaussian(1).unwrap().tail(1.0).unwrap();
    let oracle = libm::erfc(1.0 / std::f64::consts::SQRT_2);
    assert!((g - oracle).abs() < 1e-9, "{g} vs {oracle}");
    assert!((g - 0.3173).abs() < 1e-4);
}

#[test]
fn samples_follow_the_cdf() {
    let seed = Seed(11);
    for (fi, family) in FAMILIES.into_iter().enumerate() {
        for n in [2, 8, 32] {
            let k = Kernel::new(family, n).unwrap();
            let mut rng = seed.stream(Tag::Sampling, (fi as u64) * 100 + n as u64);
            let xs: Vec<f64> = (0..100_000).map(|_| k.sample(&mut rng)).collect();
            let d = ks_distance(&xs, |t| analytic_cdf(&k, t));
            assert!(d < 0.01, "{family:?} n={n}: KS {d}");
        }
    }
}

#[test]
fn exponential_rect_samples_stay_in_support() {
    let k = Kernel::exponential_rect(4).unwrap();
    let mut rng = Seed(3).stream(Tag::Sampling, 0);
    for _ in 0..10_000 {
        let t = k.sample(&mut rng);
        assert!((1.0 / 16.0..=1.0 / 8.0).contains(&t));
    }
}

#[test]
fn sample_means_and_variances() {
    let k = Kernel::linear_rect(10).unwrap();
    let mut rng = Seed(5).stream(Tag::Sampling, 0);
    let xs: Vec<f64> = (0..1_000_000).map(|_| k.sample(&mut rng)).collect();
    let s = Summary::of(&xs);
    let oracle = simpson(1.0 / 10.0, 1.0 / 9.0, 200, |t| t * 90.0);
    assert!((s.mean - oracle).abs() < 4.0 * s.std_error(), "{} vs {oracle}", s.mean);

    let k = Kernel::gaussian(2).unwrap();
    let xs: Vec<f64> = (0..1_000_000).map(|_| k.sample(&mut rng)).collect();
    let s = Summary::of(&xs);
    assert!((s.variance - 0.25).abs() < 4.0 * s.variance_std_error());
}

#[test]
fn moments_match_direct_integration() {
    for family in [Family::LinearRect, Family::ExponentialRect] {
        for n in 2..=40 {
            let k = Kernel::new(family, n).unwrap();
            let (a, b) = k.rect_bounds().unwrap();
            for p in 1..=3 {
                let oracle = simpson(a, b, 64, |t| k.pdf(0.5 * (a + b)) * t.powi(p as i32));
                let m = k.moment(p).unwrap();
                assert!((m - oracle).abs() <= 1e-10 * oracle.max(1e-300) + 1e-300, "{family:?} n={n} k={p}");
            }
        }
    }
    let e3 = Kernel::exponential_rect(3).unwrap();
    assert!((e3.moment(1).unwrap() - 0.1875).abs() < 1e-15);
    assert!((e3.moment(2).unwrap() - 7.0 / 192.0).abs() < 1e-15);
    assert!((Kernel::linear_rect(2).unwrap().moment(1).unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn exponential_rect_moments_respect_the_support_bound() {
    for n in 1..=40 {
        let k = Kernel::exponential_rect(n).unwrap();
        for p in 1..=4 {
            let bound = 2.0 * 2f64.powi(-((n as i32 - 1) * p as i32));
            assert!(k.moment(p).unwrap() <= bound);
        }
    }
}

#[test]
fn gaussian_moments_match_integration() {
    for n in [1, 4, 16] {
        let k = Kernel::gaussian(n).unwrap();
        let iv = k.quadrature_interval();
        for p in 1..=4 {
            let oracle = simpson(iv.lo, iv.hi, 20_000, |t| k.pdf(t) * t.powi(p as i32));
            assert!((k.moment(p).unwrap() - oracle).abs() < 1e-10, "n={n} k={p}");
        }
    }
}

#[test]
fn spec_strings_round_trip() {
    for family in FAMILIES {
        let k = Kernel::new(family, 8).unwrap();
        let s = format!("{}:8", family.tag());
        assert_eq!(s.parse::<Kernel>().unwrap(), k);
    }
    assert!("linrect:1".parse::<Kernel>().is_err());
    assert!("cosine:4".parse::<Kernel>().is_err());
}
