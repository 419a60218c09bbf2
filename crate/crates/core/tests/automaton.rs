use catex_core::{
    default_schedule, extract, histogram, lbp_map, normalize_map, pad_symmetric, Automaton,
    CatexConfig, GrayImage, LbpConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random()).unwrap()
}

#[test]
fn zero_alpha_freezes_every_block() {
    let img = random_image(23, 20, 1);
    let config = CatexConfig::new(0.0, 20, default_schedule()).unwrap();
    let d = extract(&img, &config).unwrap();
    assert_eq!(d.len(), 4410);
    for t in 1..=20 {
        assert_eq!(d.step(t), d.step(0), "time step {t}");
    }
}

#[test]
fn full_alpha_replaces_state_with_codes() {
    let img = random_image(20, 20, 2);
    let config = CatexConfig::new(1.0, 4, default_schedule()).unwrap();
    let (mut ca, _) = Automaton::start(&img, &config).unwrap();
    let mut previous: Vec<GrayImage> = config
        .schedule()
        .iter()
        .map(|&c| normalize_map(&lbp_map(&pad_symmetric(&img, c.pad()).unwrap(), c).unwrap()))
        .collect();
    assert_eq!(ca.state().stacks(), &previous[..]);
    for _ in 0..4 {
        ca.step().unwrap();
        let expected: Vec<GrayImage> = previous
            .iter()
            .zip(config.schedule())
            .map(|(s, &c)| normalize_map(&lbp_map(&pad_symmetric(s, c.pad()).unwrap(), c).unwrap()))
            .collect();
        assert_eq!(ca.state().stacks(), &expected[..]);
        previous = expected;
    }
}

#[test]
fn extraction_is_deterministic() {
    let img = random_image(30, 25, 3);
    let config = CatexConfig::default();
    let a = extract(&img, &config).unwrap();
    let b = extract(&img, &config).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(a.values()), bits(b.values()));
}

#[test]
fn quarter_turn_keeps_first_neighborhood_histogram() {
    let config = LbpConfig::new(8, 1.0).unwrap();
    for seed in 0..5 {
        let img = random_image(17, 17, seed);
        let h = |im: &GrayImage| histogram(&lbp_map(&pad_symmetric(im, 1).unwrap(), config).unwrap());
        assert_eq!(h(&img), h(&img.rotate90()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // dyadic values and shifts keep every sum exact on the lattice neighborhood
    #[test]
    fn gray_shift_keeps_first_step(levels in prop::collection::vec(0u32..128, 400), shift in 0u32..128) {
        let config = CatexConfig::new(0.1, 1, vec![LbpConfig::new(8, 1.0).unwrap()]).unwrap();
        let base: Vec<f64> = levels.iter().map(|&v| v as f64 / 256.0).collect();
        let moved: Vec<f64> = levels.iter().map(|&v| (v + shift) as f64 / 256.0).collect();
        let a = extract(&GrayImage::new(20, 20, base).unwrap(), &config).unwrap();
        let b = extract(&GrayImage::new(20, 20, moved).unwrap(), &config).unwrap();
        prop_assert_eq!(a.step(0), b.step(0));
    }

    #[test]
    fn descriptor_values_are_frequencies(seed in 0u64..1000, alpha in 0.0f64..=1.0) {
        let s = default_schedule();
        let config = CatexConfig::new(alpha, 3, vec![s[0], s[1], s[4]]).unwrap();
        let d = extract(&random_image(19, 21, seed), &config).unwrap();
        prop_assert!(d.values().iter().all(|v| (0.0..=1.0).contains(v)));
        for t in 0..=3 {
            for i in 0..3 {
                prop_assert!((d.block(t, i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
