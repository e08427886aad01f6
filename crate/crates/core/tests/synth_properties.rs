use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use signscreen::facial::facial_activity;
use signscreen::keypoints::{Clip, Label, Side};
use signscreen::synth::{generate_recording, plan_cohort, NoiseConfig, ProfileSet};
use signscreen::trajectory::{envelope_stats, wrist_trajectory};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn motion_matches_profile_targets(seed in any::<u64>(), mci in any::<bool>()) {
        let label = if mci { Label::Mci } else { Label::Healthy };
        let profile = ProfileSet::default().for_label(label).sample(label, &mut ChaCha8Rng::seed_from_u64(seed));
        let rec = generate_recording("1", &profile, 240.0, 25.0, seed, &NoiseConfig::none()).unwrap();
        let clip = Clip::from_recording(&rec);
        for side in [Side::Left, Side::Right] {
            let s = envelope_stats(&wrist_trajectory(&clip, side, 0), 5.0).unwrap();
            let target = 2.0 * profile.amplitude_scale;
            prop_assert!((s.x_amplitude - target).abs() <= 0.1 * target, "{} vs {}", s.x_amplitude, target);
            prop_assert!((s.pause_fraction - profile.pause_fraction_target).abs() <= 0.05,
                "{} vs {}", s.pause_fraction, profile.pause_fraction_target);
        }
    }
}

#[test]
fn healthy_faces_are_more_active_across_cohorts() {
    let profiles = ProfileSet::default();
    let noise = NoiseConfig::default();
    let cohorts = 20;
    let mut separated = 0;
    for seed in 0..cohorts {
        let (mut mci, mut healthy) = (Vec::new(), Vec::new());
        for m in plan_cohort(40, 0.475, seed, &profiles).unwrap() {
            let rec = m.generate(20.0, 25.0, &noise).unwrap();
            let d3 = facial_activity(&rec.face).unwrap().d3;
            match m.profile.label {
                Label::Mci => mci.push(d3),
                Label::Healthy => healthy.push(d3),
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        if mean(&healthy) > mean(&mci) {
            separated += 1;
        }
    }
    assert!(separated * 100 >= 95 * cohorts, "{separated}/{cohorts}");
}
