use coordkit::codec::{encode_chain, SharedRandomness};
use coordkit::polar::{partition, polar_transform, ConstructionConfig, PolarSpec};
use coordkit::target::CoordinationTarget;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn spec4() -> PolarSpec {
    let h_u = vec![1.0, 1.0, 0.5, 0.2];
    let h_y = vec![0.9, 0.0, 0.6, 0.0];
    let h_full = vec![1.0, 0.0, 0.0, 0.0];
    partition(ConstructionConfig::new(4), 0.05, 0.05, [vec![0.5; 4], h_u, h_y, h_full]).unwrap()
}

/// `P(r | u)` for every `r` in `{0,1}^4`, through `w = G r`.
fn exact_r_given_u(t: &CoordinationTarget, u: &[usize]) -> Vec<f64> {
    (0..16)
        .map(|r| {
            let mut w: Vec<u8> = (0..4).map(|j| ((r >> (3 - j)) & 1) as u8).collect();
            polar_transform(&mut w).unwrap();
            (0..4).map(|t_| t.p_w_given_u(u[t_])[w[t_] as usize]).product()
        })
        .collect()
}

#[test]
fn randomized_rounding_matches_sequential_posterior() {
    let t = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
    let spec = spec4();
    let free: Vec<usize> = spec.a3.iter().chain(&spec.a4).copied().collect();
    assert!(!free.is_empty() && !spec.a1.is_empty() && !spec.a2.is_empty(), "{spec:?}");
    let u = vec![0, 1, 1, 0];
    let shared = SharedRandomness::generate(&spec, 1, 3).unwrap();
    let p_r = exact_r_given_u(&t, &u);
    let prefix = |bits: &[u8]| -> f64 {
        (0..16)
            .filter(|&r| bits.iter().enumerate().all(|(j, &b)| ((r >> (3 - j)) & 1) as u8 == b))
            .map(|r| p_r[r])
            .sum()
    };
    // A1 carries shared bits, fixed across encoder seeds.
    // Expected law of the remaining bits: 1/2 on A2, P(r_j | r^{j-1}, u) on A3 and A4.
    let open: Vec<usize> = (0..4).filter(|j| !spec.a1.contains(j)).collect();
    let samples = 100_000u64;
    let mut counts = vec![0u64; 1 << open.len()];
    let mut a1_seen: Option<Vec<u8>> = None;
    for seed in 0..samples {
        let enc = encode_chain(&t, &spec, &shared, std::slice::from_ref(&u), seed).unwrap();
        let r = &enc.r_tilde[0];
        let a1: Vec<u8> = spec.a1.iter().map(|&j| r[j]).collect();
        match &a1_seen {
            None => a1_seen = Some(a1),
            Some(s) => assert_eq!(s, &a1),
        }
        let cell = open.iter().fold(0, |acc, &j| acc * 2 + r[j] as usize);
        counts[cell] += 1;
    }
    let a1 = a1_seen.unwrap();
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (cell, &obs) in counts.iter().enumerate() {
        let mut bits = vec![0u8; 4];
        for (&j, &b) in spec.a1.iter().zip(&a1) {
            bits[j] = b;
        }
        for (i, &j) in open.iter().enumerate() {
            bits[j] = ((cell >> (open.len() - 1 - i)) & 1) as u8;
        }
        let mut p = 1.0;
        for j in 0..4 {
            if spec.a2.contains(&j) {
                p *= 0.5;
            } else if free.contains(&j) {
                let den = prefix(&bits[..j]);
                p *= prefix(&bits[..=j]) / den;
            }
        }
        let expected = p * samples as f64;
        if expected == 0.0 {
            assert_eq!(obs, 0);
            continue;
        }
        chi2 += (obs as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 <= crit, "chi2 {chi2} > {crit} over {cells} cells");
}
