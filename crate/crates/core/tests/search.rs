use coordkit::prob::{mutual_information, Alphabet, FiniteDist, Kernel};
use coordkit::regions::{bernoulli_with_entropy, erasure_cascade, erasure_cascade_joint, search_min_r0, RegionKind, SearchConfig};
use coordkit::target::{CoordinationTarget, U, X, Y};

#[test]
fn erasure_family_reaches_frontier() {
    let pe = 0.75;
    for p2 in [0.1, 0.25, 0.4] {
        let pt = erasure_cascade(pe, p2).unwrap();
        let q = bernoulli_with_entropy(pt.i_uw).unwrap();
        let obs = erasure_cascade_joint(pe, p2, Some(q)).unwrap().marginal(&["U", "X", "V"]).unwrap();
        let mut cfg = SearchConfig::new(RegionKind::UVotimesX);
        cfg.aux_card = Some(3);
        cfg.seed = 7;
        let out = search_min_r0(&obs, &cfg).unwrap();
        let r0 = out.r0_upper_bound.expect("feasible");
        assert!(r0 <= pt.i_uvw + 1e-3, "p2={p2}: {r0} vs {}", pt.i_uvw);
        // Constraint slack of tol can buy at most a little below the curve.
        assert!(r0 >= pt.i_uvw - 1e-4, "p2={p2}: {r0} below {}", pt.i_uvw);
    }
}

#[test]
fn deterministic_decoder_needs_no_common_randomness() {
    let t = CoordinationTarget::constant_auxiliary(
        FiniteDist::bernoulli(U, 0.5).unwrap(),
        &Kernel::bsc(U, X, 0.2).unwrap(),
        Kernel::bsc(X, Y, 0.1).unwrap(),
        &Kernel::bsc(Y, "V", 0.0).unwrap(),
    )
    .unwrap();
    let mut cfg = SearchConfig::new(RegionKind::InnerNoState);
    cfg.aux_card = Some(2);
    cfg.restarts = 4;
    let out = search_min_r0(&t.observables(), &cfg).unwrap();
    assert!(out.r0_upper_bound.unwrap() < 1e-6);
}

#[test]
fn useless_channel_forces_independent_auxiliary() {
    let axes = vec![
        Alphabet::new(U, 2).unwrap(),
        Alphabet::new(X, 2).unwrap(),
        Alphabet::new(Y, 1).unwrap(),
        Alphabet::new("V", 2).unwrap(),
    ];
    let obs = FiniteDist::from_fn(axes, |i| if i[0] == i[1] { 0.25 } else { 0.0 }).unwrap();
    let mut cfg = SearchConfig::new(RegionKind::InnerNoState);
    cfg.aux_card = Some(2);
    cfg.restarts = 4;
    let out = search_min_r0(&obs, &cfg).unwrap();
    assert!(out.r0_upper_bound.is_some());
    let joint = out.joint.unwrap();
    let i_wu = mutual_information(&joint, &["W"], &[U], &[]).unwrap();
    assert!(i_wu <= cfg.tol, "I(W;U) = {i_wu}");
}
