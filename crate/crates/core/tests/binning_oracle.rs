use coordkit::binning::{evaluate_seed, run_exact, secrecy_scan, sw_decode, BinningCode, ExactConfig};
use coordkit::par::Execution;
use coordkit::prob::{Alphabet, FiniteDist, Kernel};
use coordkit::target::{CoordinationTarget, U, V, W, X, Y};

fn bin2(name: &str) -> Alphabet {
    Alphabet::new(name, 2).unwrap()
}

fn toy(pw: f64, py: f64, pv: f64) -> CoordinationTarget {
    CoordinationTarget::new(
        FiniteDist::bernoulli(U, 0.5).unwrap(),
        Kernel::bsc(U, W, pw).unwrap(),
        Kernel::from_fn(vec![bin2(U), bin2(W)], vec![bin2(X)], |f, t| if t[0] == f[1] { 0.95 } else { 0.05 }).unwrap(),
        Kernel::bsc(X, Y, py).unwrap(),
        Kernel::from_fn(vec![bin2(W), bin2(Y)], vec![bin2(V)], move |f, t| if t[0] == f[0] { 1.0 - pv } else { pv }).unwrap(),
    )
    .unwrap()
}

fn seq(mut i: usize, size: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for t in (0..n).rev() {
        d[t] = i % size;
        i /= size;
    }
    d
}

/// Induced law of `(U,X,Y,V)^n`, per-letter axis order, by explicit
/// enumeration of `(c, f)` and every sequence.
fn brute_force(t: &CoordinationTarget, code: &BinningCode) -> (Vec<f64>, f64, f64) {
    let n = code.n;
    let [nu, nw, nx, ny, nv] = t.sizes();
    let joint = t.joint();
    let p_wy = joint.marginal(&[W, Y]).unwrap();
    let pw_y = |w: &[usize], y: &[usize]| (0..n).map(|k| p_wy.prob(&[w[k], y[k]])).product::<f64>();
    let nws = nw.pow(n as u32);
    let cells = (nu * nx * ny * nv).pow(n as u32);
    let mut out = vec![0.0; cells];
    let mut mismatch = 0.0;
    let b = (code.bins_c * code.bins_f) as f64;
    for c in 0..code.bins_c {
        for f in 0..code.bins_f {
            let members: Vec<usize> = (0..nws).filter(|&w| code.phi1[w] as usize == c && code.phi2[w] as usize == f).collect();
            for u in 0..nu.pow(n as u32) {
                let ud = seq(u, nu, n);
                let pu: f64 = ud.iter().map(|&s| t.p_u()[s]).product();
                let pw_u = |w: usize| {
                    let wd = seq(w, nw, n);
                    (0..n).map(|k| t.p_w_given_u(ud[k])[wd[k]]).product::<f64>()
                };
                let mass: f64 = members.iter().map(|&w| pw_u(w)).sum();
                for w in 0..nws {
                    let enc = if mass > 0.0 {
                        if members.contains(&w) {
                            pw_u(w) / mass
                        } else {
                            0.0
                        }
                    } else {
                        pw_u(w)
                    };
                    if enc == 0.0 {
                        continue;
                    }
                    let wd = seq(w, nw, n);
                    for x in 0..nx.pow(n as u32) {
                        let xd = seq(x, nx, n);
                        for y in 0..ny.pow(n as u32) {
                            let yd = seq(y, ny, n);
                            let mut best: Option<(usize, f64)> = None;
                            for &m in &members {
                                let p = pw_y(&seq(m, nw, n), &yd);
                                if best.is_none_or(|(_, bp)| p > bp) {
                                    best = Some((m, p));
                                }
                            }
                            let wh = seq(best.map(|b| b.0).unwrap_or(0), nw, n);
                            let base: f64 = pu / b
                                * enc
                                * (0..n).map(|k| t.p_x_given_uw(ud[k], wd[k])[xd[k]] * t.p_y_given_x(xd[k])[yd[k]]).product::<f64>();
                            if wh != wd {
                                mismatch += base;
                            }
                            for v in 0..nv.pow(n as u32) {
                                let vd = seq(v, nv, n);
                                let p = base * (0..n).map(|k| t.p_v_given_wy(wh[k], yd[k])[vd[k]]).product::<f64>();
                                let idx = (0..n).fold(0, |acc, k| (((acc * nu + ud[k]) * nx + xd[k]) * ny + yd[k]) * nv + vd[k]);
                                out[idx] += p;
                            }
                        }
                    }
                }
            }
        }
    }
    // Ideal law: W^n from the target, binned, then decoded.
    let mut sw_err = 0.0;
    for u in 0..nu.pow(n as u32) {
        let ud = seq(u, nu, n);
        for w in 0..nws {
            let wd = seq(w, nw, n);
            let members: Vec<usize> = (0..nws).filter(|&m| code.phi1[m] == code.phi1[w] && code.phi2[m] == code.phi2[w]).collect();
            for y in 0..ny.pow(n as u32) {
                let yd = seq(y, ny, n);
                let mut best = (members[0], pw_y(&seq(members[0], nw, n), &yd));
                for &m in &members[1..] {
                    let p = pw_y(&seq(m, nw, n), &yd);
                    if p > best.1 {
                        best = (m, p);
                    }
                }
                if best.0 != w {
                    let pxy: f64 = (0..n)
                        .map(|k| (0..nx).map(|x| t.p_x_given_uw(ud[k], wd[k])[x] * t.p_y_given_x(x)[yd[k]]).sum::<f64>())
                        .product();
                    let p: f64 = (0..n).map(|k| t.p_u()[ud[k]] * t.p_w_given_u(ud[k])[wd[k]]).product();
                    sw_err += p * pxy;
                }
            }
        }
    }
    (out, mismatch, sw_err)
}

fn target_product(t: &CoordinationTarget, n: usize) -> Vec<f64> {
    let obs = t.observables();
    let mut out = vec![1.0];
    for _ in 0..n {
        out = out.iter().flat_map(|&a| obs.pmf().iter().map(move |&b| a * b)).collect();
    }
    out
}

#[test]
fn exact_evaluation_matches_brute_force() {
    let t = toy(0.4, 0.05, 0.1);
    for (n, r0, rt) in [(1, 1.0, 0.0), (2, 0.5, 0.0), (2, 0.5, 0.5), (3, 0.34, 0.0), (2, 1.5, 0.5)] {
        for seed in 0..4 {
            let cfg = ExactConfig::new(n, r0, rt, vec![seed]);
            let r = evaluate_seed(&t, &cfg, seed).unwrap();
            let code = BinningCode::random(2, n, r0, rt, seed).unwrap();
            let (brute, mismatch, sw_err) = brute_force(&t, &code);
            let induced = r.induced.as_ref().unwrap();
            for (a, b) in induced.pmf().iter().zip(&brute) {
                assert!((a - b).abs() < 1e-13, "n={n} seed={seed}: {a} vs {b}");
            }
            let tv = 0.5 * brute.iter().zip(target_product(&t, n)).map(|(a, b)| (a - b).abs()).sum::<f64>();
            assert!((r.tv - tv).abs() < 1e-12);
            assert!((r.sw_error_prob - sw_err).abs() < 1e-12);
            assert!((r.mismatch_prob - mismatch).abs() < 1e-12);
            assert!((r.total_mass - 1.0).abs() < 1e-12);
            assert!((r.tv - r.genie_tv).abs() <= 2.0 * r.mismatch_prob + 1e-12);
        }
    }
}

#[test]
fn isolated_sequences_decode_without_error() {
    let t = toy(0.4, 0.05, 0.1);
    let mut checked = 0;
    for seed in 0..8 {
        let code = BinningCode::random(2, 2, 1.0, 1.0, seed).unwrap();
        let mut bins: Vec<usize> = (0..4).map(|w| code.bin(w)).collect();
        bins.sort_unstable();
        bins.dedup();
        let r = evaluate_seed(&t, &ExactConfig::new(2, 1.0, 1.0, vec![seed]), seed).unwrap();
        if bins.len() == 4 {
            assert_eq!(r.sw_error_prob, 0.0);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn n1_full_rate_recovers_w() {
    let t = toy(0.4, 0.05, 0.1);
    let r = run_exact(&t, &ExactConfig::new(1, 1.0, 0.0, (0..8).collect())).unwrap();
    let isolated = r.per_seed.iter().find(|s| s.sw_error_prob == 0.0);
    assert!(isolated.is_some(), "some seed separates the two symbols");
}

#[test]
fn constant_auxiliary_reduces_to_action_mismatch() {
    let channel = Kernel::bsc(X, Y, 0.1).unwrap();
    let t = CoordinationTarget::constant_auxiliary(
        FiniteDist::bernoulli(U, 0.5).unwrap(),
        &Kernel::bsc(U, X, 0.2).unwrap(),
        channel,
        &Kernel::bsc(Y, V, 0.0).unwrap(),
    )
    .unwrap();
    let r = run_exact(&t, &ExactConfig::new(3, 0.5, 0.0, vec![0, 1])).unwrap();
    assert!(r.best().tv < 1e-14);
    assert_eq!(r.best().sw_error_prob, 0.0);
}

#[test]
fn sw_decoder_examples() {
    let t = toy(0.4, 0.05, 0.1);
    let code = BinningCode::random(2, 2, 1.0, 1.0, 3).unwrap();
    // Hand-enumerated MAP over each bin for every y.
    let p_wy = t.joint().marginal(&[W, Y]).unwrap();
    for bin in 0..code.num_bins() {
        let members: Vec<usize> = (0..4).filter(|&w| code.bin(w) == bin).collect();
        for y in 0..4 {
            let yd = seq(y, 2, 2);
            let (w, empty) = sw_decode(&code, &t, bin, &yd).unwrap();
            if members.is_empty() {
                assert!(empty);
                assert_eq!(w, vec![0, 0]);
                continue;
            }
            let score = |m: usize| {
                let d = seq(m, 2, 2);
                p_wy.prob(&[d[0], yd[0]]) * p_wy.prob(&[d[1], yd[1]])
            };
            let best = members.iter().copied().fold(members[0], |b, m| if score(m) > score(b) { m } else { b });
            assert_eq!(w, seq(best, 2, 2));
            if members.len() == 1 {
                assert_eq!(w, seq(members[0], 2, 2));
            }
        }
    }
}

#[test]
fn budget_is_enforced() {
    let t = toy(0.4, 0.05, 0.1);
    let mut cfg = ExactConfig::new(6, 0.5, 0.0, vec![0]);
    cfg.budget = 1000;
    assert_eq!(run_exact(&t, &cfg).unwrap_err().kind(), "budget-exceeded");
}

#[test]
fn secrecy_needs_separable_target() {
    let t = toy(0.4, 0.05, 0.1);
    let cfg = ExactConfig::new(2, 0.5, 0.0, vec![0]);
    assert_eq!(secrecy_scan(&t, &cfg).unwrap_err().kind(), "structural");
}

#[test]
fn seeds_parallel_matches_sequential() {
    let t = toy(0.4, 0.05, 0.1);
    let mut cfg = ExactConfig::new(3, 0.5, 0.0, (0..6).collect());
    cfg.exec = Execution::Sequential;
    let a = run_exact(&t, &cfg).unwrap();
    cfg.exec = Execution::Parallel;
    let b = run_exact(&t, &cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

/// `I(U^n V^n; Y^n)` straight from the per-letter induced pmf.
fn block_secrecy(induced: &FiniteDist, n: usize) -> (f64, f64) {
    let sizes = induced.sizes();
    let ny: usize = (0..n).map(|t| sizes[4 * t + 2]).product();
    let nuv: usize = (0..n).map(|t| sizes[4 * t] * sizes[4 * t + 3]).product();
    let mut joint = vec![0.0; nuv * ny];
    for (idx, p) in induced.iter() {
        let (mut a, mut y) = (0, 0);
        for t in 0..n {
            a = (a * sizes[4 * t] + idx[4 * t]) * sizes[4 * t + 3] + idx[4 * t + 3];
            y = y * sizes[4 * t + 2] + idx[4 * t + 2];
        }
        joint[a * ny + y] += p;
    }
    let pa: Vec<f64> = (0..nuv).map(|a| joint[a * ny..(a + 1) * ny].iter().sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| (0..nuv).map(|a| joint[a * ny + y]).sum()).collect();
    let mi = entropy_bits(&pa) + entropy_bits(&py) - entropy_bits(&joint);
    let mut l1 = 0.0;
    for a in 0..nuv {
        for y in 0..ny {
            l1 += (joint[a * ny + y] - pa[a] * py[y]).abs();
        }
    }
    (mi, 0.5 * l1)
}

#[test]
fn secrecy_matches_block_mutual_information() {
    let t = CoordinationTarget::separation(0.3, 0.1, 0.1).unwrap();
    let mut cfg = ExactConfig::new(2, 0.5, 0.5, (0..4).collect());
    cfg.secrecy = true;
    let scan = secrecy_scan(&t, &cfg).unwrap();
    for r in &scan.per_seed {
        let s = r.secrecy.as_ref().unwrap();
        let (mi, tv) = block_secrecy(r.induced.as_ref().unwrap(), 2);
        assert!((s.mutual_information - mi.max(0.0)).abs() < 1e-10, "{} vs {mi}", s.mutual_information);
        assert!((s.tv_independence - tv).abs() < 1e-12);
    }
}

#[test]
fn secrecy_bound_holds_at_n4() {
    let t = CoordinationTarget::separation(0.3, 0.1, 0.1).unwrap();
    let mut cfg = ExactConfig::new(4, 0.5, 0.25, (0..4).collect());
    cfg.secrecy = true;
    let scan = secrecy_scan(&t, &cfg).unwrap();
    for r in &scan.per_seed {
        let s = r.secrecy.as_ref().unwrap();
        let d = 2.0 * s.tv_independence;
        let bound = if d > 0.0 { d * (256.0 / d).log2() } else { 0.0 };
        assert!(s.mutual_information <= bound + 1e-12, "seed {}: {} > {bound}", r.seed, s.mutual_information);
    }
}

#[test]
fn perfect_independent_coordination_has_no_leak() {
    // W is a function of nothing the channel sees and V ignores it.
    let src = FiniteDist::bernoulli(U, 0.3).unwrap();
    let t = CoordinationTarget::constant_auxiliary(
        src,
        &Kernel::bsc(U, X, 0.5).unwrap(),
        Kernel::bsc(X, Y, 0.2).unwrap(),
        &Kernel::from_fn(vec![bin2(Y)], vec![bin2(V)], |_, t| if t[0] == 0 { 0.6 } else { 0.4 }).unwrap(),
    )
    .unwrap();
    let mut cfg = ExactConfig::new(3, 0.0, 0.0, vec![0]);
    cfg.secrecy = true;
    let scan = secrecy_scan(&t, &cfg).unwrap();
    let r = scan.best();
    assert!(r.tv < 1e-14);
    assert!(r.secrecy.as_ref().unwrap().mutual_information < 1e-12);
}
