use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qdg::classical::{classical_embed, ClassicalModel};
use qdg::credal::{
    condition_nonselective, condition_selective, credal_from_assessments, marginal, Assessment, CredalSet,
};
use qdg::game::{run_simulation, Scenario};
use qdg::linalg::{
    classify, eig, inner, partial_trace, sigma_x, tensor, CMatrix, Complex64, Definiteness, HermitianMatrix,
    Subsystem, UnitaryMap,
};
use qdg::measurement::{born_probabilities, dephase, eigenmeasurement, payoff, DensityMatrix, ProjectiveMeasurement, Projector};
use qdg::optim::{diagonal_fast_path, sdp_minimize, SdpProblem, SdpStatus};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(gauss(rng), 0.0);
        for j in i + 1..n {
            let z = c(gauss(rng), gauss(rng)) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(m).unwrap()
}

fn complex(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(r, k, |_, _| c(gauss(rng), gauss(rng)))
}

fn state(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DensityMatrix {
    let z = complex(rng, n, rank);
    let w = &z * z.adjoint();
    let t = w.trace().re;
    DensityMatrix::new(HermitianMatrix::new(w / c(t, 0.0)).unwrap()).unwrap()
}

fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    complex(rng, n, n).qr().q()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| c(gauss(rng), gauss(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Border assessments with a common full-rank interior state.
fn coherent_set(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CredalSet {
    let inner_state = state(rng, n, n);
    let a: Vec<Assessment> = (0..k)
        .map(|_| {
            let g = hermitian(rng, n);
            let e = inner(&g, inner_state.matrix()).unwrap();
            Assessment::border(g.shift(0.05 + 0.2 * rng.random::<f64>() - e))
        })
        .collect();
    credal_from_assessments(&a, n).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 3, 4])
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn congruence_keeps_psd(seed: u64, n in prop::sample::select(vec![2usize, 3, 4, 8])) {
        let mut r = rng(seed);
        let z = complex(&mut r, n, 1 + (seed % n as u64) as usize);
        let a = HermitianMatrix::new(&z * z.adjoint()).unwrap();
        let cm = complex(&mut r, n, n);
        let d = classify(&a.congruence(&cm).unwrap());
        prop_assert!(matches!(d, Definiteness::PSDNZ | Definiteness::PD | Definiteness::Zero), "{d:?}");
        let h = hermitian(&mut r, n);
        if classify(&h).is_positive() || classify(&h) == Definiteness::Zero {
            let d = classify(&h.congruence(&cm).unwrap());
            prop_assert!(matches!(d, Definiteness::PSDNZ | Definiteness::PD | Definiteness::Zero));
        }
    }

    #[test]
    fn eig_reconstructs(seed: u64, n in prop::sample::select(vec![2usize, 3, 4, 8])) {
        let a = hermitian(&mut rng(seed), n);
        let e = eig(&a).unwrap();
        let v = &e.eigenvectors;
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(max_abs(&(v.adjoint() * v - CMatrix::identity(n, n))) <= 1e-10);
        let back = e.map_spectrum(|x| x);
        prop_assert!((&back - &a).norm_inf() <= 1e-10 * a.norm_inf().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_spectrum_is_pairwise_products(seed: u64, na in dims(), nb in dims()) {
        let mut r = rng(seed);
        let (a, b) = (hermitian(&mut r, na), hermitian(&mut r, nb));
        let ea = a.eigenvalues().unwrap();
        let eb = b.eigenvalues().unwrap();
        let mut products: Vec<f64> = ea.iter().flat_map(|x| eb.iter().map(move |y| x * y)).collect();
        products.sort_by(f64::total_cmp);
        let got = tensor(&a, &b).eigenvalues().unwrap();
        for (x, y) in got.iter().zip(&products) {
            prop_assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn partial_trace_is_linear(seed: u64, na in dims(), nb in dims(), al in -3.0..3.0f64, be in -3.0..3.0f64) {
        let mut r = rng(seed);
        let (m, n) = (hermitian(&mut r, na * nb), hermitian(&mut r, na * nb));
        for over in [Subsystem::A, Subsystem::B] {
            let lhs = partial_trace(&(&m.scale(al) + &n.scale(be)), (na, nb), over).unwrap();
            let rhs = &partial_trace(&m, (na, nb), over).unwrap().scale(al)
                + &partial_trace(&n, (na, nb), over).unwrap().scale(be);
            prop_assert!((&lhs - &rhs).norm_inf() <= 1e-12 * (1.0 + m.norm_inf() + n.norm_inf()) * 10.0);
        }
    }

    #[test]
    fn inner_symmetric_and_bilinear(seed: u64, n in dims(), al in -3.0..3.0f64, be in -3.0..3.0f64) {
        let mut r = rng(seed);
        let (a, b, d) = (hermitian(&mut r, n), hermitian(&mut r, n), hermitian(&mut r, n));
        prop_assert!((inner(&a, &b).unwrap() - inner(&b, &a).unwrap()).abs() <= 1e-12);
        let lhs = inner(&(&a.scale(al) + &b.scale(be)), &d).unwrap();
        let rhs = al * inner(&a, &d).unwrap() + be * inner(&b, &d).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * 100.0);
    }

    #[test]
    fn payoff_is_linear(seed: u64, n in dims(), nu in 0.01..10.0f64) {
        let mut r = rng(seed);
        let (g1, g2) = (hermitian(&mut r, n), hermitian(&mut r, n));
        let p = Projector::onto(&unit_vector(&mut r, n)).unwrap();
        let sum = payoff(&(&g1 + &g2), &p).unwrap();
        prop_assert!((sum - payoff(&g1, &p).unwrap() - payoff(&g2, &p).unwrap()).abs() <= 1e-10);
        prop_assert!((payoff(&g1.scale(nu), &p).unwrap() - nu * payoff(&g1, &p).unwrap()).abs() <= 1e-10 * nu.max(1.0));
    }

    #[test]
    fn positive_gambles_never_lose(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let z = complex(&mut r, n, 1 + (seed % n as u64) as usize);
        let g = HermitianMatrix::new(&z * z.adjoint()).unwrap();
        let m = ProjectiveMeasurement::from_unitary_columns(&unitary(&mut r, n)).unwrap();
        let pays: Vec<f64> = m.projectors().iter().map(|p| payoff(&g, p).unwrap()).collect();
        prop_assert!(pays.iter().all(|&x| x >= -1e-10), "{pays:?}");
        prop_assert!(pays.iter().any(|&x| x > 1e-10), "{pays:?}");
    }

    #[test]
    fn expected_payoff_identity(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let rho = state(&mut r, n, 1 + (seed % n as u64) as usize);
        let g = hermitian(&mut r, n);
        let m = eigenmeasurement(&rho).unwrap();
        let probs = born_probabilities(&rho, &m).unwrap();
        let total: f64 = probs.iter().zip(m.projectors()).map(|(p, pr)| p * payoff(&g, pr).unwrap()).sum();
        prop_assert!((total - rho.expectation(&g).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn simulation_is_reproducible(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let rho = state(&mut r, n, n);
        let gs = vec![hermitian(&mut r, n), hermitian(&mut r, n)];
        let s = Scenario::new(rho, gs, 200, seed);
        let a = run_simulation(&s).unwrap();
        prop_assert_eq!(&a, &run_simulation(&s).unwrap());
        for (g, total) in a.cumulative.iter().enumerate() {
            let mut acc = 0.0;
            for &o in &a.outcomes {
                acc += a.payoffs[g][o];
            }
            prop_assert_eq!(acc, *total);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prevision_axioms(seed: u64, n in dims(), k in 1usize..4, shift in -5.0..5.0f64, nu in 0.1..10.0f64) {
        let mut r = rng(seed);
        let m = coherent_set(&mut r, n, k);
        let (g, f) = (hermitian(&mut r, n), hermitian(&mut r, n));
        let lg = m.lower_prevision(&g).unwrap();
        let ug = m.upper_prevision(&g).unwrap();
        prop_assert_eq!(ug, -m.lower_prevision(&g.scale(-1.0)).unwrap());
        prop_assert!(lg <= ug + 1e-9);
        prop_assert!((m.lower_prevision(&g.shift(shift)).unwrap() - lg - shift).abs() <= 1e-7);
        prop_assert!((m.lower_prevision(&g.scale(nu)).unwrap() - nu * lg).abs() <= 1e-7 * nu.max(1.0) * lg.abs().max(1.0));
        let lf = m.lower_prevision(&f).unwrap();
        prop_assert!(m.lower_prevision(&(&g + &f)).unwrap() >= lg + lf - 1e-7);
        prop_assert!(lg >= g.min_eigenvalue().unwrap() - 1e-7);
        prop_assert!(ug <= g.max_eigenvalue().unwrap() + 1e-7);
    }

    #[test]
    fn evolution_invariance(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let m = coherent_set(&mut r, n, 2);
        let u = unitary(&mut r, n);
        let map = UnitaryMap::new(u.clone(), false).unwrap();
        let g = hermitian(&mut r, n);
        let moved = HermitianMatrix::new(&u * g.as_matrix() * u.adjoint()).unwrap();
        let before = m.lower_prevision(&g).unwrap();
        let after = m.evolve(&map).unwrap().lower_prevision(&moved).unwrap();
        prop_assert!((before - after).abs() <= 1e-7, "{before} vs {after}");
        prop_assert!(CredalSet::vacuous(n).evolve(&map).unwrap().is_vacuous());
    }

    #[test]
    fn marginal_consistency(seed: u64, na in prop::sample::select(vec![2usize, 3]), nb in prop::sample::select(vec![2usize, 3])) {
        let mut r = rng(seed);
        let joint = coherent_set(&mut r, na * nb, 2);
        let g = hermitian(&mut r, na);
        let mar = marginal(&joint, (na, nb), Subsystem::A).unwrap();
        let direct = joint.lower_prevision(&tensor(&g, &HermitianMatrix::identity(nb))).unwrap();
        prop_assert!((mar.lower_prevision(&g).unwrap() - direct).abs() <= 1e-7);
        let rho = state(&mut r, na * nb, 1 + (seed % 3) as usize);
        let single = marginal(&CredalSet::singleton(rho), (na, nb), Subsystem::B).unwrap();
        prop_assert!(single.is_maximal().unwrap());
    }

    #[test]
    fn born_consistency(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let rho = state(&mut r, n, 1 + (seed % n as u64) as usize);
        let m = ProjectiveMeasurement::from_unitary_columns(&unitary(&mut r, n)).unwrap();
        let set = CredalSet::singleton(rho.clone());
        let probs = born_probabilities(&rho, &m).unwrap();
        for (p, pr) in probs.iter().zip(m.projectors()) {
            let direct = inner(&pr.matrix().sandwich(pr.matrix()).unwrap(), rho.matrix()).unwrap();
            let iv = set.prevision(pr.matrix()).unwrap();
            prop_assert!((iv.lower - direct).abs() <= 1e-9 && (iv.upper - direct).abs() <= 1e-9);
            prop_assert!((p - direct).abs() <= 1e-9);
        }
    }

    #[test]
    fn conditioning_stays_coherent(seed: u64, n in dims()) {
        let mut r = rng(seed);
        let m = coherent_set(&mut r, n, 2);
        let p = Projector::onto(&unit_vector(&mut r, n)).unwrap();
        prop_assume!(m.lower_prevision(p.matrix()).unwrap() > 1e-3);
        let cond = condition_selective(&m, &p).unwrap();
        let g = hermitian(&mut r, n);
        let iv = cond.prevision(&g).unwrap();
        prop_assert!(iv.lower <= iv.upper + 1e-9);
        prop_assert!(iv.lower >= g.min_eigenvalue().unwrap() - 1e-7);
        prop_assert!(iv.upper <= g.max_eigenvalue().unwrap() + 1e-7);
        prop_assert!((cond.lower_prevision(&HermitianMatrix::identity(n).scale(2.5)).unwrap() - 2.5).abs() <= 1e-7);
    }

    #[test]
    fn nonselective_conditioning_without_total_probability(seed: u64) {
        let g = sigma_x();
        let canonical = ProjectiveMeasurement::canonical(2);
        prop_assert!((&dephase(&g, &canonical).unwrap() - &g).norm_inf() > 0.1);
        let m = coherent_set(&mut rng(seed), 2, 2);
        let cond = condition_nonselective(&m, &canonical, &[0, 1]).unwrap();
        let iv = cond.prevision(&g).unwrap();
        prop_assert!(iv.lower <= iv.upper + 1e-9);
        prop_assert!(iv.lower >= -1.0 - 1e-7 && iv.upper <= 1.0 + 1e-7);
        prop_assert!((cond.lower_prevision(&HermitianMatrix::identity(2)).unwrap() - 1.0).abs() <= 1e-7);
    }
}

/// Random mass functions with every coordinate at least `floor`.
fn mass_functions(rng: &mut ChaCha8Rng, n: usize, count: usize, floor: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| floor + (1.0 - n as f64 * floor) * x / s).collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum of `g . p` over `{p in simplex : a . p >= b}` by enumerating
/// every basic solution of the active-set systems.
fn vertex_oracle(g: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = g.len();
    let mut all: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        all.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n - 1];
    fn rec(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        all: &[(Vec<f64>, f64)],
        g: &[f64],
        best: &mut Option<f64>,
    ) {
        let n = g.len();
        if depth == n - 1 {
            let a = DMatrix::from_fn(n, n, |i, j| if i == 0 { 1.0 } else { all[pick[i - 1]].0[j] });
            let b = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { all[pick[i - 1]].1 });
            if let Some(p) = a.lu().solve(&b) {
                let p: Vec<f64> = p.iter().copied().collect();
                if p.iter().all(|x| x.is_finite()) && all.iter().all(|(r, h)| dot(r, &p) >= h - 1e-9) {
                    let v = dot(g, &p);
                    *best = Some(best.map_or(v, |w: f64| w.min(v)));
                }
            }
            return;
        }
        for k in start..all.len() {
            pick[depth] = k;
            rec(k + 1, depth + 1, pick, all, g, best);
        }
    }
    rec(0, 0, &mut pick, &all, g, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn diagonal_solvers_agree_with_vertex_oracle(seed: u64, n in 2usize..=6, k in 1usize..=6) {
        let mut r = rng(seed);
        let center = mass_functions(&mut r, n, 1, 0.02).remove(0);
        let rows: Vec<(Vec<f64>, f64)> = (0..k)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| gauss(&mut r)).collect();
                let h = dot(&a, &center) - 0.1 * r.random::<f64>();
                (a, h)
            })
            .collect();
        let g: Vec<f64> = (0..n).map(|_| gauss(&mut r)).collect();
        let oracle = vertex_oracle(&g, &rows).unwrap();
        let problem = SdpProblem::new(
            HermitianMatrix::diagonal(&g),
            rows.iter().map(|(a, h)| (HermitianMatrix::diagonal(a), *h)).collect(),
        )
        .unwrap();
        let fast = diagonal_fast_path(&problem).unwrap();
        let sdp = sdp_minimize(&problem).unwrap();
        prop_assert_eq!(fast.status, SdpStatus::Optimal);
        prop_assert_eq!(sdp.status, SdpStatus::Optimal);
        prop_assert!((fast.value - oracle).abs() <= 1e-6, "fast {} oracle {}", fast.value, oracle);
        prop_assert!((sdp.value - oracle).abs() <= 1e-6, "sdp {} oracle {}", sdp.value, oracle);
        prop_assert!(sdp.gap <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn classical_operations_match_vertex_brute_force(seed: u64, n in 2usize..=4, count in 1usize..=4) {
        let mut r = rng(seed);
        let vs = mass_functions(&mut r, n, count, 0.05);
        let m = classical_embed(&ClassicalModel::Vertices(vs.clone())).unwrap();
        let g: Vec<f64> = (0..n).map(|_| gauss(&mut r)).collect();
        let brute = vs.iter().map(|p| dot(&g, p)).fold(f64::INFINITY, f64::min);
        prop_assert!((m.lower_prevision(&HermitianMatrix::diagonal(&g)).unwrap() - brute).abs() <= 1e-6);
        let event = (seed % n as u64) as usize;
        let cond = condition_selective(&m, &Projector::basis(n, event)).unwrap();
        prop_assert!((cond.lower_prevision(&HermitianMatrix::diagonal(&g)).unwrap() - g[event]).abs() <= 1e-6);
        let meas = ProjectiveMeasurement::canonical(n);
        let nonsel = condition_nonselective(&m, &meas, &[event, (event + 1) % n]).unwrap();
        let (i, j) = (event, (event + 1) % n);
        // Linear-fractional objectives attain their extremes at vertices.
        let brute = vs
            .iter()
            .map(|p| (g[i] * p[i] + g[j] * p[j]) / (p[i] + p[j]))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((nonsel.lower_prevision(&HermitianMatrix::diagonal(&g)).unwrap() - brute).abs() <= 1e-6);
        let rho = DensityMatrix::diagonal(&vs[0]).unwrap();
        prop_assert!(m.contains(&rho).unwrap());
    }
}
