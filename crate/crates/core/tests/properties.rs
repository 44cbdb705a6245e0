use proptest::prelude::*;
use satgap::analytic::{f_factor, gap_closed_form, moments};
use satgap::dense::symmetric_eigenvalues;
use satgap::instances::{emit_dimacs, parse_dimacs};
use satgap::reduced::{build_reduced, charpoly_normalized};
use satgap::spectrum::{degeneracy_spectrum, degeneracy_spectrum_with, violation_count};
use satgap::{Assignment, Clause, EnumerationConfig, HamiltonianParams, Literal, MomentSet, SatInstance};

fn clause(n: u32) -> impl Strategy<Value = Clause> {
    (proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3), any::<[bool; 3]>()).prop_map(|(vars, neg)| {
        Clause::new([0, 1, 2].map(|k| Literal::new(vars[k], neg[k]))).expect("distinct variables")
    })
}

fn instance(max_n: u32, max_m: usize) -> impl Strategy<Value = SatInstance> {
    (3..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(clause(n), 1..=max_m).prop_map(move |c| SatInstance::new(n, c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(inst in instance(20, 60)) {
        let text = emit_dimacs(&inst).unwrap();
        let back = parse_dimacs(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(emit_dimacs(&back).unwrap(), text);
    }

    #[test]
    fn spectrum_counts_assignments(inst in instance(10, 40)) {
        let spectrum = degeneracy_spectrum(&inst).unwrap();
        let mut naive = vec![0u64; inst.m() + 1];
        for bits in 0..1u64 << inst.n() {
            naive[violation_count(&inst, &Assignment::new(bits, inst.n()).unwrap()).unwrap()] += 1;
        }
        while naive.len() > 1 && naive.last() == Some(&0) {
            naive.pop();
        }
        prop_assert_eq!(spectrum.counts(), &naive[..]);
        let total: u64 = naive.iter().sum();
        prop_assert_eq!(total, 1 << inst.n());
        prop_assert_eq!(8 * spectrum.first_moment_count(), inst.m() as u128 * (1u128 << inst.n()));
    }

    #[test]
    fn spectrum_independent_of_thread_count(inst in instance(16, 70), threads in 2usize..6) {
        let one = degeneracy_spectrum_with(&inst, &EnumerationConfig::with_threads(1)).unwrap();
        let many = degeneracy_spectrum_with(&inst, &EnumerationConfig::with_threads(threads)).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn secular_roots_interlace_and_match_dense(inst in instance(12, 50), t in 0.02f64..0.98) {
        let spectrum = degeneracy_spectrum(&inst).unwrap();
        let params = HamiltonianParams::for_spectrum(&spectrum).unwrap();
        let h = build_reduced(&spectrum, &params, t).unwrap();
        let k = h.dim();
        let roots = h.secular_eigenvalues(k).unwrap();
        let eps = h.eps();
        for (j, &e) in roots.iter().enumerate() {
            let lower = if j == 0 { eps[0] - h.rho() } else { eps[j - 1] };
            prop_assert!(lower < e && e < eps[j], "level {} at t = {}", j, t);
        }
        let dense = symmetric_eigenvalues(h.to_dense(), k).unwrap();
        for (a, b) in roots.iter().zip(&dense) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
        let sum: f64 = roots.iter().sum();
        prop_assert!((sum - h.trace()).abs() <= 1e-10 * h.trace().abs());
    }

    #[test]
    fn charpoly_vanishes_at_secular_roots(inst in instance(12, 50), t in 0.05f64..0.95) {
        let spectrum = degeneracy_spectrum(&inst).unwrap();
        let params = HamiltonianParams::for_spectrum(&spectrum).unwrap();
        let h = build_reduced(&spectrum, &params, t).unwrap();
        let p = |x: f64| charpoly_normalized(&spectrum, &params, x, t).unwrap();
        for e in h.secular_eigenvalues(h.dim()).unwrap() {
            let delta = 1e-9 * (1.0 + e.abs());
            let (below, at, above) = (p(e - delta), p(e), p(e + delta));
            prop_assert!(below * above < 0.0, "no sign change around {}", e);
            prop_assert!(at.abs() <= 1e-4 * below.abs().min(above.abs()), "p({}) = {}", e, at);
        }
    }

    #[test]
    fn closed_form_factor_is_bounded(inst in instance(14, 70)) {
        let spectrum = degeneracy_spectrum(&inst).unwrap();
        prop_assume!(spectrum.d0() > 0 && spectrum.max_violations() > 0);
        let params = HamiltonianParams::for_spectrum(&spectrum).unwrap();
        let mom: MomentSet = moments(&spectrum);
        prop_assert_eq!(mom.gamma, inst.m() as f64 / 8.0);
        let f = f_factor(&mom);
        prop_assert!(f > 0.0 && f <= 2.0, "f = {}", f);
        let closed = gap_closed_form(&mom, &params, spectrum.d0()).unwrap();
        prop_assert!(closed.gap.t_min > 0.0 && closed.gap.t_min < 1.0);
        prop_assert!(closed.delta_exact_b > closed.gap.delta);
    }
}
