use netprice_core::instances::{gen_counterexample, gen_random};
use netprice_core::linalg::{is_strictly_diag_dominant, spectral_radius_below_one, RatMatrix};
use netprice_core::rat::{frac, int};
use netprice_core::sweep::{equilibrium_at_price_vector, pessimistic_sweep, sweep};
use netprice_core::transfer::{default_tol, is_equilibrium_exact, iterate_fixed_point, PriceAssignment};
use netprice_core::{
    evaluate, structure_of, GroupedInstance, Instance, Label, PiecewiseEquilibrium, ProbVec, Rat, Side,
};
use num_traits::Signed;
use proptest::prelude::*;

/// Breakpoints, segment midpoints and the limits at excluded endpoints.
fn check_fixed_points(inst: &Instance, offsets: &[Rat], pwl: &PiecewiseEquilibrium) {
    let prices = |p: &Rat| {
        if offsets.is_empty() {
            PriceAssignment::Uniform(p.clone())
        } else {
            PriceAssignment::PerAgent(offsets.iter().map(|d| p + d).collect())
        }
    };
    for seg in &pwl.segments {
        let mut samples = vec![seg.interior_point()];
        samples.extend(seg.lo.clone());
        samples.extend(seg.hi.clone());
        for p in samples {
            let q = seg.value_at(&p);
            assert!(is_equilibrium_exact(inst, &prices(&p), &q), "not a fixed point at {p}");
        }
    }
    for bp in pwl.breakpoints() {
        assert!(is_equilibrium_exact(inst, &prices(&bp), &evaluate(pwl, &bp)));
    }
}

fn rank(l: Label) -> u8 {
    match l {
        Label::Zero => 0,
        Label::Star => 1,
        Label::One => 2,
    }
}

fn check_shape(pwl: &PiecewiseEquilibrium) {
    pwl.check_well_formed().unwrap();
    let n = pwl.n();
    assert!(pwl.segments.len() <= 2 * n + 1);
    // Structure only advances toward ONE as the price drops.
    let mut prev: Option<Vec<Label>> = None;
    for seg in &pwl.segments {
        let s = structure_of(&ProbVec::new(seg.value_at(&seg.interior_point())).unwrap()).0;
        if let Some(p) = &prev {
            assert!(p.iter().zip(&s).all(|(a, b)| rank(*a) <= rank(*b)));
        }
        prev = Some(s);
    }
    assert!(pwl.segments[0].c0.iter().all(|c| *c == int(0)) && pwl.segments[0].is_constant());
    let last = pwl.segments.last().unwrap();
    assert!(last.c0.iter().all(|c| *c == int(1)) && last.is_constant());
}

#[test]
fn seeded_instances_hold_all_sweep_invariants() {
    for seed in 0..60u64 {
        let n = 1 + (seed % 7) as usize;
        let inst = gen_random(n, 0.5, seed, seed % 2 == 0).unwrap();
        for side in [Side::Pessimistic, Side::Optimistic] {
            let out = sweep(&inst, &[], side).unwrap();
            check_shape(&out.equilibrium);
            check_fixed_points(&inst, &[], &out.equilibrium);
        }
        let offsets: Vec<Rat> = (0..n).map(|i| frac((i as i64 * 7 + seed as i64) % 5, 3)).collect();
        let pwl = pessimistic_sweep(&inst, &offsets).unwrap();
        check_shape(&pwl);
        check_fixed_points(&inst, &offsets, &pwl);
    }
}

#[test]
fn diag_dominant_instances_never_pivot() {
    for seed in 0..80u64 {
        let inst = gen_random(2 + (seed % 6) as usize, 0.9, seed, true).unwrap();
        assert!(is_strictly_diag_dominant(&inst));
        for side in [Side::Pessimistic, Side::Optimistic] {
            assert!(!sweep(&inst, &[], side).unwrap().pivot_taken);
        }
    }
}

#[test]
fn counterexample_limits_at_unit_price() {
    for n in [4usize, 6, 10] {
        let pwl = pessimistic_sweep(&gen_counterexample(n).unwrap(), &[]).unwrap();
        let q = evaluate(&pwl, &int(1));
        for i in 0..n - 2 {
            assert_eq!(q[i], netprice_core::rat::pow2(-(i as i32) - 1));
        }
        assert_eq!(q[n - 2], int(1));
        assert_eq!(q[n - 1], int(1));
    }
}

#[test]
fn oracle_sandwich_around_the_derived_breakpoint() {
    let inst = gen_counterexample(4).unwrap();
    let pwl = pessimistic_sweep(&inst, &[]).unwrap();
    let tol = default_tol();
    for p in [frac(22, 21) - frac(1, 1000), frac(22, 21) + frac(1, 1000)] {
        let run = iterate_fixed_point(&inst, &PriceAssignment::Uniform(p.clone()), &ProbVec::zeros(4), 10_000, &tol);
        assert!(run.converged);
        let q = evaluate(&pwl, &p);
        // Iterates from zero stay below the least fixed point.
        assert!(run.q.le(&q));
        let gap = q.iter().zip(run.q.iter()).map(|(a, b)| a - b).max().unwrap();
        assert!(gap <= frac(1, 10_000_000), "gap {gap} at {p}");
    }
}

#[test]
fn basin_of_the_pessimistic_equilibrium() {
    for seed in 0..20u64 {
        let inst = gen_random(4, 0.6, seed, true).unwrap();
        let pwl = pessimistic_sweep(&inst, &[]).unwrap();
        let p = frac(seed as i64 % 9, 2);
        let target = evaluate(&pwl, &p);
        let half: Vec<Rat> = target.iter().map(|x| x / int(2)).collect();
        let price = PriceAssignment::Uniform(p.clone());
        let from_half = iterate_fixed_point(&inst, &price, &ProbVec::new(half).unwrap(), 2000, &default_tol());
        let from_zero = iterate_fixed_point(&inst, &price, &ProbVec::zeros(4), 2000, &default_tol());
        assert!(from_half.converged && from_zero.converged);
        for (a, b) in from_half.q.iter().zip(target.iter()) {
            assert!((a - b).abs() <= frac(1, 10_000_000));
        }
        for (a, b) in from_zero.q.iter().zip(target.iter()) {
            assert!((a - b).abs() <= frac(1, 10_000_000));
        }
    }
}

#[test]
fn gershgorin_subsets_pass_the_gate() {
    for seed in 0..30u64 {
        let n = 2 + (seed % 5) as usize;
        let inst = gen_random(n, 0.8, seed, true).unwrap();
        let l = RatMatrix::from_rows(inst.normalized().l).unwrap();
        for mask in 1u32..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            assert!(spectral_radius_below_one(&l.select(&s, &s)).unwrap());
        }
    }
}

#[test]
fn price_vectors_are_extremal_equilibria() {
    for seed in 0..20u64 {
        let inst = gen_random(5, 0.6, seed, false).unwrap();
        let g = GroupedInstance::new(inst.clone(), 2, vec![0, 1, 0, 1, 1]).unwrap();
        let prices = vec![frac(seed as i64 % 7, 2), frac(seed as i64 % 5, 3)];
        let per_agent = PriceAssignment::from_groups(&g, &prices);
        let lo = equilibrium_at_price_vector(&g, &prices, Side::Pessimistic).unwrap();
        let hi = equilibrium_at_price_vector(&g, &prices, Side::Optimistic).unwrap();
        assert!(is_equilibrium_exact(&inst, &per_agent, &lo));
        assert!(is_equilibrium_exact(&inst, &per_agent, &hi));
        assert!(lo.le(&hi));
        let up = iterate_fixed_point(&inst, &per_agent, &ProbVec::zeros(5), 300, &int(0));
        assert!(up.q.le(&lo));
        let down = iterate_fixed_point(&inst, &per_agent, &ProbVec::ones(5), 300, &int(0));
        assert!(hi.le(&down.q));
    }
}

fn coupled_instance() -> impl Strategy<Value = (Instance, Vec<Rat>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            proptest::collection::vec((0i64..8, 1i64..6), n),
            proptest::collection::vec(prop_oneof![1 => Just(0i64), 1 => 1i64..12], n * n),
            proptest::collection::vec(0i64..6, n),
        )
            .prop_map(move |(ab, w, d)| {
                let a = ab.iter().map(|&(a, _)| frac(a, 2)).collect();
                let b = ab.iter().map(|&(a, w)| frac(a + w, 2)).collect();
                let t = (0..n)
                    .map(|j| (0..n).map(|i| if i == j { int(0) } else { frac(w[j * n + i], 4) }).collect())
                    .collect();
                (Instance::new(a, b, t).unwrap(), d.iter().map(|&x| frac(x, 3)).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn sweep_invariants_hold((inst, offsets) in coupled_instance()) {
        let pess = pessimistic_sweep(&inst, &offsets).unwrap();
        let opt = sweep(&inst, &offsets, Side::Optimistic).unwrap().equilibrium;
        check_shape(&pess);
        check_shape(&opt);
        check_fixed_points(&inst, &offsets, &pess);
        check_fixed_points(&inst, &offsets, &opt);
        let mut prev: Option<(ProbVec, ProbVec)> = None;
        for m in (-4..=40).rev() {
            let p = frac(m, 4);
            let (lo, hi) = (evaluate(&pess, &p), evaluate(&opt, &p));
            prop_assert!(lo.le(&hi));
            if let Some((plo, phi)) = &prev {
                prop_assert!(plo.le(&lo));
                prop_assert!(phi.le(&hi));
            }
            prev = Some((lo, hi));
        }
    }

    #[test]
    fn pessimistic_is_right_continuous((inst, _) in coupled_instance()) {
        let pess = pessimistic_sweep(&inst, &[]).unwrap();
        for (idx, seg) in pess.segments.iter().enumerate() {
            if let Some(lo) = &seg.lo {
                prop_assert_eq!(evaluate(&pess, lo).to_vec(), seg.value_at(lo));
                prop_assert_eq!(pess.segment_index(lo), idx);
            }
        }
    }
}
