//! Distributional checks on the event loop: exact affine clocks against
//! thinned simulation, skeleton structure on discontinuous targets, and
//! reproducibility of seeded runs.

use pdmp::kernels::BoundaryKernel;
use pdmp::sampler::{check_skeleton, path_moments, simulate, SamplerKind, SimRng, State, StopRule};
use pdmp::target::{PiecewiseTarget, Region, RegionId};
use pdmp::velocity::{Basis, VelocitySpace};

/// A single free Gaussian region with no facets, either exact or wrapped as
/// a generic region with a rate bound for thinning.
fn free_gaussian(dim: usize, thinned: bool) -> PiecewiseTarget {
    let scale = 1.0;
    let region = if thinned {
        Region::generic(
            "everything",
            Box::new(move |x: &[f64]| -x.iter().map(|xi| xi * xi).sum::<f64>() / (2.0 * scale)),
            Box::new(move |x: &[f64]| x.iter().map(|xi| -xi / scale).collect()),
            Box::new(|_: &[f64]| true),
            // bound on <v, x + t v> / scale over [0, t_max] for unit-speed
            // velocities; generous slack exercises the rejection path
            Box::new(move |x: &[f64], v: &[f64], t_max: f64| {
                let xv: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                let vv: f64 = v.iter().zip(v).map(|(a, b)| a * b).sum();
                (xv.abs() + t_max * vv) / scale + 0.5
            }),
        )
    } else {
        Region::gaussian_iso("everything", scale, 1.0, Box::new(|_: &[f64]| true))
    };
    PiecewiseTarget::new(dim, vec![region], vec![]).unwrap()
}

/// Exact inversion and thinning must produce the same law: compare bounce
/// counts per fixed-length trajectory with a two-sample chi-square test.
#[test]
fn thinned_and_exact_paths_have_the_same_event_law() {
    let exact_target = free_gaussian(2, false);
    let thinned_target = free_gaussian(2, true);
    let space = VelocitySpace::unit_sphere(2);
    let kind = SamplerKind::Bps { refresh_rate: 0.0 };
    let trajectories = 10_000;
    let horizon = 4.0;

    let counts = |target: &PiecewiseTarget, seed_base: u64| -> Vec<u64> {
        (0..trajectories)
            .map(|i| {
                let mut rng = SimRng::for_chain(seed_base, i);
                let v0 = space.sample(rng.velocity());
                let skel = simulate(
                    target,
                    kind,
                    &space,
                    BoundaryKernel::Flip,
                    State::new(RegionId(0), vec![0.7, -0.2], v0),
                    StopRule::MaxTime(horizon),
                    &mut rng,
                )
                .unwrap();
                skel.event_counts.bounce
            })
            .collect()
    };
    let exact_counts = counts(&exact_target, 500);
    let thinned_counts = counts(&thinned_target, 501);

    // bin counts 0..=8 with a pooled tail, two-sample chi-square
    let bins = 9usize;
    let mut observed_exact = vec![0.0f64; bins + 1];
    let mut observed_thinned = vec![0.0f64; bins + 1];
    for &c in &exact_counts {
        observed_exact[(c as usize).min(bins)] += 1.0;
    }
    for &c in &thinned_counts {
        observed_thinned[(c as usize).min(bins)] += 1.0;
    }
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    for k in 0..=bins {
        let (a, b) = (observed_exact[k], observed_thinned[k]);
        if a + b < 5.0 {
            continue;
        }
        chi2 += (a - b).powi(2) / (a + b);
        dof += 1;
    }
    // 0.1% critical values indexed by degrees of freedom
    let crit = [
        0.0, 10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588,
    ][dof - 1];
    assert!(chi2 < crit, "chi2 {chi2} over {crit} with {dof} classes");
}

#[test]
fn mixture_trajectories_have_consistent_region_bookkeeping() {
    // weight 2 inside the cube, weight 1 outside: trajectories cross back
    // and forth through the discontinuity
    let target = PiecewiseTarget::gaussian_hypercube(2, 1.0, 2.0, 1.0, 1.0).unwrap();
    let space = VelocitySpace::signed_hypercube(Basis::canonical(2));
    let mut rng = SimRng::from_seed(77);
    let v0 = space.sample(rng.velocity());
    let skel = simulate(
        &target,
        SamplerKind::ZigZag,
        &space,
        BoundaryKernel::Limit,
        State::new(RegionId(0), vec![0.1, 0.4], v0),
        StopRule::MaxEvents(5_000),
        &mut rng,
    )
    .unwrap();
    check_skeleton(&target, &skel).unwrap();

    let mut crossings = 0;
    for pair in skel.breakpoints.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        if from.region != to.region {
            crossings += 1;
        }
        // the recorded region owns the segment midpoint
        let dt = to.t - from.t;
        if dt <= 1e-12 {
            continue;
        }
        let mid: Vec<f64> = from
            .position
            .iter()
            .zip(&from.velocity)
            .map(|(x, v)| x + 0.5 * dt * v)
            .collect();
        assert_eq!(
            target.region_of(&mid).unwrap(),
            from.region,
            "segment starting at t = {} carries the wrong region",
            from.t
        );
    }
    assert!(
        crossings > 50,
        "expected plenty of pass-throughs, saw {crossings}"
    );
    let moments = path_moments(&skel, 2);
    assert!(moments.occupancy[0] > 0.1 && moments.occupancy[1] > 0.05);
}

#[test]
fn refresh_events_arrive_at_the_configured_rate() {
    let target = free_gaussian(2, false);
    let space = VelocitySpace::unit_sphere(2);
    let rate = 2.0;
    let horizon = 500.0;
    let mut rng = SimRng::from_seed(8);
    let v0 = space.sample(rng.velocity());
    let skel = simulate(
        &target,
        SamplerKind::Bps { refresh_rate: rate },
        &space,
        BoundaryKernel::Flip,
        State::new(RegionId(0), vec![0.0, 0.0], v0),
        StopRule::MaxTime(horizon),
        &mut rng,
    )
    .unwrap();
    let expected = rate * horizon;
    let observed = skel.event_counts.refresh as f64;
    assert!(
        (observed - expected).abs() < 4.0 * expected.sqrt(),
        "refresh count {observed} vs Poisson({expected})"
    );
}

#[test]
fn identical_seeds_reproduce_the_skeleton() {
    let target = PiecewiseTarget::gaussian_hypercube(3, 1.0, 1.0, 1.0, 0.0).unwrap();
    let space = VelocitySpace::coordinate_axes(Basis::canonical(3));
    let run = || {
        let mut rng = SimRng::from_seed(4242);
        let v0 = space.sample(rng.velocity());
        simulate(
            &target,
            SamplerKind::CoordinateSampler { refresh_rate: 0.7 },
            &space,
            BoundaryKernel::MetropolisHastings { iters: 2 },
            State::new(RegionId(0), vec![0.0, 0.0, 0.0], v0),
            StopRule::MaxEvents(2_000),
            &mut rng,
        )
        .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.breakpoints.len(), b.breakpoints.len());
    for (x, y) in a.breakpoints.iter().zip(&b.breakpoints) {
        assert_eq!(x.t, y.t);
        assert_eq!(x.position, y.position);
        assert_eq!(x.velocity, y.velocity);
        assert_eq!(x.tag, y.tag);
        assert_eq!(x.region, y.region);
    }
}

/// With matching scales and weights on both sides the density is continuous
/// across the cube surface; hits classify as degenerate and the trajectory
/// passes straight through, exactly like a single free Gaussian.
#[test]
fn continuous_density_passes_straight_through_facets() {
    let target = PiecewiseTarget::gaussian_hypercube(2, 1.0, 1.0, 1.0, 1.0).unwrap();
    let space = VelocitySpace::unit_sphere(2);
    let mut rng = SimRng::from_seed(31);
    let v0 = space.sample(rng.velocity());
    let skel = simulate(
        &target,
        SamplerKind::Bps { refresh_rate: 0.5 },
        &space,
        BoundaryKernel::Limit,
        State::new(RegionId(0), vec![0.0, 0.0], v0),
        StopRule::MaxEvents(3_000),
        &mut rng,
    )
    .unwrap();
    check_skeleton(&target, &skel).unwrap();
    for pair in skel.breakpoints.windows(2) {
        if pair[1].tag == pdmp::sampler::EventTag::Boundary {
            assert_eq!(
                pair[0].velocity, pair[1].velocity,
                "degenerate crossings keep the velocity"
            );
        }
    }
    assert!(skel.event_counts.boundary > 0);
}
