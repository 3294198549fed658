//! Stationarity checks that complement the acceptance suite: exact-vs-MC
//! matrix agreement, multi-step Metropolis invariance, and Monte-Carlo
//! checks of the Bouncy-Particle limit kernel on its continuous velocity
//! laws, where no transition matrix exists.

use pdmp::kernels::{self, BoundaryKernel};
use pdmp::oracle::{check_l_invariance, kernel_matrix_exact, kernel_matrix_mc};
use pdmp::sampler::SamplerKind;
use pdmp::target::BoundaryPoint;
use pdmp::velocity::{Basis, VelocitySpace};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn random_unit_normal(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn exact_and_mc_matrices_agree_for_closed_form_kernels() {
    let mut rng = StdRng::seed_from_u64(2024);
    let spaces = [
        VelocitySpace::signed_hypercube(Basis::canonical(3)),
        VelocitySpace::coordinate_axes(Basis::canonical(3)),
    ];
    let kernels_under_test = [
        (BoundaryKernel::Flip, SamplerKind::ZigZag),
        (
            BoundaryKernel::MetropolisHastings { iters: 1 },
            SamplerKind::ZigZag,
        ),
        (
            BoundaryKernel::MetropolisHastings { iters: 3 },
            SamplerKind::ZigZag,
        ),
        (
            BoundaryKernel::Limit,
            SamplerKind::Bps { refresh_rate: 0.0 },
        ),
        (
            BoundaryKernel::Limit,
            SamplerKind::CoordinateSampler { refresh_rate: 0.0 },
        ),
    ];
    let trials = 20_000u64;
    let mut mc_rng = StdRng::seed_from_u64(31337);
    for space in &spaces {
        let normal = random_unit_normal(3, &mut rng);
        let bp = BoundaryPoint::synthetic(normal, 1.0, 2.0);
        for &(kernel, sampler) in &kernels_under_test {
            let exact = kernel_matrix_exact(kernel, sampler, &bp, space).unwrap();
            let mc = kernel_matrix_mc(
                kernel,
                sampler,
                &bp,
                space,
                &exact.states,
                trials,
                &mut mc_rng,
            )
            .unwrap();
            for (i, row) in exact.matrix.iter().enumerate() {
                let row_sum: f64 = mc.freq[i].iter().sum();
                assert!((row_sum - 1.0).abs() < 1e-12, "MC rows are frequencies");
                for (j, &p) in row.iter().enumerate() {
                    let se = (p * (1.0 - p) / trials as f64).sqrt();
                    let diff = (mc.freq[i][j] - p).abs();
                    if se == 0.0 {
                        assert!(
                            diff == 0.0,
                            "{kernel:?}/{}: deterministic entry ({i},{j}) off by {diff}",
                            sampler.name()
                        );
                    } else {
                        assert!(
                            diff < 4.0 * se,
                            "{kernel:?}/{}: entry ({i},{j}) off by {diff} (4se = {})",
                            sampler.name(),
                            4.0 * se
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn metropolis_invariance_holds_for_any_iteration_count() {
    let mut rng = StdRng::seed_from_u64(7);
    let space = VelocitySpace::signed_hypercube(Basis::canonical(3));
    let normal = random_unit_normal(3, &mut rng);
    let bp = BoundaryPoint::synthetic(normal, 0.5, 2.0);
    for iters in [1, 2, 7, 100] {
        let exact = kernel_matrix_exact(
            BoundaryKernel::MetropolisHastings { iters },
            SamplerKind::ZigZag,
            &bp,
            &space,
        )
        .unwrap();
        let l = exact.flux_weights(&bp, &space);
        let residual = check_l_invariance(&exact.flip_composed(), &l);
        assert!(residual < 1e-12, "iters {iters}: residual {residual}");
    }
}

/// Draw from the flux density for the isotropic-Gaussian law by splitting
/// the velocity into its normal component (with density proportional to
/// `|w| exp(-w^2/2)` times the side density) and an unconstrained Gaussian
/// tangential part.
fn sample_flux_iso_gaussian(bp: &BoundaryPoint, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let upper = bp.density_upper;
    let lower = bp.density_lower;
    let positive_mass = upper / (upper + lower);
    let sign = if rng.random::<f64>() < positive_mass {
        1.0
    } else {
        -1.0
    };
    // |w| exp(-w^2/2) dw  <=>  w = sqrt(2 E), E ~ Exp(1)
    let e: f64 = rng.sample::<f64, _>(rand_distr::Exp1);
    let w = sign * (2.0 * e).sqrt();
    let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let z_normal = dot(&z, &bp.normal);
    (0..dim)
        .map(|i| z[i] + (w - z_normal) * bp.normal[i])
        .collect()
}

/// The flux density is invariant under the flip-composed BPS limit kernel
/// on the continuous Gaussian law: push flux samples through the kernel and
/// compare the normal component against fresh flux samples.
#[test]
fn bps_limit_kernel_preserves_flux_on_gaussian_velocities() {
    let dim = 3;
    let mut rng = StdRng::seed_from_u64(99);
    let normal = random_unit_normal(dim, &mut rng);
    for (lower, upper) in [(1.0, 2.0), (0.0, 1.0)] {
        let bp = BoundaryPoint::synthetic(normal.clone(), lower, upper);
        let n = 200_000usize;
        let mut pushed: Vec<f64> = Vec::with_capacity(n);
        let mut reference: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let v = sample_flux_iso_gaussian(&bp, dim, &mut rng);
            // the flip-composed kernel: apply the physical kernel to -v
            let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
            let out = kernels::limit_bps(&bp, &flipped, &mut rng);
            pushed.push(dot(&out, &bp.normal));
            reference.push(dot(
                &sample_flux_iso_gaussian(&bp, dim, &mut rng),
                &bp.normal,
            ));
        }
        pushed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = two_sample_ks(&pushed, &reference);
        // 0.1% level for the two-sample statistic
        let crit = 1.94947 * (2.0 / n as f64).sqrt();
        assert!(
            d < crit,
            "lower {lower}: KS {d} exceeds {crit} on the normal component"
        );
    }
}

fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Same check for the uniform-sphere law in dimension 3, where the normal
/// component of a uniform direction is itself uniform on [-1, 1] and the
/// flux weighting makes it linear on each side.
#[test]
fn bps_limit_kernel_preserves_flux_on_sphere_velocities() {
    let dim = 3;
    let mut rng = StdRng::seed_from_u64(123);
    let normal = random_unit_normal(dim, &mut rng);
    let bp = BoundaryPoint::synthetic(normal.clone(), 1.0, 3.0);
    // flux samples of the normal component: density prop. to |w| * side
    // density on [-1, 1]; inverse-CDF sample w = sign * sqrt(U)
    let n = 200_000usize;
    let mut pushed = Vec::with_capacity(n);
    let mut reference = Vec::with_capacity(n);
    let positive_mass = bp.density_upper / (bp.density_upper + bp.density_lower);
    let sample_w = |rng: &mut StdRng| {
        let sign = if rng.random::<f64>() < positive_mass {
            1.0
        } else {
            -1.0
        };
        sign * rng.random::<f64>().sqrt()
    };
    // tangential completion: uniform direction in the plane orthogonal to n
    let complete = |w: f64, rng: &mut StdRng| -> Vec<f64> {
        loop {
            let z: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let zn = dot(&z, &normal);
            let tangent: Vec<f64> = (0..dim).map(|i| z[i] - zn * normal[i]).collect();
            let t_norm = dot(&tangent, &tangent).sqrt();
            if t_norm < 1e-12 {
                continue;
            }
            let radial = (1.0 - w * w).sqrt();
            return (0..dim)
                .map(|i| w * normal[i] + radial * tangent[i] / t_norm)
                .collect();
        }
    };
    for _ in 0..n {
        let w = sample_w(&mut rng);
        let v = complete(w, &mut rng);
        let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
        let out = kernels::limit_bps(&bp, &flipped, &mut rng);
        pushed.push(dot(&out, &bp.normal));
        reference.push(sample_w(&mut rng));
    }
    pushed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = two_sample_ks(&pushed, &reference);
    let crit = 1.94947 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "KS {d} exceeds {crit}");
}

/// Estimated Zig-Zag limit matrix rows never move mass from the upward cone
/// to the downward cone.
#[test]
fn zz_limit_never_crosses_from_up_to_down() {
    let mut rng = StdRng::seed_from_u64(55);
    let space = VelocitySpace::signed_hypercube(Basis::canonical(3));
    let atoms = space.enumerate().unwrap().atoms;
    for _ in 0..3 {
        let normal = random_unit_normal(3, &mut rng);
        let bp = BoundaryPoint::synthetic(normal.clone(), 1.0, 2.0);
        let mc = kernel_matrix_mc(
            BoundaryKernel::Limit,
            SamplerKind::ZigZag,
            &bp,
            &space,
            &atoms,
            5_000,
            &mut rng,
        )
        .unwrap();
        for (i, vi) in atoms.iter().enumerate() {
            if dot(vi, &normal) <= 0.0 {
                continue;
            }
            for (j, vj) in atoms.iter().enumerate() {
                if dot(vj, &normal) < 0.0 {
                    assert_eq!(
                        mc.freq[i][j], 0.0,
                        "upward atom {i} leaked to downward atom {j}"
                    );
                }
            }
        }
    }
}
