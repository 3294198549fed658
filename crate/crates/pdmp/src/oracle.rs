//! Independent references for the test suites.
//!
//! Closed-form transition matrices over finite velocity sets
//! ([`kernel_matrix_exact`]), Monte-Carlo matrix estimation for kernels
//! defined by simulation ([`kernel_matrix_mc`]), the invariance residual of
//! the flux density ([`check_l_invariance`]), and two moment references for
//! the hypercube experiments: closed-form truncated-Gaussian moments and a
//! rejection sampler for general two-sided mixtures.
//!
//! The checks here deliberately share as little code as possible with the
//! kernels they verify: matrices are assembled from the analytic branch
//! probabilities, not by calling the kernel.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::kernels::{self, BoundaryKernel};
use crate::linalg::{dot, max_abs_diff, reflect};
use crate::sampler::SamplerKind;
use crate::target::{BoundaryPoint, PiecewiseTarget, RegionKind};
use crate::velocity::{VelocityError, VelocitySpace, TANGENT_TOL};

const STATE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Velocity(#[from] VelocityError),
    #[error("this kernel has no closed-form transition matrix")]
    NotClosedForm,
    #[error("a simulated outcome matches no state in the list")]
    UnmatchedOutcome,
    #[error("density {log_density} exceeds the envelope {log_envelope}")]
    EnvelopeViolation { log_density: f64, log_envelope: f64 },
    #[error("rejection sampling needs isotropic-Gaussian regions for its envelope")]
    NoEnvelope,
}

/// A transition matrix over an explicit, negation-closed state list.
///
/// `matrix[i][j]` is the probability that the physical boundary kernel maps
/// state `i` to state `j`; `weights[i]` is the velocity-law weight `p(v_i)`.
/// For the Bouncy Particle limit kernel the states extend the atom list with
/// its reflections in the facet normal (reflections keep the norm, so they
/// inherit the uniform atom weight); for every other kernel the states are
/// exactly the atoms.
#[derive(Debug, Clone)]
pub struct ExactKernelMatrix {
    pub states: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl ExactKernelMatrix {
    /// Flux-density weights `l(v)` for every state.
    pub fn flux_weights(&self, bp: &BoundaryPoint, space: &VelocitySpace) -> Vec<f64> {
        self.states
            .iter()
            .map(|v| kernels::flux_density(bp, space, v))
            .collect()
    }

    /// Index of `-state[i]` for every `i`.
    pub fn negation_permutation(&self) -> Vec<usize> {
        self.states
            .iter()
            .map(|v| {
                let neg: Vec<f64> = v.iter().map(|x| -x).collect();
                find_state(&self.states, &neg).expect("states are closed under negation")
            })
            .collect()
    }

    /// The kernel composed with the built-in flip: row `i` of the result is
    /// the outgoing distribution when the *flipped* velocity is `state[i]`.
    /// This is the kernel that must leave the flux density invariant.
    pub fn flip_composed(&self) -> Vec<Vec<f64>> {
        let neg = self.negation_permutation();
        (0..self.states.len())
            .map(|i| self.matrix[neg[i]].clone())
            .collect()
    }
}

fn find_state(states: &[Vec<f64>], v: &[f64]) -> Option<usize> {
    states
        .iter()
        .position(|s| max_abs_diff(s, v) < STATE_MATCH_TOL)
}

/// Assemble the closed-form transition matrix of a boundary kernel over a
/// finite velocity law.
///
/// Covered: `Flip`, `MetropolisHastings` (any iteration count, via matrix
/// powers) and the Bouncy-Particle / Coordinate-Sampler limit kernels. The
/// Zig-Zag limit kernel is defined by simulation and reports
/// [`OracleError::NotClosedForm`]; estimate it with [`kernel_matrix_mc`].
pub fn kernel_matrix_exact(
    kernel: BoundaryKernel,
    sampler: SamplerKind,
    bp: &BoundaryPoint,
    space: &VelocitySpace,
) -> Result<ExactKernelMatrix, OracleError> {
    let atoms = space.enumerate()?;
    let n_atoms = atoms.atoms.len();
    let mut states = atoms.atoms;

    let is_limit_bps =
        kernel == BoundaryKernel::Limit && matches!(sampler, SamplerKind::Bps { .. });
    if is_limit_bps {
        // close the atom set under reflection in the facet normal
        for i in 0..n_atoms {
            let reflected = reflect(&states[i], &bp.normal);
            if find_state(&states, &reflected).is_none() {
                states.push(reflected);
            }
        }
    }
    let n = states.len();
    let weights: Vec<f64> = states.iter().map(|v| space.weight(v)).collect();
    let flux: Vec<f64> = states
        .iter()
        .map(|v| kernels::flux_density(bp, space, v))
        .collect();
    let neg_index = |states: &[Vec<f64>], i: usize| -> usize {
        let neg: Vec<f64> = states[i].iter().map(|x| -x).collect();
        find_state(states, &neg).expect("atom sets are closed under negation")
    };

    let mut matrix = vec![vec![0.0; n]; n];
    match kernel {
        BoundaryKernel::Flip => {
            for i in 0..n {
                matrix[i][neg_index(&states, i)] = 1.0;
            }
        }
        BoundaryKernel::MetropolisHastings { iters } => {
            assert!(iters >= 1);
            // single step: uniform atom proposal, accept with flux ratio
            let mut step = vec![vec![0.0; n]; n];
            let proposal = 1.0 / n as f64;
            for i in 0..n {
                let mut stay = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let accept = if flux[i] == 0.0 {
                        if flux[j] > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (flux[j] / flux[i]).min(1.0)
                    };
                    step[i][j] = proposal * accept;
                    stay += proposal * (1.0 - accept);
                }
                step[i][i] = proposal + stay;
            }
            let powered = matrix_power(&step, iters);
            // physical kernel: flip, then run the chain
            for i in 0..n {
                matrix[i] = powered[neg_index(&states, i)].clone();
            }
        }
        BoundaryKernel::Limit => match sampler {
            SamplerKind::Bps { .. } => {
                let ratio = bp.density_ratio();
                for i in 0..n {
                    let component = dot(&states[i], &bp.normal);
                    if component.abs() <= TANGENT_TOL {
                        matrix[i][neg_index(&states, i)] = 1.0;
                    } else if component > 0.0 {
                        matrix[i][i] = 1.0;
                    } else {
                        let reflected = reflect(&states[i], &bp.normal);
                        let j = find_state(&states, &reflected).expect("closed by construction");
                        matrix[i][i] += ratio;
                        matrix[i][j] += 1.0 - ratio;
                    }
                }
            }
            SamplerKind::CoordinateSampler { .. } => {
                let ratio = bp.density_ratio();
                let positive: Vec<usize> = (0..n)
                    .filter(|&j| dot(&states[j], &bp.normal) > TANGENT_TOL)
                    .collect();
                let total: f64 = positive.iter().map(|&j| dot(&states[j], &bp.normal)).sum();
                for i in 0..n {
                    let component = dot(&states[i], &bp.normal);
                    if component.abs() <= TANGENT_TOL {
                        matrix[i][neg_index(&states, i)] = 1.0;
                    } else if component > 0.0 {
                        matrix[i][i] = 1.0;
                    } else {
                        matrix[i][i] += ratio;
                        for &j in &positive {
                            matrix[i][j] += (1.0 - ratio) * dot(&states[j], &bp.normal) / total;
                        }
                    }
                }
            }
            SamplerKind::ZigZag => return Err(OracleError::NotClosedForm),
        },
    }
    // tangent states always take the flip fallback, whatever the kernel
    for i in 0..n {
        if dot(&states[i], &bp.normal).abs() <= TANGENT_TOL {
            matrix[i] = vec![0.0; n];
            matrix[i][neg_index(&states, i)] = 1.0;
        }
    }
    for row in &matrix {
        debug_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    Ok(ExactKernelMatrix {
        states,
        weights,
        matrix,
    })
}

fn matrix_power(m: &[Vec<f64>], mut exponent: u32) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut result: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut base = m.to_vec();
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = matrix_multiply(&result, &base);
        }
        exponent >>= 1;
        if exponent > 0 {
            base = matrix_multiply(&base, &base);
        }
    }
    result
}

fn matrix_multiply(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Empirical transition matrix with per-entry binomial standard errors.
#[derive(Debug, Clone)]
pub struct McKernelMatrix {
    pub freq: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub trials: u64,
}

/// Estimate a kernel's transition matrix by applying it `trials` times from
/// every state in the list and binning the outcomes.
pub fn kernel_matrix_mc(
    kernel: BoundaryKernel,
    sampler: SamplerKind,
    bp: &BoundaryPoint,
    space: &VelocitySpace,
    states: &[Vec<f64>],
    trials: u64,
    rng: &mut impl Rng,
) -> Result<McKernelMatrix, OracleError> {
    let n = states.len();
    let mut freq = vec![vec![0.0; n]; n];
    for (i, start) in states.iter().enumerate() {
        for _ in 0..trials {
            let out = kernels::apply(kernel, sampler, bp, space, start, rng)
                .expect("kernel application failed");
            let j = find_state(states, &out).ok_or(OracleError::UnmatchedOutcome)?;
            freq[i][j] += 1.0;
        }
    }
    let mut stderr = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = freq[i][j] / trials as f64;
            freq[i][j] = p;
            stderr[i][j] = (p * (1.0 - p) / trials as f64).sqrt();
        }
    }
    Ok(McKernelMatrix {
        freq,
        stderr,
        trials,
    })
}

/// Scale-free invariance residual: `max_j |sum_i l_i M[i][j] - l_j| / sum l`.
///
/// `matrix` must be the flip-composed kernel (see
/// [`ExactKernelMatrix::flip_composed`]): the invariance condition applies
/// to the kernel run from the flipped velocity, not to the physical
/// boundary transition itself.
pub fn check_l_invariance(matrix: &[Vec<f64>], l_weights: &[f64]) -> f64 {
    let n = l_weights.len();
    assert_eq!(matrix.len(), n);
    let total: f64 = l_weights.iter().sum();
    assert!(total > 0.0, "flux weights must not all vanish");
    let mut worst = 0.0f64;
    for j in 0..n {
        let pushed: f64 = (0..n).map(|i| l_weights[i] * matrix[i][j]).sum();
        worst = worst.max((pushed - l_weights[j]).abs());
    }
    worst / total
}

/// Moments of the one-dimensional Gaussian `exp(-x^2 / (2 scale))`
/// truncated to `[a, b]` (`scale` is the variance of the untruncated law).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    /// Probability the untruncated law assigns to `[a, b]`.
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Closed-form truncated-Gaussian moments via the error function.
pub fn truncated_gaussian_moments(scale: f64, a: f64, b: f64) -> TruncatedMoments {
    assert!(scale > 0.0 && a < b);
    let std = scale.sqrt();
    let alpha = a / std;
    let beta = b / std;
    let phi = |z: f64| {
        if z.is_infinite() {
            0.0
        } else {
            (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
        }
    };
    let cdf = |z: f64| {
        if z == f64::NEG_INFINITY {
            0.0
        } else if z == f64::INFINITY {
            1.0
        } else {
            0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
        }
    };
    let zphi = |z: f64| if z.is_infinite() { 0.0 } else { z * phi(z) };
    let mass = cdf(beta) - cdf(alpha);
    let mean = std * (phi(alpha) - phi(beta)) / mass;
    let variance = scale
        * (1.0 + (zphi(alpha) - zphi(beta)) / mass - ((phi(alpha) - phi(beta)) / mass).powi(2));
    TruncatedMoments {
        mass,
        mean,
        variance,
    }
}

/// Empirical moments from independent samples, with standard errors.
#[derive(Debug, Clone)]
pub struct SampleMoments {
    pub samples: u64,
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub second_moment: Vec<Vec<f64>>,
    pub second_moment_stderr: Vec<Vec<f64>>,
    pub occupancy: Vec<f64>,
    pub occupancy_stderr: Vec<f64>,
}

/// Ground-truth moments for a target by plain rejection sampling.
///
/// The envelope is the widest isotropic Gaussian among the regions with the
/// largest weight, which dominates every region's density; only targets
/// whose regions are all [`RegionKind::GaussianIso`] are supported.
pub fn rejection_reference(
    target: &PiecewiseTarget,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<SampleMoments, OracleError> {
    let dim = target.dim();
    let mut env_scale = 0.0f64;
    let mut env_log_weight = f64::NEG_INFINITY;
    for region in target.regions() {
        match region.kind {
            RegionKind::GaussianIso { scale, weight } => {
                env_scale = env_scale.max(scale);
                env_log_weight = env_log_weight.max(weight.ln());
            }
            RegionKind::Generic { .. } => return Err(OracleError::NoEnvelope),
        }
    }
    let env_std = env_scale.sqrt();
    let n_regions = target.regions().len();

    let mut mean_acc = vec![0.0; dim];
    let mut mean_sq_acc = vec![0.0; dim];
    let mut second_acc = vec![vec![0.0; dim]; dim];
    let mut second_sq_acc = vec![vec![0.0; dim]; dim];
    let mut region_counts = vec![0u64; n_regions];

    let mut accepted = 0u64;
    while accepted < samples {
        let x: Vec<f64> = (0..dim)
            .map(|_| env_std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let Ok(region) = target.region_of(&x) else {
            continue; // exactly on a facet: a null event
        };
        let log_density = target.region(region).log_density(&x);
        let log_envelope = env_log_weight - dot(&x, &x) / (2.0 * env_scale);
        if log_density > log_envelope + 1e-12 {
            return Err(OracleError::EnvelopeViolation {
                log_density,
                log_envelope,
            });
        }
        let u: f64 = rng.random();
        if u.ln() >= log_density - log_envelope {
            continue;
        }
        accepted += 1;
        region_counts[region.0] += 1;
        for i in 0..dim {
            mean_acc[i] += x[i];
            mean_sq_acc[i] += x[i] * x[i];
            for j in 0..dim {
                let prod = x[i] * x[j];
                second_acc[i][j] += prod;
                second_sq_acc[i][j] += prod * prod;
            }
        }
    }

    let n = samples as f64;
    let mean: Vec<f64> = mean_acc.iter().map(|s| s / n).collect();
    let mean_stderr: Vec<f64> = mean
        .iter()
        .zip(&mean_sq_acc)
        .map(|(m, sq)| ((sq / n - m * m).max(0.0) / n).sqrt())
        .collect();
    let mut second_moment = vec![vec![0.0; dim]; dim];
    let mut second_moment_stderr = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let m = second_acc[i][j] / n;
            second_moment[i][j] = m;
            second_moment_stderr[i][j] = ((second_sq_acc[i][j] / n - m * m).max(0.0) / n).sqrt();
        }
    }
    let occupancy: Vec<f64> = region_counts.iter().map(|&c| c as f64 / n).collect();
    let occupancy_stderr: Vec<f64> = occupancy
        .iter()
        .map(|&p| (p * (1.0 - p) / n).sqrt())
        .collect();
    Ok(SampleMoments {
        samples,
        mean,
        mean_stderr,
        second_moment,
        second_moment_stderr,
        occupancy,
        occupancy_stderr,
    })
}
