//! Piecewise-smooth target densities.
//!
//! A [`PiecewiseTarget`] is a finite set of disjoint open regions covering
//! `R^d`, each with its own smooth log-density, together with the flat facet
//! patches along which neighbouring regions meet. Trajectories move freely
//! inside a region; the facet list supplies everything needed to detect a
//! boundary hit ([`PiecewiseTarget::first_boundary_hit`]) and to classify it
//! ([`PiecewiseTarget::classify_hit`]) into the ordered low/high-density form
//! consumed by the boundary kernels.
//!
//! Only flat facets (hyperplanes restricted to boxes or half-space
//! intersections) are supported: hit times stay closed-form and exact.
//! Points where more than two regions meet (edges, corners) carry no
//! stationary mass; hits landing within [`EDGE_MARGIN`] of a patch edge are
//! reported as such so the caller can fall back to a plain velocity flip.

use thiserror::Error;

use crate::linalg::{add_scaled, dot, norm};

/// Index of a region in a [`PiecewiseTarget`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId(pub usize);

/// Hits closer than this to the edge of a facet patch trigger the
/// flip fallback in the simulator.
pub const EDGE_MARGIN: f64 = 1e-10;

/// Hit times smaller than this are treated as "still on the facet we just
/// left" and skipped.
const MIN_HIT_TIME: f64 = 1e-12;

/// Rays with |<n, v>| below this graze the facet tangentially and are
/// treated as no hit.
const GRAZING_TOL: f64 = 1e-14;

pub type LogDensityFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MembershipFn = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// Upper bound for the total event rate of the sampler in use along the
/// segment `[x, x + t_max v]`; arguments are `(x, v, t_max)`.
pub type RateBoundFn = Box<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;

/// Structural information about a region's density.
pub enum RegionKind {
    /// `log pi(x) = ln(weight) - |x|^2 / (2 scale)`. Event rates along free
    /// transport are affine in time, so event times can be inverted exactly.
    GaussianIso { scale: f64, weight: f64 },
    /// Arbitrary C1 log-density. Event times are simulated by thinning
    /// against the supplied rate bound.
    Generic { rate_bound: RateBoundFn },
}

/// One region of the partition: an open set plus a smooth log-density on it.
pub struct Region {
    pub label: String,
    log_density: LogDensityFn,
    grad_log_density: GradFn,
    membership: MembershipFn,
    pub kind: RegionKind,
}

impl Region {
    /// Isotropic-Gaussian region `weight * exp(-|x|^2 / (2 scale))`.
    ///
    /// A zero weight gives log-density -inf everywhere: the region carries
    /// no mass and trajectories can never cross into it.
    pub fn gaussian_iso(
        label: impl Into<String>,
        scale: f64,
        weight: f64,
        membership: MembershipFn,
    ) -> Self {
        assert!(scale > 0.0, "gaussian scale must be positive");
        assert!(weight >= 0.0, "gaussian weight must be nonnegative");
        let log_weight = weight.ln(); // -inf for weight 0
        Region {
            label: label.into(),
            log_density: Box::new(move |x| log_weight - dot(x, x) / (2.0 * scale)),
            grad_log_density: Box::new(move |x| x.iter().map(|xi| -xi / scale).collect()),
            membership,
            kind: RegionKind::GaussianIso { scale, weight },
        }
    }

    /// Region with user-supplied density closures.
    pub fn generic(
        label: impl Into<String>,
        log_density: LogDensityFn,
        grad_log_density: GradFn,
        membership: MembershipFn,
        rate_bound: RateBoundFn,
    ) -> Self {
        Region {
            label: label.into(),
            log_density,
            grad_log_density,
            membership,
            kind: RegionKind::Generic { rate_bound },
        }
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        (self.log_density)(x)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }

    pub fn grad_log_density(&self, x: &[f64]) -> Vec<f64> {
        (self.grad_log_density)(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.membership)(x)
    }
}

/// Where a point sits relative to a facet patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchPosition {
    Interior,
    /// Within [`EDGE_MARGIN`] of the patch edge; the simulator falls back to
    /// a velocity flip here.
    NearEdge,
    Outside,
}

/// Restriction of a facet's hyperplane to a patch.
///
/// The restriction must not constrain the normal direction itself (use
/// infinite box bounds along it); otherwise every on-plane point would sit
/// on the patch edge.
pub enum FacetBounds {
    /// Axis-aligned box `lo <= x <= hi` componentwise.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Intersection of half-spaces `<a, x> <= b` with unit `a`.
    HalfSpaces(Vec<(Vec<f64>, f64)>),
}

impl FacetBounds {
    fn locate(&self, x: &[f64]) -> PatchPosition {
        let mut near_edge = false;
        match self {
            FacetBounds::Box { lo, hi } => {
                for ((&xi, &l), &h) in x.iter().zip(lo).zip(hi) {
                    let slack_lo = xi - l;
                    let slack_hi = h - xi;
                    if slack_lo < -EDGE_MARGIN || slack_hi < -EDGE_MARGIN {
                        return PatchPosition::Outside;
                    }
                    if slack_lo <= EDGE_MARGIN || slack_hi <= EDGE_MARGIN {
                        near_edge = true;
                    }
                }
            }
            FacetBounds::HalfSpaces(planes) => {
                for (a, b) in planes {
                    let slack = b - dot(a, x);
                    if slack < -EDGE_MARGIN {
                        return PatchPosition::Outside;
                    }
                    if slack <= EDGE_MARGIN {
                        near_edge = true;
                    }
                }
            }
        }
        if near_edge {
            PatchPosition::NearEdge
        } else {
            PatchPosition::Interior
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            FacetBounds::Box { lo, hi } => lo.is_empty() || lo.iter().zip(hi).any(|(l, h)| l > h),
            FacetBounds::HalfSpaces(planes) => planes.is_empty(),
        }
    }
}

/// A flat boundary piece: the patch of `{x : <normal, x> = offset}` selected
/// by `bounds`, separating `side_regions.0` (on the negative side of the
/// plane) from `side_regions.1` (on the positive side).
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub bounds: FacetBounds,
    pub side_regions: (RegionId, RegionId),
}

impl Facet {
    /// Signed distance of `x` from the facet's hyperplane.
    pub fn plane_residual(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn locate(&self, x: &[f64]) -> PatchPosition {
        self.bounds.locate(x)
    }
}

/// A resolved boundary hit, with the region pair ordered by density.
///
/// `normal` points toward `upper`, the side with the higher density;
/// `log_ratio` is `ln(density_upper / density_lower)` and is `+inf` when the
/// lower side has zero density.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    pub lower: RegionId,
    pub upper: RegionId,
    pub density_lower: f64,
    pub density_upper: f64,
    pub log_ratio: f64,
}

impl BoundaryPoint {
    /// Boundary point with prescribed side densities, detached from any
    /// target geometry. Used by the kernel test oracles.
    pub fn synthetic(normal: Vec<f64>, density_lower: f64, density_upper: f64) -> Self {
        assert!(
            (norm(&normal) - 1.0).abs() < 1e-10,
            "normal must be unit length"
        );
        assert!(density_lower >= 0.0 && density_upper > density_lower);
        let dim = normal.len();
        let log_ratio = if density_lower == 0.0 {
            f64::INFINITY
        } else {
            (density_upper / density_lower).ln()
        };
        BoundaryPoint {
            position: vec![0.0; dim],
            normal,
            lower: RegionId(0),
            upper: RegionId(1),
            density_lower,
            density_upper,
            log_ratio,
        }
    }

    /// `density_lower / density_upper`, the pass-through probability of the
    /// limiting kernels; zero when the lower side carries no mass.
    pub fn density_ratio(&self) -> f64 {
        if self.density_lower == 0.0 {
            0.0
        } else {
            self.density_lower / self.density_upper
        }
    }
}

/// First facet intersection along a ray.
#[derive(Debug, Clone)]
pub struct BoundaryHit {
    pub t: f64,
    pub facet: usize,
    /// Hit position snapped exactly onto the facet's hyperplane.
    pub position: Vec<f64>,
    pub patch: PatchPosition,
}

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("{claims} regions claim the point; it lies on or too close to a facet")]
    BoundaryAmbiguous { claims: usize },
    #[error("both sides of the facet have equal density; treat the crossing as pass-through")]
    DegenerateBoundary,
    #[error("facet {index}: {reason}")]
    InvalidFacet { index: usize, reason: String },
    #[error("region {index}: {reason}")]
    InvalidRegion { index: usize, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A piecewise-smooth density: disjoint open regions plus the facet patches
/// separating them. Immutable once constructed; all operations are pure.
pub struct PiecewiseTarget {
    dim: usize,
    regions: Vec<Region>,
    facets: Vec<Facet>,
}

impl PiecewiseTarget {
    pub fn new(dim: usize, regions: Vec<Region>, facets: Vec<Facet>) -> Result<Self, TargetError> {
        assert!(dim > 0);
        assert!(!regions.is_empty());
        let target = PiecewiseTarget {
            dim,
            regions,
            facets,
        };
        target.validate()?;
        Ok(target)
    }

    /// The two-region target used throughout the experiments: a Gaussian
    /// with scale `scale_in` and weight `weight_in` inside the hypercube
    /// `[-1, 1]^d`, and an independent Gaussian outside it.
    ///
    /// Produces 2 regions and `2 d` facet patches.
    pub fn gaussian_hypercube(
        dim: usize,
        scale_in: f64,
        weight_in: f64,
        scale_out: f64,
        weight_out: f64,
    ) -> Result<Self, TargetError> {
        let inside = Region::gaussian_iso(
            "inside",
            scale_in,
            weight_in,
            Box::new(|x: &[f64]| x.iter().all(|xi| xi.abs() < 1.0)),
        );
        let outside = Region::gaussian_iso(
            "outside",
            scale_out,
            weight_out,
            Box::new(|x: &[f64]| x.iter().any(|xi| xi.abs() > 1.0)),
        );
        let mut facets = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            let mut normal = vec![0.0; dim];
            normal[axis] = 1.0;
            // In-plane extent spans the cube; the normal axis is unconstrained.
            let mut lo = vec![-1.0; dim];
            let mut hi = vec![1.0; dim];
            lo[axis] = f64::NEG_INFINITY;
            hi[axis] = f64::INFINITY;
            for offset in [1.0, -1.0] {
                // Negative side of {x_axis = +1} is the cube; of {x_axis = -1}
                // it is the complement.
                let side_regions = if offset > 0.0 {
                    (RegionId(0), RegionId(1))
                } else {
                    (RegionId(1), RegionId(0))
                };
                facets.push(Facet {
                    normal: normal.clone(),
                    offset,
                    bounds: FacetBounds::Box {
                        lo: lo.clone(),
                        hi: hi.clone(),
                    },
                    side_regions,
                });
            }
        }
        PiecewiseTarget::new(dim, vec![inside, outside], facets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: RegionId) -> &Region {
        &self.regions[id.0]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, index: usize) -> &Facet {
        &self.facets[index]
    }

    /// The unique region whose interior contains `x`.
    pub fn region_of(&self, x: &[f64]) -> Result<RegionId, TargetError> {
        self.check_dim(x)?;
        let mut found = None;
        let mut claims = 0;
        for (i, region) in self.regions.iter().enumerate() {
            if region.contains(x) {
                claims += 1;
                found = Some(RegionId(i));
            }
        }
        match (claims, found) {
            (1, Some(id)) => Ok(id),
            _ => Err(TargetError::BoundaryAmbiguous { claims }),
        }
    }

    /// First facet hit by the ray `x + t v`, `t > 0`, or `None` if the ray
    /// escapes to infinity without meeting any patch.
    ///
    /// Facets grazed tangentially (|<n, v>| < 1e-14) do not count, and the
    /// facet the ray starts on is excluded by a minimum hit time.
    pub fn first_boundary_hit(&self, _k: RegionId, x: &[f64], v: &[f64]) -> Option<BoundaryHit> {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert!(v.iter().any(|&vi| vi != 0.0), "velocity must be nonzero");
        let mut best: Option<BoundaryHit> = None;
        for (index, facet) in self.facets.iter().enumerate() {
            let speed = dot(&facet.normal, v);
            if speed.abs() < GRAZING_TOL {
                continue;
            }
            let t = (facet.offset - dot(&facet.normal, x)) / speed;
            if t <= MIN_HIT_TIME || !t.is_finite() {
                continue;
            }
            if best.as_ref().is_some_and(|b| b.t <= t) {
                continue;
            }
            let mut position = add_scaled(x, t, v);
            let patch = facet.locate(&position);
            if patch == PatchPosition::Outside {
                continue;
            }
            // Snap exactly onto the hyperplane.
            let residual = facet.plane_residual(&position);
            if residual != 0.0 {
                position = add_scaled(&position, -residual, &facet.normal);
            }
            best = Some(BoundaryHit {
                t,
                facet: index,
                position,
                patch,
            });
        }
        best
    }

    /// Classify a point on a facet into the density-ordered [`BoundaryPoint`].
    ///
    /// Densities are compared in log space, so zero-density sides are exact.
    pub fn classify_hit(
        &self,
        facet_index: usize,
        x_hit: &[f64],
    ) -> Result<BoundaryPoint, TargetError> {
        self.check_dim(x_hit)?;
        let facet = &self.facets[facet_index];
        let (neg, pos) = facet.side_regions;
        let log_neg = self.region(neg).log_density(x_hit);
        let log_pos = self.region(pos).log_density(x_hit);
        let degenerate = if log_neg.is_infinite() || log_pos.is_infinite() {
            log_neg == log_pos // both sides empty
        } else {
            (log_neg - log_pos).abs() <= 1e-14 * log_neg.abs().max(log_pos.abs()).max(1.0)
        };
        if degenerate {
            return Err(TargetError::DegenerateBoundary);
        }
        let (lower, upper, log_lower, log_upper, toward_upper) = if log_pos > log_neg {
            (neg, pos, log_neg, log_pos, 1.0)
        } else {
            (pos, neg, log_pos, log_neg, -1.0)
        };
        Ok(BoundaryPoint {
            position: x_hit.to_vec(),
            normal: facet.normal.iter().map(|ni| ni * toward_upper).collect(),
            lower,
            upper,
            density_lower: log_lower.exp(),
            density_upper: log_upper.exp(),
            log_ratio: log_upper - log_lower, // +inf when the lower side is empty
        })
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), TargetError> {
        if x.len() != self.dim {
            return Err(TargetError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), TargetError> {
        for (index, facet) in self.facets.iter().enumerate() {
            if facet.normal.len() != self.dim {
                return Err(TargetError::InvalidFacet {
                    index,
                    reason: "normal has wrong dimension".into(),
                });
            }
            let n = norm(&facet.normal);
            if (n - 1.0).abs() > 1e-12 {
                return Err(TargetError::InvalidFacet {
                    index,
                    reason: format!("normal must be unit length, |n| = {n}"),
                });
            }
            if facet.bounds.is_empty() {
                return Err(TargetError::InvalidFacet {
                    index,
                    reason: "bounds are empty".into(),
                });
            }
            let (a, b) = facet.side_regions;
            if a == b {
                return Err(TargetError::InvalidFacet {
                    index,
                    reason: "side regions must be distinct".into(),
                });
            }
            if a.0 >= self.regions.len() || b.0 >= self.regions.len() {
                return Err(TargetError::InvalidFacet {
                    index,
                    reason: "side region id out of range".into(),
                });
            }
            self.spot_check_sides(index, facet)?;
        }
        for (index, region) in self.regions.iter().enumerate() {
            if let RegionKind::GaussianIso { scale, .. } = region.kind {
                // The structural tag promises this gradient exactly.
                let x: Vec<f64> = (0..self.dim).map(|i| 0.25 + 0.5 * i as f64).collect();
                let grad = region.grad_log_density(&x);
                let expect: Vec<f64> = x.iter().map(|xi| -xi / scale).collect();
                if crate::linalg::max_abs_diff(&grad, &expect) > 0.0 {
                    return Err(TargetError::InvalidRegion {
                        index,
                        reason: "gaussian_iso gradient closure disagrees with -x/scale".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Check that membership on either side of the facet's patch agrees with
    /// `side_regions`, probing a representative patch point offset by 1e-8
    /// along the normal. Skipped when no representative point lands on the
    /// patch (skew bounds).
    fn spot_check_sides(&self, index: usize, facet: &Facet) -> Result<(), TargetError> {
        let Some(point) = representative_patch_point(facet, self.dim) else {
            return Ok(());
        };
        const EPS: f64 = 1e-8;
        let plus = add_scaled(&point, EPS, &facet.normal);
        let minus = add_scaled(&point, -EPS, &facet.normal);
        let (neg_region, pos_region) = facet.side_regions;
        let pos_ok = self.region(pos_region).contains(&plus);
        let neg_ok = self.region(neg_region).contains(&minus);
        let disjoint =
            !self.region(neg_region).contains(&plus) && !self.region(pos_region).contains(&minus);
        if !(pos_ok && neg_ok && disjoint) {
            return Err(TargetError::InvalidFacet {
                index,
                reason: "side_regions disagree with membership near the patch".into(),
            });
        }
        Ok(())
    }
}

/// A point on the facet patch, interior if possible: project the origin onto
/// the hyperplane, clamp into box bounds, re-project. Returns `None` if the
/// construction fails to land on the patch.
fn representative_patch_point(facet: &Facet, dim: usize) -> Option<Vec<f64>> {
    let mut p: Vec<f64> = facet.normal.iter().map(|ni| ni * facet.offset).collect();
    if let FacetBounds::Box { lo, hi } = &facet.bounds {
        for j in 0..dim {
            if lo[j].is_finite() && hi[j].is_finite() {
                p[j] = 0.5 * (lo[j] + hi[j]);
            }
        }
    }
    let residual = facet.plane_residual(&p);
    let p = add_scaled(&p, -residual, &facet.normal);
    (facet.locate(&p) == PatchPosition::Interior).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn cube2() -> PiecewiseTarget {
        PiecewiseTarget::gaussian_hypercube(2, 1.0, 1.0, 1.0, 0.5).unwrap()
    }

    #[test]
    fn region_of_interior_points() {
        let t = cube2();
        assert_eq!(t.region_of(&[0.0, 0.0]).unwrap(), RegionId(0));
        assert_eq!(t.region_of(&[2.0, 0.0]).unwrap(), RegionId(1));
    }

    #[test]
    fn region_of_facet_point_is_ambiguous() {
        let t = cube2();
        assert!(matches!(
            t.region_of(&[1.0, 0.0]),
            Err(TargetError::BoundaryAmbiguous { claims: 0 })
        ));
    }

    #[test]
    fn first_hit_unit_distance() {
        let t = cube2();
        let hit = t
            .first_boundary_hit(RegionId(0), &[0.0, 0.0], &[1.0, 0.0])
            .unwrap();
        assert!((hit.t - 1.0).abs() < 1e-15);
        let facet = t.facet(hit.facet);
        assert_eq!(facet.normal, vec![1.0, 0.0]);
        assert_eq!(facet.offset, 1.0);
    }

    #[test]
    fn first_hit_against_motion() {
        let t = cube2();
        let hit = t
            .first_boundary_hit(RegionId(0), &[0.5, 0.0], &[-1.0, 0.0])
            .unwrap();
        assert!((hit.t - 1.5).abs() < 1e-15);
        assert_eq!(t.facet(hit.facet).offset, -1.0);
    }

    /// Brute-force oracle: intersect the ray with every extended hyperplane
    /// and check the patch bounds by hand.
    fn brute_force_hit(t: &PiecewiseTarget, x: &[f64], v: &[f64]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for facet in t.facets() {
            let speed = dot(&facet.normal, v);
            if speed.abs() < 1e-14 {
                continue;
            }
            let time = (facet.offset - dot(&facet.normal, x)) / speed;
            if time <= 1e-12 {
                continue;
            }
            let point = add_scaled(x, time, v);
            if facet.locate(&point) == PatchPosition::Outside {
                continue;
            }
            if best.is_none_or(|b| time < b) {
                best = Some(time);
            }
        }
        best
    }

    #[test]
    fn ray_missing_all_patches_returns_none() {
        let t = cube2();
        assert!(brute_force_hit(&t, &[3.0, 3.0], &[0.0, 1.0]).is_none());
        assert!(t
            .first_boundary_hit(RegionId(1), &[3.0, 3.0], &[0.0, 1.0])
            .is_none());
    }

    #[test]
    fn hits_cross_between_the_advertised_regions() {
        let t = cube2();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let v: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if v.iter().all(|&vi| vi.abs() < 1e-3) {
                continue;
            }
            let Some(hit) = t.first_boundary_hit(RegionId(0), &x, &v) else {
                continue;
            };
            let eps = 1e-7 * hit.t;
            let before = add_scaled(&x, hit.t - eps, &v);
            let after = add_scaled(&x, hit.t + eps, &v);
            if hit.patch != PatchPosition::Interior {
                continue;
            }
            assert_eq!(t.region_of(&before).unwrap(), RegionId(0));
            assert_eq!(t.region_of(&after).unwrap(), RegionId(1));
            // hyperplane residual is exact after snapping
            let facet = t.facet(hit.facet);
            assert!(
                facet.plane_residual(&hit.position).abs() <= 1e-10 * (1.0 + facet.offset.abs())
            );
            // agreement with the brute-force oracle
            let oracle_t = brute_force_hit(&t, &x, &v).unwrap();
            assert!((oracle_t - hit.t).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_restricted_support() {
        let t = PiecewiseTarget::gaussian_hypercube(2, 1.0, 1.0, 1.0, 0.0).unwrap();
        let hit = t
            .first_boundary_hit(RegionId(0), &[0.0, 0.0], &[1.0, 0.0])
            .unwrap();
        let bp = t.classify_hit(hit.facet, &hit.position).unwrap();
        assert_eq!(bp.density_lower, 0.0);
        assert!((bp.density_upper - (-0.5f64).exp()).abs() < 1e-15);
        assert!(bp.log_ratio.is_infinite());
        assert_eq!(bp.density_ratio(), 0.0);
        // normal points back into the cube, where the density is higher
        assert_eq!(bp.normal, vec![-1.0, 0.0]);
        assert_eq!(bp.upper, RegionId(0));
    }

    #[test]
    fn classify_weighted_mixture() {
        // weight 2 inside, 1 outside, equal scales: ratio 2 at the facet
        let t = PiecewiseTarget::gaussian_hypercube(2, 1.0, 2.0, 1.0, 1.0).unwrap();
        let bp = t.classify_hit(0, &[1.0, 0.0]).unwrap();
        assert!((bp.density_upper / bp.density_lower - 2.0).abs() < 1e-12);
        assert!((bp.log_ratio - 2.0f64.ln()).abs() < 1e-12);
        assert!(bp.density_lower <= bp.density_upper);
    }

    #[test]
    fn classify_equal_sides_is_degenerate() {
        let t = PiecewiseTarget::gaussian_hypercube(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            t.classify_hit(0, &[1.0, 0.5]),
            Err(TargetError::DegenerateBoundary)
        ));
    }

    #[test]
    fn classify_is_invariant_under_relabeling() {
        // Same geometry with the facet's sides listed in the opposite order
        // (normal flipped accordingly).
        let t = cube2();
        let bp = t.classify_hit(0, &[1.0, 0.25]).unwrap();

        let inside = Region::gaussian_iso(
            "inside",
            1.0,
            1.0,
            Box::new(|x: &[f64]| x.iter().all(|xi| xi.abs() < 1.0)),
        );
        let outside = Region::gaussian_iso(
            "outside",
            1.0,
            0.5,
            Box::new(|x: &[f64]| x.iter().any(|xi| xi.abs() > 1.0)),
        );
        let flipped = PiecewiseTarget::new(
            2,
            vec![inside, outside],
            vec![Facet {
                normal: vec![-1.0, 0.0],
                offset: -1.0,
                bounds: FacetBounds::Box {
                    lo: vec![f64::NEG_INFINITY, -1.0],
                    hi: vec![f64::INFINITY, 1.0],
                },
                side_regions: (RegionId(1), RegionId(0)),
            }],
        )
        .unwrap();
        let bp2 = flipped.classify_hit(0, &[1.0, 0.25]).unwrap();
        assert_eq!(bp.normal, bp2.normal);
        assert_eq!(bp.lower, bp2.lower);
        assert_eq!(bp.upper, bp2.upper);
        assert_eq!(bp.log_ratio, bp2.log_ratio);
    }

    #[test]
    fn edge_hits_are_flagged() {
        let t = cube2();
        let facet = t.facet(0);
        assert_eq!(facet.locate(&[1.0, 0.3]), PatchPosition::Interior);
        assert_eq!(facet.locate(&[1.0, 1.0 - 1e-12]), PatchPosition::NearEdge);
        assert_eq!(facet.locate(&[1.0, 1.5]), PatchPosition::Outside);
    }
}
