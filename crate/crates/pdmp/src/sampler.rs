//! The PDMP event loop.
//!
//! [`simulate`] advances a piecewise-linear trajectory through a
//! [`PiecewiseTarget`]: free transport inside a region, interrupted by bounce
//! events (at the sampler's state-dependent rate), optional velocity
//! refreshments and boundary hits, where the configured
//! [`BoundaryKernel`] redraws the velocity. On isotropic-Gaussian regions
//! the bounce rates are affine in time and event times are inverted in
//! closed form ([`affine_event_time`]); generic regions are simulated by
//! thinning against a user-supplied rate bound.
//!
//! The output is a [`TrajectorySkeleton`]: the finite breakpoint list that
//! fully determines the path, from which [`path_moments`] integrates exact
//! time averages segment by segment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp, Exp1};
use thiserror::Error;

use crate::kernels::{self, BoundaryKernel, KernelError};
use crate::linalg::{add_scaled, dot, reflect};
use crate::target::{PatchPosition, PiecewiseTarget, RegionId, RegionKind, TargetError};
use crate::velocity::{VelocitySpace, TANGENT_TOL};

/// Which PDMP sampler drives the dynamics.
///
/// Refreshment applies to the Bouncy Particle Sampler (where it is required
/// for ergodicity) and to the Coordinate Sampler; the Zig-Zag Process runs
/// without it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerKind {
    Bps { refresh_rate: f64 },
    ZigZag,
    CoordinateSampler { refresh_rate: f64 },
}

impl SamplerKind {
    pub fn refresh_rate(&self) -> f64 {
        match self {
            SamplerKind::Bps { refresh_rate } | SamplerKind::CoordinateSampler { refresh_rate } => {
                *refresh_rate
            }
            SamplerKind::ZigZag => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Bps { .. } => "bouncy particle",
            SamplerKind::ZigZag => "zig-zag",
            SamplerKind::CoordinateSampler { .. } => "coordinate sampler",
        }
    }
}

/// Instantaneous state of a chain.
#[derive(Debug, Clone)]
pub struct State {
    pub region: RegionId,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn new(region: RegionId, position: Vec<f64>, velocity: Vec<f64>) -> Self {
        State {
            region,
            position,
            velocity,
            time: 0.0,
        }
    }
}

/// What happened at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventTag {
    Start,
    Bounce,
    Refresh,
    Boundary,
    End,
}

impl EventTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventTag::Start => "start",
            EventTag::Bounce => "bounce",
            EventTag::Refresh => "refresh",
            EventTag::Boundary => "boundary",
            EventTag::End => "end",
        }
    }

    pub fn parse(s: &str) -> Option<EventTag> {
        Some(match s {
            "start" => EventTag::Start,
            "bounce" => EventTag::Bounce,
            "refresh" => EventTag::Refresh,
            "boundary" => EventTag::Boundary,
            "end" => EventTag::End,
            _ => return None,
        })
    }
}

/// One breakpoint of the piecewise-linear path: the state right after the
/// event, plus the region containing the segment that starts here.
#[derive(Debug, Clone)]
pub struct Breakpoint {
    pub t: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub tag: EventTag,
    pub region: RegionId,
}

/// Event totals by tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub bounce: u64,
    pub refresh: u64,
    pub boundary: u64,
}

impl EventCounts {
    pub fn total(&self) -> u64 {
        self.bounce + self.refresh + self.boundary
    }
}

/// The full event record of a simulated trajectory. Positions between
/// consecutive breakpoints follow free transport, so the skeleton determines
/// the entire path.
///
/// Breakpoint times are strictly increasing, except that a run stopped by an
/// event-count budget ends with a zero-length segment: the closing `End`
/// breakpoint shares the final event's timestamp.
#[derive(Debug, Clone)]
pub struct TrajectorySkeleton {
    pub breakpoints: Vec<Breakpoint>,
    pub total_time: f64,
    pub event_counts: EventCounts,
}

/// When to stop a simulation.
#[derive(Debug, Clone, Copy)]
pub enum StopRule {
    /// Stop at exactly this process time; the final breakpoint interpolates
    /// the position mid-segment.
    MaxTime(f64),
    /// Stop after this many events (bounces, refreshments and boundary hits).
    MaxEvents(u64),
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("true event rate {rate} exceeds the supplied bound {bound}")]
    BoundViolation { rate: f64, bound: f64 },
    #[error("gradient vanishes at the bounce point")]
    ZeroGradient,
    #[error("more than {0} consecutive boundary events with no elapsed time")]
    StuckAtBoundary(u64),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfiguration(String),
    #[error("no event can ever occur from the current state")]
    NoUpcomingEvent,
}

/// Per-chain random streams.
///
/// Event clocks, boundary-kernel decisions and velocity resampling draw from
/// independent substreams of one seeded generator. Samplers consume kernel
/// and velocity randomness at different per-event rates; keeping the clock
/// stream separate means two samplers driven by the same seed see identical
/// event clocks, which is what makes common-random-number comparisons (and
/// the exact one-dimensional equivalence of the three samplers) possible.
#[derive(Debug, Clone)]
pub struct SimRng {
    clocks: ChaCha12Rng,
    kernel: ChaCha12Rng,
    velocity: ChaCha12Rng,
}

impl SimRng {
    pub fn from_seed(seed: u64) -> Self {
        Self::for_chain(seed, 0)
    }

    /// Independent streams for chain `chain` of a multi-chain run.
    pub fn for_chain(seed: u64, chain: u64) -> Self {
        let stream = |purpose: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(chain * 4 + purpose);
            rng
        };
        SimRng {
            clocks: stream(0),
            kernel: stream(1),
            velocity: stream(2),
        }
    }

    pub fn clocks(&mut self) -> &mut ChaCha12Rng {
        &mut self.clocks
    }

    pub fn kernel(&mut self) -> &mut ChaCha12Rng {
        &mut self.kernel
    }

    pub fn velocity(&mut self) -> &mut ChaCha12Rng {
        &mut self.velocity
    }
}

/// First arrival time of an inhomogeneous Poisson process with rate
/// `(a + b t)_+`, or `+inf` when the total mass is exhausted first.
pub fn affine_event_time(a: f64, b: f64, rng: &mut impl Rng) -> f64 {
    let exponent: f64 = rng.sample(Exp1);
    affine_inverse(a, b, exponent)
}

/// Solve `int_0^T (a + b s)_+ ds = target` for `T`.
pub(crate) fn affine_inverse(a: f64, b: f64, target: f64) -> f64 {
    debug_assert!(target >= 0.0 && b.is_finite());
    if b == 0.0 {
        if a <= 0.0 {
            f64::INFINITY
        } else {
            target / a
        }
    } else if b > 0.0 {
        // rate becomes positive at the delay and grows linearly
        let delay = (-a / b).max(0.0);
        let a0 = a + b * delay;
        delay + (-a0 + (a0 * a0 + 2.0 * b * target).sqrt()) / b
    } else {
        // decreasing rate: finite total mass a^2 / (2|b|)
        if a <= 0.0 {
            return f64::INFINITY;
        }
        let disc = a * a + 2.0 * b * target;
        if disc <= 0.0 {
            f64::INFINITY
        } else {
            (a - disc.sqrt()) / -b
        }
    }
}

/// A proposed bounce event within the current segment.
#[derive(Debug, Clone, Copy)]
pub struct BounceCandidate {
    pub t: f64,
    /// The flipping coordinate, for the Zig-Zag Process.
    pub coordinate: Option<usize>,
}

/// Bounce rate of the given sampler at a point: `<v, -grad log pi>_+` for
/// the Bouncy Particle and Coordinate samplers, the summed per-coordinate
/// flip rates for Zig-Zag.
fn total_rate(kind: SamplerKind, space: &VelocitySpace, grad: &[f64], v: &[f64]) -> f64 {
    match kind {
        SamplerKind::Bps { .. } | SamplerKind::CoordinateSampler { .. } => (-dot(v, grad)).max(0.0),
        SamplerKind::ZigZag => {
            let basis = space.basis().expect("zig-zag requires a sign basis");
            (0..basis.dim())
                .map(|i| {
                    let col = basis.column(i);
                    let sign = dot(col, v).signum();
                    (-sign * dot(col, grad)).max(0.0)
                })
                .sum()
        }
    }
}

/// Draw the next bounce candidate within `[0, t_max)`, or `None` when the
/// clock rings later than `t_max`.
///
/// Isotropic-Gaussian regions use the exact affine inversion; generic
/// regions thin against the region's rate bound and report a
/// [`SamplerError::BoundViolation`] if the true rate ever exceeds it.
pub fn next_bounce_candidate(
    target: &PiecewiseTarget,
    kind: SamplerKind,
    space: &VelocitySpace,
    state: &State,
    t_max: f64,
    rng: &mut impl Rng,
) -> Result<Option<BounceCandidate>, SamplerError> {
    let region = target.region(state.region);
    let x = &state.position;
    let v = &state.velocity;
    match &region.kind {
        RegionKind::GaussianIso { scale, .. } => match kind {
            SamplerKind::Bps { .. } | SamplerKind::CoordinateSampler { .. } => {
                let a = dot(v, x) / scale;
                let b = dot(v, v) / scale;
                let t = affine_event_time(a, b, rng);
                Ok((t < t_max).then_some(BounceCandidate {
                    t,
                    coordinate: None,
                }))
            }
            SamplerKind::ZigZag => {
                let basis = space.basis().ok_or_else(|| {
                    SamplerError::InvalidConfiguration(
                        "zig-zag requires sign-vector velocities".into(),
                    )
                })?;
                let mut best: Option<BounceCandidate> = None;
                for i in 0..basis.dim() {
                    let col = basis.column(i);
                    let sign = dot(col, v).signum();
                    let a = sign * dot(col, x) / scale;
                    let t = affine_event_time(a, 1.0 / scale, rng);
                    if best.as_ref().is_none_or(|c| t < c.t) {
                        best = Some(BounceCandidate {
                            t,
                            coordinate: Some(i),
                        });
                    }
                }
                Ok(best.filter(|c| c.t < t_max))
            }
        },
        RegionKind::Generic { rate_bound } => {
            let bound = rate_bound(x, v, t_max);
            if bound <= 0.0 {
                return Ok(None);
            }
            let mut t = 0.0;
            loop {
                t += rng.sample::<f64, _>(Exp1) / bound;
                if t >= t_max {
                    return Ok(None);
                }
                let point = add_scaled(x, t, v);
                let grad = region.grad_log_density(&point);
                let rate = total_rate(kind, space, &grad, v);
                if rate > bound * (1.0 + 1e-9) {
                    return Err(SamplerError::BoundViolation { rate, bound });
                }
                let u: f64 = rng.random();
                if u * bound < rate {
                    let coordinate = match kind {
                        SamplerKind::ZigZag => {
                            Some(pick_zigzag_coordinate(space, &grad, v, rate, rng))
                        }
                        _ => None,
                    };
                    return Ok(Some(BounceCandidate { t, coordinate }));
                }
            }
        }
    }
}

fn pick_zigzag_coordinate(
    space: &VelocitySpace,
    grad: &[f64],
    v: &[f64],
    total: f64,
    rng: &mut impl Rng,
) -> usize {
    let basis = space.basis().expect("zig-zag requires a sign basis");
    let mut level = rng.random::<f64>() * total;
    let mut last = 0;
    for i in 0..basis.dim() {
        let col = basis.column(i);
        let sign = dot(col, v).signum();
        let rate = (-sign * dot(col, grad)).max(0.0);
        if rate > 0.0 {
            last = i;
            level -= rate;
            if level <= 0.0 {
                return i;
            }
        }
    }
    last
}

/// Redraw the velocity at a bounce event.
///
/// The Bouncy Particle Sampler reflects specularly against the log-density
/// gradient; Zig-Zag flips the chosen coordinate; the Coordinate Sampler
/// resamples among its atoms with weight `<v', grad log pi>_+`.
pub fn apply_bounce(
    kind: SamplerKind,
    space: &VelocitySpace,
    grad: &[f64],
    velocity: &[f64],
    coordinate: Option<usize>,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, SamplerError> {
    match kind {
        SamplerKind::Bps { .. } => {
            if dot(grad, grad) == 0.0 {
                return Err(SamplerError::ZeroGradient);
            }
            Ok(reflect(velocity, grad))
        }
        SamplerKind::ZigZag => {
            let basis = space.basis().ok_or_else(|| {
                SamplerError::InvalidConfiguration("zig-zag requires sign-vector velocities".into())
            })?;
            let i = coordinate.ok_or_else(|| {
                SamplerError::InvalidConfiguration("zig-zag bounce needs a coordinate".into())
            })?;
            Ok(reflect(velocity, basis.column(i)))
        }
        SamplerKind::CoordinateSampler { .. } => {
            let atoms = space.enumerate().map_err(|_| {
                SamplerError::InvalidConfiguration(
                    "coordinate sampler requires axis velocities".into(),
                )
            })?;
            let weights: Vec<f64> = atoms
                .atoms
                .iter()
                .map(|atom| dot(atom, grad).max(0.0))
                .collect();
            let total: f64 = weights.iter().sum();
            if total == 0.0 {
                return Err(SamplerError::ZeroGradient);
            }
            let mut level = rng.random::<f64>() * total;
            for (atom, w) in atoms.atoms.iter().zip(&weights) {
                level -= w;
                if level <= 0.0 && *w > 0.0 {
                    return Ok(atom.clone());
                }
            }
            Ok(atoms.atoms.last().unwrap().clone())
        }
    }
}

const MAX_ZERO_TIME_BOUNDARY_EVENTS: u64 = 10_000;

/// Simulate a trajectory until the stop rule fires.
///
/// Boundary hits are resolved before bounce candidates are drawn, so rate
/// formulas never see the density across a discontinuity; simultaneous
/// clocks resolve in the order boundary, refreshment, bounce. Hits landing
/// within the edge margin of a facet patch fall back to a velocity flip.
pub fn simulate(
    target: &PiecewiseTarget,
    kind: SamplerKind,
    space: &VelocitySpace,
    kernel: BoundaryKernel,
    state0: State,
    stop: StopRule,
    rng: &mut SimRng,
) -> Result<TrajectorySkeleton, SamplerError> {
    validate_combination(target, kind, space, &state0)?;
    let refresh_rate = kind.refresh_rate();
    let refresh_dist = (refresh_rate > 0.0).then(|| Exp::new(refresh_rate).unwrap());

    let mut state = state0;
    let mut breakpoints = vec![Breakpoint {
        t: state.time,
        position: state.position.clone(),
        velocity: state.velocity.clone(),
        tag: EventTag::Start,
        region: state.region,
    }];
    let mut counts = EventCounts::default();
    let mut zero_time_boundary_run = 0u64;

    loop {
        let remaining = match stop {
            StopRule::MaxTime(t_end) => t_end - state.time,
            StopRule::MaxEvents(n) => {
                if counts.total() >= n {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        };
        if remaining <= 0.0 {
            breakpoints.push(Breakpoint {
                t: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                tag: EventTag::End,
                region: state.region,
            });
            break;
        }

        let hit = target.first_boundary_hit(state.region, &state.position, &state.velocity);
        let t_boundary = hit.as_ref().map_or(f64::INFINITY, |h| h.t);
        let t_refresh = refresh_dist
            .as_ref()
            .map_or(f64::INFINITY, |d| rng.clocks.sample(*d));
        let cap = t_boundary.min(t_refresh).min(remaining);
        let candidate = next_bounce_candidate(target, kind, space, &state, cap, &mut rng.clocks)?;
        let t_bounce = candidate.as_ref().map_or(f64::INFINITY, |c| c.t);

        if remaining <= t_boundary.min(t_refresh).min(t_bounce) {
            if !remaining.is_finite() {
                return Err(SamplerError::NoUpcomingEvent);
            }
            let StopRule::MaxTime(t_end) = stop else {
                unreachable!("infinite event budget with no upcoming event");
            };
            state.position = add_scaled(&state.position, remaining, &state.velocity);
            state.time = t_end;
            breakpoints.push(Breakpoint {
                t: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                tag: EventTag::End,
                region: state.region,
            });
            break;
        }

        if t_boundary <= t_refresh && t_boundary <= t_bounce {
            let hit = hit.expect("finite boundary time implies a hit");
            if hit.t < 1e-15 {
                zero_time_boundary_run += 1;
                if zero_time_boundary_run > MAX_ZERO_TIME_BOUNDARY_EVENTS {
                    return Err(SamplerError::StuckAtBoundary(MAX_ZERO_TIME_BOUNDARY_EVENTS));
                }
            } else {
                zero_time_boundary_run = 0;
            }
            state.time += hit.t;
            state.position = hit.position.clone();
            let facet = target.facet(hit.facet);
            match target.classify_hit(hit.facet, &state.position) {
                Err(TargetError::DegenerateBoundary) => {
                    // continuous crossing: keep the velocity, switch sides
                    state.region = if dot(&facet.normal, &state.velocity) > 0.0 {
                        facet.side_regions.1
                    } else {
                        facet.side_regions.0
                    };
                }
                Err(other) => return Err(other.into()),
                Ok(bp) => {
                    if hit.patch == PatchPosition::NearEdge
                        || dot(&bp.normal, &state.velocity).abs() <= TANGENT_TOL
                    {
                        // edge or tangent hit: always-valid flip fallback
                        state.velocity.iter_mut().for_each(|vi| *vi = -*vi);
                    } else {
                        state.velocity = kernels::apply(
                            kernel,
                            kind,
                            &bp,
                            space,
                            &state.velocity,
                            &mut rng.kernel,
                        )?;
                        let out = dot(&bp.normal, &state.velocity);
                        state.region = if out > 0.0 { bp.upper } else { bp.lower };
                    }
                }
            }
            counts.boundary += 1;
            breakpoints.push(Breakpoint {
                t: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                tag: EventTag::Boundary,
                region: state.region,
            });
        } else if t_refresh <= t_bounce {
            state.time += t_refresh;
            state.position = add_scaled(&state.position, t_refresh, &state.velocity);
            state.velocity = space.refresh(&state.velocity, &mut rng.velocity);
            counts.refresh += 1;
            breakpoints.push(Breakpoint {
                t: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                tag: EventTag::Refresh,
                region: state.region,
            });
        } else {
            let candidate = candidate.expect("finite bounce time implies a candidate");
            state.time += candidate.t;
            state.position = add_scaled(&state.position, candidate.t, &state.velocity);
            let grad = target
                .region(state.region)
                .grad_log_density(&state.position);
            state.velocity = match apply_bounce(
                kind,
                space,
                &grad,
                &state.velocity,
                candidate.coordinate,
                &mut rng.velocity,
            ) {
                Ok(v) => v,
                // critical point: fall back to a fresh velocity draw
                Err(SamplerError::ZeroGradient) => {
                    space.refresh(&state.velocity, &mut rng.velocity)
                }
                Err(other) => return Err(other),
            };
            counts.bounce += 1;
            breakpoints.push(Breakpoint {
                t: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                tag: EventTag::Bounce,
                region: state.region,
            });
        }
    }

    let total_time = breakpoints.last().unwrap().t - breakpoints.first().unwrap().t;
    Ok(TrajectorySkeleton {
        breakpoints,
        total_time,
        event_counts: counts,
    })
}

fn validate_combination(
    target: &PiecewiseTarget,
    kind: SamplerKind,
    space: &VelocitySpace,
    state0: &State,
) -> Result<(), SamplerError> {
    if space.dim() != target.dim()
        || state0.position.len() != target.dim()
        || state0.velocity.len() != target.dim()
    {
        return Err(SamplerError::InvalidConfiguration(
            "dimension mismatch between target, velocity space and state".into(),
        ));
    }
    let ok = match kind {
        SamplerKind::Bps { .. } => matches!(
            space,
            VelocitySpace::UnitSphere { .. } | VelocitySpace::IsoGaussian { .. }
        ),
        SamplerKind::ZigZag => matches!(space, VelocitySpace::SignedHypercube { .. }),
        SamplerKind::CoordinateSampler { .. } => {
            matches!(space, VelocitySpace::CoordinateAxes { .. })
        }
    };
    if !ok {
        return Err(SamplerError::InvalidConfiguration(format!(
            "{} does not run on this velocity space",
            kind.name()
        )));
    }
    if kind.refresh_rate() < 0.0 {
        return Err(SamplerError::InvalidConfiguration(
            "refresh rate must be nonnegative".into(),
        ));
    }
    if !target.region(state0.region).contains(&state0.position) {
        return Err(SamplerError::InvalidConfiguration(
            "initial position is not inside its declared region".into(),
        ));
    }
    Ok(())
}

/// Exact time averages over a skeleton: mean, raw second moment and
/// per-region occupancy fractions, via closed-form segment integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMoments {
    pub mean: Vec<f64>,
    pub second_moment: Vec<Vec<f64>>,
    pub occupancy: Vec<f64>,
    pub total_time: f64,
}

pub fn path_moments(skeleton: &TrajectorySkeleton, n_regions: usize) -> PathMoments {
    let dim = skeleton.breakpoints[0].position.len();
    let mut mean = vec![0.0; dim];
    let mut second = vec![vec![0.0; dim]; dim];
    let mut occupancy = vec![0.0; n_regions];
    let mut total = 0.0;
    for pair in skeleton.breakpoints.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        let dt = to.t - from.t;
        if dt <= 0.0 {
            continue;
        }
        let x = &from.position;
        let v = &from.velocity;
        let dt2 = dt * dt / 2.0;
        let dt3 = dt * dt * dt / 3.0;
        for i in 0..dim {
            mean[i] += x[i] * dt + v[i] * dt2;
            for j in 0..dim {
                second[i][j] +=
                    x[i] * x[j] * dt + (x[i] * v[j] + x[j] * v[i]) * dt2 + v[i] * v[j] * dt3;
            }
        }
        occupancy[from.region.0] += dt;
        total += dt;
    }
    assert!(total > 0.0, "path moments need positive elapsed time");
    for m in &mut mean {
        *m /= total;
    }
    for row in &mut second {
        for s in row {
            *s /= total;
        }
    }
    for o in &mut occupancy {
        *o /= total;
    }
    PathMoments {
        mean,
        second_moment: second,
        occupancy,
        total_time: total,
    }
}

/// Structural checks on a simulated skeleton: monotone times, free-transport
/// continuity between breakpoints, and boundary tags landing on a facet.
pub fn check_skeleton(
    target: &PiecewiseTarget,
    skeleton: &TrajectorySkeleton,
) -> Result<(), String> {
    let bps = &skeleton.breakpoints;
    if bps.len() < 2 {
        return Err("skeleton needs at least start and end".into());
    }
    for (i, pair) in bps.windows(2).enumerate() {
        let (from, to) = (&pair[0], &pair[1]);
        let strict_ok = to.t > from.t || (to.tag == EventTag::End && to.t == from.t);
        if !strict_ok {
            return Err(format!("breakpoint {} does not advance time", i + 1));
        }
        let dt = to.t - from.t;
        let predicted = add_scaled(&from.position, dt, &from.velocity);
        let scale = 1.0 + crate::linalg::norm(&to.position);
        if crate::linalg::max_abs_diff(&predicted, &to.position) > 1e-9 * scale {
            return Err(format!("segment {} breaks free-transport continuity", i));
        }
    }
    for (i, bp) in bps.iter().enumerate() {
        if bp.tag != EventTag::Boundary {
            continue;
        }
        let on_facet = target.facets().iter().any(|f| {
            f.plane_residual(&bp.position).abs() <= 1e-9
                && f.locate(&bp.position) != PatchPosition::Outside
        });
        if !on_facet {
            return Err(format!("boundary breakpoint {i} is not on any facet"));
        }
    }
    Ok(())
}
