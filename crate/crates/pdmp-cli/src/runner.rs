//! Experiment execution: build the hypercube target, run seeded chains in
//! parallel, write trajectory CSVs, the summary JSON and the optional SVG.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use pdmp::kernels::BoundaryKernel;
use pdmp::sampler::{simulate, SamplerKind, SimRng, State, StopRule, TrajectorySkeleton};
use pdmp::target::{PiecewiseTarget, RegionId};
use pdmp::velocity::{Basis, VelocitySpace};
use rayon::prelude::*;

use crate::config::{
    BasisChoice, BpsVelocities, ExperimentConfig, HorizonChoice, KernelChoice, SamplerChoice,
};
use crate::summary::{chain_summary, pooled_summary, RunSummary, SummarizeOutput};
use crate::{csvio, svg, CliError};

pub struct RunArtifacts {
    pub summary: RunSummary,
    pub csv_paths: Vec<PathBuf>,
    pub json_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

fn build_spaces(config: &ExperimentConfig) -> (SamplerKind, VelocitySpace) {
    let basis = match config.basis {
        BasisChoice::Canonical => Basis::canonical(config.dim),
        BasisChoice::Rotated { seed } => Basis::seeded_rotation(config.dim, seed),
    };
    match config.sampler {
        SamplerChoice::Bps => (
            SamplerKind::Bps {
                refresh_rate: config.refresh_rate,
            },
            match config.bps_velocities {
                BpsVelocities::Sphere => VelocitySpace::unit_sphere(config.dim),
                BpsVelocities::Gaussian => VelocitySpace::iso_gaussian(config.dim),
            },
        ),
        SamplerChoice::Zigzag => (SamplerKind::ZigZag, VelocitySpace::signed_hypercube(basis)),
        SamplerChoice::Cs => (
            SamplerKind::CoordinateSampler {
                refresh_rate: config.refresh_rate,
            },
            VelocitySpace::coordinate_axes(basis),
        ),
    }
}

fn boundary_kernel(config: &ExperimentConfig) -> BoundaryKernel {
    match config.kernel {
        KernelChoice::Flip => BoundaryKernel::Flip,
        KernelChoice::MetropolisHastings { iters } => BoundaryKernel::MetropolisHastings { iters },
        KernelChoice::Limit => BoundaryKernel::Limit,
    }
}

/// Initial state: the origin when the inside carries mass, otherwise a
/// point in the outside region.
fn initial_position(config: &ExperimentConfig) -> (RegionId, Vec<f64>) {
    if config.alpha_in > 0.0 {
        (RegionId(0), vec![0.0; config.dim])
    } else {
        let mut x = vec![0.0; config.dim];
        x[0] = 1.5;
        (RegionId(1), x)
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    config.validate()?;
    let started = Instant::now();
    let target = PiecewiseTarget::gaussian_hypercube(
        config.dim,
        config.sigma_in,
        config.alpha_in,
        config.sigma_out,
        config.alpha_out,
    )?;
    let (kind, space) = build_spaces(config);
    let kernel = boundary_kernel(config);
    let stop = match config.horizon {
        HorizonChoice::Time(t) => StopRule::MaxTime(t),
        HorizonChoice::Events(n) => StopRule::MaxEvents(n),
    };
    let (region0, x0) = initial_position(config);

    let skeletons: Vec<TrajectorySkeleton> = (0..config.chains)
        .into_par_iter()
        .map(|chain| {
            let mut rng = SimRng::for_chain(config.seed, chain);
            let v0 = space.sample(rng.velocity());
            simulate(
                &target,
                kind,
                &space,
                kernel,
                State::new(region0, x0.clone(), v0),
                stop,
                &mut rng,
            )
            .map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let labels: Vec<String> = target.regions().iter().map(|r| r.label.clone()).collect();
    let per_chain: Vec<_> = skeletons
        .iter()
        .enumerate()
        .map(|(i, skel)| chain_summary(i as u64, skel, &labels))
        .collect();
    let pooled = pooled_summary(&per_chain);

    let mut csv_paths = Vec::new();
    for (chain, skeleton) in skeletons.iter().enumerate() {
        if let Some(path) = config.chain_csv_path(chain as u64) {
            csvio::write_skeleton(&path, skeleton)?;
            csv_paths.push(path);
        }
    }
    let svg_path = match &config.svg {
        Some(path) => {
            svg::write_svg(path, &skeletons[0])?;
            Some(path.clone())
        }
        None => None,
    };

    let summary = RunSummary {
        config: config.clone(),
        per_chain,
        pooled,
    };
    let json_path = match &config.json {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, render_summary_json(&summary)?)?;
            Some(path.clone())
        }
        None => None,
    };

    let elapsed = started.elapsed().as_secs_f64();
    let events = summary.pooled.events.total();
    eprintln!(
        "ran {} chain(s), {} events in {:.3}s wall ({:.0} events/s)",
        config.chains,
        events,
        elapsed,
        events as f64 / elapsed.max(1e-9)
    );

    Ok(RunArtifacts {
        summary,
        csv_paths,
        json_path,
        svg_path,
    })
}

pub fn render_summary_json<T: serde::Serialize>(summary: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    Ok(text)
}

/// Recompute per-chain summaries from trajectory CSVs and pool them.
pub fn summarize(paths: &[PathBuf]) -> Result<SummarizeOutput, CliError> {
    if paths.is_empty() {
        return Err(CliError::Config("summarize needs at least one CSV".into()));
    }
    let labels = vec!["inside".to_string(), "outside".to_string()];
    let mut per_chain = Vec::with_capacity(paths.len());
    let mut dim = None;
    for (index, path) in paths.iter().enumerate() {
        let skeleton = csvio::read_skeleton(path)?;
        let this_dim = skeleton.breakpoints[0].position.len();
        if *dim.get_or_insert(this_dim) != this_dim {
            return Err(CliError::SchemaMismatch(format!(
                "{} has dimension {this_dim}, earlier files differ",
                path.display()
            )));
        }
        per_chain.push(chain_summary(index as u64, &skeleton, &labels));
    }
    let pooled = pooled_summary(&per_chain);
    Ok(SummarizeOutput {
        inputs: paths.iter().map(|p| p.display().to_string()).collect(),
        per_chain,
        pooled,
    })
}
