//! Velocity laws for the three samplers.
//!
//! Each sampler carries its own auxiliary velocity distribution: the Bouncy
//! Particle Sampler moves with unit-sphere or isotropic-Gaussian velocities,
//! the Zig-Zag Process with sign vectors and the Coordinate Sampler along
//! single coordinate axes — the latter two optionally expressed in a rotated
//! orthonormal basis. All four laws are symmetric under negation.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::dot;

/// Velocities whose normal component is below this are tangent to the facet:
/// they carry no flux and are excluded from kernel outcomes.
pub const TANGENT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum VelocityError {
    #[error("velocity space has no finite atom list")]
    NotFinite,
    #[error("basis columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
}

/// An orthonormal basis of `R^d`, stored as columns of a rotation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    columns: Vec<Vec<f64>>,
}

impl Basis {
    pub fn canonical(dim: usize) -> Self {
        let columns = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Basis { columns }
    }

    /// Haar-distributed random rotation: QR of a standard Gaussian matrix
    /// with the positive-diagonal convention for the triangular factor,
    /// computed by modified Gram-Schmidt with one re-orthogonalization pass.
    pub fn random_rotation(dim: usize, rng: &mut impl Rng) -> Self {
        let mut columns: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        for i in 0..dim {
            for _pass in 0..2 {
                for j in 0..i {
                    let proj = dot(&columns[i], &columns[j]);
                    for k in 0..dim {
                        columns[i][k] -= proj * columns[j][k];
                    }
                }
            }
            let norm = dot(&columns[i], &columns[i]).sqrt();
            for k in 0..dim {
                columns[i][k] /= norm;
            }
        }
        Basis { columns }
    }

    /// [`Basis::random_rotation`] driven by a dedicated seeded generator,
    /// for reproducible experiment configurations.
    pub fn seeded_rotation(dim: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        Self::random_rotation(dim, &mut rng)
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self, VelocityError> {
        let basis = Basis { columns };
        let residual = basis.orthonormality_residual();
        if residual > 1e-10 {
            return Err(VelocityError::NotOrthonormal { residual });
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    /// `x = R y`: combine basis columns with the given coordinates.
    pub fn to_ambient(&self, coords: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut x = vec![0.0; dim];
        for (i, &c) in coords.iter().enumerate() {
            for k in 0..dim {
                x[k] += c * self.columns[i][k];
            }
        }
        x
    }

    /// `y = R^T x`: coordinates of an ambient vector in this basis.
    pub fn to_coords(&self, ambient: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|col| dot(col, ambient)).collect()
    }

    /// Max entrywise deviation of `R^T R` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.columns[i], &self.columns[j]) - expect).abs());
            }
        }
        worst
    }
}

/// Finite atom list with the shared atom probability.
#[derive(Debug, Clone)]
pub struct FiniteAtoms {
    pub atoms: Vec<Vec<f64>>,
    pub probability: f64,
}

/// Atoms of a finite space split by the sign of their component along a
/// unit normal.
#[derive(Debug, Clone)]
pub struct NormalSplit {
    pub positive: Vec<Vec<f64>>,
    pub negative: Vec<Vec<f64>>,
    pub tangent: Vec<Vec<f64>>,
}

/// One of the four velocity laws.
#[derive(Debug, Clone)]
pub enum VelocitySpace {
    /// Uniform on the unit sphere; the Bouncy Particle Sampler default.
    UnitSphere { dim: usize },
    /// Standard Gaussian on `R^d`; the alternative BPS velocity law.
    IsoGaussian { dim: usize },
    /// The `2^d` sign vectors of the (possibly rotated) basis; Zig-Zag.
    SignedHypercube { basis: Basis },
    /// The `2d` signed basis vectors; Coordinate Sampler.
    CoordinateAxes { basis: Basis },
}

impl VelocitySpace {
    pub fn unit_sphere(dim: usize) -> Self {
        VelocitySpace::UnitSphere { dim }
    }

    pub fn iso_gaussian(dim: usize) -> Self {
        VelocitySpace::IsoGaussian { dim }
    }

    pub fn signed_hypercube(basis: Basis) -> Self {
        VelocitySpace::SignedHypercube { basis }
    }

    pub fn coordinate_axes(basis: Basis) -> Self {
        VelocitySpace::CoordinateAxes { basis }
    }

    pub fn dim(&self) -> usize {
        match self {
            VelocitySpace::UnitSphere { dim } | VelocitySpace::IsoGaussian { dim } => *dim,
            VelocitySpace::SignedHypercube { basis } | VelocitySpace::CoordinateAxes { basis } => {
                basis.dim()
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            VelocitySpace::SignedHypercube { .. } | VelocitySpace::CoordinateAxes { .. }
        )
    }

    pub fn basis(&self) -> Option<&Basis> {
        match self {
            VelocitySpace::SignedHypercube { basis } | VelocitySpace::CoordinateAxes { basis } => {
                Some(basis)
            }
            _ => None,
        }
    }

    /// Draw a velocity from the law.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            VelocitySpace::UnitSphere { dim } => loop {
                let v: Vec<f64> = (0..*dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dot(&v, &v).sqrt();
                if norm > 1e-12 {
                    return v.iter().map(|vi| vi / norm).collect();
                }
            },
            VelocitySpace::IsoGaussian { dim } => {
                (0..*dim).map(|_| rng.sample(StandardNormal)).collect()
            }
            VelocitySpace::SignedHypercube { basis } => {
                let signs: Vec<f64> = (0..basis.dim())
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                basis.to_ambient(&signs)
            }
            VelocitySpace::CoordinateAxes { basis } => {
                let axis = rng.random_range(0..basis.dim());
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                basis.column(axis).iter().map(|c| sign * c).collect()
            }
        }
    }

    /// Refreshment: a full fresh draw, leaving the law invariant.
    pub fn refresh(&self, _v: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        self.sample(rng)
    }

    /// All atoms of a finite law, each carrying the same probability.
    pub fn enumerate(&self) -> Result<FiniteAtoms, VelocityError> {
        match self {
            VelocitySpace::SignedHypercube { basis } => {
                let dim = basis.dim();
                assert!(dim <= 20, "atom enumeration is exponential in dim");
                let count = 1usize << dim;
                let mut atoms = Vec::with_capacity(count);
                for mask in 0..count {
                    let signs: Vec<f64> = (0..dim)
                        .map(|i| if mask >> i & 1 == 0 { 1.0 } else { -1.0 })
                        .collect();
                    atoms.push(basis.to_ambient(&signs));
                }
                Ok(FiniteAtoms {
                    atoms,
                    probability: 1.0 / count as f64,
                })
            }
            VelocitySpace::CoordinateAxes { basis } => {
                let dim = basis.dim();
                let mut atoms = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    atoms.push(basis.column(i).to_vec());
                    atoms.push(basis.column(i).iter().map(|c| -c).collect());
                }
                Ok(FiniteAtoms {
                    atoms,
                    probability: 1.0 / (2 * dim) as f64,
                })
            }
            _ => Err(VelocityError::NotFinite),
        }
    }

    /// Probability weight of a velocity: the uniform atom probability for
    /// finite laws (also applied to equal-norm reflections of atoms, which
    /// inherit the weight of the spherical law they discretize), the density
    /// value for the Gaussian law, and a constant for the sphere.
    pub fn weight(&self, v: &[f64]) -> f64 {
        match self {
            VelocitySpace::UnitSphere { .. } => 1.0,
            VelocitySpace::IsoGaussian { dim } => {
                let half = 0.5 * dot(v, v);
                (2.0 * std::f64::consts::PI).powf(-0.5 * *dim as f64) * (-half).exp()
            }
            VelocitySpace::SignedHypercube { basis } => 0.5f64.powi(basis.dim() as i32),
            VelocitySpace::CoordinateAxes { basis } => 1.0 / (2 * basis.dim()) as f64,
        }
    }

    /// Partition the atoms of a finite law by the sign of `<v, n>`;
    /// components within [`TANGENT_TOL`] go to the tangent bucket.
    pub fn split_by_normal(&self, n: &[f64]) -> Result<NormalSplit, VelocityError> {
        let atoms = self.enumerate()?.atoms;
        let mut split = NormalSplit {
            positive: Vec::new(),
            negative: Vec::new(),
            tangent: Vec::new(),
        };
        for atom in atoms {
            let component = dot(&atom, n);
            if component > TANGENT_TOL {
                split.positive.push(atom);
            } else if component < -TANGENT_TOL {
                split.negative.push(atom);
            } else {
                split.tangent.push(atom);
            }
        }
        Ok(split)
    }
}
