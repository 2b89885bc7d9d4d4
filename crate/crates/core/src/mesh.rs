//! Fukui-Hatsugai-Suzuki lattice Berry curvature on the Brillouin torus.
//!
//! Link variables are normalized overlaps of neighbouring valence states;
//! the plaquette curvature is the principal argument of the oriented product
//! of the four links. The total is an exact multiple of `2 pi`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{d_vector, valence_state_with_floor, BlochState, Grid, ModelParams, GAP_FLOOR};
use crate::scalar::{arg, ordered_sum, Cplx, Real};

/// Overlap modulus below which a link variable is considered undefined.
pub const OVERLAP_FLOOR: f64 = 1e-10;

/// Maximum distance of `(1/2pi) sum F` from the nearest integer.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-10;

/// Plaquettes whose curvature lies within this distance of `+-pi` are rejected.
pub const BRANCH_MARGIN: f64 = 1e-9;

/// Valence states sampled on a periodic `nx x ny` momentum mesh.
///
/// Immutable once built; every state has passed the gap-floor check.
#[derive(Debug, Clone)]
pub struct TorusMesh<T> {
    grid: Grid,
    states: Vec<BlochState<T>>,
    kpoints: Vec<[T; 2]>,
}

impl<T: Real> TorusMesh<T> {
    /// Wraps externally produced states (row-major, `grid.len()` entries).
    pub fn from_states(grid: Grid, states: Vec<BlochState<T>>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} states for a {}x{} mesh",
                states.len(),
                grid.nx,
                grid.ny
            )));
        }
        let kpoints = (0..grid.len())
            .map(|idx| {
                let (m, n) = grid.coords(idx);
                grid.k_point(m, n)
            })
            .collect();
        Ok(Self {
            grid,
            states,
            kpoints,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn states(&self) -> &[BlochState<T>] {
        &self.states
    }

    pub fn kpoints(&self) -> &[[T; 2]] {
        &self.kpoints
    }

    pub fn state(&self, m: usize, n: usize) -> &BlochState<T> {
        &self.states[self.grid.index(m, n)]
    }

    pub fn kpoint(&self, m: usize, n: usize) -> [T; 2] {
        self.kpoints[self.grid.index(m, n)]
    }

    /// Returns a copy with state `i` multiplied by `exp(i phases[i])`.
    pub fn rephased(&self, phases: &[T]) -> Self {
        let states = self
            .states
            .iter()
            .zip(phases)
            .map(|(s, &chi)| s.rephased(chi))
            .collect();
        Self {
            grid: self.grid,
            states,
            kpoints: self.kpoints.clone(),
        }
    }
}

/// Samples the valence band of `p` on an `nx x ny` mesh.
pub fn build_mesh<T: Real>(p: &ModelParams<T>, nx: usize, ny: usize) -> Result<TorusMesh<T>> {
    build_mesh_with_floor(p, nx, ny, T::lit(GAP_FLOOR))
}

pub fn build_mesh_with_floor<T: Real>(
    p: &ModelParams<T>,
    nx: usize,
    ny: usize,
    gap_floor: T,
) -> Result<TorusMesh<T>> {
    let grid = Grid::new(nx, ny)?;
    let kpoints: Vec<[T; 2]> = (0..grid.len())
        .map(|idx| {
            let (m, n) = grid.coords(idx);
            grid.k_point(m, n)
        })
        .collect();
    let states = kpoints
        .par_iter()
        .enumerate()
        .map(|(idx, &k)| {
            let d = d_vector(k, p);
            valence_state_with_floor(&d, gap_floor).map_err(|_| {
                let (m, n) = grid.coords(idx);
                Error::GaplessMesh {
                    m,
                    n,
                    norm: d.norm().to_f64_lossy(),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TorusMesh {
        grid,
        states,
        kpoints,
    })
}

/// Normalized overlap `<s1|s2> / |<s1|s2>|`.
pub fn link_variable<T: Real>(s1: &BlochState<T>, s2: &BlochState<T>) -> Result<Cplx<T>> {
    let o = s1.overlap(s2);
    let modulus = o.norm();
    if !(modulus >= T::lit(OVERLAP_FLOOR)) {
        return Err(Error::DegenerateOverlap {
            modulus: modulus.to_f64_lossy(),
            floor: OVERLAP_FLOOR,
        });
    }
    Ok(o / modulus)
}

/// Lattice Berry curvature, one value per plaquette, indexed by the
/// plaquette's base corner `(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField<T> {
    grid: Grid,
    values: Vec<T>,
}

impl<T: Real> CurvatureField<T> {
    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} plaquette values for a {}x{} mesh",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, m: usize, n: usize) -> T {
        self.values[self.grid.index(m, n)]
    }

    /// `sum F` in row-major order.
    pub fn total(&self) -> T {
        ordered_sum(&self.values)
    }

    /// `(1/2pi) sum F`.
    pub fn total_over_2pi(&self) -> T {
        self.total() / (T::PI() + T::PI())
    }
}

fn plaquette<T: Real>(mesh: &TorusMesh<T>, m: usize, n: usize) -> Result<T> {
    let g = mesh.grid;
    let (mx, ny) = (g.next_x(m), g.next_y(n));
    let s00 = mesh.state(m, n);
    let s10 = mesh.state(mx, n);
    let s11 = mesh.state(mx, ny);
    let s01 = mesh.state(m, ny);
    let ux = link_variable(s00, s10)?;
    let uy_shifted = link_variable(s10, s11)?;
    let ux_shifted = link_variable(s01, s11)?;
    let uy = link_variable(s00, s01)?;
    // Links have unit modulus, so division is conjugation.
    let f = arg(ux * uy_shifted * ux_shifted.conj() * uy.conj());
    if f.abs() >= T::PI() - T::lit(BRANCH_MARGIN) {
        return Err(Error::NonAdmissible {
            m,
            n,
            flux: f.to_f64_lossy(),
        });
    }
    Ok(f)
}

/// FHS plaquette curvature `F(k)` in the principal branch.
pub fn plaquette_curvature<T: Real>(mesh: &TorusMesh<T>) -> Result<CurvatureField<T>> {
    let g = mesh.grid;
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let (m, n) = g.coords(idx);
            plaquette(mesh, m, n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureField { grid: g, values })
}

/// Nearest integer to `(1/2pi) sum F`, checked against [`INTEGRALITY_TOLERANCE`].
pub fn chern_number<T: Real>(f: &CurvatureField<T>) -> Result<i32> {
    let total = f.total_over_2pi();
    let nearest = total.round();
    let deviation = (total - nearest).abs();
    if !(deviation <= T::tol(INTEGRALITY_TOLERANCE)) {
        return Err(Error::NonIntegerTotal {
            total: total.to_f64_lossy(),
            deviation: deviation.to_f64_lossy(),
        });
    }
    nearest.to_i32().ok_or(Error::NonIntegerTotal {
        total: total.to_f64_lossy(),
        deviation: f64::INFINITY,
    })
}

/// Builds the mesh, the curvature field and the Chern number in one call.
pub fn fhs_chern<T: Real>(p: &ModelParams<T>, nx: usize, ny: usize) -> Result<i32> {
    let mesh = build_mesh(p, nx, ny)?;
    chern_number(&plaquette_curvature(&mesh)?)
}
