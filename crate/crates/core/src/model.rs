//! Haldane Bloch Hamiltonian on the honeycomb lattice.
//!
//! `h(k) = d0(k) I + d(k) . sigma` with
//!
//! ```text
//! dx + i dy = t1 sum_m exp(i k.delta_m)
//! d0        = 2 t2 cos(phi) sum_j cos(k.b_j)
//! dz        = M - 2 t2 sin(phi) sum_j sin(k.b_j)
//! ```
//!
//! The next-nearest-neighbour vectors are oriented so that
//! `sum_j sin(K.b_j) = 3 sqrt(3) / 2` at `K = (4 pi / (3 sqrt 3), 0)`, which
//! gives the Dirac masses `m_K = M - 3 sqrt(3) t2 sin(phi)` and
//! `m_K' = M + 3 sqrt(3) t2 sin(phi)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Norm of `d(k)` below which a k-point is treated as gapless.
pub const GAP_FLOOR: f64 = 1e-12;

/// Mass magnitude below which [`analytic_chern`] refuses to assign a sign.
pub const WALL_TOLERANCE: f64 = 1e-12;

/// Haldane couplings. The lattice geometry is fixed (see [`nn_vectors`], [`nnn_vectors`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Nearest-neighbour hopping.
    pub t1: T,
    /// Next-nearest-neighbour hopping magnitude.
    pub t2: T,
    /// Next-nearest-neighbour phase in radians.
    pub phi: T,
    /// Sublattice stagger `M`.
    pub mass: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(t1: T, t2: T, phi: T, mass: T) -> Self {
        Self { t1, t2, phi, mass }
    }

    /// Returns a copy with a different stagger `M`.
    pub fn with_mass(self, mass: T) -> Self {
        Self { mass, ..self }
    }

    /// Stagger values at which one of the Dirac masses vanishes, in increasing order.
    pub fn walls(&self) -> [T; 2] {
        let w = T::lit(3.0) * T::lit(3.0).sqrt() * self.t2 * self.phi.sin();
        if w <= T::zero() {
            [w, -w]
        } else {
            [-w, w]
        }
    }
}

impl<T: Real> Default for ModelParams<T> {
    /// `t1 = 1`, `t2 = 1/3`, `phi = pi/2`, `M = 0`: walls sit at `M = +-sqrt(3)`.
    fn default() -> Self {
        Self {
            t1: T::one(),
            t2: T::one() / T::lit(3.0),
            phi: T::FRAC_PI_2(),
            mass: T::zero(),
        }
    }
}

/// Nearest-neighbour bond vectors `delta_m`.
pub fn nn_vectors<T: Real>() -> [[T; 2]; 3] {
    let h = T::lit(3.0).sqrt() / T::lit(2.0);
    let half = T::lit(0.5);
    [[T::zero(), T::one()], [-h, -half], [h, -half]]
}

/// Oriented next-nearest-neighbour vectors `b_j`, summing to zero.
pub fn nnn_vectors<T: Real>() -> [[T; 2]; 3] {
    let s3 = T::lit(3.0).sqrt();
    let h = s3 / T::lit(2.0);
    let y = T::lit(1.5);
    [[-s3, T::zero()], [h, y], [h, -y]]
}

/// Primitive Bravais vectors `a1 = (sqrt 3, 0)`, `a2 = (sqrt 3 / 2, 3/2)`.
pub fn bravais_basis<T: Real>() -> [[T; 2]; 2] {
    let s3 = T::lit(3.0).sqrt();
    [[s3, T::zero()], [s3 / T::lit(2.0), T::lit(1.5)]]
}

/// Reciprocal vectors with `g_i . a_j = 2 pi delta_ij`.
pub fn reciprocal_basis<T: Real>() -> [[T; 2]; 2] {
    let two_pi = T::PI() + T::PI();
    let s3 = T::lit(3.0).sqrt();
    [
        [two_pi / s3, -two_pi / T::lit(3.0)],
        [T::zero(), T::lit(2.0) * two_pi / T::lit(3.0)],
    ]
}

/// Area of the Brillouin-zone torus, `|g1 x g2|`.
pub fn bz_area<T: Real>() -> T {
    let [g1, g2] = reciprocal_basis::<T>();
    (g1[0] * g2[1] - g1[1] * g2[0]).abs()
}

/// Dirac point `K = (4 pi / (3 sqrt 3), 0)`, fractional coordinates `(2/3, 1/3)`.
pub fn dirac_point_k<T: Real>() -> [T; 2] {
    [
        T::lit(4.0) * T::PI() / (T::lit(3.0) * T::lit(3.0).sqrt()),
        T::zero(),
    ]
}

/// Dirac point `K' = -K`.
pub fn dirac_point_kp<T: Real>() -> [T; 2] {
    let k = dirac_point_k::<T>();
    [-k[0], -k[1]]
}

/// Cartesian momentum for fractional coordinates `(f1, f2)` in the reciprocal basis.
pub fn k_from_fractional<T: Real>(f1: T, f2: T) -> [T; 2] {
    let [g1, g2] = reciprocal_basis::<T>();
    [f1 * g1[0] + f2 * g2[0], f1 * g1[1] + f2 * g2[1]]
}

#[inline]
fn dot<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// Periodic `nx x ny` sampling of the Brillouin torus, `k = (m/nx) g1 + (n/ny) g2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Smallest side accepted by the lattice routines.
    pub const MIN_SIDE: usize = 4;

    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < Self::MIN_SIDE || ny < Self::MIN_SIDE {
            return Err(Error::InvalidMesh {
                nx,
                ny,
                min: Self::MIN_SIDE,
            });
        }
        Ok(Self { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index; `m` runs along `g1`, `n` along `g2`.
    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.ny + n
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.ny, idx % self.ny)
    }

    #[inline]
    pub fn next_x(&self, m: usize) -> usize {
        (m + 1) % self.nx
    }

    #[inline]
    pub fn next_y(&self, n: usize) -> usize {
        (n + 1) % self.ny
    }

    pub fn k_point<T: Real>(&self, m: usize, n: usize) -> [T; 2] {
        let f1 = T::lit(m as f64) / T::lit(self.nx as f64);
        let f2 = T::lit(n as f64) / T::lit(self.ny as f64);
        k_from_fractional(f1, f2)
    }

    /// Area of one plaquette, `|g1 x g2| / (nx ny)`.
    pub fn cell_area<T: Real>(&self) -> T {
        bz_area::<T>() / T::lit(self.len() as f64)
    }
}

/// Coefficients of the Bloch Hamiltonian at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DVector<T> {
    pub d0: T,
    pub dx: T,
    pub dy: T,
    pub dz: T,
}

impl<T: Real> DVector<T> {
    /// `|d|`; the band gap is twice this.
    pub fn norm(&self) -> T {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }

    pub fn gap(&self) -> T {
        T::lit(2.0) * self.norm()
    }

    /// Spatial part `(dx, dy, dz)`.
    pub fn spatial(&self) -> [T; 3] {
        [self.dx, self.dy, self.dz]
    }

    /// `n = d / |d|`. Caller guarantees `|d| > 0`.
    pub fn unit(&self) -> [T; 3] {
        let r = self.norm();
        [self.dx / r, self.dy / r, self.dz / r]
    }
}

/// `(d/dkx, d/dky)` of every component of [`DVector`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DGradient<T> {
    pub along_x: DVector<T>,
    pub along_y: DVector<T>,
}

impl<T: Real> DGradient<T> {
    /// Component `a` (0 for kx, 1 for ky).
    pub fn along(&self, a: usize) -> &DVector<T> {
        if a == 0 {
            &self.along_x
        } else {
            &self.along_y
        }
    }
}

/// Evaluates `d(k)` for Cartesian momentum `k`.
pub fn d_vector<T: Real>(k: [T; 2], p: &ModelParams<T>) -> DVector<T> {
    let two = T::lit(2.0);
    let (mut fx, mut fy) = (T::zero(), T::zero());
    for delta in nn_vectors::<T>() {
        let (s, c) = dot(k, delta).sin_cos();
        fx = fx + c;
        fy = fy + s;
    }
    let (mut sum_cos, mut sum_sin) = (T::zero(), T::zero());
    for b in nnn_vectors::<T>() {
        let (s, c) = dot(k, b).sin_cos();
        sum_cos = sum_cos + c;
        sum_sin = sum_sin + s;
    }
    DVector {
        d0: two * p.t2 * p.phi.cos() * sum_cos,
        dx: p.t1 * fx,
        dy: p.t1 * fy,
        dz: p.mass - two * p.t2 * p.phi.sin() * sum_sin,
    }
}

/// Term-by-term analytic gradient of [`d_vector`].
pub fn d_derivatives<T: Real>(k: [T; 2], p: &ModelParams<T>) -> DGradient<T> {
    let two = T::lit(2.0);
    let mut out = DGradient::<T>::default();
    for delta in nn_vectors::<T>() {
        let (s, c) = dot(k, delta).sin_cos();
        out.along_x.dx = out.along_x.dx - p.t1 * delta[0] * s;
        out.along_y.dx = out.along_y.dx - p.t1 * delta[1] * s;
        out.along_x.dy = out.along_x.dy + p.t1 * delta[0] * c;
        out.along_y.dy = out.along_y.dy + p.t1 * delta[1] * c;
    }
    let c0 = two * p.t2 * p.phi.cos();
    let cz = two * p.t2 * p.phi.sin();
    for b in nnn_vectors::<T>() {
        let (s, c) = dot(k, b).sin_cos();
        out.along_x.d0 = out.along_x.d0 - c0 * b[0] * s;
        out.along_y.d0 = out.along_y.d0 - c0 * b[1] * s;
        out.along_x.dz = out.along_x.dz - cz * b[0] * c;
        out.along_y.dz = out.along_y.dz - cz * b[1] * c;
    }
    out
}

/// Gradient of the unit vector `n = d/|d|`: returns `[dn/dkx, dn/dky]`.
///
/// `dn = dd/|d| - d (d . dd)/|d|^3`.
pub fn unit_vector_gradient<T: Real>(d: &DVector<T>, grad: &DGradient<T>) -> [[T; 3]; 2] {
    let r = d.norm();
    let r3 = r * r * r;
    let v = d.spatial();
    let mut out = [[T::zero(); 3]; 2];
    for (a, slot) in out.iter_mut().enumerate() {
        let dd = grad.along(a).spatial();
        let proj = v[0] * dd[0] + v[1] * dd[1] + v[2] * dd[2];
        for i in 0..3 {
            slot[i] = dd[i] / r - v[i] * proj / r3;
        }
    }
    out
}

/// Valence (lower-band) spinor at one momentum together with its
/// gauge-invariant projector data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState<T> {
    /// Amplitude on sublattice A.
    pub va: Cplx<T>,
    /// Amplitude on sublattice B.
    pub vb: Cplx<T>,
    /// Unit Bloch vector `n`.
    pub n_hat: [T; 3],
    /// `v_A v_B^*`, computed from `n` as `(-nx + i ny)/2`.
    pub coherence: Cplx<T>,
}

impl<T: Real> BlochState<T> {
    /// Builds the valence state for a unit Bloch vector.
    ///
    /// Gauge: `v_A = sin(Theta/2)`, `v_B = -exp(+i varphi) cos(Theta/2)`, which
    /// is the one consistent with `v_A v_B^* = (-nx + i ny)/2`. At the exact
    /// poles the azimuth is undefined and `varphi = 0` is used, giving
    /// `(0, -1)` at the north pole and `(1, 0)` at the south pole.
    pub fn from_unit_vector(n_hat: [T; 3]) -> Self {
        let half = T::lit(0.5);
        let [nx, ny, nz] = n_hat;
        let nz_c = nz.max(-T::one()).min(T::one());
        let mag_a = ((T::one() - nz_c) * half).sqrt();
        let mag_b = ((T::one() + nz_c) * half).sqrt();
        let rho = nx.hypot(ny);
        let phase = if rho > T::zero() {
            Cplx::new(nx / rho, ny / rho)
        } else {
            Cplx::new(T::one(), T::zero())
        };
        Self {
            va: Cplx::new(mag_a, T::zero()),
            vb: -phase * mag_b,
            n_hat,
            coherence: Cplx::new(-nx * half, ny * half),
        }
    }

    pub fn nz(&self) -> T {
        self.n_hat[2]
    }

    /// `|v_A|^2 + |v_B|^2`.
    pub fn norm_sqr(&self) -> T {
        self.va.norm_sqr() + self.vb.norm_sqr()
    }

    /// Multiplies the spinor by `exp(i chi)`; projector data are unchanged.
    pub fn rephased(&self, chi: T) -> Self {
        let ph = Cplx::from_polar(T::one(), chi);
        Self {
            va: self.va * ph,
            vb: self.vb * ph,
            ..*self
        }
    }

    /// `<self|other>` of the two-component spinors.
    pub fn overlap(&self, other: &Self) -> Cplx<T> {
        self.va.conj() * other.va + self.vb.conj() * other.vb
    }
}

/// Valence state for `d` with the default [`GAP_FLOOR`].
pub fn valence_state<T: Real>(d: &DVector<T>) -> Result<BlochState<T>> {
    valence_state_with_floor(d, T::lit(GAP_FLOOR))
}

/// Valence state for `d`; fails with `GaplessPoint` when `|d| < gap_floor`.
pub fn valence_state_with_floor<T: Real>(d: &DVector<T>, gap_floor: T) -> Result<BlochState<T>> {
    let norm = d.norm();
    if !(norm >= gap_floor) || norm == T::zero() {
        return Err(Error::GaplessPoint {
            norm: norm.to_f64_lossy(),
            floor: gap_floor.to_f64_lossy(),
        });
    }
    Ok(BlochState::from_unit_vector(d.unit()))
}

/// Dirac masses `(m_K, m_K')`.
pub fn dirac_masses<T: Real>(p: &ModelParams<T>) -> (T, T) {
    let w = T::lit(3.0) * T::lit(3.0).sqrt() * p.t2 * p.phi.sin();
    (p.mass - w, p.mass + w)
}

/// Chern number of the valence band from the Dirac-mass signs,
/// `(sgn m_K - sgn m_K') / 2`.
pub fn analytic_chern<T: Real>(p: &ModelParams<T>) -> Result<i32> {
    let (mk, mkp) = dirac_masses(p);
    let tol = T::lit(WALL_TOLERANCE);
    if mk.abs() <= tol || mkp.abs() <= tol {
        return Err(Error::OnWall {
            m_k: mk.to_f64_lossy(),
            m_kp: mkp.to_f64_lossy(),
        });
    }
    let sgn = |x: T| if x > T::zero() { 1 } else { -1 };
    Ok((sgn(mk) - sgn(mkp)) / 2)
}

/// `min_k 2|d(k)|` over the supplied momenta; `None` for an empty set.
pub fn min_gap<T: Real>(p: &ModelParams<T>, points: &[[T; 2]]) -> Option<T> {
    points
        .par_iter()
        .map(|&k| d_vector(k, p).gap())
        .reduce_with(|a, b| a.min(b))
}

/// Minimum spectral gap `2|d(k)|` over the mesh points of `grid`.
pub fn min_gap_on_mesh<T: Real>(p: &ModelParams<T>, grid: &Grid) -> T {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (m, n) = grid.coords(idx);
            d_vector(grid.k_point(m, n), p).gap()
        })
        .reduce(T::infinity, |a, b| a.min(b))
}
