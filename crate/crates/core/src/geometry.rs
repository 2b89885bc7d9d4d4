//! Quantum geometric tensor of the valence band and its witness-filtered
//! counterpart.
//!
//! `Q_ij = <d_i u| (1 - |u><u|) |d_j u> = g_ij + (i/2) F_ij`. For two bands
//! `g_ij = (1/4) d_i n . d_j n` and `F_xy = 2 Im Q_xy = -(1/2) n . (d_x n x d_y n)`;
//! the sign of the curvature follows from the definition through `Q` and
//! matches the orientation of the FHS plaquette curvature.
//!
//! The filtered tensor inserts the Bloch representative of the witness,
//! `S' = -cos(theta) sigma_x - sin(theta) sigma_y`, between conduction
//! projectors. Because the conduction space is one-dimensional this equals
//! `eta Q` with `eta = <u+|S'|u+> = 2 Re(e^{i theta} v_A v_B^*)`.
//!
//! Derivatives of `n` are analytic (see [`crate::model::d_derivatives`]);
//! momenta are Cartesian.

use nalgebra::{DMatrix, DVector as NVector, RealField};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, plaquette_curvature};
use crate::model::{
    d_derivatives, d_vector, k_from_fractional, unit_vector_gradient, valence_state, BlochState,
    Grid, ModelParams,
};
use crate::rng;
use crate::scalar::{ordered_sum, Cplx, Real};
use crate::witness::weight_alpha;

/// Absolute slack allowed on every sampled inequality, scaled by `1 + |rhs|`.
pub const INEQUALITY_SLACK: f64 = 1e-12;

type C2<T> = [Cplx<T>; 2];
type M2<T> = [[Cplx<T>; 2]; 2];

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Two-band quantum geometric tensor at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qgt<T> {
    /// Fubini-Study metric in Cartesian `(kx, ky)`.
    pub g: [[T; 2]; 2],
    /// Berry curvature two-form `F_xy`.
    pub fxy: T,
}

impl<T: Real> Qgt<T> {
    /// The complex tensor `g + (i/2) F` (with `F_yx = -F_xy`).
    pub fn tensor(&self) -> M2<T> {
        let half = T::lit(0.5) * self.fxy;
        [
            [
                Cplx::new(self.g[0][0], T::zero()),
                Cplx::new(self.g[0][1], half),
            ],
            [
                Cplx::new(self.g[1][0], -half),
                Cplx::new(self.g[1][1], T::zero()),
            ],
        ]
    }

    pub fn det_g(&self) -> T {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }
}

struct LocalFrame<T> {
    state: BlochState<T>,
    n_hat: [T; 3],
    dn: [[T; 3]; 2],
}

fn local_frame<T: Real>(k: [T; 2], p: &ModelParams<T>) -> Result<LocalFrame<T>> {
    let d = d_vector(k, p);
    let state = valence_state(&d)?;
    let dn = unit_vector_gradient(&d, &d_derivatives(k, p));
    Ok(LocalFrame {
        state,
        n_hat: d.unit(),
        dn,
    })
}

fn qgt_from_frame<T: Real>(n: [T; 3], dn: &[[T; 3]; 2]) -> Qgt<T> {
    let quarter = T::lit(0.25);
    let mut g = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = quarter * dot3(dn[i], dn[j]);
        }
    }
    let fxy = -T::lit(0.5) * dot3(n, cross(dn[0], dn[1]));
    Qgt { g, fxy }
}

/// Metric and curvature from the closed two-band forms.
pub fn qgt<T: Real>(k: [T; 2], p: &ModelParams<T>) -> Result<Qgt<T>> {
    let frame = local_frame(k, p)?;
    Ok(qgt_from_frame(frame.n_hat, &frame.dn))
}

/// Quantum Fisher information `4 v^T g v` along `direction`.
pub fn qfi<T: Real>(g: &[[T; 2]; 2], direction: [T; 2]) -> T {
    let mut acc = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            acc = acc + direction[i] * g[i][j] * direction[j];
        }
    }
    T::lit(4.0) * acc
}

/// Bloch-space witness `S' = -cos(theta) sigma_x - sin(theta) sigma_y` on `(A, B)`.
pub fn witness_operator<T: Real>(theta: T) -> M2<T> {
    let zero = Cplx::new(T::zero(), T::zero());
    // <A|S'|B> = -e^{-i theta}
    let ab = -Cplx::from_polar(T::one(), -theta);
    [[zero, ab], [ab.conj(), zero]]
}

/// `eta = 2 Re(e^{i theta} v_A v_B^*)`.
pub fn eta_value<T: Real>(s: &BlochState<T>, theta: T) -> T {
    T::lit(2.0) * (Cplx::from_polar(T::one(), theta) * s.coherence).re
}

/// `-<u-|S'|u-|>` by explicit matrix sandwich of the spinor.
pub fn eta_from_sandwich<T: Real>(s: &BlochState<T>, theta: T) -> T {
    let u = [s.va, s.vb];
    -sandwich(&u, &witness_operator(theta), &u).re
}

fn sandwich<T: Real>(a: &C2<T>, m: &M2<T>, b: &C2<T>) -> Cplx<T> {
    let mut acc = Cplx::new(T::zero(), T::zero());
    for i in 0..2 {
        for j in 0..2 {
            acc = acc + a[i].conj() * m[i][j] * b[j];
        }
    }
    acc
}

/// Concurrence `2 |v_A| |v_B|`.
pub fn concurrence<T: Real>(s: &BlochState<T>) -> T {
    T::lit(2.0) * s.va.norm() * s.vb.norm()
}

/// Concurrence from the polar component, `sqrt(1 - nz^2)`.
pub fn concurrence_from_nz<T: Real>(nz: T) -> T {
    ((T::one() - nz) * (T::one() + nz)).max(T::zero()).sqrt()
}

/// Valence spinor in a gauge that is smooth on the hemisphere containing `n`,
/// with its Cartesian momentum derivatives.
fn smooth_valence_gauge<T: Real>(n: [T; 3], dn: &[[T; 3]; 2]) -> (C2<T>, [C2<T>; 2]) {
    let two = T::lit(2.0);
    let [nx, ny, nz] = n;
    if nz >= T::zero() {
        // w = (-(nx - i ny), 1 + nz), |w|^2 = 2 (1 + nz); regular away from the south pole.
        let norm = (two * (T::one() + nz)).sqrt();
        let w = [Cplx::new(-nx, ny), Cplx::new(T::one() + nz, T::zero())];
        let u = [w[0] / norm, w[1] / norm];
        let mut du = [[Cplx::new(T::zero(), T::zero()); 2]; 2];
        for a in 0..2 {
            let [dx, dy, dz] = dn[a];
            let dw = [Cplx::new(-dx, dy), Cplx::new(dz, T::zero())];
            let dnorm = dz / norm;
            for c in 0..2 {
                du[a][c] = dw[c] / norm - w[c] * dnorm / (norm * norm);
            }
        }
        (u, du)
    } else {
        // w = (1 - nz, -(nx + i ny)), |w|^2 = 2 (1 - nz); regular away from the north pole.
        let norm = (two * (T::one() - nz)).sqrt();
        let w = [Cplx::new(T::one() - nz, T::zero()), Cplx::new(-nx, -ny)];
        let u = [w[0] / norm, w[1] / norm];
        let mut du = [[Cplx::new(T::zero(), T::zero()); 2]; 2];
        for a in 0..2 {
            let [dx, dy, dz] = dn[a];
            let dw = [Cplx::new(-dz, T::zero()), Cplx::new(-dx, -dy)];
            let dnorm = -dz / norm;
            for c in 0..2 {
                du[a][c] = dw[c] / norm - w[c] * dnorm / (norm * norm);
            }
        }
        (u, du)
    }
}

fn project_out<T: Real>(u: &C2<T>, v: &C2<T>) -> C2<T> {
    let overlap = u[0].conj() * v[0] + u[1].conj() * v[1];
    [v[0] - u[0] * overlap, v[1] - u[1] * overlap]
}

/// Unfiltered and filtered tensors by direct insertion between conduction
/// projectors, using explicit state derivatives: `(Q, Q^(S))`.
pub fn insertion_tensors<T: Real>(
    k: [T; 2],
    p: &ModelParams<T>,
    theta: T,
) -> Result<(M2<T>, M2<T>)> {
    let frame = local_frame(k, p)?;
    let (u, du) = smooth_valence_gauge(frame.n_hat, &frame.dn);
    let perp = [project_out(&u, &du[0]), project_out(&u, &du[1])];
    let s = witness_operator(theta);
    let id = [
        [
            Cplx::new(T::one(), T::zero()),
            Cplx::new(T::zero(), T::zero()),
        ],
        [
            Cplx::new(T::zero(), T::zero()),
            Cplx::new(T::one(), T::zero()),
        ],
    ];
    let mut q = [[Cplx::new(T::zero(), T::zero()); 2]; 2];
    let mut qs = q;
    for i in 0..2 {
        for j in 0..2 {
            q[i][j] = sandwich(&perp[i], &id, &perp[j]);
            qs[i][j] = sandwich(&perp[i], &s, &perp[j]);
        }
    }
    Ok((q, qs))
}

fn quadratic<T: Real>(m: &M2<T>, v: [T; 2]) -> Cplx<T> {
    let mut acc = Cplx::new(T::zero(), T::zero());
    for i in 0..2 {
        for j in 0..2 {
            acc = acc + m[i][j] * (v[i] * v[j]);
        }
    }
    acc
}

/// Geometry of the valence band at one `(k, theta, direction)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgtSample<T> {
    pub g: [[T; 2]; 2],
    pub fxy: T,
    pub eta: T,
    /// `Q^(S)` by direct insertion.
    pub qs: M2<T>,
    /// `eta Q` from the closed forms.
    pub qs_eta: M2<T>,
    /// Concurrence.
    pub c: T,
    pub fq: T,
    pub fqs: T,
    /// `v_A v_B^*` derivative along the direction.
    pub coherence_derivative: Cplx<T>,
}

impl<T: Real> QgtSample<T> {
    /// Largest entrywise gap between the two routes to `Q^(S)`.
    pub fn proportionality_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.qs[i][j] - self.qs_eta[i][j]).norm());
            }
        }
        worst
    }
}

/// Filtered QGT / QFI at `k` for witness phase `theta`, QFI along `direction`.
pub fn filtered_qgt<T: Real>(
    k: [T; 2],
    p: &ModelParams<T>,
    theta: T,
    direction: [T; 2],
) -> Result<QgtSample<T>> {
    let frame = local_frame(k, p)?;
    let closed = qgt_from_frame(frame.n_hat, &frame.dn);
    let eta = eta_value(&frame.state, theta);
    let (_, qs) = insertion_tensors(k, p, theta)?;
    let q = closed.tensor();
    let mut qs_eta = q;
    for row in qs_eta.iter_mut() {
        for z in row.iter_mut() {
            *z = *z * eta;
        }
    }
    let half = T::lit(0.5);
    let dn_dir: Vec<T> = (0..3)
        .map(|c| direction[0] * frame.dn[0][c] + direction[1] * frame.dn[1][c])
        .collect();
    Ok(QgtSample {
        g: closed.g,
        fxy: closed.fxy,
        eta,
        qs,
        qs_eta,
        c: concurrence(&frame.state),
        fq: qfi(&closed.g, direction),
        fqs: T::lit(4.0) * quadratic(&qs, direction).re,
        coherence_derivative: Cplx::new(-dn_dir[0] * half, dn_dir[1] * half),
    })
}

/// Riemann sum `(1/2pi) sum_k F_xy(k) dA` over mesh points.
pub fn continuum_chern<T: Real>(p: &ModelParams<T>, nx: usize, ny: usize) -> Result<T> {
    let grid = Grid::new(nx, ny)?;
    let terms = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (m, n) = grid.coords(idx);
            qgt(grid.k_point(m, n), p).map(|q| q.fxy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ordered_sum(&terms) * grid.cell_area::<T>() / (T::PI() + T::PI()))
}

/// `-(1/pi) sum_k Im Q^(S)_xy(k) dA`, the continuum counterpart of `nu_S`.
pub fn filtered_chern_from_qgt<T: Real>(
    p: &ModelParams<T>,
    theta: T,
    nx: usize,
    ny: usize,
) -> Result<T> {
    let grid = Grid::new(nx, ny)?;
    let terms = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (m, n) = grid.coords(idx);
            insertion_tensors(grid.k_point(m, n), p, theta).map(|(_, qs)| qs[0][1].im)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(-ordered_sum(&terms) * grid.cell_area::<T>() / T::PI())
}

/// Momentum drawn uniformly over the Brillouin torus.
fn sample_k<T: Real, R: rand::Rng>(r: &mut R) -> [T; 2] {
    let (f1, f2) = rng::uniform_fractional::<T, _>(r);
    k_from_fractional(f1, f2)
}

fn excess<T: Real>(lhs: T, rhs: T) -> T {
    lhs - rhs - T::tol(INEQUALITY_SLACK) * (T::one() + rhs.abs())
}

/// Worst margin and violations for one inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityStat<T> {
    pub name: &'static str,
    /// `max (lhs - rhs)`; non-positive when the bound holds everywhere.
    pub worst_margin: T,
    pub violations: Vec<usize>,
}

impl<T: Real> InequalityStat<T> {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst_margin: T::neg_infinity(),
            violations: Vec::new(),
        }
    }

    fn record(&mut self, sample: usize, lhs: T, rhs: T) {
        self.worst_margin = self.worst_margin.max(lhs - rhs);
        if excess(lhs, rhs) > T::zero() {
            self.violations.push(sample);
        }
    }
}

/// One point of the `(F^Q, F^Q,(S))` scatter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint<T> {
    pub fq: T,
    pub fqs: T,
    pub k: [T; 2],
    pub theta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport<T> {
    pub seed: u64,
    pub samples: usize,
    pub theta: T,
    pub stats: Vec<InequalityStat<T>>,
    /// `|nu_S|` on the mesh and the Cauchy-Schwarz bound on it.
    pub global_lhs: T,
    pub global_rhs: T,
    pub scatter: Vec<ScatterPoint<T>>,
}

impl<T: Real> InequalityReport<T> {
    pub fn violation_count(&self) -> usize {
        let global = usize::from(excess(self.global_lhs, self.global_rhs) > T::zero());
        self.stats.iter().map(|s| s.violations.len()).sum::<usize>() + global
    }

    /// Converts the first recorded violation into an error.
    pub fn check(self) -> Result<Self> {
        if excess(self.global_lhs, self.global_rhs) > T::zero() {
            return Err(Error::ViolationFound {
                inequality: "global |nu_S| bound".into(),
                sample: 0,
                excess: (self.global_lhs - self.global_rhs).to_f64_lossy(),
            });
        }
        if let Some(stat) = self.stats.iter().find(|s| !s.violations.is_empty()) {
            return Err(Error::ViolationFound {
                inequality: stat.name.into(),
                sample: stat.violations[0],
                excess: stat.worst_margin.to_f64_lossy(),
            });
        }
        Ok(self)
    }
}

/// Samples every pointwise bound at `samples` seeded momenta and directions
/// and evaluates the global `|nu_S|` bound on an `n x n` mesh. Never fails on
/// a violation; see [`inequality_suite`] for the checked variant.
pub fn inequality_scan<T: Real>(
    p: &ModelParams<T>,
    theta: T,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport<T>> {
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let k = sample_k::<T, _>(&mut r);
            let dir = rng::unit_direction::<T, _>(&mut r);
            filtered_qgt(k, p, theta, dir).map(|s| (k, s))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stats = vec![
        InequalityStat::new("|FQS| <= C FQ"),
        InequalityStat::new("C FQ <= FQ"),
        InequalityStat::new("|eta| <= C"),
        InequalityStat::new("C <= 1"),
        InequalityStat::new("|Im QS_xy| <= (C/2)|F_xy|"),
        InequalityStat::new("|d(vA vB*)| <= sqrt(FQ)/2"),
    ];
    let mut scatter = Vec::with_capacity(samples);
    for (i, (k, s)) in rows.into_iter().enumerate() {
        let half = T::lit(0.5);
        stats[0].record(i, s.fqs.abs(), s.c * s.fq);
        stats[1].record(i, s.c * s.fq, s.fq);
        stats[2].record(i, s.eta.abs(), s.c);
        stats[3].record(i, s.c, T::one());
        stats[4].record(i, s.qs[0][1].im.abs(), half * s.c * s.fxy.abs());
        stats[5].record(
            i,
            s.coherence_derivative.norm(),
            half * s.fq.max(T::zero()).sqrt(),
        );
        scatter.push(ScatterPoint {
            fq: s.fq,
            fqs: s.fqs,
            k,
            theta,
        });
    }

    let (global_lhs, global_rhs) = global_bound(p, theta, n)?;
    Ok(InequalityReport {
        seed,
        samples,
        theta,
        stats,
        global_lhs,
        global_rhs,
        scatter,
    })
}

/// [`inequality_scan`] that fails with `ViolationFound` on any violation.
pub fn inequality_suite<T: Real>(
    p: &ModelParams<T>,
    theta: T,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport<T>> {
    inequality_scan(p, theta, n, samples, seed)?.check()
}

/// `(|nu_S|, (1/2pi) (sum |F|)^{1/2} (sum C^2 |F|)^{1/2})` on an `n x n` mesh.
pub fn global_bound<T: Real>(p: &ModelParams<T>, theta: T, n: usize) -> Result<(T, T)> {
    let mesh = build_mesh(p, n, n)?;
    let f = plaquette_curvature(&mesh)?;
    let mut graded = Vec::with_capacity(f.values().len());
    let mut abs_f = Vec::with_capacity(f.values().len());
    let mut weighted = Vec::with_capacity(f.values().len());
    for (s, &flux) in mesh.states().iter().zip(f.values()) {
        let (_, s_exp) = weight_alpha(s, theta);
        let c = concurrence(s);
        graded.push(s_exp * flux);
        abs_f.push(flux.abs());
        weighted.push(c * c * flux.abs());
    }
    let two_pi = T::PI() + T::PI();
    let nu_s = ordered_sum(&graded) / two_pi;
    let rhs = (ordered_sum(&abs_f).sqrt() * ordered_sum(&weighted).sqrt()) / two_pi;
    Ok((nu_s.abs(), rhs))
}

/// Dense Bloch-space witness `-[[0, Y], [Y^dagger, 0]]` with `Y = e^{-i theta} x y^dagger`.
pub fn multi_witness_operator<T: Real + RealField>(
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    theta: T,
) -> DMatrix<Cplx<T>> {
    let (m, n) = (x.len(), y.len());
    let ph = Cplx::from_polar(T::one(), -theta);
    let mut s = DMatrix::from_element(m + n, m + n, Cplx::new(T::zero(), T::zero()));
    for i in 0..m {
        for j in 0..n {
            let yij = ph * x[i] * y[j].conj();
            s[(i, m + j)] = -yij;
            s[(m + j, i)] = -yij.conj();
        }
    }
    s
}

fn spectral_norm<T: Real + RealField>(a: &DMatrix<Cplx<T>>) -> T {
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}

/// Per-sample multi-orbital quantities of the product embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiBoundSample<T> {
    /// `|<u|S'|u>|` and `2 ||Y|| ||a|| ||b||`.
    pub witness: (T, T),
    /// `|Im Q^(S)_xy|` and `||Y|| ||a|| ||b|| |F_xy|`.
    pub curvature: (T, T),
    /// `|F^Q,(S)|`, `4 ||P S' P|| g` and `F^Q`.
    pub fisher: (T, T, T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiBoundsReport<T> {
    pub seed: u64,
    pub samples: usize,
    pub stats: Vec<InequalityStat<T>>,
}

impl<T: Real> MultiBoundsReport<T> {
    pub fn violation_count(&self) -> usize {
        self.stats.iter().map(|s| s.violations.len()).sum()
    }
}

/// Dense multi-orbital evaluation at one momentum: the product embedding
/// `a = v_A x`, `b = v_B y` with its derivatives, and the filtered tensor
/// computed in `C^(m+n)`.
pub fn multiorbital_sample<T: Real + RealField>(
    k: [T; 2],
    p: &ModelParams<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    theta: T,
    direction: [T; 2],
) -> Result<MultiBoundSample<T>> {
    let frame = local_frame(k, p)?;
    let closed = qgt_from_frame(frame.n_hat, &frame.dn);
    let (u2, du2) = smooth_valence_gauge(frame.n_hat, &frame.dn);
    let (m, n) = (x.len(), y.len());
    let embed = |v: &C2<T>| -> NVector<Cplx<T>> {
        NVector::from_fn(
            m + n,
            |r, _| if r < m { v[0] * x[r] } else { v[1] * y[r - m] },
        )
    };
    let u = embed(&u2);
    let du = [embed(&du2[0]), embed(&du2[1])];
    let id = DMatrix::<Cplx<T>>::identity(m + n, m + n);
    let proj = id - &u * u.adjoint();
    let s = multi_witness_operator(x, y, theta);
    let compressed = &proj * &s * &proj;
    let perp = [&proj * &du[0], &proj * &du[1]];
    let qs = |i: usize, j: usize| -> Cplx<T> { (perp[i].adjoint() * &s * &perp[j])[(0, 0)] };

    let a_norm = u
        .rows(0, m)
        .iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |acc, v| acc + v);
    let b_norm = u
        .rows(m, n)
        .iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |acc, v| acc + v);
    let ab = num_traits::Float::sqrt(a_norm) * num_traits::Float::sqrt(b_norm);
    let y_norm = spectral_norm(&multi_witness_operator(x, y, theta));
    let witness_expect = (u.adjoint() * &s * &u)[(0, 0)];

    let mut qs_dir = Cplx::new(T::zero(), T::zero());
    for i in 0..2 {
        for j in 0..2 {
            qs_dir += qs(i, j) * (direction[i] * direction[j]);
        }
    }
    let fq = qfi(&closed.g, direction);
    let g_dir = fq / T::lit(4.0);
    let two = T::lit(2.0);
    Ok(MultiBoundSample {
        witness: (witness_expect.norm(), two * y_norm * ab),
        curvature: (
            num_traits::Float::abs(qs(0, 1).im),
            y_norm * ab * num_traits::Float::abs(closed.fxy),
        ),
        fisher: (
            num_traits::Float::abs(T::lit(4.0) * qs_dir.re),
            T::lit(4.0) * spectral_norm(&compressed) * g_dir,
            fq,
        ),
    })
}

/// Samples the multi-orbital witness, curvature and Fisher bounds for the
/// product embedding defined by the unit probes `(x, y)`.
pub fn multiorbital_bounds<T: Real + RealField>(
    p: &ModelParams<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    theta: T,
    samples: usize,
    seed: u64,
) -> Result<MultiBoundsReport<T>> {
    crate::multi::check_unit(x, "x")?;
    crate::multi::check_unit(y, "y")?;
    let rows = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let k = sample_k::<T, _>(&mut r);
            let dir = rng::unit_direction::<T, _>(&mut r);
            multiorbital_sample(k, p, x, y, theta, dir)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = vec![
        InequalityStat::new("|<u|S'|u>| <= 2 ||Y|| ||a|| ||b||"),
        InequalityStat::new("|Im QS_xy| <= ||Y|| ||a|| ||b|| |F_xy|"),
        InequalityStat::new("|FQS| <= 4 ||P S' P|| g"),
        InequalityStat::new("4 ||P S' P|| g <= FQ"),
    ];
    for (i, s) in rows.iter().enumerate() {
        stats[0].record(i, s.witness.0, s.witness.1);
        stats[1].record(i, s.curvature.0, s.curvature.1);
        stats[2].record(i, s.fisher.0, s.fisher.1);
        stats[3].record(i, s.fisher.1, s.fisher.2);
    }
    Ok(MultiBoundsReport {
        seed,
        samples,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dirac_point_k, DVector};
    use std::f64::consts::PI;

    fn params(mass: f64) -> ModelParams<f64> {
        ModelParams::default().with_mass(mass)
    }

    #[test]
    fn flat_band_has_no_geometry() {
        let p = ModelParams::new(0.0, 0.0, 0.0, 1.0);
        let q = qgt([0.4, -0.7], &p).unwrap();
        assert_eq!(q.g, [[0.0; 2]; 2]);
        assert_eq!(q.fxy, 0.0);
        assert_eq!(qfi(&q.g, [0.6, 0.8]), 0.0);
    }

    #[test]
    fn qfi_is_quadratic() {
        let q = qgt([0.9, 0.2], &params(0.5)).unwrap();
        let dir = [0.6, 0.8];
        let a = qfi(&q.g, dir);
        let b = qfi(&q.g, [3.0 * dir[0], 3.0 * dir[1]]);
        assert!((b - 9.0 * a).abs() < 1e-12 * b.abs());
        assert!(a >= 0.0);
    }

    #[test]
    fn qfi_grows_as_gap_closes() {
        // Fixed offset from K; the K mass is m_K = M - sqrt(3).
        let k0 = dirac_point_k::<f64>();
        let k = [k0[0] + 0.05, k0[1] + 0.02];
        let dir = [1.0, 0.0];
        let wall = 3f64.sqrt();
        let big = qfi(&qgt(k, &params(wall - 0.5)).unwrap().g, dir);
        let small = qfi(&qgt(k, &params(wall - 0.1)).unwrap().g, dir);
        assert!(small > big, "{small} {big}");
    }

    #[test]
    fn insertion_matches_closed_forms() {
        for (i, &k) in [[0.3, 0.1], [1.7, -0.4], [-2.2, 0.9], [2.41, 0.0]]
            .iter()
            .enumerate()
        {
            let p = params(0.5 * i as f64);
            let closed = qgt(k, &p).unwrap();
            let (q, _) = insertion_tensors(k, &p, 0.0).unwrap();
            let want = closed.tensor();
            for a in 0..2 {
                for b in 0..2 {
                    assert!(
                        (q[a][b] - want[a][b]).norm() < 1e-12,
                        "{k:?} {q:?} {want:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn eta_examples() {
        let s = BlochState::<f64>::from_unit_vector([0.0, 0.0, 1.0]);
        assert_eq!(eta_value(&s, 0.4), 0.0);

        let s = BlochState::<f64>::from_unit_vector([0.6, -0.8, 0.0]);
        assert!((s.va.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let theta = -crate::scalar::arg(s.va * s.vb.conj());
        assert!((eta_value(&s, theta) - 1.0).abs() < 1e-15);
        assert!((eta_from_sandwich(&s, theta) - 1.0).abs() < 1e-15);
        assert!((concurrence(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separable_point_filters_to_zero() {
        // t1 = 0 makes n = (0, 0, sign dz): separable everywhere.
        let p = ModelParams::new(0.0, 0.3, 0.7, 2.0);
        let s = filtered_qgt([0.2, 0.3], &p, 0.4, [1.0, 0.0]).unwrap();
        assert_eq!(s.eta, 0.0);
        assert_eq!(s.c, 0.0);
        for row in s.qs {
            for z in row {
                assert_eq!(z.norm(), 0.0);
            }
        }
    }

    #[test]
    fn imaginary_part_tracks_eta() {
        let p = params(0.5);
        for (k, theta) in [([0.4, 1.1], 0.3), ([-1.3, 0.2], 2.0), ([2.0, -1.0], -1.4)] {
            let s = filtered_qgt(k, &p, theta, [0.0, 1.0]).unwrap();
            assert!((s.qs[0][1].im - 0.5 * s.eta * s.fxy).abs() < 1e-12);
            assert!(s.proportionality_error() < 1e-10);
        }
    }

    #[test]
    fn concurrence_examples() {
        let n = BlochState::<f64>::from_unit_vector([0.0, 0.0, 1.0]);
        assert_eq!(concurrence(&n), 0.0);
        assert_eq!(concurrence_from_nz(1.0f64), 0.0);
        let e = BlochState::<f64>::from_unit_vector([0.0, 1.0, 0.0]);
        assert!((concurrence(&e) - 1.0).abs() < 1e-15);
        assert_eq!(concurrence_from_nz(0.0f64), 1.0);
    }

    #[test]
    fn continuum_chern_close_to_integer() {
        let n = 48;
        let c = continuum_chern(&params(0.0), n, n).unwrap();
        assert!((c + 1.0).abs() <= 5.0 / (n * n) as f64, "{c}");
    }

    #[test]
    fn zero_coherence_filtered_chern() {
        let p = ModelParams::new(0.0, 0.2, 0.9, 1.0);
        assert_eq!(filtered_chern_from_qgt(&p, 0.3, 12, 12).unwrap(), 0.0);
    }

    #[test]
    fn saturation_on_equator() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 0.0);
        let k = [2.0, 0.3];
        let d: DVector<f64> = d_vector(k, &p);
        let s = valence_state(&d).unwrap();
        assert_eq!(s.nz(), 0.0);
        let theta = -crate::scalar::arg(s.coherence);
        let sample = filtered_qgt(k, &p, theta, [0.6, -0.8]).unwrap();
        assert!(sample.fq > 0.1, "{}", sample.fq);
        assert!((sample.fqs - sample.fq).abs() < 1e-12, "{sample:?}");
    }

    #[test]
    fn small_inequality_scan_is_clean() {
        let r = inequality_suite(&params(0.5), 0.7, 24, 500, 3).unwrap();
        assert_eq!(r.violation_count(), 0);
        assert!(r.scatter.iter().all(|s| s.fqs <= s.fq + 1e-12));
        assert!(r.global_lhs <= r.global_rhs);
    }

    #[test]
    fn separable_field_bounds_trivially() {
        let p = ModelParams::new(0.0, 0.1, 0.5, 1.0);
        let (lhs, rhs) = global_bound(&p, 0.2, 8).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn multiorbital_zero_witness_gives_zero() {
        let p = params(0.5);
        let x = vec![Cplx::new(0.0, 0.0), Cplx::new(0.0, 0.0)];
        let y = vec![Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)];
        let s = multiorbital_sample([0.3, 0.8], &p, &x, &y, 0.1, [1.0, 0.0]).unwrap();
        assert_eq!(s.witness.0, 0.0);
        assert_eq!(s.curvature.0, 0.0);
        assert_eq!(s.fisher.0, 0.0);
    }

    #[test]
    fn multiorbital_scalar_case_reduces() {
        let p = params(0.5);
        let one = vec![Cplx::new(1.0, 0.0)];
        let (k, theta, dir) = ([0.3, 0.8], 0.9, [0.8, 0.6]);
        let m = multiorbital_sample(k, &p, &one, &one, theta, dir).unwrap();
        let s = filtered_qgt(k, &p, theta, dir).unwrap();
        assert!((m.fisher.0 - s.fqs.abs()).abs() < 1e-12);
        assert!((m.curvature.0 - s.qs[0][1].im.abs()).abs() < 1e-12);
        assert!((m.witness.0 - s.eta.abs()).abs() < 1e-12);
        assert!((m.fisher.2 - s.fq).abs() < 1e-12);
    }

    #[test]
    fn multiorbital_random_probes() {
        let p = params(0.5);
        let mut r = rng::stream(11, 0);
        let x = rng::unit_vector::<f64, _>(&mut r, 2);
        let y = rng::unit_vector::<f64, _>(&mut r, 2);
        let rep = multiorbital_bounds(&p, &x, &y, PI / 3.0, 1000, 5).unwrap();
        assert_eq!(rep.violation_count(), 0, "{:?}", rep.stats);
    }
}
