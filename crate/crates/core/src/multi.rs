//! Multi-orbital embedding of the valence band.
//!
//! The two sublattices are promoted to orbital spaces `C^m` and `C^n`; a
//! product embedding places `a = v_A x`, `b = v_B y`. The curvature-weighted
//! coherence becomes the matrix `J_F = (1/2pi) sum F a b^dagger`, probed by
//! rank-one witnesses with off-diagonal block `Y = e^{-i theta} x y^dagger`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, RealField};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{chern_number, CurvatureField, TorusMesh};
use crate::model::BlochState;
use crate::scalar::{ordered_sum, ordered_sum_c, Cplx, Real};

/// Tolerance on probe normalization and unitarity.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Tolerance on singular values of a partial isometry.
pub const ISOMETRY_TOLERANCE: f64 = 1e-10;

fn norm_sqr<T: Real>(v: &[Cplx<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

fn inner<T: Real>(u: &[Cplx<T>], v: &[Cplx<T>]) -> Cplx<T> {
    u.iter()
        .zip(v)
        .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| {
            acc + a.conj() * b
        })
}

/// Fails with `NonUnitProbe` unless `| ||v|| - 1 | <= 1e-12`.
pub fn check_unit<T: Real>(v: &[Cplx<T>], which: &'static str) -> Result<()> {
    let norm = norm_sqr(v).sqrt();
    if v.is_empty() || (norm - T::one()).abs() > T::tol(UNIT_TOLERANCE) {
        return Err(Error::NonUnitProbe {
            which,
            norm: norm.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Valence state split over the two orbital spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiState<T> {
    pub a: Vec<Cplx<T>>,
    pub b: Vec<Cplx<T>>,
}

impl<T: Real> MultiState<T> {
    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.a) + norm_sqr(&self.b)
    }

    /// `||a|| ||b||`.
    pub fn negativity_factor(&self) -> T {
        (norm_sqr(&self.a) * norm_sqr(&self.b)).sqrt()
    }

    /// Witness expectation `<S> = -2 Re(e^{i theta} (x^dagger a)(b^dagger y))`
    /// for the rank-one probe `(x, y, theta)`.
    pub fn witness_expectation(&self, x: &[Cplx<T>], y: &[Cplx<T>], theta: T) -> T {
        let z = inner(x, &self.a) * inner(&self.b, y);
        -T::lit(2.0) * (Cplx::from_polar(T::one(), theta) * z).re
    }
}

/// Product embedding `a = v_A x`, `b = v_B y`.
pub fn embed_state<T: Real>(
    s: &BlochState<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
) -> Result<MultiState<T>> {
    check_unit(x, "x")?;
    check_unit(y, "y")?;
    Ok(MultiState {
        a: x.iter().map(|&xi| s.va * xi).collect(),
        b: y.iter().map(|&yj| s.vb * yj).collect(),
    })
}

/// Matrix-valued curvature-weighted coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix<T: Real> {
    pub jf: DMatrix<Cplx<T>>,
}

impl<T: Real> CoherenceMatrix<T> {
    pub fn shape(&self) -> (usize, usize) {
        self.jf.shape()
    }

    /// `x^dagger J_F y`.
    pub fn probe(&self, x: &[Cplx<T>], y: &[Cplx<T>]) -> Result<Cplx<T>> {
        let (m, n) = self.shape();
        if x.len() != m || y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "probe ({}, {}) against J_F of shape ({m}, {n})",
                x.len(),
                y.len()
            )));
        }
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..m {
            for j in 0..n {
                acc = acc + x[i].conj() * self.jf[(i, j)] * y[j];
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.jf
            .iter()
            .zip(other.jf.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }
}

/// Embeds every mesh state.
pub fn embed_mesh<T: Real>(
    mesh: &TorusMesh<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
) -> Result<Vec<MultiState<T>>> {
    check_unit(x, "x")?;
    check_unit(y, "y")?;
    mesh.states().iter().map(|s| embed_state(s, x, y)).collect()
}

/// `J_F = (1/2pi) sum F a b^dagger` over the embedded states, one entry at a
/// time in row-major plaquette order.
pub fn coherence_from_states<T: Real>(
    states: &[MultiState<T>],
    f: &CurvatureField<T>,
) -> Result<CoherenceMatrix<T>> {
    if states.len() != f.values().len() {
        return Err(Error::DimensionMismatch(
            "state field and curvature field differ in size".into(),
        ));
    }
    let (m, n) = states.first().map_or((0, 0), |s| (s.a.len(), s.b.len()));
    if states.iter().any(|s| s.a.len() != m || s.b.len() != n) {
        return Err(Error::DimensionMismatch(
            "embedded states differ in orbital dimensions".into(),
        ));
    }
    let two_pi = T::PI() + T::PI();
    let entries: Vec<Cplx<T>> = (0..m * n)
        .into_par_iter()
        .map(|e| {
            let (i, j) = (e / n, e % n);
            let terms: Vec<Cplx<T>> = states
                .iter()
                .zip(f.values())
                .map(|(s, &flux)| s.a[i] * s.b[j].conj() * flux)
                .collect();
            ordered_sum_c(&terms) / two_pi
        })
        .collect();
    Ok(CoherenceMatrix {
        jf: DMatrix::from_row_slice(m, n, &entries),
    })
}

/// `J_F` for the product embedding `(x, y)` of the mesh states.
pub fn coherence_matrix<T: Real>(
    mesh: &TorusMesh<T>,
    f: &CurvatureField<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
) -> Result<CoherenceMatrix<T>> {
    if mesh.grid() != f.grid() {
        return Err(Error::DimensionMismatch(
            "curvature field and mesh differ in size".into(),
        ));
    }
    coherence_from_states(&embed_mesh(mesh, x, y)?, f)
}

/// `(nu-, nu)` for the probe `(x, y, theta)`:
/// `nu- = mu/2 + Re(e^{i theta} x^dagger J_F y)`, `nu = -2 Re(e^{i theta} x^dagger J_F y)`.
pub fn sector_response_multi<T: Real>(
    jf: &CoherenceMatrix<T>,
    mu: i32,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    theta: T,
) -> Result<(T, T)> {
    check_unit(x, "x")?;
    check_unit(y, "y")?;
    let rot = (Cplx::from_polar(T::one(), theta) * jf.probe(x, y)?).re;
    Ok((T::lit(mu as f64) / T::lit(2.0) + rot, -(rot + rot)))
}

/// `nu-` for the probe evaluated directly on the lattice as
/// `(1/2pi) sum (1 - <S>)/2 F` over embedded states.
pub fn lattice_sector_response_multi<T: Real>(
    states: &[MultiState<T>],
    f: &CurvatureField<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    theta: T,
) -> Result<T> {
    check_unit(x, "x")?;
    check_unit(y, "y")?;
    if states.len() != f.values().len() {
        return Err(Error::DimensionMismatch(
            "state field and curvature field differ in size".into(),
        ));
    }
    let half = T::lit(0.5);
    let terms: Vec<T> = states
        .iter()
        .zip(f.values())
        .map(|(s, &flux)| (T::one() - s.witness_expectation(x, y, theta)) * half * flux)
        .collect();
    Ok(ordered_sum(&terms) / (T::PI() + T::PI()))
}

/// The two witness phases of basis-probe tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbePhase {
    /// `theta = 0`.
    Zero,
    /// `theta = pi/2`.
    Quarter,
}

impl ProbePhase {
    pub const BOTH: [ProbePhase; 2] = [ProbePhase::Zero, ProbePhase::Quarter];

    pub fn theta<T: Real>(self) -> T {
        match self {
            ProbePhase::Zero => T::zero(),
            ProbePhase::Quarter => T::FRAC_PI_2(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProbePhase::Zero => "0",
            ProbePhase::Quarter => "pi/2",
        }
    }
}

/// Basis vector `e_i` of `C^dim`.
pub fn basis_vector<T: Real>(dim: usize, i: usize) -> Vec<Cplx<T>> {
    (0..dim)
        .map(|r| Cplx::new(if r == i { T::one() } else { T::zero() }, T::zero()))
        .collect()
}

/// Rebuilds `J_F` from basis-probe responses:
/// `(J_F)_ij = (nu-(e_i, f_j; 0) - mu/2) - i (nu-(e_i, f_j; pi/2) - mu/2)`.
pub fn reconstruct_jf<T: Real>(
    responses: &BTreeMap<(usize, usize, ProbePhase), T>,
    m: usize,
    n: usize,
    mu: i32,
) -> Result<CoherenceMatrix<T>> {
    let half_mu = T::lit(mu as f64) / T::lit(2.0);
    let mut jf = DMatrix::from_element(m, n, Cplx::new(T::zero(), T::zero()));
    for i in 0..m {
        for j in 0..n {
            let get = |phase: ProbePhase| {
                responses
                    .get(&(i, j, phase))
                    .copied()
                    .ok_or(Error::MissingProbe {
                        i,
                        j,
                        phase: phase.label(),
                    })
            };
            let nu0 = get(ProbePhase::Zero)?;
            let nu90 = get(ProbePhase::Quarter)?;
            jf[(i, j)] = Cplx::new(nu0 - half_mu, -(nu90 - half_mu));
        }
    }
    Ok(CoherenceMatrix { jf })
}

/// Basis-probe responses measured on the lattice for every `(i, j)` and both phases.
pub fn basis_probe_responses<T: Real>(
    states: &[MultiState<T>],
    f: &CurvatureField<T>,
) -> Result<BTreeMap<(usize, usize, ProbePhase), T>> {
    let (m, n) = states.first().map_or((0, 0), |s| (s.a.len(), s.b.len()));
    let mut out = BTreeMap::new();
    for i in 0..m {
        let e = basis_vector::<T>(m, i);
        for j in 0..n {
            let fj = basis_vector::<T>(n, j);
            for phase in ProbePhase::BOTH {
                let nu = lattice_sector_response_multi(states, f, &e, &fj, phase.theta())?;
                out.insert((i, j, phase), nu);
            }
        }
    }
    Ok(out)
}

fn unitarity_deviation<T: Real + RealField>(u: &DMatrix<Cplx<T>>) -> T {
    let (r, c) = u.shape();
    if r != c {
        return T::infinity();
    }
    let prod = u.adjoint() * u;
    let mut worst = T::zero();
    for i in 0..r {
        for j in 0..c {
            let want = if i == j { T::one() } else { T::zero() };
            worst = <T as num_traits::Float>::max(
                worst,
                (prod[(i, j)] - Cplx::new(want, T::zero())).norm(),
            );
        }
    }
    worst
}

fn apply<T: Real + RealField>(u: &DMatrix<Cplx<T>>, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
    (0..u.nrows())
        .map(|i| {
            v.iter()
                .enumerate()
                .fold(Cplx::new(T::zero(), T::zero()), |acc, (j, z)| {
                    acc + u[(i, j)] * z
                })
        })
        .collect()
}

/// `|(U_A x)^dagger (U_A J_F U_B^dagger)(U_B y) - x^dagger J_F y|`.
pub fn unitary_invariance_check<T: Real + RealField>(
    jf: &CoherenceMatrix<T>,
    x: &[Cplx<T>],
    y: &[Cplx<T>],
    u_a: &DMatrix<Cplx<T>>,
    u_b: &DMatrix<Cplx<T>>,
) -> Result<T> {
    let tol = T::tol(UNIT_TOLERANCE);
    for (which, u) in [("U_A", u_a), ("U_B", u_b)] {
        let dev = unitarity_deviation(u);
        if !(dev <= tol) {
            return Err(Error::NonUnitary {
                which,
                deviation: dev.to_f64_lossy(),
            });
        }
    }
    let (m, n) = jf.shape();
    if u_a.nrows() != m || u_b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "unitaries of size ({}, {}) against J_F of shape ({m}, {n})",
            u_a.nrows(),
            u_b.nrows()
        )));
    }
    let rotated = CoherenceMatrix {
        jf: u_a * &jf.jf * u_b.adjoint(),
    };
    let before = jf.probe(x, y)?;
    let after = rotated.probe(&apply(u_a, x), &apply(u_b, y))?;
    Ok((after - before).norm())
}

/// Dense rank-one block `Y = e^{-i theta} x y^dagger`.
pub fn probe_block<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>], theta: T) -> DMatrix<Cplx<T>> {
    let ph = Cplx::from_polar(T::one(), -theta);
    DMatrix::from_fn(x.len(), y.len(), |i, j| ph * x[i] * y[j].conj())
}

/// Multiplicities of the `+1`, `-1`, `0` eigenvalues of the restricted sign operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeviType {
    pub r_plus: usize,
    pub r_minus: usize,
    pub r_zero: usize,
}

impl LeviType {
    pub fn total(&self) -> usize {
        self.r_plus + self.r_minus + self.r_zero
    }
}

/// Levi type of the sign operator with off-diagonal block `Y` (`m x n`).
pub fn levi_type<T: Real + RealField>(y: &DMatrix<Cplx<T>>) -> Result<LeviType> {
    let (m, n) = y.shape();
    let tol = T::tol(ISOMETRY_TOLERANCE);
    let mut rank = 0;
    if m > 0 && n > 0 {
        for s in y.clone().singular_values().iter().copied() {
            if <T as num_traits::Float>::abs(s - T::one()) <= tol {
                rank += 1;
            } else if s > tol {
                return Err(Error::NotPartialIsometry {
                    value: s.to_f64_lossy(),
                });
            }
        }
    }
    Ok(LeviType {
        r_plus: rank,
        r_minus: rank,
        r_zero: m + n - 2 * rank,
    })
}

/// Weight-coweight pairing `sum lambda+ - sum lambda-`.
pub fn hecke_pairing(lambda_plus: &[i64], lambda_minus: &[i64]) -> i64 {
    lambda_plus.iter().sum::<i64>() - lambda_minus.iter().sum::<i64>()
}

/// Largest gap between the lattice `J_F` and its basis-probe reconstruction.
pub fn reconstruction_error<T: Real>(
    states: &[MultiState<T>],
    f: &CurvatureField<T>,
) -> Result<(CoherenceMatrix<T>, CoherenceMatrix<T>, T)> {
    let direct = coherence_from_states(states, f)?;
    let (m, n) = direct.shape();
    let mu = chern_number(f)?;
    let rebuilt = reconstruct_jf(&basis_probe_responses(states, f)?, m, n, mu)?;
    let err = direct.max_abs_diff(&rebuilt);
    Ok((direct, rebuilt, err))
}
