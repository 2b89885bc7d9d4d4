//! Single-orbit entanglement-witness sectors on the FHS mesh.
//!
//! The witness sign operator only acts through its block on the
//! single-excitation sector `span{|01>, |10>}`, where it reads
//! `-[[0, e^{i theta}], [e^{-i theta}, 0]]`. For the valence spinor this
//! gives the negative-sector weight
//! `alpha(k) = 1/2 + Re(e^{i theta} v_A v_B^*)` and `<S> = 1 - 2 alpha`.
//!
//! Sector responses weight each plaquette's curvature by `alpha` (or
//! `1 - alpha`, `<S>`) evaluated at the plaquette's base corner; with that
//! convention `mu = nu+ + nu-` and `nu_S = nu+ - nu-` hold exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, chern_number, plaquette_curvature, CurvatureField, TorusMesh};
use crate::model::{analytic_chern, BlochState, ModelParams};
use crate::scalar::{arg, ordered_sum, ordered_sum_c, Cplx, Real};

/// `|z|` below which the mesh-averaged coherence has no usable phase.
pub const PHASE_FLOOR: f64 = 1e-12;

/// Minimum distance between a swept stagger and a gap-closing wall.
pub const WALL_CLEARANCE: f64 = 1e-6;

/// How the witness phase `theta` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WitnessSpec<T> {
    /// `theta = arg <v_B v_A^*>_k` from the mesh, `0` if that average vanishes.
    #[default]
    Auto,
    /// A fixed reference phase.
    Fixed(T),
}

impl<T: Real> WitnessSpec<T> {
    pub fn resolve(&self, mesh: &TorusMesh<T>) -> T {
        match *self {
            WitnessSpec::Fixed(theta) => theta,
            WitnessSpec::Auto => reference_phase(mesh).unwrap_or_else(|_| T::zero()),
        }
    }
}

/// `theta = arg z` with `z` the mesh average of `v_B v_A^*`.
pub fn reference_phase<T: Real>(mesh: &TorusMesh<T>) -> Result<T> {
    let terms: Vec<Cplx<T>> = mesh.states().iter().map(|s| s.coherence.conj()).collect();
    let z = ordered_sum_c(&terms) / T::lit(terms.len() as f64);
    if !(z.norm() >= T::lit(PHASE_FLOOR)) {
        return Err(Error::DegeneratePhase {
            modulus: z.norm().to_f64_lossy(),
        });
    }
    Ok(arg(z))
}

/// Negative-sector weight `alpha` and witness expectation `<S> = 1 - 2 alpha`.
pub fn weight_alpha<T: Real>(s: &BlochState<T>, theta: T) -> (T, T) {
    let alpha = T::lit(0.5) + (Cplx::from_polar(T::one(), theta) * s.coherence).re;
    (alpha, T::one() - alpha - alpha)
}

/// Graded response `nu(theta) = -2 Re(e^{i theta} J)` implied by a coherence `J`.
pub fn graded_from_coherence<T: Real>(jf: Cplx<T>, theta: T) -> T {
    -T::lit(2.0) * (Cplx::from_polar(T::one(), theta) * jf).re
}

/// Sector decomposition of the Chern number for one witness phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorReport<T> {
    pub theta: T,
    pub mu: i32,
    pub nu_minus: T,
    pub nu_plus: T,
    pub nu_s: T,
    /// Curvature-weighted coherence `J_F^{AB} = (1/2pi) sum F v_A v_B^*`.
    pub jf: Cplx<T>,
    /// `|mu - (nu+ + nu-)|`.
    pub r_mu: T,
    /// `|nu_S - (nu+ - nu-)|`.
    pub r_nu: T,
    /// Largest deviation of `nu-` and `nu_S` from their `J_F` closed forms.
    pub r_jf: T,
}

impl<T: Real> SectorReport<T> {
    pub fn max_residual(&self) -> T {
        self.r_mu.max(self.r_nu)
    }
}

/// Sector responses `nu-`, `nu+`, `nu_S` and `J_F^{AB}` on a mesh.
pub fn sector_responses<T: Real>(
    mesh: &TorusMesh<T>,
    f: &CurvatureField<T>,
    theta: T,
) -> Result<SectorReport<T>> {
    if mesh.grid() != f.grid() {
        return Err(Error::DimensionMismatch(
            "curvature field and mesh differ in size".into(),
        ));
    }
    let mu = chern_number(f)?;
    let two_pi = T::PI() + T::PI();
    let n = mesh.states().len();
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut graded = Vec::with_capacity(n);
    let mut coh = Vec::with_capacity(n);
    for (s, &flux) in mesh.states().iter().zip(f.values()) {
        let (alpha, s_exp) = weight_alpha(s, theta);
        minus.push(alpha * flux);
        plus.push((T::one() - alpha) * flux);
        graded.push(s_exp * flux);
        coh.push(s.coherence * flux);
    }
    let nu_minus = ordered_sum(&minus) / two_pi;
    let nu_plus = ordered_sum(&plus) / two_pi;
    let nu_s = ordered_sum(&graded) / two_pi;
    let jf = ordered_sum_c(&coh) / two_pi;

    let mu_t = T::lit(mu as f64);
    let rot = (Cplx::from_polar(T::one(), theta) * jf).re;
    let r_mu = (mu_t - (nu_plus + nu_minus)).abs();
    let r_nu = (nu_s - (nu_plus - nu_minus)).abs();
    let r_jf = (nu_minus - (mu_t / T::lit(2.0) + rot))
        .abs()
        .max((nu_s + rot + rot).abs());
    Ok(SectorReport {
        theta,
        mu,
        nu_minus,
        nu_plus,
        nu_s,
        jf,
        r_mu,
        r_nu,
        r_jf,
    })
}

/// Two-setting reconstruction
/// `J = (nu-(0) - mu/2) - i (nu-(pi/2) - mu/2)`.
pub fn tomography_reconstruct<T: Real>(nu0: T, nu90: T, mu: i32) -> Cplx<T> {
    let half_mu = T::lit(mu as f64) / T::lit(2.0);
    Cplx::new(nu0 - half_mu, -(nu90 - half_mu))
}

/// One θ sample of a tomography scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyPoint<T> {
    pub theta: T,
    pub nu_direct: T,
    pub nu_reconstructed: T,
}

/// Compares direct `nu_S(theta)` against the two-setting reconstruction on
/// `points` equally spaced phases in `[-pi, pi)`.
pub fn tomography_scan<T: Real>(
    mesh: &TorusMesh<T>,
    f: &CurvatureField<T>,
    points: usize,
) -> Result<(Cplx<T>, Vec<TomographyPoint<T>>)> {
    let at0 = sector_responses(mesh, f, T::zero())?;
    let at90 = sector_responses(mesh, f, T::FRAC_PI_2())?;
    let jf = tomography_reconstruct(at0.nu_minus, at90.nu_minus, at0.mu);
    let two_pi = T::PI() + T::PI();
    let scan = (0..points)
        .map(|j| {
            let theta = -T::PI() + two_pi * T::lit(j as f64) / T::lit(points as f64);
            let direct = sector_responses(mesh, f, theta)?;
            Ok(TomographyPoint {
                theta,
                nu_direct: direct.nu_s,
                nu_reconstructed: graded_from_coherence(jf, theta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((jf, scan))
}

/// Quantized jump of `mu` between two consecutive sweep points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord<T> {
    /// Analytic critical stagger bracketed by the pair.
    pub wall_location: T,
    pub delta_mu: i32,
    pub delta_nu_s: T,
    /// `(mu, nu_S)` before and after the wall: `[mu_a, nu_s_a, mu_b, nu_s_b]`.
    pub side_values: [T; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub mass: T,
    pub report: SectorReport<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub points: Vec<SweepPoint<T>>,
    pub jumps: Vec<JumpRecord<T>>,
}

impl<T: Real> SweepResult<T> {
    pub fn total_delta_mu(&self) -> i32 {
        self.jumps.iter().map(|j| j.delta_mu).sum()
    }
}

/// `m_values` equally spaced points from `m_min` to `m_max` inclusive.
pub fn mass_grid<T: Real>(m_min: T, m_max: T, steps: usize) -> Vec<T> {
    if steps < 2 {
        return vec![m_min];
    }
    let span = m_max - m_min;
    (0..steps)
        .map(|i| m_min + span * T::lit(i as f64) / T::lit((steps - 1) as f64))
        .collect()
}

/// Sector reports along a stagger sweep plus a [`JumpRecord`] wherever
/// consecutive Chern numbers differ.
pub fn sweep_mass<T: Real>(
    p_base: &ModelParams<T>,
    masses: &[T],
    nx: usize,
    ny: usize,
    policy: WitnessSpec<T>,
) -> Result<SweepResult<T>> {
    let walls = p_base.walls();
    let clearance = T::lit(WALL_CLEARANCE);
    for &mass in masses {
        let p = p_base.with_mass(mass);
        analytic_chern(&p)?;
        if walls.iter().any(|&w| (mass - w).abs() < clearance) {
            let (mk, mkp) = crate::model::dirac_masses(&p);
            return Err(Error::OnWall {
                m_k: mk.to_f64_lossy(),
                m_kp: mkp.to_f64_lossy(),
            });
        }
    }

    let points = masses
        .par_iter()
        .map(|&mass| {
            let mesh = build_mesh(&p_base.with_mass(mass), nx, ny)?;
            let f = plaquette_curvature(&mesh)?;
            let theta = policy.resolve(&mesh);
            Ok(SweepPoint {
                mass,
                report: sector_responses(&mesh, &f, theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let jumps = points
        .windows(2)
        .filter(|w| w[0].report.mu != w[1].report.mu)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (lo, hi) = if a.mass <= b.mass {
                (a.mass, b.mass)
            } else {
                (b.mass, a.mass)
            };
            let wall_location = walls
                .iter()
                .copied()
                .find(|&x| x > lo && x < hi)
                .unwrap_or((lo + hi) / T::lit(2.0));
            JumpRecord {
                wall_location,
                delta_mu: b.report.mu - a.report.mu,
                delta_nu_s: b.report.nu_s - a.report.nu_s,
                side_values: [
                    T::lit(a.report.mu as f64),
                    a.report.nu_s,
                    T::lit(b.report.mu as f64),
                    b.report.nu_s,
                ],
            }
        })
        .collect();
    Ok(SweepResult { points, jumps })
}
