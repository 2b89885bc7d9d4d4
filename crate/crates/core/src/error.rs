use thiserror::Error;

/// Failure modes of the lattice and geometry routines.
///
/// Each variant names the numerical contract that could not be met. The CLI
/// maps these onto process exit codes through [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("GaplessPoint: |d(k)| = {norm:e} below gap floor {floor:e}")]
    GaplessPoint { norm: f64, floor: f64 },

    #[error("GaplessMesh: mesh point ({m}, {n}) is gapless (|d| = {norm:e})")]
    GaplessMesh { m: usize, n: usize, norm: f64 },

    #[error("OnWall: Dirac masses (m_K = {m_k:e}, m_K' = {m_kp:e}) include a zero; the Chern number is undefined")]
    OnWall { m_k: f64, m_kp: f64 },

    #[error("DegenerateOverlap: link overlap modulus {modulus:e} below floor {floor:e}")]
    DegenerateOverlap { modulus: f64, floor: f64 },

    #[error(
        "NonIntegerTotal: total flux / 2pi = {total} deviates from an integer by {deviation:e}"
    )]
    NonIntegerTotal { total: f64, deviation: f64 },

    #[error("NonAdmissible: plaquette ({m}, {n}) has |F| = {flux} at the branch cut")]
    NonAdmissible { m: usize, n: usize, flux: f64 },

    #[error("DegeneratePhase: |z| = {modulus:e} too small to define a reference phase")]
    DegeneratePhase { modulus: f64 },

    #[error("NonUnitProbe: {which} has norm {norm}")]
    NonUnitProbe { which: &'static str, norm: f64 },

    #[error("NonUnitary: {which} deviates from unitarity by {deviation:e}")]
    NonUnitary { which: &'static str, deviation: f64 },

    #[error("MissingProbe: no response for (i = {i}, j = {j}, {phase})")]
    MissingProbe {
        i: usize,
        j: usize,
        phase: &'static str,
    },

    #[error("NotPartialIsometry: singular value {value} is neither 0 nor 1")]
    NotPartialIsometry { value: f64 },

    #[error("ViolationFound: {inequality} violated by {excess:e} at sample {sample}")]
    ViolationFound {
        inequality: String,
        sample: usize,
        excess: f64,
    },

    #[error("InvalidMesh: {nx}x{ny} (both sides must be >= {min})")]
    InvalidMesh { nx: usize, ny: usize, min: usize },

    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input shape or parameters.
    Validation,
    /// A numerical contract (integrality, admissibility, an inequality) failed.
    Numerical,
    /// The requested point lies on the gap-closing stratum.
    Gapless,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::GaplessPoint { .. } | Error::GaplessMesh { .. } | Error::OnWall { .. } => {
                ErrorClass::Gapless
            }
            Error::DegenerateOverlap { .. }
            | Error::NonIntegerTotal { .. }
            | Error::NonAdmissible { .. }
            | Error::DegeneratePhase { .. }
            | Error::NotPartialIsometry { .. }
            | Error::ViolationFound { .. } => ErrorClass::Numerical,
            Error::NonUnitProbe { .. }
            | Error::NonUnitary { .. }
            | Error::MissingProbe { .. }
            | Error::InvalidMesh { .. }
            | Error::DimensionMismatch(_) => ErrorClass::Validation,
        }
    }

    /// Variant name, as printed on stderr by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::GaplessPoint { .. } => "GaplessPoint",
            Error::GaplessMesh { .. } => "GaplessMesh",
            Error::OnWall { .. } => "OnWall",
            Error::DegenerateOverlap { .. } => "DegenerateOverlap",
            Error::NonIntegerTotal { .. } => "NonIntegerTotal",
            Error::NonAdmissible { .. } => "NonAdmissible",
            Error::DegeneratePhase { .. } => "DegeneratePhase",
            Error::NonUnitProbe { .. } => "NonUnitProbe",
            Error::NonUnitary { .. } => "NonUnitary",
            Error::MissingProbe { .. } => "MissingProbe",
            Error::NotPartialIsometry { .. } => "NotPartialIsometry",
            Error::ViolationFound { .. } => "ViolationFound",
            Error::InvalidMesh { .. } => "InvalidMesh",
            Error::DimensionMismatch(_) => "DimensionMismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
