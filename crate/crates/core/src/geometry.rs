//! Background geometries: products Omega = [-T,T] x Sigma with Sigma a flat
//! 3-torus, optionally warped by a scalar profile a(s).
//!
//! The metric is g = ds (x) ds + gamma_s with gamma_s = a(s)^2 * Id, so every
//! slice quantity reduces to closed-form expressions in a and a'.

use crate::error::{Error, Result};

/// Scalar warp profile a(s) together with its analytic first derivative.
///
/// The derivative is supplied explicitly so the second fundamental form
/// k = -a a' Id is exact; finite differences are used only as a cross-check.
#[derive(Clone, Copy)]
pub struct WarpProfile {
    pub name: &'static str,
    pub a: fn(f64) -> f64,
    pub da: fn(f64) -> f64,
}

impl std::fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WarpProfile({})", self.name)
    }
}

impl WarpProfile {
    /// a(s) = 1, the unwarped product metric.
    pub fn flat() -> Self {
        WarpProfile { name: "flat", a: |_| 1.0, da: |_| 0.0 }
    }

    /// a(s) = e^{-s}.
    pub fn exp() -> Self {
        WarpProfile { name: "exp", a: |s| (-s).exp(), da: |s| -(-s).exp() }
    }

    /// a(s) = 1 + 0.1 s^2.
    pub fn quad01() -> Self {
        WarpProfile { name: "quad01", a: |s| 1.0 + 0.1 * s * s, da: |s| 0.2 * s }
    }

    /// Look up a named preset (the names accepted by the CLI config).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "flat" => Ok(Self::flat()),
            "exp" => Ok(Self::exp()),
            "quad01" => Ok(Self::quad01()),
            other => Err(Error::InvalidParameter(format!("unknown warp preset `{other}`"))),
        }
    }
}

/// Which family the background belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    /// gamma_s independent of s (a = 1); solves the vacuum equations with Lambda = 0.
    FlatTorusProduct,
    /// gamma_s = a(s)^2 * Id with a non-constant warp; used by the linearisation checks.
    WarpedTorusProduct,
}

/// A background manifold [-T,T] x T^3 with metric ds^2 + a(s)^2 (dx1^2 + dx2^2 + dx3^2).
#[derive(Clone, Debug)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    /// Euclidean-time half-width; the slab is [-T, T].
    pub half_width: f64,
    /// Torus side lengths (L1, L2, L3).
    pub periods: [f64; 3],
    pub warp: WarpProfile,
    /// Cosmological constant. Fixed to 0 for all shipped geometries; the
    /// D1 assembly reads it so curved extensions stay possible.
    pub lambda: f64,
}

/// Slice metric, second fundamental form and mean curvature at a fixed s.
#[derive(Clone, Debug)]
pub struct SliceData {
    pub s: f64,
    /// gamma_s = a(s)^2 * Id as a symmetric 3x3 matrix.
    pub gamma: [[f64; 3]; 3],
    /// k = -(1/2) d/ds gamma_s = -a(s) a'(s) * Id.
    pub k: [[f64; 3]; 3],
    /// trace_gamma(k) = -3 a'(s)/a(s).
    pub trace_k: f64,
}

impl GeometrySpec {
    /// Flat product geometry: warp identically 1, Lambda = 0.
    pub fn flat_torus_product(half_width: f64, periods: [f64; 3]) -> Result<Self> {
        Self::validate(half_width, periods)?;
        Ok(GeometrySpec {
            kind: GeometryKind::FlatTorusProduct,
            half_width,
            periods,
            warp: WarpProfile::flat(),
            lambda: 0.0,
        })
    }

    /// Warped product geometry for the linearisation cross-checks.
    pub fn warped_torus_product(half_width: f64, periods: [f64; 3], warp: WarpProfile) -> Result<Self> {
        Self::validate(half_width, periods)?;
        for i in 0..=100 {
            let s = -half_width + 2.0 * half_width * (i as f64) / 100.0;
            if (warp.a)(s) <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "warp profile `{}` is nonpositive at s = {s}",
                    warp.name
                )));
            }
        }
        Ok(GeometrySpec {
            kind: GeometryKind::WarpedTorusProduct,
            half_width,
            periods,
            warp,
            lambda: 0.0,
        })
    }

    fn validate(half_width: f64, periods: [f64; 3]) -> Result<()> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half-width T must be positive, got {half_width}"
            )));
        }
        if periods.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "torus periods must be positive, got {periods:?}"
            )));
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.kind == GeometryKind::FlatTorusProduct
    }

    /// Slice quantities at Euclidean time s.
    pub fn slice_data(&self, s: f64) -> Result<SliceData> {
        let t = self.half_width;
        if !(-t..=t).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [{}, {}]", -t, t)));
        }
        let a = (self.warp.a)(s);
        let da = (self.warp.da)(s);
        let mut gamma = [[0.0; 3]; 3];
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            gamma[i][i] = a * a;
            k[i][i] = -a * da;
        }
        Ok(SliceData { s, gamma, k, trace_k: -3.0 * da / a })
    }

    /// Volume of the torus slice with respect to the coordinate (flat) measure.
    pub fn torus_volume(&self) -> f64 {
        self.periods.iter().product()
    }
}
