use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Pairs with a magnitude below this are treated as having no defined angle.
pub const ZERO_PAIR_TOLERANCE: f64 = 1e-12;

/// Oscillator phases in radians, wrapped to `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    /// Wraps every entry into `[-pi, pi)`. Rejects empty or non-finite input.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("phase vector must be non-empty".into()));
        }
        ensure_finite(&theta, "phase vector")?;
        Ok(Self(theta.into_iter().map(wrap_angle).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Flattened phase components `(x_1, y_1, ..., x_N, y_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentVector(Vec<f64>);

impl ComponentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "component vector length must be even and non-zero, got {}",
                values.len()
            )));
        }
        ensure_finite(&values, "component vector")?;
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_oscillators(&self) -> usize {
        self.0.len() / 2
    }

    /// `(x_i, y_i)` for oscillator `i` (0-based).
    pub fn pair(&self, i: usize) -> (f64, f64) {
        (self.0[2 * i], self.0[2 * i + 1])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = (theta + PI).rem_euclid(two_pi);
    if r >= two_pi {
        r -= two_pi;
    }
    r - PI
}

pub fn phases_to_components(p: &PhaseVector) -> ComponentVector {
    let values = p
        .as_slice()
        .iter()
        .flat_map(|&t| [t.cos(), t.sin()])
        .collect();
    ComponentVector(values)
}

pub fn components_to_phases(c: &ComponentVector) -> Result<PhaseVector> {
    let theta = c
        .as_slice()
        .chunks_exact(2)
        .enumerate()
        .map(|(i, xy)| {
            if xy[0].hypot(xy[1]) < ZERO_PAIR_TOLERANCE {
                Err(Error::UndefinedAngle { oscillator: i })
            } else {
                Ok(wrap_angle(xy[1].atan2(xy[0])))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseVector(theta))
}

/// Rescales each `(x_i, y_i)` pair to unit magnitude.
pub fn normalize_components(c: &ComponentVector) -> Result<ComponentVector> {
    let mut values = c.0.clone();
    normalize_pairs_in_place(&mut values)?;
    Ok(ComponentVector(values))
}

/// In-place pair normalisation on a raw slice. Used on the forecast hot path.
pub fn normalize_pairs_in_place(values: &mut [f64]) -> Result<()> {
    for (i, xy) in values.chunks_exact_mut(2).enumerate() {
        let norm = xy[0].hypot(xy[1]);
        if !norm.is_finite() {
            return Err(Error::NonFinite { what: "phase component pair" });
        }
        if norm < ZERO_PAIR_TOLERANCE {
            return Err(Error::UndefinedAngle { oscillator: i });
        }
        xy[0] /= norm;
        xy[1] /= norm;
    }
    Ok(())
}
