use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TerrainError;

pub const PARAM_NAMES: [&str; 6] =
    ["step_height", "step_depth", "roughness", "correlation_length", "friction", "slope"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StairParams {
    /// Riser height (m).
    pub step_height: f64,
    /// Tread depth (m).
    pub step_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorParams {
    /// Peak roughness amplitude (m).
    pub roughness: f64,
    /// Value-noise lattice spacing (m).
    pub correlation_length: f64,
    pub friction: f64,
}

/// Parameters of one terrain configuration (two to three per terrain type).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainParams {
    pub stair: StairParams,
    pub floor: FloorParams,
    /// Global tilt along +x (rad).
    pub slope: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            stair: StairParams { step_height: 0.12, step_depth: 0.25 },
            floor: FloorParams { roughness: 0.02, correlation_length: 0.5, friction: 0.8 },
            slope: 0.0,
        }
    }
}

impl TerrainParams {
    pub fn flat() -> Self {
        TerrainParams {
            stair: StairParams { step_height: 0.0, step_depth: 0.25 },
            floor: FloorParams { roughness: 0.0, correlation_length: 1.0, friction: 0.8 },
            slope: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.stair.step_height,
            self.stair.step_depth,
            self.floor.roughness,
            self.floor.correlation_length,
            self.floor.friction,
            self.slope,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        TerrainParams {
            stair: StairParams { step_height: v[0], step_depth: v[1] },
            floor: FloorParams { roughness: v[2], correlation_length: v[3], friction: v[4] },
            slope: v[5],
        }
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        let v = self.to_array();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(TerrainError::InvalidParams("non-finite value".into()));
        }
        if v[..4].iter().any(|&x| x < 0.0) {
            return Err(TerrainError::InvalidParams("negative length".into()));
        }
        if self.stair.step_depth <= 0.0 {
            return Err(TerrainError::InvalidParams("step_depth must be positive".into()));
        }
        if !(self.floor.friction > 0.0 && self.floor.friction <= 2.0) {
            return Err(TerrainError::InvalidParams(format!("friction {} outside (0, 2]", self.floor.friction)));
        }
        Ok(())
    }
}

/// Closed interval bounds per terrain parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpace {
    pub step_height: [f64; 2],
    pub step_depth: [f64; 2],
    pub roughness: [f64; 2],
    pub correlation_length: [f64; 2],
    pub friction: [f64; 2],
    pub slope: [f64; 2],
}

impl Default for ParamSpace {
    fn default() -> Self {
        ParamSpace {
            step_height: [0.02, 0.30],
            step_depth: [0.20, 0.40],
            roughness: [0.0, 0.10],
            correlation_length: [0.2, 1.0],
            friction: [0.3, 1.2],
            slope: [0.0, 0.4],
        }
    }
}

impl ParamSpace {
    pub fn point(p: &TerrainParams) -> Self {
        let v = p.to_array();
        ParamSpace::from_arrays(v, v)
    }

    pub fn from_arrays(lo: [f64; 6], hi: [f64; 6]) -> Self {
        let b = |i: usize| [lo[i], hi[i]];
        ParamSpace {
            step_height: b(0),
            step_depth: b(1),
            roughness: b(2),
            correlation_length: b(3),
            friction: b(4),
            slope: b(5),
        }
    }

    pub fn bounds(&self) -> [[f64; 2]; 6] {
        [self.step_height, self.step_depth, self.roughness, self.correlation_length, self.friction, self.slope]
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        for (name, [lo, hi]) in PARAM_NAMES.iter().zip(self.bounds()) {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(TerrainError::InvalidParams(format!("{name}: non-finite bound")));
            }
            if lo > hi {
                return Err(TerrainError::EmptySpace(format!("{name}: [{lo}, {hi}]")));
            }
        }
        let b = self.bounds();
        TerrainParams::from_array(b.map(|x| x[0])).validate()?;
        TerrainParams::from_array(b.map(|x| x[1])).validate()
    }

    pub fn clip(&self, v: [f64; 6]) -> [f64; 6] {
        let b = self.bounds();
        std::array::from_fn(|i| v[i].clamp(b[i][0], b[i][1]))
    }

    pub fn contains(&self, p: &TerrainParams) -> bool {
        let b = self.bounds();
        p.to_array().iter().zip(b).all(|(x, [lo, hi])| (lo..=hi).contains(x))
    }
}

/// Draw each parameter independently and uniformly within its bounds.
pub fn sample_terrain_params<R: Rng + ?Sized>(space: &ParamSpace, rng: &mut R) -> Result<TerrainParams, TerrainError> {
    space.validate()?;
    let v = space.bounds().map(|[lo, hi]| if lo == hi { lo } else { rng.random_range(lo..=hi) });
    Ok(TerrainParams::from_array(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn degenerate_bounds_return_the_point() {
        let p = TerrainParams::default();
        let mut rng = seed::rng(1);
        assert_eq!(sample_terrain_params(&ParamSpace::point(&p), &mut rng).unwrap(), p);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let s = ParamSpace::default();
        let a = sample_terrain_params(&s, &mut seed::rng(5)).unwrap();
        let b = sample_terrain_params(&s, &mut seed::rng(5)).unwrap();
        assert_eq!(a, b);
        assert!(s.contains(&a));
    }

    #[test]
    fn inverted_bounds_are_empty() {
        let mut s = ParamSpace::default();
        s.slope = [0.3, 0.1];
        assert!(matches!(sample_terrain_params(&s, &mut seed::rng(0)), Err(TerrainError::EmptySpace(_))));
        let mut s = ParamSpace::default();
        s.friction = [0.0, 1.0];
        assert!(matches!(s.validate(), Err(TerrainError::InvalidParams(_))));
    }

    /// Kolmogorov-Smirnov test of each marginal against its uniform law.
    #[test]
    fn marginals_pass_ks_test() {
        let space = ParamSpace::default();
        let n = 10_000;
        let mut rng = seed::rng(2024);
        let samples: Vec<[f64; 6]> =
            (0..n).map(|_| sample_terrain_params(&space, &mut rng).unwrap().to_array()).collect();
        // Critical value at alpha = 0.01 for large n: 1.628 / sqrt(n).
        let critical = 1.628 / (n as f64).sqrt();
        for (i, [lo, hi]) in space.bounds().into_iter().enumerate() {
            let mut xs: Vec<f64> = samples.iter().map(|s| (s[i] - lo) / (hi - lo)).collect();
            xs.sort_by(f64::total_cmp);
            let d = xs
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let above = (k + 1) as f64 / n as f64 - x;
                    let below = x - k as f64 / n as f64;
                    above.max(below)
                })
                .fold(0.0, f64::max);
            assert!(d < critical, "{}: D = {d}", PARAM_NAMES[i]);
        }
    }
}
