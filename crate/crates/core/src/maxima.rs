//! Local maxima detection along 1D spine intensity profiles.
//!
//! A sample is a maximum when it is strictly greater than the nearest
//! differing neighbor on each side; plateaus report their center index
//! (rounding down). Boundary samples never qualify — a peak touching the
//! profile ends is a truncation artifact, not a detection.

use serde::{Deserialize, Serialize};

/// Indices and values of detected maxima, in increasing index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaximaResult {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl MaximaResult {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

/// Detection thresholds.
///
/// The effective prominence cutoff for a profile is
/// `max(min_prominence, noise_floor * profile_max)`: `min_prominence` is an
/// absolute intensity, `noise_floor` a fraction of the spine's own maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximaParams {
    pub min_prominence: f64,
    pub noise_floor: f64,
}

impl Default for MaximaParams {
    fn default() -> Self {
        Self { min_prominence: 0.0, noise_floor: 0.0 }
    }
}

impl MaximaParams {
    pub fn threshold(&self, profile: &[f64]) -> f64 {
        let peak = profile.iter().cloned().fold(0.0f64, f64::max);
        self.min_prominence.max(self.noise_floor * peak)
    }
}

/// Find all interior local maxima with topographic prominence of at least
/// `min_prominence`. Profiles shorter than 3 samples have none.
pub fn find_local_maxima(profile: &[f64], min_prominence: f64) -> MaximaResult {
    let n = profile.len();
    let mut result = MaximaResult::default();
    if n < 3 {
        return result;
    }
    let mut i = 0;
    while i < n {
        // Extend the plateau of equal values starting at i.
        let mut j = i;
        while j + 1 < n && profile[j + 1] == profile[i] {
            j += 1;
        }
        if i > 0 && j + 1 < n && profile[i - 1] < profile[i] && profile[j + 1] < profile[i] {
            let center = (i + j) / 2;
            if prominence(profile, center) >= min_prominence {
                result.indices.push(center);
                result.values.push(profile[center]);
            }
        }
        i = j + 1;
    }
    result
}

/// Convenience wrapper resolving the per-profile threshold from params.
pub fn find_local_maxima_with(profile: &[f64], params: &MaximaParams) -> MaximaResult {
    find_local_maxima(profile, params.threshold(profile))
}

/// Topographic prominence: height above the higher of the two minima reached
/// while walking out from the peak until a strictly greater sample (or the
/// profile end) stops the walk.
fn prominence(profile: &[f64], peak: usize) -> f64 {
    let h = profile[peak];
    let mut left = h;
    for k in (0..peak).rev() {
        if profile[k] > h {
            break;
        }
        left = left.min(profile[k]);
    }
    let mut right = h;
    for k in peak + 1..profile.len() {
        if profile[k] > h {
            break;
        }
        right = right.min(profile[k]);
    }
    h - left.max(right)
}
