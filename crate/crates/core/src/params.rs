//! Run modes, desk-scale gates, and the per-level constants of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::search::DEFAULT_BUDGET;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Enforce every numeric hypothesis at its proven value.
    Faithful,
    /// Keep the algorithms, relax the numeric gates to desk-scale values.
    #[default]
    Practical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Faithful => "faithful",
            Mode::Practical => "practical",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "practical" => Ok(Mode::Practical),
            _ => Err(Error::Parse(format!("unknown mode {s:?}, expected faithful or practical"))),
        }
    }
}

/// Numeric gates. [`Gates::faithful`] holds the proven values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    /// Smallest `|U|` accepted by the good-subgraph construction, as a multiple of `r²`.
    pub good_subgraph_min_u_per_r2: f64,
    /// `k = ⌊|U| / (k_divisor_per_r2 · r²)⌋`.
    pub k_divisor_per_r2: f64,
    /// Good-set constructions require `ε` below this.
    pub good_set_eps_max: f64,
    /// Smallest `|U|` for which combining absorbers is attempted, as a multiple of `r²Δ`.
    pub combine_min_u_per_r2_delta: f64,
    /// `δ''` of the induction step; `None` uses the proven schedule.
    pub delta_dd: Option<f64>,
    /// Below this `|A|` the induction step covers greedily.
    pub level_escape_a: Option<usize>,
    /// Richness parameter `λ`; `None` uses `c^Δ`.
    pub lambda: Option<f64>,
    /// `|U|` as a fraction of `|A|` at most.
    pub u_fraction: Option<f64>,
}

impl Gates {
    pub fn faithful() -> Self {
        Gates {
            good_subgraph_min_u_per_r2: 100.0,
            k_divisor_per_r2: 16.0,
            good_set_eps_max: 0.01,
            combine_min_u_per_r2_delta: 200.0,
            delta_dd: None,
            level_escape_a: None,
            lambda: None,
            u_fraction: None,
        }
    }

    pub fn practical(r: usize, delta: usize) -> Self {
        let r2 = (r * r) as f64;
        Gates {
            good_subgraph_min_u_per_r2: 8.0 / r2,
            k_divisor_per_r2: 2.0 / r2,
            good_set_eps_max: 1.0,
            combine_min_u_per_r2_delta: 8.0 / (r2 * delta.max(1) as f64),
            delta_dd: Some(0.45),
            level_escape_a: Some(16),
            lambda: Some(1.0 / (4.0 * delta.max(1) as f64)),
            u_fraction: Some(0.5),
        }
    }

    pub fn for_mode(mode: Mode, r: usize, delta: usize) -> Self {
        match mode {
            Mode::Faithful => Self::faithful(),
            Mode::Practical => Self::practical(r, delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub mode: Mode,
    pub r: usize,
    pub delta: usize,
    /// Constant of the careful embedding; `1/(100r)` by default.
    pub c: f64,
    /// Exponent constant of the k-set DRC.
    pub big_c: u32,
    /// Target exponent of the final bound, reported only.
    pub c_r: Option<f64>,
    /// Cap on `|B|/|A|`; `None` leaves it unchecked.
    pub k_cap: Option<f64>,
    pub seed: u64,
    pub search_budget: u64,
    pub drc_retries: usize,
    pub resample_retries: usize,
    pub careful_retries: usize,
    pub gates: Gates,
}

/// `⌈1 + 3 log₂ r⌉`, enough for every `δ < 1/2` in the k-set DRC.
pub fn default_big_c(r: usize) -> u32 {
    (1.0 + 3.0 * (r.max(2) as f64).log2()).ceil() as u32
}

impl PipelineParams {
    pub fn new(mode: Mode, r: usize, delta: usize, seed: u64) -> Self {
        PipelineParams {
            mode,
            r,
            delta,
            c: 1.0 / (100.0 * r.max(1) as f64),
            big_c: default_big_c(r),
            c_r: None,
            k_cap: None,
            seed,
            search_budget: DEFAULT_BUDGET,
            drc_retries: 16,
            resample_retries: 32,
            careful_retries: 8,
            gates: Gates::for_mode(mode, r, delta),
        }
    }

    /// `ε_k = 1/(2^k r^Δ)`.
    pub fn eps(&self, k: usize) -> f64 {
        1.0 / (2f64.powi(k as i32) * (self.r as f64).powi(self.delta as i32))
    }

    /// `ε'_k = ε_{k+1}`.
    pub fn eps_prime(&self, k: usize) -> f64 {
        self.eps(k + 1)
    }

    fn ln_delta_exp(&self, exponent: i64) -> f64 {
        let base = 100.0 / self.c * self.big_c as f64 * self.r as f64 * self.delta as f64;
        -base.powf(exponent as f64)
    }

    /// `ln δ_k` with `δ_k = exp(−(100c⁻¹CrΔ)^{2(r−k)+3})`.
    pub fn ln_delta_k(&self, k: usize) -> f64 {
        self.ln_delta_exp(2 * (self.r as i64 - k as i64) + 3)
    }

    /// `ln δ'_k = ln δ_{k+1}`.
    pub fn ln_delta_prime(&self, k: usize) -> f64 {
        self.ln_delta_k(k + 1)
    }

    /// `ln δ''_k` with exponent `2(r−k)+2`.
    pub fn ln_delta_dd(&self, k: usize) -> f64 {
        self.ln_delta_exp(2 * (self.r as i64 - k as i64) + 2)
    }

    /// `θ = 1/(2Δ²(32r)^Δ)`.
    pub fn theta(&self) -> f64 {
        theta(self.r, self.delta)
    }

    /// Richness parameter used by the careful embedding.
    pub fn lambda(&self) -> f64 {
        self.gates.lambda.unwrap_or_else(|| self.c.powi(self.delta as i32))
    }

    /// First 16 hex digits of the SHA-256 of the JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// `θ = 1/(2Δ²(32r)^Δ)`.
pub fn theta(r: usize, delta: usize) -> f64 {
    1.0 / (2.0 * (delta * delta) as f64 * (32.0 * r as f64).powi(delta as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_for_matchings_in_two_colours() {
        assert_eq!(theta(2, 1), 1.0 / 128.0);
    }

    #[test]
    fn density_schedule_halves() {
        let p = PipelineParams::new(Mode::Practical, 3, 2, 0);
        assert_eq!(p.eps(1), 1.0 / 18.0);
        for k in 1..4 {
            assert_eq!(p.eps_prime(k), p.eps(k) / 2.0);
            assert!(p.eps(k) > 0.0 && p.eps(k) < 1.0);
        }
    }

    #[test]
    fn bad_fractions_are_nested() {
        let p = PipelineParams::new(Mode::Faithful, 2, 1, 0);
        // δ ≤ δ'' ≤ δ' at every level.
        for k in 1..=2 {
            assert!(p.ln_delta_k(k) < p.ln_delta_dd(k));
            assert!(p.ln_delta_dd(k) < p.ln_delta_prime(k));
        }
        assert_eq!(default_big_c(2), 4);
    }

    #[test]
    fn mode_round_trips() {
        for m in [Mode::Faithful, Mode::Practical] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("fast".parse::<Mode>().is_err());
    }
}
