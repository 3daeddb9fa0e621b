//! Empirical constants for the inequalities whose constant is only known to
//! exist, and the sampler used to estimate them.
//!
//! The frozen values live in `data/frozen_constants.txt`, a `key = value` file
//! (`#` starts a comment). Keys:
//!
//! - `log_regularized_a`, `log_regularized_b`: constant `C` in
//!   `|Im[(h_m(u) − h_m(v)) conj(u − v)]| ≤ C|u − v|²` for the two parts of the
//!   split logarithm, valid for every `m` in `2⁵..2¹⁵`;
//! - `damping_holder.<alpha>`: constant in `|u/|u|^α − v/|v|^α| ≤ C|u − v|^{1−α}`.
//!
//! Each value is the sampled maximum ratio inflated by 10%.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::oracle::gauge_imaginary_part;
use super::profile::{BaseProfile, RadialProfile};

const FROZEN: &str = include_str!("../../data/frozen_constants.txt");

pub const INFLATION: f64 = 1.1;

/// Dyadic levels `2⁵..2¹⁵` over which the log constants are uniform.
pub fn log_levels() -> Vec<f64> {
    (5..=15).map(|k| 2f64.powi(k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrozenConstants {
    pub log_regularized_a: f64,
    pub log_regularized_b: f64,
    holder: Vec<(f64, f64)>,
}

impl FrozenConstants {
    pub fn load() -> Self {
        Self::parse(FROZEN).expect("bundled constants file is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| format!("line {}: {e}", no + 1))?;
            map.insert(key.trim().to_string(), value);
        }
        let take = |k: &str| map.get(k).copied().ok_or_else(|| format!("missing key {k}"));
        let mut holder: Vec<(f64, f64)> = map
            .iter()
            .filter_map(|(k, v)| {
                let alpha = k.strip_prefix("damping_holder.")?;
                Some(alpha.parse::<f64>().map(|a| (a, *v)))
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        holder.sort_by(|a, b| a.0.total_cmp(&b.0));
        if holder.is_empty() {
            return Err("no damping_holder entries".into());
        }
        Ok(FrozenConstants {
            log_regularized_a: take("log_regularized_a")?,
            log_regularized_b: take("log_regularized_b")?,
            holder,
        })
    }

    pub fn holder_table(&self) -> &[(f64, f64)] {
        &self.holder
    }

    /// Tabulated constant for `alpha`; between table entries the larger of
    /// the two neighbours, outside the table the largest entry.
    pub fn damping_holder(&self, alpha: f64) -> f64 {
        if let Some(&(_, c)) = self.holder.iter().find(|(a, _)| (a - alpha).abs() < 1e-12) {
            return c;
        }
        let above = self.holder.iter().position(|(a, _)| *a > alpha);
        match above {
            Some(i) if i > 0 => self.holder[i - 1].1.max(self.holder[i].1),
            _ => self.holder.iter().map(|(_, c)| *c).fold(0.0, f64::max),
        }
    }
}

/// Log-uniform modulus in `[1e-12, 1e6]` with a uniform phase.
pub fn random_point<R: Rng>(rng: &mut R) -> Complex64 {
    let rho = 10f64.powf(rng.random_range(-12.0..6.0));
    Complex64::from_polar(rho, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Half the pairs are independent draws; the other half are relative
/// perturbations `v = u(1 + δe^{iφ})` with `δ` log-uniform in `[1e-8, 2]`, so
/// that nearly coincident pairs are represented.
pub fn random_pair<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    let u = random_point(rng);
    if rng.random_bool(0.5) {
        (u, random_point(rng))
    } else {
        let delta = 10f64.powf(rng.random_range(-8.0..0.301));
        let kick = Complex64::from_polar(delta, rng.random_range(0.0..std::f64::consts::TAU));
        (u, u * (1.0 + kick))
    }
}

fn imaginary_ratio(p: &RadialProfile, u: Complex64, v: Complex64) -> f64 {
    let gap = (u - v).norm_sqr();
    if gap == 0.0 {
        return 0.0;
    }
    gauge_imaginary_part(|r| p.rate(r), u, v).abs() / gap
}

/// Largest sampled ratios for the `a_m` and `b_m` parts over all levels.
pub fn sample_log_ratios<R: Rng>(rng: &mut R, samples_per_level: usize) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    for m in log_levels() {
        let a = RadialProfile::below(BaseProfile::LogA, 1.0 / m);
        let b = RadialProfile::above(BaseProfile::LogB, m);
        for _ in 0..samples_per_level {
            let (u, v) = random_pair(rng);
            worst.0 = worst.0.max(imaginary_ratio(&a, u, v));
            worst.1 = worst.1.max(imaginary_ratio(&b, u, v));
        }
    }
    worst
}

/// Largest sampled `|u/|u|^α − v/|v|^α| / |u − v|^{1−α}`.
pub fn sample_holder_ratio<R: Rng>(rng: &mut R, alpha: f64, samples: usize) -> f64 {
    let f = |z: Complex64| {
        let r = z.norm();
        if r == 0.0 {
            z
        } else {
            z * r.powf(-alpha)
        }
    };
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (u, v) = random_pair(rng);
        let gap = (u - v).norm();
        if gap > 0.0 {
            worst = worst.max((f(u) - f(v)).norm() / gap.powf(1.0 - alpha));
        }
    }
    worst
}

/// Regenerate the constants file body from fresh samples.
pub fn calibrate<R: Rng>(rng: &mut R, samples: usize, alphas: &[f64]) -> String {
    let (a, b) = sample_log_ratios(rng, samples);
    let mut out = String::new();
    out.push_str(&format!("log_regularized_a = {:.6}\n", a * INFLATION));
    out.push_str(&format!("log_regularized_b = {:.6}\n", b * INFLATION));
    for &alpha in alphas {
        let c = sample_holder_ratio(rng, alpha, samples);
        out.push_str(&format!("damping_holder.{alpha} = {:.6}\n", c * INFLATION));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bundled_file_parses() {
        let k = FrozenConstants::load();
        assert!(k.log_regularized_a > 0.0 && k.log_regularized_b > 0.0);
        assert!(k.holder_table().len() >= 5);
        assert_eq!(k.damping_holder(0.5), k.holder_table().iter().find(|e| e.0 == 0.5).unwrap().1);
        let between = k.damping_holder(0.6);
        assert!(between >= k.damping_holder(0.5).min(k.damping_holder(0.75)));
    }

    #[test]
    fn malformed_file_rejected() {
        assert!(FrozenConstants::parse("log_regularized_a = x").is_err());
        assert!(FrozenConstants::parse("log_regularized_a = 1\nlog_regularized_b = 1").is_err());
        assert!(FrozenConstants::parse("nonsense").is_err());
    }

    #[test]
    fn frozen_values_dominate_fresh_samples() {
        let k = FrozenConstants::load();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let (a, b) = sample_log_ratios(&mut rng, 20_000);
        assert!(a <= k.log_regularized_a, "{a}");
        assert!(b <= k.log_regularized_b, "{b}");
        for &(alpha, c) in k.holder_table() {
            assert!(sample_holder_ratio(&mut rng, alpha, 50_000) <= c);
        }
    }

    #[test]
    fn holder_constant_exceeds_antipodal_value() {
        // u = -v gives exactly 2^α
        let k = FrozenConstants::load();
        for &(alpha, c) in k.holder_table() {
            assert!(c >= 2f64.powf(alpha));
        }
    }
}

#[cfg(test)]
mod regenerate {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `cargo test --release print_calibration -- --ignored --nocapture`
    #[test]
    #[ignore]
    fn print_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        print!("{}", super::calibrate(&mut rng, 2_000_000, &[0.1, 0.25, 0.5, 0.75, 0.9]));
    }
}
