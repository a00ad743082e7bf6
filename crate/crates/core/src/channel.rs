//! Air-to-ground channel models.
//!
//! Realized gains follow the segmented model: the LoS/NLoS condition is
//! decided geometrically and selects one parameter set, then
//! `h = mu * xi * beta * d^-alpha` with log-normal shadowing `xi` and
//! unit-mean Rician power fading `mu`.
//!
//! Predicted gains follow the probabilistic-LoS average
//! `[p + eta (1 - p)] * beta * d^-alpha` with `p` a logistic function of the
//! elevation angle in degrees.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Los,
    Nlos,
}

impl Condition {
    pub fn from_los(los: bool) -> Self {
        if los {
            Condition::Los
        } else {
            Condition::Nlos
        }
    }

    pub fn is_los(self) -> bool {
        self == Condition::Los
    }
}

/// Propagation parameters for one condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    pub reference_gain_db: f64,
    pub path_loss_exponent: f64,
    /// Standard deviation of `10 log10(xi)` in dB.
    pub shadowing_std_db: f64,
    /// Rician K-factor in dB; `None` is Rayleigh fading (K = 0).
    #[serde(default)]
    pub rician_k_db: Option<f64>,
}

impl ConditionParams {
    pub fn reference_gain(&self) -> f64 {
        db_to_linear(self.reference_gain_db)
    }

    pub fn rician_k(&self) -> f64 {
        self.rician_k_db.map_or(0.0, db_to_linear)
    }

    fn validate(&self, label: &str) -> Result<()> {
        if !self.reference_gain_db.is_finite() {
            return Err(Error::config(format!(
                "{label}: reference gain must be finite"
            )));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::config(format!(
                "{label}: path-loss exponent must be positive"
            )));
        }
        if !(self.shadowing_std_db >= 0.0) {
            return Err(Error::config(format!(
                "{label}: shadowing std must be nonnegative"
            )));
        }
        if let Some(k) = self.rician_k_db {
            if !k.is_finite() {
                return Err(Error::config(format!(
                    "{label}: K-factor must be finite or null"
                )));
            }
        }
        Ok(())
    }
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentedChannelParams {
    pub los: ConditionParams,
    pub nlos: ConditionParams,
    /// When false, `xi = 1` and no shadowing draws are taken.
    #[serde(default = "enabled")]
    pub shadowing: bool,
    /// When false, `mu = 1` and no fading draws are taken.
    #[serde(default = "enabled")]
    pub fading: bool,
}

impl Default for SegmentedChannelParams {
    fn default() -> Self {
        SegmentedChannelParams {
            los: ConditionParams {
                reference_gain_db: -30.0,
                path_loss_exponent: 2.0,
                shadowing_std_db: 2.0,
                rician_k_db: Some(15.0),
            },
            nlos: ConditionParams {
                reference_gain_db: -40.0,
                path_loss_exponent: 4.0,
                shadowing_std_db: 5.0,
                rician_k_db: None,
            },
            shadowing: true,
            fading: true,
        }
    }
}

impl SegmentedChannelParams {
    /// Path loss only; no random effects.
    pub fn deterministic(self) -> Self {
        SegmentedChannelParams {
            shadowing: false,
            fading: false,
            ..self
        }
    }

    pub fn for_condition(&self, condition: Condition) -> &ConditionParams {
        match condition {
            Condition::Los => &self.los,
            Condition::Nlos => &self.nlos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.los.validate("LoS channel")?;
        self.nlos.validate("NLoS channel")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGain {
    pub gain: f64,
    pub condition: Condition,
    pub distance: f64,
}

/// Linear shadowing factor with `10 log10(xi) ~ N(0, std_db)`.
pub fn draw_shadowing<R: Rng + ?Sized>(std_db: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    db_to_linear(std_db * z)
}

/// Rician power gain `|h|^2` with K-factor `k` (linear), normalized to unit mean.
pub fn draw_rician_power<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (0.5 / (k + 1.0)).sqrt();
    let re = los + scatter * rng.sample::<f64, _>(StandardNormal);
    let im = scatter * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// Realizes one link gain. Shadowing and fading draw from separate streams,
/// and each enabled effect consumes the same number of draws regardless of
/// the condition.
pub fn realize_gain<S, F>(
    distance: f64,
    condition: Condition,
    params: &SegmentedChannelParams,
    shadowing_rng: &mut S,
    fading_rng: &mut F,
) -> Result<LinkGain>
where
    S: Rng + ?Sized,
    F: Rng + ?Sized,
{
    if !(distance > 0.0) {
        return Err(Error::domain(format!(
            "link distance must be positive, got {distance}"
        )));
    }
    let p = params.for_condition(condition);
    let path = p.reference_gain() * distance.powf(-p.path_loss_exponent);
    let xi = if params.shadowing {
        draw_shadowing(p.shadowing_std_db, shadowing_rng)
    } else {
        1.0
    };
    let mu = if params.fading {
        draw_rician_power(p.rician_k(), fading_rng)
    } else {
        1.0
    };
    Ok(LinkGain {
        gain: mu * xi * path,
        condition,
        distance,
    })
}

/// Which LoS probability the predictor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LosModel {
    /// Elevation-dependent logistic LoS probability.
    Probabilistic,
    /// LoS everywhere (`p = 1`).
    PureLos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedChannelParams {
    pub path_loss_exponent: f64,
    pub reference_gain_db: f64,
    /// Extra NLoS attenuation `eta`, in (0, 1).
    pub nlos_attenuation: f64,
    /// Logistic shape `C` (also the angle offset, in degrees).
    pub los_c: f64,
    /// Logistic slope `D` per degree.
    pub los_d: f64,
}

impl Default for PredictedChannelParams {
    fn default() -> Self {
        PredictedChannelParams {
            path_loss_exponent: 2.3,
            reference_gain_db: -30.0,
            nlos_attenuation: 0.1,
            los_c: 10.0,
            los_d: 0.6,
        }
    }
}

impl PredictedChannelParams {
    pub fn reference_gain(&self) -> f64 {
        db_to_linear(self.reference_gain_db)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nlos_attenuation > 0.0 && self.nlos_attenuation < 1.0) {
            return Err(Error::config("NLoS attenuation must lie in (0, 1)"));
        }
        if !(self.los_c > 0.0 && self.los_d > 0.0) {
            return Err(Error::config(
                "LoS probability parameters C and D must be positive",
            ));
        }
        if !(self.path_loss_exponent > 0.0) || !self.reference_gain_db.is_finite() {
            return Err(Error::config("invalid predicted path-loss parameters"));
        }
        Ok(())
    }
}

/// Elevation angle from the ground user to the UAV, in degrees.
pub fn elevation_deg(distance: f64, altitude: f64) -> Result<f64> {
    if !(altitude > 0.0) || !(distance >= altitude) {
        return Err(Error::domain(format!(
            "need distance >= altitude > 0, got d = {distance}, H = {altitude}"
        )));
    }
    Ok((altitude / distance).min(1.0).asin().to_degrees())
}

/// LoS probability `1 / (1 + C exp(-D (theta - C)))`, theta in degrees.
pub fn p_los(distance: f64, altitude: f64, c: f64, d: f64) -> Result<f64> {
    let theta = elevation_deg(distance, altitude)?;
    Ok(logistic_los(theta, c, d))
}

pub(crate) fn logistic_los(theta_deg: f64, c: f64, d: f64) -> f64 {
    1.0 / (1.0 + c * (-d * (theta_deg - c)).exp())
}

/// Average gain for a known LoS probability `p`.
pub fn predicted_gain_with_p(distance: f64, p: f64, params: &PredictedChannelParams) -> f64 {
    let eta = params.nlos_attenuation;
    (p + eta * (1.0 - p)) * params.reference_gain() * distance.powf(-params.path_loss_exponent)
}

pub fn predicted_gain(
    distance: f64,
    altitude: f64,
    params: &PredictedChannelParams,
    model: LosModel,
) -> Result<f64> {
    let p = match model {
        LosModel::Probabilistic => p_los(distance, altitude, params.los_c, params.los_d)?,
        LosModel::PureLos => {
            elevation_deg(distance, altitude)?;
            1.0
        }
    };
    Ok(predicted_gain_with_p(distance, p, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::units::linear_to_db;
    use approx::assert_relative_eq;

    #[test]
    fn deterministic_path_loss() {
        let params = SegmentedChannelParams::default().deterministic();
        let (mut a, mut b) = (stream(0, Stream::Shadowing), stream(0, Stream::Fading));
        let los = realize_gain(100.0, Condition::Los, &params, &mut a, &mut b).unwrap();
        assert_relative_eq!(los.gain, 1e-7, max_relative = 1e-12);
        assert_eq!(los.condition, Condition::Los);
        let nlos = realize_gain(100.0, Condition::Nlos, &params, &mut a, &mut b).unwrap();
        assert_relative_eq!(nlos.gain, 1e-12, max_relative = 1e-12);
        assert!(realize_gain(0.0, Condition::Los, &params, &mut a, &mut b).is_err());
        assert!(realize_gain(-1.0, Condition::Los, &params, &mut a, &mut b).is_err());
    }

    #[test]
    fn rician_power_has_unit_mean() {
        for k_db in [None, Some(0.0), Some(15.0)] {
            let k = k_db.map_or(0.0, db_to_linear);
            let mut rng = stream(11, Stream::Fading);
            let n = 1_000_000;
            let mean = (0..n).map(|_| draw_rician_power(k, &mut rng)).sum::<f64>() / n as f64;
            assert!((0.99..=1.01).contains(&mean), "K={k_db:?}: mean {mean}");
        }
    }

    #[test]
    fn shadowing_moments() {
        for std_db in [2.0, 5.0] {
            let mut rng = stream(5, Stream::Shadowing);
            let n = 1_000_000;
            let samples: Vec<f64> = (0..n)
                .map(|_| linear_to_db(draw_shadowing(std_db, &mut rng)))
                .collect();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(mean.abs() < 0.02 * std_db);
            assert!(
                (var.sqrt() / std_db - 1.0).abs() < 0.02,
                "std {}",
                var.sqrt()
            );
        }
    }

    #[test]
    fn p_los_examples() {
        let h = 100.0;
        let d = h / 10f64.to_radians().sin();
        assert_relative_eq!(
            p_los(d, h, 10.0, 0.6).unwrap(),
            1.0 / 11.0,
            max_relative = 1e-12
        );
        let overhead = p_los(h, h, 10.0, 0.6).unwrap();
        assert!((overhead - 1.0).abs() < 1e-12);
        for d in [100.0, 150.0, 400.0, 5000.0] {
            assert_relative_eq!(
                p_los(d, h, 10.0, 1e-300).unwrap(),
                1.0 / 11.0,
                max_relative = 1e-12
            );
        }
        assert!(p_los(99.0, 100.0, 10.0, 0.6).is_err());
    }

    #[test]
    fn predicted_gain_examples() {
        let params = PredictedChannelParams::default();
        let los = predicted_gain_with_p(100.0, 1.0, &params);
        assert_relative_eq!(los, 1e-3 * 100f64.powf(-2.3), max_relative = 1e-12);
        assert_relative_eq!(los, 2.511_886e-8, max_relative = 1e-6);
        assert_relative_eq!(
            predicted_gain_with_p(100.0, 0.0, &params),
            0.1 * los,
            max_relative = 1e-12
        );
        let overhead = predicted_gain(100.0, 100.0, &params, LosModel::Probabilistic).unwrap();
        assert_relative_eq!(overhead, los, max_relative = 1e-12);
        assert_eq!(
            predicted_gain(100.0, 100.0, &params, LosModel::PureLos).unwrap(),
            los
        );
        assert!(predicted_gain(50.0, 100.0, &params, LosModel::PureLos).is_err());
    }

    #[test]
    fn predicted_gain_decreases_with_distance() {
        let params = PredictedChannelParams::default();
        let mut last = f64::INFINITY;
        for k in 0..2000 {
            let d = 100.0 + k as f64 * 0.5;
            let g = predicted_gain(d, 100.0, &params, LosModel::Probabilistic).unwrap();
            assert!(g < last);
            last = g;
        }
    }

    #[test]
    fn default_params_validate() {
        SegmentedChannelParams::default().validate().unwrap();
        PredictedChannelParams::default().validate().unwrap();
        let bad = PredictedChannelParams {
            nlos_attenuation: 1.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
