//! Uplink NOMA rates with successive interference cancellation.

use crate::error::{Error, Result};

/// Received-power picture of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSnapshot {
    gains: Vec<f64>,
    transmit_power: f64,
    noise_power: f64,
}

impl UplinkSnapshot {
    pub fn new(gains: Vec<f64>, transmit_power: f64, noise_power: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::domain("snapshot needs at least one user"));
        }
        if gains.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::domain("channel gains must be positive and finite"));
        }
        if !(transmit_power > 0.0) || !(noise_power > 0.0) {
            return Err(Error::domain("transmit and noise power must be positive"));
        }
        Ok(UplinkSnapshot {
            gains,
            transmit_power,
            noise_power,
        })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
}

/// SIC decoding order over zero-based user indices. The receiver decodes
/// `order[K-1]` first and `order[0]` last, so `order[0]` sees no
/// interference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingOrder(Vec<usize>);

impl DecodingOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &u in &order {
            match seen.get_mut(u) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::domain(format!("{order:?} is not a permutation"))),
            }
        }
        Ok(DecodingOrder(order))
    }

    pub fn identity(k: usize) -> Self {
        DecodingOrder((0..k).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Achievable rate of every user (bps/Hz), indexed by user.
pub fn per_user_rates(snapshot: &UplinkSnapshot, order: &DecodingOrder) -> Result<Vec<f64>> {
    let k = snapshot.num_users();
    if order.0.len() != k {
        return Err(Error::domain(format!(
            "decoding order covers {} users, snapshot has {k}",
            order.0.len()
        )));
    }
    let p = snapshot.transmit_power;
    let mut rates = vec![0.0; k];
    // interference-plus-noise seen by the user at position `pos` in the order
    let mut below = snapshot.noise_power;
    for &user in &order.0 {
        let signal = p * snapshot.gains[user];
        rates[user] = (signal / below).ln_1p() / std::f64::consts::LN_2;
        below += signal;
    }
    Ok(rates)
}

/// Sum rate `log2(1 + P sum_k h_k / sigma^2)`; independent of decoding order.
pub fn sum_rate(snapshot: &UplinkSnapshot) -> f64 {
    sum_rate_from_total(
        snapshot.gains.iter().sum(),
        snapshot.transmit_power,
        snapshot.noise_power,
    )
}

#[inline]
pub fn sum_rate_from_total(total_gain: f64, transmit_power: f64, noise_power: f64) -> f64 {
    (transmit_power * total_gain / noise_power).ln_1p() / std::f64::consts::LN_2
}
