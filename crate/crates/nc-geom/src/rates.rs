//! Downlink throughput of a coded relay: rate with unbounded coding, rate
//! without coding, rate with combination size capped at m, and the gains
//! between them.
//!
//! A coded broadcast must be decodable by the slowest destination it serves,
//! so it goes out at the minimum rate; native service walks the rate vector
//! one destination at a time, giving the harmonic mean.

use serde::Serialize;

use crate::error::{Error, Result};

/// Per-destination downlink rates plus packet size. Rates are sorted
/// ascending on construction; the formulas only reference ranked positions,
/// so the original order carries no information. The packet size scales all
/// transmission times equally and cancels out of every gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSpec {
    rates: Vec<f64>,
    packet_size: f64,
}

impl RateSpec {
    pub fn new(mut rates: Vec<f64>, packet_size: f64) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyRates);
        }
        for &r in &rates {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::BadRate(r));
            }
        }
        if !packet_size.is_finite() || packet_size <= 0.0 {
            return Err(Error::BadPacketSize(packet_size));
        }
        rates.sort_by(f64::total_cmp);
        Ok(RateSpec { rates, packet_size })
    }

    /// Number of destinations C; at least 1 by construction.
    pub fn flow_count(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn packet_size(&self) -> f64 {
        self.packet_size
    }

    /// Throughput with all C packets coded into one broadcast, which must be
    /// sent at the minimum rate for everyone to decode: C * r_1.
    pub fn rate_nc(&self) -> f64 {
        self.rates.len() as f64 * self.rates[0]
    }

    /// Throughput serving each destination natively in sequence: the
    /// harmonic mean of the rate vector.
    pub fn rate_without(&self) -> f64 {
        let c = self.rates.len() as f64;
        c / self.rates.iter().map(|r| 1.0 / r).sum::<f64>()
    }

    /// Throughput when at most m packets ride in one coded broadcast. The
    /// sorted rates are grouped m at a time from the slowest up, each group
    /// transmitting at its own minimum — the rate at ranked position
    /// m(i-1)+1 — with a final short group for the remainder.
    pub fn rate_m(&self, m: usize) -> f64 {
        assert!(m >= 1, "the combination cap is at least one packet");
        let c = self.rates.len();
        let full = c / m;
        let rem = c % m;
        let mut denom: f64 = (0..full).map(|i| 1.0 / self.rates[m * i]).sum();
        if rem > 0 {
            denom += 1.0 / self.rates[c - rem];
        }
        c as f64 / denom
    }

    /// Throughput gain of unbounded coding over native service: C * r_1 / r_h.
    pub fn gain(&self) -> f64 {
        self.rate_nc() / self.rate_without()
    }

    /// Throughput gain of m-capped coding over native service.
    pub fn gain_m(&self, m: usize) -> f64 {
        self.rate_m(m) / self.rate_without()
    }
}
