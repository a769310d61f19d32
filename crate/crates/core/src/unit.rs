use serde::{Deserialize, Serialize};

/// Logarithm base for reported information quantities.
///
/// All internal computation uses natural logarithms; conversion happens once
/// at the public boundary. The CLI default is bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogUnit {
    Bits,
    Nats,
}

impl LogUnit {
    /// Convert a value measured in nats to this unit.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogUnit::Bits => nats / std::f64::consts::LN_2,
            LogUnit::Nats => nats,
        }
    }

    /// Convert a value in this unit to nats.
    pub fn to_nats(self, v: f64) -> f64 {
        match self {
            LogUnit::Bits => v * std::f64::consts::LN_2,
            LogUnit::Nats => v,
        }
    }

    /// Convert a squared quantity (a variance) measured in nats^2 to this unit.
    pub fn from_nats_sq(self, nats_sq: f64) -> f64 {
        match self {
            LogUnit::Bits => nats_sq / (std::f64::consts::LN_2 * std::f64::consts::LN_2),
            LogUnit::Nats => nats_sq,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogUnit::Bits => "bits",
            LogUnit::Nats => "nats",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let v = 1.234_567;
        assert!((LogUnit::Bits.from_nats(LogUnit::Bits.to_nats(v)) - v).abs() < 1e-15);
        assert_eq!(LogUnit::Nats.from_nats(v), v);
    }

    #[test]
    fn one_bit_is_ln2_nats() {
        assert!((LogUnit::Bits.to_nats(1.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
