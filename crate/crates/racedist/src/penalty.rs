//! Gap penalties and their conversion to circuit-delay cycle counts.
//!
//! User-facing scores are plain integers; the lattice wants per-event delays
//! in clock cycles. The conversion is a two-step affine map: shift every
//! penalty by `k` (normally chosen so the match penalty lands on zero), then
//! scale by `m >= 1`. Both steps preserve the relative order of distances,
//! so the lattice can stand in for the exact engine wherever only an argmin
//! or a sort is consumed.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Integer costs for the four edit events. Lower is better; a valid set has
/// the match cost as the minimum of the four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPenalties {
    pub match_cost: i64,
    pub mismatch_cost: i64,
    pub insert_cost: i64,
    pub delete_cost: i64,
}

impl GapPenalties {
    pub fn new(match_cost: i64, mismatch_cost: i64, insert_cost: i64, delete_cost: i64) -> Self {
        GapPenalties {
            match_cost,
            mismatch_cost,
            insert_cost,
            delete_cost,
        }
    }

    /// The configuration used throughout the worked examples:
    /// match 0, mismatch 2, insert 1, delete 1.
    pub fn canonical() -> Self {
        GapPenalties::new(0, 2, 1, 1)
    }

    pub fn validate(&self) -> Result<(), PenaltyError> {
        let min_other = self
            .mismatch_cost
            .min(self.insert_cost)
            .min(self.delete_cost);
        if self.match_cost > min_other {
            return Err(PenaltyError::MatchNotMinimum);
        }
        Ok(())
    }

    /// Every penalty shifted by the same constant.
    pub fn shifted(&self, k: i64) -> GapPenalties {
        GapPenalties::new(
            self.match_cost + k,
            self.mismatch_cost + k,
            self.insert_cost + k,
            self.delete_cost + k,
        )
    }

    pub fn max_cost(&self) -> i64 {
        self.match_cost
            .max(self.mismatch_cost)
            .max(self.insert_cost)
            .max(self.delete_cost)
    }
}

/// Parameters of the affine delay encoding `E(x) = m * (x + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingParams {
    /// Shift applied to every penalty before scaling.
    pub shift: i64,
    /// Cycle multiplier; must be at least 1.
    pub scale: i64,
}

impl EncodingParams {
    pub fn new(shift: i64, scale: i64) -> Self {
        EncodingParams { shift, scale }
    }

    /// Identity encoding: no shift, one cycle per score unit.
    pub fn identity() -> Self {
        EncodingParams::new(0, 1)
    }

    /// Shift chosen so the match penalty encodes to zero cycles, which lets
    /// match edges propagate combinationally.
    pub fn canonical_for(gp: &GapPenalties) -> Self {
        EncodingParams::new(-gp.match_cost, 1)
    }
}

/// Per-event delays in clock cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayPenalties {
    pub match_cycles: u64,
    pub mismatch_cycles: u64,
    pub insert_cycles: u64,
    pub delete_cycles: u64,
}

impl DelayPenalties {
    pub fn new(match_cycles: u64, mismatch_cycles: u64, insert_cycles: u64, delete_cycles: u64) -> Self {
        DelayPenalties {
            match_cycles,
            mismatch_cycles,
            insert_cycles,
            delete_cycles,
        }
    }

    pub fn min_indel(&self) -> u64 {
        self.insert_cycles.min(self.delete_cycles)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PenaltyError {
    /// The match penalty must be the minimum of the four.
    MatchNotMinimum,
    /// An encoded delay came out negative; named field tells which.
    NegativeDelay(&'static str),
    /// The scale factor must be a positive integer.
    InvalidScale(i64),
}

impl fmt::Display for PenaltyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyError::MatchNotMinimum => {
                write!(f, "match penalty must not exceed mismatch, insert, or delete")
            }
            PenaltyError::NegativeDelay(name) => {
                write!(f, "encoded delay for {name} is negative")
            }
            PenaltyError::InvalidScale(m) => write!(f, "scale must be >= 1, got {m}"),
        }
    }
}

impl std::error::Error for PenaltyError {}

/// Apply the two-step encoding to all four penalties.
///
/// Fails if the penalties violate the match-minimum rule or if any encoded
/// value would be negative (delays are cycle counts; there is no such thing
/// as a negative delay).
pub fn encode_penalties(
    gp: &GapPenalties,
    params: &EncodingParams,
) -> Result<DelayPenalties, PenaltyError> {
    gp.validate()?;
    if params.scale < 1 {
        return Err(PenaltyError::InvalidScale(params.scale));
    }
    let encode = |x: i64, name: &'static str| -> Result<u64, PenaltyError> {
        let v = params.scale * (x + params.shift);
        u64::try_from(v).map_err(|_| PenaltyError::NegativeDelay(name))
    };
    Ok(DelayPenalties {
        match_cycles: encode(gp.match_cost, "match")?,
        mismatch_cycles: encode(gp.mismatch_cost, "mismatch")?,
        insert_cycles: encode(gp.insert_cost, "insert")?,
        delete_cycles: encode(gp.delete_cost, "delete")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_set_encodes_identically() {
        let gp = GapPenalties::canonical();
        let d = encode_penalties(&gp, &EncodingParams::identity()).unwrap();
        assert_eq!(d, DelayPenalties::new(0, 2, 1, 1));
    }

    #[test]
    fn shift_and_scale() {
        let gp = GapPenalties::new(1, 3, 2, 2);
        let d = encode_penalties(&gp, &EncodingParams::new(-1, 2)).unwrap();
        assert_eq!(d, DelayPenalties::new(0, 4, 2, 2));
    }

    #[test]
    fn negative_shift_is_rejected() {
        let gp = GapPenalties::canonical();
        let err = encode_penalties(&gp, &EncodingParams::new(-2, 1)).unwrap_err();
        assert_eq!(err, PenaltyError::NegativeDelay("match"));
    }

    #[test]
    fn match_must_be_minimum() {
        let gp = GapPenalties::new(3, 2, 1, 1);
        let err = encode_penalties(&gp, &EncodingParams::identity()).unwrap_err();
        assert_eq!(err, PenaltyError::MatchNotMinimum);
    }

    #[test]
    fn scale_below_one_is_rejected() {
        let gp = GapPenalties::canonical();
        assert_eq!(
            encode_penalties(&gp, &EncodingParams::new(0, 0)).unwrap_err(),
            PenaltyError::InvalidScale(0)
        );
    }

    #[test]
    fn canonical_shift_zeroes_the_match_delay() {
        let gp = GapPenalties::new(2, 5, 3, 4);
        let params = EncodingParams::canonical_for(&gp);
        let d = encode_penalties(&gp, &params).unwrap();
        assert_eq!(d.match_cycles, 0);
        assert_eq!(d, DelayPenalties::new(0, 3, 1, 2));
    }

    // Encoding is a monotone affine map, so the relative order of the four
    // penalties survives any valid (k, m).
    #[test]
    fn encoding_preserves_penalty_order() {
        let gp = GapPenalties::new(0, 5, 2, 3);
        for k in 0..4 {
            for m in 1..4 {
                let d = encode_penalties(&gp, &EncodingParams::new(k, m)).unwrap();
                assert!(d.match_cycles <= d.insert_cycles);
                assert!(d.insert_cycles <= d.delete_cycles);
                assert!(d.delete_cycles <= d.mismatch_cycles);
            }
        }
    }
}
