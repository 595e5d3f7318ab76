use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{bail, Error, Result};

/// One constant segment `[start, end) → level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub level: f64,
}

/// A nonnegative step function whose segments tile [0, 1] in order.
///
/// Segments are half-open `[start, end)`, except that the last one also
/// covers t = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pieces: Vec<Piece>,
}

impl PiecewiseConstant {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            bail!(Validation, "piecewise function needs at least one segment");
        }
        if pieces[0].start != 0.0 {
            bail!(Validation, "first segment must start at 0, got {}", pieces[0].start);
        }
        if pieces[pieces.len() - 1].end != 1.0 {
            bail!(Validation, "last segment must end at 1, got {}", pieces[pieces.len() - 1].end);
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.start < p.end) {
                bail!(Validation, "segment {i} is empty or reversed: [{}, {})", p.start, p.end);
            }
            if !(p.level >= 0.0) || !p.level.is_finite() {
                bail!(Validation, "segment {i} has invalid level {}", p.level);
            }
            if i > 0 && pieces[i - 1].end != p.start {
                bail!(Validation, "segments {} and {i} are not contiguous", i - 1);
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.end <= t);
        self.pieces[idx.min(self.pieces.len() - 1)].level
    }

    /// Exact ∫₀¹ of the step function.
    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(|p| (p.end - p.start) * p.level).sum()
    }

    /// Exact ∫₀ˣ, clamping `x` to [0, 1].
    pub fn integral_to(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for p in &self.pieces {
            if x <= p.start {
                break;
            }
            acc += (x.min(p.end) - p.start) * p.level;
        }
        acc
    }

    /// Interior segment boundaries.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.start)
    }

    pub fn max_level(&self) -> f64 {
        self.pieces.iter().map(|p| p.level).fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.pieces.windows(2).all(|w| w[1].level <= w[0].level)
    }
}

impl fmt::Display for PiecewiseConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{},{}", p.start, p.end, p.level)?;
        }
        Ok(())
    }
}

/// Parses `start,end,level;start,end,level;...`.
impl FromStr for PiecewiseConstant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        for seg in s.split(';') {
            let fields: Vec<&str> = seg.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(alloc::format!("segment `{seg}` must be `start,end,level`")));
            }
            let num = |x: &str| -> Result<f64> {
                x.parse::<f64>().map_err(|_| Error::Parse(alloc::format!("`{x}` is not a number")))
            };
            pieces.push(Piece { start: num(fields[0])?, end: num(fields[1])?, level: num(fields[2])? });
        }
        Self::new(pieces)
    }
}

pub(crate) fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| Error::Parse(alloc::format!("{key}: `{value}` is not a number")))
}
