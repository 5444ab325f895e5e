use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One constant piece `v` on `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x_left: f64,
    pub x_right: f64,
    pub v: f64,
}

impl Segment {
    pub fn new(x_left: f64, x_right: f64, v: f64) -> Self {
        Self { x_left, x_right, v }
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

/// Constant piece of the full support `[-ℓ, ℓ]`, gaps included (with `v = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub x_left: f64,
    pub x_right: f64,
    pub v: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

/// Piecewise-constant real potential with finite support.
///
/// Segments are stored sorted by `x_left`; outside all segments the
/// potential is exactly zero. The support half-width `ℓ` is the largest
/// `|x|` over segment endpoints, and all scattering amplitudes are
/// referenced at `x = ±ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential1D {
    segments: Vec<Segment>,
    halfwidth: f64,
}

impl Potential1D {
    pub fn new(mut segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.x_left.is_finite() && s.x_right.is_finite() && s.v.is_finite()) {
                return Err(Error::NonFinite("potential segment"));
            }
            if s.x_left >= s.x_right {
                return Err(Error::InvalidModel(format!(
                    "segment [{}, {}] has x_left >= x_right",
                    s.x_left, s.x_right
                )));
            }
        }
        segments.sort_by(|a, b| a.x_left.total_cmp(&b.x_left));
        for pair in segments.windows(2) {
            if pair[0].x_right > pair[1].x_left {
                return Err(Error::InvalidModel(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    pair[0].x_left, pair[0].x_right, pair[1].x_left, pair[1].x_right
                )));
            }
        }
        let halfwidth = segments
            .iter()
            .map(|s| s.x_left.abs().max(s.x_right.abs()))
            .fold(0.0, f64::max);
        Ok(Self {
            segments,
            halfwidth,
        })
    }

    /// V ≡ 0.
    pub fn free() -> Self {
        Self {
            segments: Vec::new(),
            halfwidth: 0.0,
        }
    }

    /// `-depth` on `[-halfwidth, halfwidth]`.
    pub fn square_well(depth: f64, halfwidth: f64) -> Result<Self> {
        Self::new(vec![Segment::new(-halfwidth, halfwidth, -depth)])
    }

    /// `+height` on `[-halfwidth, halfwidth]`.
    pub fn square_barrier(height: f64, halfwidth: f64) -> Result<Self> {
        Self::new(vec![Segment::new(-halfwidth, halfwidth, height)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn is_free(&self) -> bool {
        self.segments.is_empty()
    }

    /// Value of the potential at `x`.
    ///
    /// A point on a shared boundary takes the segment with the larger
    /// `x_left`.
    pub fn potential_at(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .rev()
            .find(|s| s.x_left <= x && x <= s.x_right)
            .map_or(0.0, |s| s.v)
    }

    /// Mirror image `x ↦ -x`.
    pub fn mirrored(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment::new(-s.x_right, -s.x_left, s.v))
            .collect();
        Self::new(segments).expect("mirror of a valid potential is valid")
    }

    /// Partition of `[-ℓ, ℓ]` into constant pieces, left to right.
    pub fn pieces(&self) -> Vec<Piece> {
        let ell = self.halfwidth;
        let mut out = Vec::with_capacity(2 * self.segments.len() + 1);
        let mut cursor = -ell;
        for s in &self.segments {
            if s.x_left > cursor {
                out.push(Piece {
                    x_left: cursor,
                    x_right: s.x_left,
                    v: 0.0,
                });
            }
            out.push(Piece {
                x_left: s.x_left,
                x_right: s.x_right,
                v: s.v,
            });
            cursor = s.x_right;
        }
        if cursor < ell {
            out.push(Piece {
                x_left: cursor,
                x_right: ell,
                v: 0.0,
            });
        }
        out
    }
}
