//! Piecewise-affine electrostatic potentials on `[0, L]`.
//!
//! Values are electrostatic potentials in volts. The electron potential
//! energy is `-qV`, so with `q = 1` a negative `V` raises the band edge.

use alloc::vec::Vec;

use crate::{Error, Result};

/// One left-closed segment `[start, end)` carrying `V(x) = v0 + slope·(x - start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub v0: f64,
    pub slope: f64,
}

impl Segment {
    pub fn constant(start: f64, end: f64, value: f64) -> Self {
        Self {
            start,
            end,
            v0: value,
            slope: 0.0,
        }
    }

    /// Affine segment through `(start, v_start)` and `(end, v_end)`.
    pub fn affine(start: f64, end: f64, v_start: f64, v_end: f64) -> Self {
        Self {
            start,
            end,
            v0: v_start,
            slope: (v_end - v_start) / (end - start),
        }
    }

    /// Affine formula of this segment, also valid as a limit at `end`.
    pub fn value(&self, x: f64) -> f64 {
        self.v0 + self.slope * (x - self.start)
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_constant(&self) -> bool {
        self.slope == 0.0
    }
}

/// A potential that tiles `[0, L]` with affine segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    segments: Vec<Segment>,
}

impl PiecewisePotential {
    /// Validates that `segments` tile `[0, L]` starting at 0 without gaps.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter {
                name: "segments",
                reason: "at least one segment is required".into(),
            });
        }
        if segments[0].start != 0.0 {
            return Err(Error::InvalidParameter {
                name: "segments",
                reason: alloc::format!("first segment must start at 0, got {}", segments[0].start),
            });
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.end > s.start) || !s.end.is_finite() {
                return Err(Error::OrderingViolation { index: i });
            }
            if !(s.v0.is_finite() && s.slope.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "segments",
                    reason: alloc::format!("segment {i} has a non-finite value"),
                });
            }
            if i > 0 && segments[i - 1].end != s.start {
                return Err(Error::OrderingViolation { index: i });
            }
        }
        Ok(Self { segments })
    }

    /// `V ≡ value` on `[0, length]`.
    pub fn constant(length: f64, value: f64) -> Result<Self> {
        Self::new(alloc::vec![Segment::constant(0.0, length, value)])
    }

    /// Piecewise-constant potential from `(end, value)` steps; the first
    /// step starts at 0 and the last `end` is the domain length.
    pub fn steps(steps: &[(f64, f64)]) -> Result<Self> {
        let mut start = 0.0;
        let mut segments = Vec::with_capacity(steps.len());
        for &(end, value) in steps {
            segments.push(Segment::constant(start, end, value));
            start = end;
        }
        Self::new(segments)
    }

    /// The resonant-tunnelling structure: a linear ramp from 0 at `a1` to
    /// `v_l` at `a6` with `v_b` added on `[a2, a3)` and `[a4, a5)`.
    pub fn rtd(p: &RtdParams) -> Result<Self> {
        let [a1, a2, a3, a4, a5, a6] = p.a;
        let nodes = [0.0, a1, a2, a3, a4, a5, a6, p.length];
        for i in 1..nodes.len() {
            if !(nodes[i] > nodes[i - 1]) || !nodes[i].is_finite() {
                return Err(Error::OrderingViolation { index: i - 1 });
            }
        }
        let ramp = |x: f64| (x - a1) * p.v_l / (a6 - a1);
        let piece = |lo: f64, hi: f64, offset: f64| Segment {
            start: lo,
            end: hi,
            v0: ramp(lo) + offset,
            slope: p.v_l / (a6 - a1),
        };
        Self::new(alloc::vec![
            Segment::constant(0.0, a1, 0.0),
            piece(a1, a2, 0.0),
            piece(a2, a3, p.v_b),
            piece(a3, a4, 0.0),
            piece(a4, a5, p.v_b),
            piece(a5, a6, 0.0),
            Segment::constant(a6, p.length, p.v_l),
        ])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    /// Segment boundaries, including 0 and `L`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        out.push(self.length());
        out
    }

    /// Index of the segment containing `x`; `x = L` maps to the last one.
    pub fn segment_index(&self, x: f64) -> Result<usize> {
        let length = self.length();
        if !(0.0..=length).contains(&x) {
            return Err(Error::OutOfDomain { x, length });
        }
        let idx = self.segments.partition_point(|s| s.end <= x);
        Ok(idx.min(self.segments.len() - 1))
    }

    /// `V(x)` in volts.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.segment_index(x)?;
        Ok(self.segments[i].value(x))
    }

    /// `V(0)`.
    pub fn left_value(&self) -> f64 {
        self.segments[0].v0
    }

    /// `V(L)`.
    pub fn right_value(&self) -> f64 {
        let last = &self.segments[self.segments.len() - 1];
        last.value(last.end)
    }

    pub fn max_abs(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.v0.abs().max(s.value(s.end).abs()))
            .fold(0.0, f64::max)
    }

    /// The potential seen in the reflected coordinate `x' = L - x`.
    pub fn mirrored(&self) -> Self {
        let length = self.length();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                start: length - s.end,
                end: length - s.start,
                v0: s.value(s.end),
                slope: -s.slope,
            })
            .collect::<Vec<_>>();
        // Exact tiling: reuse shared endpoints rather than recomputed differences.
        let mut fixed = segments;
        fixed[0].start = 0.0;
        for i in 1..fixed.len() {
            fixed[i].start = fixed[i - 1].end;
        }
        let n = fixed.len();
        fixed[n - 1].end = length;
        Self { segments: fixed }
    }
}

/// Geometry of the double-barrier structure, lengths in nm and potentials in V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtdParams {
    pub a: [f64; 6],
    pub length: f64,
    pub v_l: f64,
    pub v_b: f64,
}

impl RtdParams {
    /// Double barrier with 5 nm barriers and well, 10 nm spacers, 0.1 V bias
    /// and 0.3 eV barriers on a 135 nm domain.
    pub fn reference() -> Self {
        Self {
            a: [50.0, 60.0, 65.0, 70.0, 75.0, 85.0],
            length: 135.0,
            v_l: 0.1,
            v_b: -0.3,
        }
    }
}
