//! Convex piecewise-linear utilization cost `max(0, max_i(a_i * u - b_i))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn at(&self, u: f64) -> f64 {
        self.slope * u - self.intercept
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseCost {
    segments: Vec<Segment>,
    u_max: f64,
}

impl PiecewiseCost {
    /// Validates that slopes are non-negative and ascending and that
    /// intercepts are non-negative, which makes the cost convex,
    /// non-decreasing and zero at `u = 0`.
    pub fn new(segments: Vec<Segment>, u_max: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::schema("piecewise.segments", "at least one segment required"));
        }
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(Error::Range {
                field: "piecewise.u_max".into(),
                value: u_max,
                expected: "> 0",
            });
        }
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.slope >= 0.0) || !seg.slope.is_finite() {
                return Err(Error::Range {
                    field: format!("piecewise.segments[{i}].slope"),
                    value: seg.slope,
                    expected: ">= 0",
                });
            }
            if !(seg.intercept >= 0.0) || !seg.intercept.is_finite() {
                return Err(Error::Range {
                    field: format!("piecewise.segments[{i}].intercept"),
                    value: seg.intercept,
                    expected: ">= 0",
                });
            }
            if i > 0 && segments[i - 1].slope >= seg.slope {
                return Err(Error::schema(
                    format!("piecewise.segments[{i}]"),
                    "slopes must be strictly ascending",
                ));
            }
        }
        Ok(PiecewiseCost { segments, u_max })
    }

    /// Builds segments from slopes and the breakpoints between consecutive
    /// segments, choosing intercepts so that adjacent pieces meet.
    pub fn from_breakpoints(slopes: &[f64], breakpoints: &[f64], u_max: f64) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::schema(
                "piecewise",
                "need exactly one breakpoint between consecutive slopes",
            ));
        }
        let mut segments = Vec::with_capacity(slopes.len());
        let mut intercept = 0.0;
        segments.push(Segment {
            slope: slopes[0],
            intercept,
        });
        for (i, &bp) in breakpoints.iter().enumerate() {
            // a_i*bp - b_i = a_{i+1}*bp - b_{i+1}
            intercept += (slopes[i + 1] - slopes[i]) * bp;
            segments.push(Segment {
                slope: slopes[i + 1],
                intercept,
            });
        }
        PiecewiseCost::new(segments, u_max)
    }

    /// Default utilization penalty: slopes 1, 3, 10, 70 with breakpoints at
    /// 1/3, 2/3 and 0.9 on `u` in `[0, 1]`.
    pub fn default_utilization() -> Self {
        PiecewiseCost::from_breakpoints(&[1.0, 3.0, 10.0, 70.0], &[1.0 / 3.0, 2.0 / 3.0, 0.9], 1.0)
            .expect("default segments are valid")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Cost at `u`, rejecting values outside `[0, u_max]`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=self.u_max).contains(&u) {
            return Err(Error::OutsideDomain {
                value: u,
                max: self.u_max,
            });
        }
        Ok(self.value(u))
    }

    /// Cost at `u` without the domain check; beyond `u_max` the last
    /// segment is extrapolated.
    pub fn value(&self, u: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.at(u))
            .fold(0.0_f64, f64::max)
    }

    /// Slope of the active segment just above `u`.
    pub fn marginal(&self, u: f64) -> f64 {
        let mut best = (0.0_f64, 0.0_f64);
        for s in &self.segments {
            let v = s.at(u);
            if v > best.0 || (v == best.0 && s.slope > best.1) {
                best = (v, s.slope);
            }
        }
        best.1
    }
}

impl Default for PiecewiseCost {
    fn default() -> Self {
        PiecewiseCost::default_utilization()
    }
}

impl<'de> Deserialize<'de> for PiecewiseCost {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            segments: Vec<Segment>,
            #[serde(default = "one")]
            u_max: f64,
        }
        fn one() -> f64 {
            1.0
        }
        let raw = Raw::deserialize(d)?;
        PiecewiseCost::new(raw.segments, raw.u_max).map_err(serde::de::Error::custom)
    }
}
