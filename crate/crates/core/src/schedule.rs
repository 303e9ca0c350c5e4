//! Annealing schedules `A(s)`, `B(s)` in GHz (linear frequency) over `s ∈ [0, 1]`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::WorldlineCost;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schedule file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Linear,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub s: f64,
    #[serde(rename = "A_GHz")]
    pub a: f64,
    #[serde(rename = "B_GHz")]
    pub b: f64,
}

/// Piecewise-linear interpolation of tabulated `(s, A, B)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub name: String,
    pub kind: ScheduleKind,
    points: Vec<SchedulePoint>,
}

const DW2X_APPROX_CSV: &str = include_str!("../schedules/dw2x-approx.csv");
const LINEAR_CSV: &str = include_str!("../schedules/linear.csv");

impl AnnealSchedule {
    pub fn new(name: impl Into<String>, kind: ScheduleKind, points: Vec<SchedulePoint>) -> Result<Self, ScheduleError> {
        let bad = |m: String| Err(ScheduleError::Invalid(m));
        if points.len() < 2 {
            return bad("need at least two points".into());
        }
        if points[0].s != 0.0 || points[points.len() - 1].s != 1.0 {
            return bad("s must run from 0 to 1".into());
        }
        if let Some(w) = points.windows(2).find(|w| !(w[1].s > w[0].s)) {
            return bad(format!("s not strictly increasing at {}", w[1].s));
        }
        if let Some(p) = points.iter().find(|p| !(p.a >= 0.0 && p.b >= 0.0) || !p.a.is_finite() || !p.b.is_finite()) {
            return bad(format!("negative or non-finite amplitude at s = {}", p.s));
        }
        Ok(Self { name: name.into(), kind, points })
    }

    /// `A(s) = a0 (1 − s)`, `B(s) = b0 s`.
    pub fn linear(a0: f64, b0: f64) -> Self {
        Self::new(
            "linear",
            ScheduleKind::Linear,
            vec![SchedulePoint { s: 0.0, a: a0, b: 0.0 }, SchedulePoint { s: 1.0, a: 0.0, b: b0 }],
        )
        .expect("valid linear schedule")
    }

    /// Hand-built approximation of the D-Wave 2X schedule.
    pub fn dw2x_approx() -> Self {
        Self::from_csv_str("dw2x-approx", DW2X_APPROX_CSV).expect("bundled schedule parses")
    }

    /// `"linear"`, `"dw2x"`/`"dw2x-approx"`, or a path to a CSV file.
    pub fn load(spec: &str) -> Result<Self, ScheduleError> {
        match spec {
            "linear" => Self::from_csv_str("linear", LINEAR_CSV),
            "dw2x" | "dw2x-approx" => Ok(Self::dw2x_approx()),
            path => {
                let path = Path::new(path);
                let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom").to_owned();
                Self::from_csv_str(&name, &std::fs::read_to_string(path)?)
            }
        }
    }

    /// Parses `s,A_GHz,B_GHz` rows; `#` lines are comments. A two-point
    /// table with the linear shape is tagged as linear.
    pub fn from_csv_str(name: &str, src: &str) -> Result<Self, ScheduleError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(src.as_bytes());
        let points = reader.deserialize().collect::<Result<Vec<SchedulePoint>, _>>()?;
        let linear = points.len() == 2 && points[0].b == 0.0 && points[1].a == 0.0;
        let kind = if linear { ScheduleKind::Linear } else { ScheduleKind::Tabulated };
        Self::new(name, kind, points)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.points {
            w.serialize(p).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn points(&self) -> &[SchedulePoint] {
        &self.points
    }

    /// `(A(s), B(s))`, with `s` clamped to `[0, 1]`.
    pub fn at(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let i = self.points.partition_point(|p| p.s <= s).clamp(1, self.points.len() - 1);
        let (p, q) = (self.points[i - 1], self.points[i]);
        let x = (s - p.s) / (q.s - p.s);
        (p.a + (q.a - p.a) * x, p.b + (q.b - p.b) * x)
    }

    pub fn a(&self, s: f64) -> f64 {
        self.at(s).0
    }

    pub fn b(&self, s: f64) -> f64 {
        self.at(s).1
    }

    /// Worldline cost model that goes with this schedule.
    pub fn worldline_cost(&self) -> WorldlineCost {
        match self.kind {
            ScheduleKind::Linear => WorldlineCost::Linear,
            ScheduleKind::Tabulated => WorldlineCost::Dw2x,
        }
    }
}
