//! Error-probability curves and their CSV representation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header shared by every curve file.
pub const CSV_HEADER: &str = "M,n,m,snr_db,value,uncertainty,method,seed";

/// Quantizer resolution; `Infinite` stands for an unquantized phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resolution {
    Bits(u32),
    Infinite,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(n) => write!(f, "{n}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Resolution::Infinite),
            t => t
                .parse::<u32>()
                .map(Resolution::Bits)
                .map_err(|_| Error::Parse(format!("bad bit count {t:?}"))),
        }
    }
}

impl From<u32> for Resolution {
    fn from(n: u32) -> Self {
        Resolution::Bits(n)
    }
}

/// How a curve value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Theorem3,
    QpskClosed,
    QpskRayleigh,
    Asymptotic,
    LowerBound,
    UpperBound,
    P1,
    P2,
    P3,
    P4,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::MonteCarlo,
        Method::Theorem3,
        Method::QpskClosed,
        Method::QpskRayleigh,
        Method::Asymptotic,
        Method::LowerBound,
        Method::UpperBound,
        Method::P1,
        Method::P2,
        Method::P3,
        Method::P4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "montecarlo",
            Method::Theorem3 => "theorem3",
            Method::QpskClosed => "qpsk_closed",
            Method::QpskRayleigh => "qpsk_rayleigh",
            Method::Asymptotic => "asymptotic",
            Method::LowerBound => "bound_lower",
            Method::UpperBound => "bound_upper",
            Method::P1 => "p1",
            Method::P2 => "p2",
            Method::P3 => "p3",
            Method::P4 => "p4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method tag {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepPoint {
    pub snr_db: f64,
    pub value: f64,
    /// Standard error for simulated points, quadrature error otherwise.
    pub uncertainty: f64,
}

/// Average symbol error probability against SNR for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SepCurve {
    pub order: usize,
    pub resolution: Resolution,
    pub shape: f64,
    pub method: Method,
    pub seed: Option<u64>,
    pub points: Vec<SepPoint>,
}

impl SepCurve {
    pub fn new(order: usize, resolution: Resolution, shape: f64, method: Method) -> Self {
        Self {
            order,
            resolution,
            shape,
            method,
            seed: None,
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, snr_db: f64, value: f64, uncertainty: f64) {
        self.points.push(SepPoint {
            snr_db,
            value,
            uncertainty,
        });
    }

    /// Data rows without the header.
    pub fn csv_rows(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.order,
                self.resolution,
                self.shape,
                p.snr_db,
                p.value,
                p.uncertainty,
                self.method,
                seed
            ));
        }
        out
    }

    /// Parses a curve file; consecutive rows sharing
    /// `(M, n, m, method, seed)` form one curve.
    pub fn parse_csv(text: &str) -> Result<Vec<SepCurve>> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header {CSV_HEADER:?}, found {other:?}"
                )))
            }
        }
        let mut curves: Vec<SepCurve> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::Parse(format!(
                    "row {}: expected 8 fields, found {}",
                    lineno + 2,
                    f.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {s:?}", lineno + 2)))
            };
            let order = f[0]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("row {}: bad M {:?}", lineno + 2, f[0])))?;
            let resolution: Resolution = f[1].parse()?;
            let shape = num(f[2])?;
            let point = SepPoint {
                snr_db: num(f[3])?,
                value: num(f[4])?,
                uncertainty: num(f[5])?,
            };
            let method: Method = f[6].parse()?;
            let seed = if f[7].is_empty() {
                None
            } else {
                Some(f[7].parse::<u64>().map_err(|_| {
                    Error::Parse(format!("row {}: bad seed {:?}", lineno + 2, f[7]))
                })?)
            };
            let same = curves.last().is_some_and(|c| {
                c.order == order
                    && c.resolution == resolution
                    && c.shape.to_bits() == shape.to_bits()
                    && c.method == method
                    && c.seed == seed
            });
            if !same {
                let mut c = SepCurve::new(order, resolution, shape, method);
                c.seed = seed;
                curves.push(c);
            }
            curves.last_mut().expect("just pushed").points.push(point);
        }
        Ok(curves)
    }
}

/// Header plus the rows of every curve.
pub fn curves_to_csv(curves: &[SepCurve]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in curves {
        out.push_str(&c.csv_rows());
    }
    out
}
