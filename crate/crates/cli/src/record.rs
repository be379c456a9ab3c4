use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use toric_wkstab::rational::{fmt_f64, fmt_q, parse_q};
use toric_wkstab::{Value, Q};

/// A reported number: exact rational, or a float rounded to 12 significant
/// digits. Infinite floats are written as the strings `"inf"`/`"-inf"`.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Float(f64),
}

impl Scalar {
    /// Rounds to the 12 digits used in every report, so that serialized
    /// records read back to equal values.
    pub fn float(x: f64) -> Self {
        Scalar::Float(if x.is_finite() { fmt_f64(x).parse().unwrap() } else { x })
    }

    pub fn from_value(v: &Value) -> Self {
        match v {
            Value::Exact(q) => Scalar::Exact(q.clone()),
            Value::Approx { value, .. } => Scalar::float(*value),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => toric_wkstab::rational::to_f64(q),
            Scalar::Float(x) => *x,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => f.write_str(&fmt_q(q)),
            Scalar::Float(x) => {
                let s = fmt_f64(*x);
                // keep floats distinguishable from integers when read back
                if s.contains(['.', 'e', 'n']) {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

impl FromStr for Scalar {
    type Err = toric_wkstab::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(Scalar::Float(f64::INFINITY)),
            "-inf" => Ok(Scalar::Float(f64::NEG_INFINITY)),
            "nan" => Ok(Scalar::Float(f64::NAN)),
            _ if s.contains(['.', 'e', 'E']) => s
                .parse()
                .map(Scalar::Float)
                .map_err(|_| toric_wkstab::Error::Parse(format!("bad number {s:?}"))),
            _ => parse_q(s).map(Scalar::Exact),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Float(x) if x.is_finite() => s.serialize_f64(*x),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a \"p/q\" string")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Scalar, E> {
                Ok(Scalar::Float(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Scalar, E> {
                Ok(Scalar::Float(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Scalar, E> {
                Ok(Scalar::Float(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Scalar, E> {
                s.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod qser {
    use super::*;

    fn parse<E: de::Error>(s: &str) -> Result<Q, E> {
        parse_q(s).map_err(E::custom)
    }

    pub mod one {
        use super::*;
        pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&fmt_q(x))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
            parse(&String::deserialize(d)?)
        }
    }

    pub mod opt {
        use super::*;
        pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            x.as_ref().map(fmt_q).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            Option::<String>::deserialize(d)?.map(|s| parse(&s)).transpose()
        }
    }

    pub mod opt_vec {
        use super::*;
        pub fn serialize<S: Serializer>(x: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
            x.as_ref().map(|v| v.iter().map(fmt_q).collect::<Vec<_>>()).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Q>>, D::Error> {
            Option::<Vec<String>>::deserialize(d)?
                .map(|v| v.iter().map(|s| parse(s)).collect())
                .transpose()
        }
    }
}

/// Outcome of one sweep entry. Failed entries keep their `eps` and carry
/// the error in `lp_status`; the numeric fields are then null.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(with = "qser::one")]
    pub eps: Q,
    #[serde(with = "qser::opt_vec")]
    pub ell_coeffs: Option<Vec<Q>>,
    pub c_value: Option<Scalar>,
    pub delta: Option<Scalar>,
    /// `optimal`, `infeasible`, or `error: <message>`.
    pub lp_status: String,
    pub wall_time_ms: u64,
}

impl SweepRecord {
    pub fn failed(eps: Q, message: impl fmt::Display, wall_time_ms: u64) -> Self {
        Self {
            eps,
            ell_coeffs: None,
            c_value: None,
            delta: None,
            lp_status: format!("error: {message}"),
            wall_time_ms,
        }
    }

    pub fn is_error(&self) -> bool {
        self.lp_status.starts_with("error")
    }

    pub fn delta_f64(&self) -> Option<f64> {
        self.delta.as_ref().map(Scalar::to_f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Largest sampled `eps` such that every sampled `eps' <= eps` has
    /// `delta > 0`. Evidence for a lower bound on the openness radius only.
    #[serde(with = "qser::opt")]
    pub largest_positive_eps: Option<Q>,
    pub destabilized: usize,
    pub failed: usize,
    pub note: String,
}

/// A complete sweep: records in request order plus the context needed to
/// interpret them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub dim: usize,
    pub refinement: u32,
    #[serde(with = "qser::opt_vec")]
    pub base_point: Option<Vec<Q>>,
    pub quadrature_degree: Option<u32>,
    pub seed: Option<u64>,
    pub sigma_convention: String,
    pub caveat: String,
    /// Triangulation of each `P_eps`, parallel to `records`.
    pub triangulation_ids: Vec<Option<String>>,
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

pub const SIGMA_CONVENTION: &str = "on a facet with primitive inward normal u, dsigma is Lebesgue measure \
divided by |u|, so fundamental cells of the facet lattice have unit mass";

pub const SUMMARY_NOTE: &str = "largest_positive_eps is sampled evidence for the openness radius, not a bound";

impl SweepSummary {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let mut sorted: Vec<&SweepRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.eps.cmp(&b.eps));
        let largest_positive_eps = sorted
            .iter()
            .take_while(|r| r.delta_f64().is_some_and(|d| d > 0.0))
            .last()
            .map(|r| r.eps.clone());
        Self {
            largest_positive_eps,
            destabilized: records.iter().filter(|r| r.delta_f64().is_some_and(|d| d < 0.0)).count(),
            failed: records.iter().filter(|r| r.is_error()).count(),
            note: SUMMARY_NOTE.into(),
        }
    }
}
