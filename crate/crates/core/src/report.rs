//! JSON encodings shared by reports: exact costs travel as strings with a
//! parallel decimal field, since JSON numbers cannot carry rationals.

use serde::{Deserialize, Serialize};

use crate::scalar::{parse_rational, Cost, Dual, Scalar};

/// Serialized form of a cost: `value` is the canonical token (prefixed with
/// `~` when the cost was computed in float mode), `decimal` its standard part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRepr {
    pub value: String,
    pub decimal: f64,
}

impl From<Cost> for CostRepr {
    fn from(c: Cost) -> Self {
        let value = if c.is_exact() { c.to_string() } else { format!("~{c}") };
        CostRepr { value, decimal: c.standard.to_f64() }
    }
}

impl CostRepr {
    pub fn to_cost(&self) -> Result<Cost, crate::Error> {
        match self.value.strip_prefix('~') {
            Some(approx) => Dual::parse_approx(approx),
            None => Dual::parse(&self.value),
        }
    }
}

pub mod cost_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(cost: &Cost, s: S) -> Result<S::Ok, S::Error> {
        CostRepr::from(*cost).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Cost, D::Error> {
        use serde::de::Error as _;
        CostRepr::deserialize(d)?.to_cost().map_err(D::Error::custom)
    }
}

pub mod opt_cost_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(cost: &Option<Cost>, s: S) -> Result<S::Ok, S::Error> {
        cost.map(CostRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Cost>, D::Error> {
        use serde::de::Error as _;
        Option::<CostRepr>::deserialize(d)?.map(|r| r.to_cost().map_err(D::Error::custom)).transpose()
    }
}

pub mod opt_scalar_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|x| CostRepr::from(Dual::real(x))).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
        use serde::de::Error as _;
        Option::<CostRepr>::deserialize(d)?
            .map(|r| r.to_cost().map(|c| c.standard).map_err(D::Error::custom))
            .transpose()
    }
}

/// A rational written as `"p/q"`; integers and decimals are accepted on input.
pub mod rational_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        super::rational_from_json(&v).map_err(D::Error::custom)
    }
}

/// Accepts `"p/q"`, `"0.5"`, or a JSON number.
pub fn rational_from_json(v: &serde_json::Value) -> Result<num_rational::Rational64, crate::Error> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(crate::Error::Parse(format!("expected a rational, found {other}"))),
    }
}

pub mod opt_rational_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
        r.map(|r| r.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational64>, D::Error> {
        use serde::de::Error as _;
        Option::<serde_json::Value>::deserialize(d)?
            .map(|v| super::rational_from_json(&v).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod rational_vec {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational64>, D::Error> {
        use serde::de::Error as _;
        Vec::<serde_json::Value>::deserialize(d)?
            .iter()
            .map(|v| super::rational_from_json(v).map_err(D::Error::custom))
            .collect()
    }
}
