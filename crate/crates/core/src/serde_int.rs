//! JSON encoding for big integers: a plain number when it fits in `i64`,
//! otherwise a decimal string.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{de, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(n: &BigInt, ser: S) -> Result<S::Ok, S::Error> {
    match n.to_i64() {
        Some(small) => ser.serialize_i64(small),
        None => ser.serialize_str(&n.to_string()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Small(i64),
    Text(String),
}

pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigInt, D::Error> {
    match Repr::deserialize(de)? {
        Repr::Small(n) => Ok(BigInt::from(n)),
        Repr::Text(s) => s.parse().map_err(de::Error::custom),
    }
}
