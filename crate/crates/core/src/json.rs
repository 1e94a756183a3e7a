//! JSON helpers for exact integers of any size.

use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

/// Serializes a big integer as a bare JSON number, whatever its size.
pub struct BigNumber<'a>(pub &'a BigUint);

impl Serialize for BigNumber<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n =
            serde_json::Number::from_str(&self.0.to_string()).map_err(serde::ser::Error::custom)?;
        n.serialize(serializer)
    }
}

/// `serialize_with` adapter for `BigUint` fields.
pub fn big_number<S: Serializer>(v: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
    BigNumber(v).serialize(serializer)
}
