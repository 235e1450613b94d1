//! JSON encoding of extended reals: `-inf` and `inf` become strings, `NaN` becomes `null`.

use serde::ser::SerializeSeq;
use serde::Serializer;

pub(crate) fn ext_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn ext_real_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&Ext(*x))?;
    }
    seq.end()
}

/// Newtype for embedding an extended real inside other serialized values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ext(pub f64);

impl serde::Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ext_real(&self.0, s)
    }
}
