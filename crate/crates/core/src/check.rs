//! Residuals of verified identities and their pass/fail/exhausted verdicts.

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::Error;
use crate::laurent::EXACT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    /// Not enough digits to decide.
    Exhausted,
    Fail,
}

impl Status {
    /// The worse of two verdicts.
    pub fn and(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn from_error(e: &Error) -> Status {
        if e.is_precision_exhaustion() {
            Status::Exhausted
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Exhausted => "exhausted",
            Status::Fail => "fail",
        }
    }
}

/// u-adic size of `lhs - rhs`: the smallest known nonzero valuation (`None`
/// when every known digit vanishes) and the precision it was computed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Residual {
    pub valuation: Option<i64>,
    pub precision: i64,
    /// Precision below which a vanishing residual proves nothing.
    pub required: i64,
}

impl Residual {
    pub fn new(valuation: Option<i64>, precision: i64, required: i64) -> Self {
        Residual { valuation, precision, required }
    }

    pub fn status(&self) -> Status {
        match self.valuation {
            Some(_) => Status::Fail,
            None if self.precision >= self.required => Status::Pass,
            None => Status::Exhausted,
        }
    }

    pub fn pass(&self) -> bool {
        self.status() == Status::Pass
    }
}

impl Serialize for Residual {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Residual", 4)?;
        match self.valuation {
            Some(v) => st.serialize_field("residual_valuation", &v)?,
            None => st.serialize_field("residual_valuation", "infinity")?,
        }
        if self.precision == EXACT {
            st.serialize_field("precision", "exact")?;
        } else {
            st.serialize_field("precision", &self.precision)?;
        }
        st.serialize_field("pass", &self.pass())?;
        st.serialize_field("status", &self.status())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert_eq!(Residual::new(None, 100, 96).status(), Status::Pass);
        assert_eq!(Residual::new(None, 10, 96).status(), Status::Exhausted);
        assert_eq!(Residual::new(Some(3), 100, 96).status(), Status::Fail);
        assert_eq!(Status::Pass.and(Status::Exhausted).and(Status::Pass), Status::Exhausted);
        assert_eq!(Status::Exhausted.and(Status::Fail), Status::Fail);
    }

    #[test]
    fn wire_form() {
        let r = Residual::new(None, EXACT, 0);
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"residual_valuation":"infinity","precision":"exact","pass":true,"status":"pass"}"#
        );
        let r = Residual::new(Some(-2), 40, 96);
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"residual_valuation":-2,"precision":40,"pass":false,"status":"fail"}"#
        );
    }
}
