use std::fmt;

use serde::{Deserialize, Serialize};

/// Role of a symbol on the jet bundle and its cotangent/multiplier extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarRole {
    Time,
    Discount,
    Position,
    Velocity,
    SecondVelocity,
    Momentum,
    Multiplier,
    MultiplierRate,
}

/// A named variable. Indices are zero-based internally and printed one-based
/// (`X(0)` prints as `x_1`).
///
/// `Discount` stands for the time function `E_a(-rho t^a)`; it is opaque to
/// the partial derivatives in x, y and p, and its time derivative follows the
/// eigenfunction relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarId {
    Time,
    Discount,
    X(usize),
    Y(usize),
    Y2(usize),
    P(usize),
    Lambda,
    DLambda,
}

impl VarId {
    pub fn role(self) -> VarRole {
        match self {
            VarId::Time => VarRole::Time,
            VarId::Discount => VarRole::Discount,
            VarId::X(_) => VarRole::Position,
            VarId::Y(_) => VarRole::Velocity,
            VarId::Y2(_) => VarRole::SecondVelocity,
            VarId::P(_) => VarRole::Momentum,
            VarId::Lambda => VarRole::Multiplier,
            VarId::DLambda => VarRole::MultiplierRate,
        }
    }

    /// Coordinate index for indexed roles.
    pub fn index(self) -> Option<usize> {
        match self {
            VarId::X(i) | VarId::Y(i) | VarId::Y2(i) | VarId::P(i) => Some(i),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        self.to_string()
    }

    /// Parses a canonical name or one of the aliases `x`, `y`, `y2`, `p`
    /// (coordinate 1) and `K`, `I`, `N` (capital, investment, labor as
    /// `x_1`, `x_2`, `x_3`).
    pub fn parse(name: &str) -> Option<VarId> {
        let indexed = |prefix: &str| -> Option<usize> {
            let rest = name.strip_prefix(prefix)?;
            let k: usize = rest.parse().ok()?;
            (k >= 1).then(|| k - 1)
        };
        Some(match name {
            "t" => VarId::Time,
            "E" => VarId::Discount,
            "lambda" => VarId::Lambda,
            "dlambda" => VarId::DLambda,
            "x" | "K" => VarId::X(0),
            "I" => VarId::X(1),
            "N" => VarId::X(2),
            "y" => VarId::Y(0),
            "y2" => VarId::Y2(0),
            "p" => VarId::P(0),
            _ => {
                if let Some(i) = indexed("y2_") {
                    VarId::Y2(i)
                } else if let Some(i) = indexed("x_") {
                    VarId::X(i)
                } else if let Some(i) = indexed("y_") {
                    VarId::Y(i)
                } else if let Some(i) = indexed("p_") {
                    VarId::P(i)
                } else {
                    return None;
                }
            }
        })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Time => write!(f, "t"),
            VarId::Discount => write!(f, "E"),
            VarId::X(i) => write!(f, "x_{}", i + 1),
            VarId::Y(i) => write!(f, "y_{}", i + 1),
            VarId::Y2(i) => write!(f, "y2_{}", i + 1),
            VarId::P(i) => write!(f, "p_{}", i + 1),
            VarId::Lambda => write!(f, "lambda"),
            VarId::DLambda => write!(f, "dlambda"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in [
            VarId::Time,
            VarId::Discount,
            VarId::X(0),
            VarId::Y(4),
            VarId::Y2(1),
            VarId::P(2),
            VarId::Lambda,
            VarId::DLambda,
        ] {
            assert_eq!(VarId::parse(&v.name()), Some(v));
        }
        assert_eq!(VarId::parse("N"), Some(VarId::X(2)));
        assert_eq!(VarId::parse("x_0"), None);
        assert_eq!(VarId::parse("z"), None);
        assert_eq!(VarId::Y2(3).role(), VarRole::SecondVelocity);
    }
}
