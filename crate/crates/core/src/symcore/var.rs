use std::fmt;

use super::expr::Expr;

/// Which family of x-dependent functions a jet variable belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Field {
    /// Flat coordinates `v^α`.
    V,
    /// Canonical coordinates `u^i`.
    U,
    /// Target coordinates `w^α` of a coordinate change.
    W,
    /// Formal test covectors `a, b, c` used by the Schouten criterion.
    Test(u8),
    /// Marker jets for Taylor expansion of substitutions.
    Delta,
}

impl Field {
    pub fn prefix(self) -> &'static str {
        match self {
            Field::V => "v",
            Field::U => "u",
            Field::W => "w",
            Field::Test(0) => "a",
            Field::Test(1) => "b",
            Field::Test(_) => "c",
            Field::Delta => "d",
        }
    }
}

/// An indeterminate of the expression kernel.
///
/// Coordinate indices are 1-based as in the usual notation `v1, v2, ...`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Var {
    Jet {
        field: Field,
        idx: u32,
        order: u32,
    },
    Time {
        idx: u32,
        level: u32,
    },
    OnePoint {
        idx: u32,
        level: u32,
    },
    Lambda,
    Eps,
    /// Scratch unknowns (linear-system ansatz coefficients, expansion points).
    Aux(u32),
    /// Opaque `log(arg)` atom.
    Log(Box<Expr>),
}

impl Var {
    pub fn jet(field: Field, idx: u32, order: u32) -> Var {
        Var::Jet { field, idx, order }
    }

    pub fn v(idx: u32) -> Var {
        Var::jet(Field::V, idx, 0)
    }

    pub fn u(idx: u32) -> Var {
        Var::jet(Field::U, idx, 0)
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Var::Jet { .. })
    }

    /// Jet order if this is a jet variable.
    pub fn jet_order(&self) -> Option<u32> {
        match self {
            Var::Jet { order, .. } => Some(*order),
            _ => None,
        }
    }

    pub fn jet_field(&self) -> Option<Field> {
        match self {
            Var::Jet { field, .. } => Some(*field),
            _ => None,
        }
    }

    /// The next x-derivative of a jet variable.
    pub fn next_jet(&self) -> Option<Var> {
        match self {
            Var::Jet { field, idx, order } => Some(Var::jet(*field, *idx, order + 1)),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Jet { field, idx, order } => {
                if *order == 0 {
                    write!(f, "{}{}", field.prefix(), idx)
                } else {
                    write!(f, "{}{}_{}", field.prefix(), idx, order)
                }
            }
            Var::Time { idx, level } => write!(f, "t{idx}_{level}"),
            Var::OnePoint { idx, level } => write!(f, "f{idx}_{level}"),
            Var::Lambda => write!(f, "lambda"),
            Var::Eps => write!(f, "eps"),
            Var::Aux(k) => write!(f, "k{k}"),
            Var::Log(arg) => write!(f, "log({arg})"),
        }
    }
}
