use std::fmt;

use super::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// `Σ coef·var + constant` with terms sorted by variable and merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearExpr {
    terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    /// Merges duplicate variables and drops zero coefficients.
    pub fn new(mut terms: Vec<(VarId, f64)>, constant: f64) -> Self {
        terms.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        LinearExpr { terms: merged, constant }
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v]).sum::<f64>()
    }

    /// `Σ |coef·value| + |constant|`, the scale rounding errors grow with.
    pub fn magnitude(&self, values: &[f64]) -> f64 {
        self.constant.abs() + self.terms.iter().map(|&(v, c)| (c * values[v]).abs()).sum::<f64>()
    }
}
