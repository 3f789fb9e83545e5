use std::collections::{BTreeMap, BTreeSet};

use crate::factor::{FactorStatus, Factorization};
use crate::poly::VarId;
use crate::Poly;

/// Statistics cached alongside an equation; recomputed whenever the
/// polynomial changes.
#[derive(Debug, Clone, PartialEq)]
pub struct EqProps {
    pub vars: BTreeSet<VarId>,
    pub term_count: usize,
    pub degrees: BTreeMap<VarId, u32>,
    pub linear_vars: BTreeSet<VarId>,
    /// `None` until module 77 has looked at the equation.
    pub factors: Option<Factorization>,
}

/// A nonzero polynomial `poly = 0`, primitive with positive leading
/// coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    poly: Poly,
    props: EqProps,
}

impl Equation {
    /// Normalizes `p`; `None` for the zero polynomial.
    pub fn new(p: &Poly) -> Option<Equation> {
        if p.is_zero() {
            return None;
        }
        let poly = p.primitive_normalized();
        let degrees: BTreeMap<VarId, u32> = poly.degrees().into_iter().collect();
        let props = EqProps {
            vars: degrees.keys().copied().collect(),
            term_count: poly.term_count(),
            linear_vars: degrees.iter().filter(|(_, &d)| d == 1).map(|(v, _)| *v).collect(),
            degrees,
            factors: None,
        };
        Some(Equation { poly, props })
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn props(&self) -> &EqProps {
        &self.props
    }

    pub fn term_count(&self) -> usize {
        self.props.term_count
    }

    pub fn var_count(&self) -> usize {
        self.props.vars.len()
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.props.degrees.get(&v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.props.vars.is_empty()
    }

    pub fn is_univariate(&self) -> bool {
        self.props.vars.len() == 1
    }

    pub fn factors(&self) -> Option<&Factorization> {
        self.props.factors.as_ref()
    }

    pub fn factor_status(&self) -> Option<FactorStatus> {
        self.props.factors.as_ref().map(|f| f.status)
    }

    pub fn set_factors(&mut self, f: Factorization) {
        self.props.factors = Some(f);
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }
}
