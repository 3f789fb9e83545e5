use crate::factor::{try_factor, FactorStatus};
use crate::poly::VarId;
use crate::Poly;

/// Nonzero facts are factored when at most this large.
const FACTOR_NONZERO_LIMIT: usize = 200;

/// A nonzero fact reduced to the zero polynomial, or an OR-group lost all of
/// its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contradiction;

/// Known nonzero facts and OR-groups (at least one member nonzero).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InequalitySet {
    nonzero: Vec<Poly>,
    or_groups: Vec<Vec<Poly>>,
}

impl InequalitySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonzero(&self) -> &[Poly] {
        &self.nonzero
    }

    pub fn or_groups(&self) -> &[Vec<Poly>] {
        &self.or_groups
    }

    pub fn is_empty(&self) -> bool {
        self.nonzero.is_empty() && self.or_groups.is_empty()
    }

    /// Records `p != 0` together with its factors. Returns whether anything
    /// new was learned.
    pub fn insert_nonzero(&mut self, p: &Poly) -> Result<bool, Contradiction> {
        if p.is_zero() {
            return Err(Contradiction);
        }
        if p.is_constant() {
            return Ok(false);
        }
        let q = p.primitive_normalized();
        if self.nonzero.contains(&q) {
            return Ok(false);
        }
        let mut pieces = vec![q.clone()];
        if q.term_count() <= FACTOR_NONZERO_LIMIT {
            if let Ok(f) = try_factor(&q) {
                if f.is_nontrivial() {
                    pieces.extend(f.factors.into_iter().map(|(g, _)| g));
                }
            }
        } else {
            let (mono, _) = q.strip_monomial();
            pieces.extend(mono.pairs().iter().map(|&(v, _)| Poly::var(v)));
        }
        let mut learned = false;
        for piece in pieces {
            if !self.nonzero.contains(&piece) {
                self.nonzero.push(piece);
                learned = true;
            }
        }
        self.drop_satisfied_groups();
        Ok(learned)
    }

    pub fn insert_or_group(&mut self, members: &[Poly]) -> Result<(), Contradiction> {
        let mut group: Vec<Poly> = Vec::new();
        for m in members {
            if m.is_zero() {
                continue;
            }
            if m.is_constant() {
                return Ok(());
            }
            let q = m.primitive_normalized();
            if !group.contains(&q) {
                group.push(q);
            }
        }
        match group.len() {
            0 => Err(Contradiction),
            1 => self.insert_nonzero(&group[0]).map(|_| ()),
            _ => {
                if !self.or_groups.contains(&group) {
                    self.or_groups.push(group);
                }
                self.drop_satisfied_groups();
                Ok(())
            }
        }
    }

    fn drop_satisfied_groups(&mut self) {
        let nz = &self.nonzero;
        self.or_groups.retain(|g| !g.iter().any(|m| nz.contains(m)));
    }

    /// Whether `p != 0` follows from the recorded facts: a nonzero constant,
    /// a recorded fact, or a product of recorded facts.
    pub fn is_known_nonzero(&self, p: &Poly) -> bool {
        if p.is_zero() {
            return false;
        }
        if p.is_constant() {
            return true;
        }
        let q = p.primitive_normalized();
        if self.nonzero.contains(&q) {
            return true;
        }
        let (mono, rest) = q.strip_monomial();
        if !mono.is_one() {
            let vars_ok = mono.pairs().iter().all(|&(v, _)| self.nonzero.contains(&Poly::var(v)));
            if !vars_ok {
                return false;
            }
            if rest.is_constant() || self.nonzero.contains(&rest.primitive_normalized()) {
                return true;
            }
        }
        if rest.term_count() <= FACTOR_NONZERO_LIMIT && !rest.is_constant() {
            if let Ok(f) = try_factor(&rest) {
                if f.status != FactorStatus::Untested && f.is_nontrivial() {
                    return f.factors.iter().all(|(g, _)| self.nonzero.contains(g));
                }
            }
        }
        false
    }

    /// Records that `p = 0` holds: OR-group members equal to `p` are removed.
    pub fn decide_zero(&mut self, p: &Poly) -> Result<(), Contradiction> {
        let q = p.primitive_normalized();
        if self.nonzero.contains(&q) {
            return Err(Contradiction);
        }
        let mut collapsed = Vec::new();
        for g in &mut self.or_groups {
            g.retain(|m| *m != q);
            if g.len() <= 1 {
                collapsed.push(g.clone());
            }
        }
        self.or_groups.retain(|g| g.len() > 1);
        for g in collapsed {
            match g.first() {
                None => return Err(Contradiction),
                Some(m) => {
                    self.insert_nonzero(m)?;
                }
            }
        }
        Ok(())
    }

    /// Applies `v := num/den` fraction-free to every fact.
    pub fn substitute(&self, v: VarId, num: &Poly, den: &Poly) -> Result<InequalitySet, Contradiction> {
        let mut out = InequalitySet::new();
        for p in &self.nonzero {
            let q = if p.contains_var(v) { p.substitute_ratfun(v, num, den).map_err(|_| Contradiction)? } else { p.clone() };
            out.insert_nonzero(&q)?;
        }
        for g in &self.or_groups {
            let mut members = Vec::with_capacity(g.len());
            for p in g {
                let q = if p.contains_var(v) { p.substitute_ratfun(v, num, den).map_err(|_| Contradiction)? } else { p.clone() };
                members.push(q);
            }
            out.insert_or_group(&members)?;
        }
        Ok(out)
    }
}
