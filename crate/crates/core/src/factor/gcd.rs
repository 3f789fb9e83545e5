//! Multivariate gcd over the rationals by recursive primitive remainder
//! sequences.

use std::collections::HashMap;

use super::roots::to_zpoly;
use super::univar;
use crate::poly::{Mono, VarId};
use crate::scalar::{rat_gcd, Rat};
use crate::Poly;

/// Greatest common divisor of two polynomials.
///
/// The numeric part is the gcd of the rational contents, the monomial part the
/// componentwise minimum, and the rest is computed on primitive parts. The
/// result divides both inputs exactly and has a positive leading coefficient.
pub fn multivar_gcd(p: &Poly, q: &Poly) -> Poly {
    match (p.is_zero(), q.is_zero()) {
        (true, true) => return Poly::zero(),
        (true, false) => return sign_normalize(q),
        (false, true) => return sign_normalize(p),
        _ => {}
    }
    let (cp, mp, pp) = p.content_primitive().expect("nonzero");
    let (cq, mq, pq) = q.content_primitive().expect("nonzero");
    let num = rat_gcd(&cp, &cq);
    let mono = mp.gcd(&mq);
    let g = gcd_primitive(&pp, &pq);
    g.mul_mono(&mono, &num)
}

fn sign_normalize(p: &Poly) -> Poly {
    if p.leading().map(|t| t.1 < Rat::from_integer(0.into())).unwrap_or(false) {
        p.neg()
    } else {
        p.clone()
    }
}

/// Primitive gcd of a list, short-circuiting at 1.
pub(crate) fn gcd_many<'a>(items: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut g: Option<Poly> = None;
    for it in items {
        if it.is_zero() {
            continue;
        }
        let (_, m, prim) = it.content_primitive().expect("nonzero");
        let it_prim = prim.mul_mono(&m, &Rat::from_integer(1.into()));
        g = Some(match g {
            None => it_prim,
            Some(acc) => {
                let (_, ma, pa) = acc.content_primitive().expect("nonzero");
                let mono = ma.gcd(&m);
                gcd_primitive(&pa, &prim).mul_mono(&mono, &Rat::from_integer(1.into()))
            }
        });
        if g.as_ref().map(|x| x.is_constant()).unwrap_or(false) {
            return Poly::one();
        }
    }
    g.unwrap_or_else(Poly::zero)
}

/// gcd of primitive polynomials without monomial content.
pub(crate) fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    let va = a.vars();
    let vb = b.vars();
    // a variable present on one side only cannot occur in the gcd
    if let Some(&v) = va.difference(&vb).next() {
        return gcd_with_coefficients(a, v, b);
    }
    if let Some(&v) = vb.difference(&va).next() {
        return gcd_with_coefficients(b, v, a);
    }
    if a.term_count() <= b.term_count() {
        if let Some(_) = b.div_exact(a) {
            return a.primitive_normalized();
        }
    } else if let Some(_) = a.div_exact(b) {
        return b.primitive_normalized();
    }
    match ruled_out_by_images(a, b) {
        None => return Poly::one(),
        Some(Some(v)) if a.contains_var(v) => return gcd_with_coefficients(a, v, b),
        Some(Some(v)) => return gcd_with_coefficients(b, v, a),
        Some(None) => {}
    }
    let v = main_var(a, b);
    let (ca, pa) = split_content(a, v);
    let (cb, pb) = split_content(b, v);
    let cont = gcd_primitive_or_one(&ca, &cb);
    let g = prs_gcd(&pa, &pb, v);
    let g = if g.degree_in(v) == 0 { Poly::one() } else { split_content(&g, v).1 };
    cont.mul(&g).primitive_normalized()
}

/// Univariate images of `a` and `b`. For each shared variable `v`, the
/// others are set to small integers that keep the leading coefficient of `a`
/// in `v`; the gcd then keeps its degree in `v` under the map, so a constant
/// image gcd proves the gcd free of `v`. `None` when every variable is ruled
/// out (the gcd is constant), otherwise some ruled-out variable if any.
fn ruled_out_by_images(a: &Poly, b: &Poly) -> Option<Option<VarId>> {
    let av = a.vars();
    let bv = b.vars();
    // a variable on one side only is ruled out already
    if let Some(&v) = av.symmetric_difference(&bv).next() {
        return Some(Some(v));
    }
    let mut seed: u64 = 0x9e37_79b9;
    let mut ruled_out = None;
    let mut all_out = true;
    'vars: for &v in &av {
        let da = a.degree_in(v);
        for _ in 0..4 {
            let mut point = HashMap::new();
            for &w in &av {
                if w != v {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let x = ((seed >> 33) % 61) as i64 - 30;
                    point.insert(w, Rat::from_integer(x.into()));
                }
            }
            let ia = a.partial_eval(&point);
            let ib = b.partial_eval(&point);
            if ia.degree_in(v) != da || ib.is_zero() {
                continue;
            }
            if ib.is_constant() || univar::degree(&univar::gcd(&to_zpoly(&ia, v), &to_zpoly(&ib, v))) == 0 {
                ruled_out.get_or_insert(v);
                continue 'vars;
            }
            break;
        }
        all_out = false;
    }
    if all_out {
        None
    } else {
        Some(ruled_out)
    }
}

fn gcd_primitive_or_one(a: &Poly, b: &Poly) -> Poly {
    let (_, ma, pa) = a.content_primitive().expect("nonzero");
    let (_, mb, pb) = b.content_primitive().expect("nonzero");
    let mono = ma.gcd(&mb);
    gcd_primitive(&pa, &pb).mul_mono(&mono, &Rat::from_integer(1.into()))
}

fn gcd_with_coefficients(a: &Poly, v: VarId, b: &Poly) -> Poly {
    let coeffs = a.coefficients_in(v);
    let mut g = b.clone();
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = gcd_primitive_or_one(c, &g);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g.primitive_normalized()
}

/// Variable of lowest combined degree, lowest index on ties.
fn main_var(a: &Poly, b: &Poly) -> VarId {
    let da = a.degrees();
    let db = b.degrees();
    *da.keys()
        .min_by_key(|v| (da[v].max(*db.get(v).unwrap_or(&0)), **v))
        .expect("non-constant")
}

/// Splits `p` into its content with respect to `v` (a polynomial free of `v`)
/// and the primitive part.
fn split_content(p: &Poly, v: VarId) -> (Poly, Poly) {
    let coeffs = p.coefficients_in(v);
    let cont = gcd_many(coeffs.iter());
    if cont.is_constant() {
        return (Poly::one(), p.primitive_normalized());
    }
    let prim = p.div_exact(&cont).expect("content divides");
    (cont, prim.primitive_normalized())
}

fn lead_coeff(p: &Poly, v: VarId) -> Poly {
    p.coeff_wrt(v, p.degree_in(v))
}

/// Pseudo-remainder of `a` by `b` in `v`.
fn prem(a: &Poly, b: &Poly, v: VarId) -> Poly {
    let db = b.degree_in(v);
    let lb = lead_coeff(b, v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = lead_coeff(&r, v);
        let shifted = b.mul(&lr).mul_mono(&Mono::var_pow(v, dr - db), &Rat::from_integer(1.into()));
        r = r.mul(&lb).sub(&shifted);
    }
    r
}

fn prs_gcd(a: &Poly, b: &Poly, v: VarId) -> Poly {
    let (mut x, mut y) = if a.degree_in(v) >= b.degree_in(v) { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    loop {
        if y.degree_in(v) == 0 {
            return Poly::one();
        }
        let r = prem(&x, &y, v);
        if r.is_zero() {
            return y;
        }
        x = y;
        y = split_content(&r, v).1;
    }
}
