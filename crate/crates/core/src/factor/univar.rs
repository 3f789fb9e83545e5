//! Dense univariate integer polynomials and Zassenhaus factorization
//! (Cantor-Zassenhaus modulo a small prime, Hensel lifting, recombination).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ascending coefficients, no trailing zeros; the zero polynomial is empty.
pub type ZPoly = Vec<BigInt>;

pub fn trim(p: &mut ZPoly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

pub fn degree(p: &[BigInt]) -> usize {
    p.len().saturating_sub(1)
}

pub fn content(p: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for c in p {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Primitive part with positive leading coefficient.
pub fn primitive(p: &[BigInt]) -> ZPoly {
    if p.is_empty() {
        return Vec::new();
    }
    let mut g = content(p);
    if p.last().unwrap().is_negative() {
        g = -g;
    }
    p.iter().map(|c| c / &g).collect()
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub fn sub(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let n = a.len().max(b.len());
    let mut out: ZPoly = (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default())
        .collect();
    trim(&mut out);
    out
}

pub fn derivative(a: &[BigInt]) -> ZPoly {
    let mut out: ZPoly = a.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    trim(&mut out);
    out
}

/// Exact division over the integers.
pub fn div_exact(a: &[BigInt], b: &[BigInt]) -> Option<ZPoly> {
    if b.is_empty() {
        return None;
    }
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut r: ZPoly = a.to_vec();
    let db = b.len() - 1;
    let lb = b.last().unwrap();
    let mut q = vec![BigInt::zero(); a.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let top = &r[i + db];
        if top.is_zero() {
            continue;
        }
        let (qq, rem) = top.div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, c) in b.iter().enumerate() {
            r[i + j] -= &qq * c;
        }
        q[i] = qq;
    }
    if r.iter().any(|c| !c.is_zero()) {
        return None;
    }
    trim(&mut q);
    Some(q)
}

/// Pseudo-remainder of `a` by `b`.
fn prem(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let mut r = a.to_vec();
    let db = degree(b);
    let lb = b.last().unwrap().clone();
    while !r.is_empty() && degree(&r) >= db {
        let lr = r.last().unwrap().clone();
        let shift = degree(&r) - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (j, c) in b.iter().enumerate() {
            r[shift + j] -= &lr * c;
        }
        trim(&mut r);
    }
    r
}

/// gcd of primitive polynomials via the primitive remainder sequence.
pub fn gcd(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() {
        return primitive(b);
    }
    if b.is_empty() {
        return primitive(a);
    }
    let (mut x, mut y) = (primitive(a), primitive(b));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            return vec![BigInt::one()];
        }
        let r = prem(&x, &y);
        if r.is_empty() {
            return y;
        }
        x = y;
        y = primitive(&r);
    }
}

// ----- arithmetic modulo a word-sized prime -----

type Fp = Vec<u64>;

fn fp_trim(p: &mut Fp) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn fp_from_z(a: &[BigInt], p: u64) -> Fp {
    let pb = BigInt::from(p);
    let mut out: Fp = a.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
    fp_trim(&mut out);
    out
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_trim(&mut out);
    out
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Fp {
    let n = a.len().max(b.len());
    let mut out: Fp =
        (0..n).map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p).collect();
    fp_trim(&mut out);
    out
}

fn fp_scale(a: &[u64], k: u64, p: u64) -> Fp {
    let mut out: Fp = a.iter().map(|&x| x * k % p).collect();
    fp_trim(&mut out);
    out
}

fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Fp, Fp) {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let inv = fp_inv(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - db];
    for i in (0..q.len()).rev() {
        let top = r[i + db];
        if top == 0 {
            continue;
        }
        let c = top * inv % p;
        q[i] = c;
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + p - c * y % p) % p;
        }
    }
    fp_trim(&mut q);
    fp_trim(&mut r);
    (q, r)
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Fp {
    fp_divrem(a, b, p).1
}

fn fp_monic(a: &[u64], p: u64) -> Fp {
    match a.last() {
        None => Vec::new(),
        Some(&l) => fp_scale(a, fp_inv(l, p), p),
    }
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Fp {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    fp_trim(&mut x);
    fp_trim(&mut y);
    while !y.is_empty() {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    fp_monic(&x, p)
}

/// `(g, s, t)` with `s*a + t*b = g` monic.
fn fp_ext_gcd(a: &[u64], b: &[u64], p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1): (Fp, Fp) = (vec![1], Vec::new());
    let (mut t0, mut t1): (Fp, Fp) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = fp_inv(*r0.last().unwrap(), p);
    (fp_scale(&r0, inv, p), fp_scale(&s0, inv, p), fp_scale(&t0, inv, p))
}

fn fp_powmod(base: &[u64], exp: &BigUint, m: &[u64], p: u64) -> Fp {
    let mut result: Fp = vec![1];
    let b = fp_rem(base, m, p);
    let bits = exp.bits();
    for i in (0..bits).rev() {
        result = fp_rem(&fp_mul(&result, &result, p), m, p);
        if exp.bit(i) {
            result = fp_rem(&fp_mul(&result, &b, p), m, p);
        }
    }
    result
}

fn fp_derivative(a: &[u64], p: u64) -> Fp {
    let mut out: Fp = a.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c % p).collect();
    fp_trim(&mut out);
    out
}

/// Distinct-degree then equal-degree factorization of a monic squarefree `f`.
fn fp_factor(f: &[u64], p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let mut out = Vec::new();
    let mut rest = f.to_vec();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let mut d = 1;
    let pb = BigUint::from(p);
    while rest.len() > 1 && 2 * d < rest.len() {
        h = fp_powmod(&h, &pb, &rest, p);
        let g = fp_gcd(&fp_sub(&h, &x, p), &rest, p);
        if g.len() > 1 {
            out.extend(fp_equal_degree(&g, d, p, rng));
            rest = fp_divrem(&rest, &g, p).0;
            h = fp_rem(&h, &rest, p);
        }
        d += 1;
    }
    if rest.len() > 1 {
        out.push(fp_monic(&rest, p));
    }
    out
}

fn fp_equal_degree(g: &[u64], d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let n = g.len() - 1;
    if n == d {
        return vec![fp_monic(g, p)];
    }
    let exp = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
    loop {
        let mut a: Fp = (0..n).map(|_| rng.gen_range(0..p)).collect();
        fp_trim(&mut a);
        if a.len() < 2 {
            continue;
        }
        let b = fp_sub(&fp_powmod(&a, &exp, g, p), &[1], p);
        let h = fp_gcd(&b, g, p);
        if h.len() > 1 && h.len() < g.len() {
            let other = fp_divrem(g, &h, p).0;
            let mut out = fp_equal_degree(&h, d, p, rng);
            out.extend(fp_equal_degree(&other, d, p, rng));
            return out;
        }
    }
}

fn next_prime(mut n: u64) -> u64 {
    loop {
        n += 1;
        if n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k)) {
            return n;
        }
    }
}

// ----- Hensel lifting over Z / p^k -----

fn zmod(a: &[BigInt], m: &BigInt) -> ZPoly {
    let mut out: ZPoly = a.iter().map(|c| c.mod_floor(m)).collect();
    trim(&mut out);
    out
}

fn z_from_fp(a: &[u64]) -> ZPoly {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    e.x.mod_floor(m)
}

/// Lifts `f ≡ g0*h0 (mod p)` (all monic) to `f ≡ g*h (mod p^k)`.
fn lift_pair(f: &[BigInt], g0: &[u64], h0: &[u64], p: u64, k: u32) -> (ZPoly, ZPoly) {
    let (_, s, t) = fp_ext_gcd(g0, h0, p);
    let mut g = z_from_fp(g0);
    let mut h = z_from_fp(h0);
    let pb = BigInt::from(p);
    let mut pj = pb.clone();
    for _ in 1..k {
        let next = &pj * &pb;
        let diff = zmod(&sub(f, &mul(&g, &h)), &next);
        let e: ZPoly = diff.iter().map(|c| c / &pj).collect();
        let ep = fp_from_z(&e, p);
        if !ep.is_empty() {
            let dg = fp_rem(&fp_mul(&t, &ep, p), g0, p);
            let dh = fp_rem(&fp_mul(&s, &ep, p), h0, p);
            g = zmod(&add_scaled(&g, &z_from_fp(&dg), &pj), &next);
            h = zmod(&add_scaled(&h, &z_from_fp(&dh), &pj), &next);
        }
        pj = next;
    }
    (g, h)
}

fn add_scaled(a: &[BigInt], b: &[BigInt], k: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let mut out: ZPoly = (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default() * k)
        .collect();
    trim(&mut out);
    out
}

fn lift_all(f: &[BigInt], factors: &[Fp], p: u64, k: u32) -> Vec<ZPoly> {
    if factors.len() == 1 {
        return vec![f.to_vec()];
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let prod = |fs: &[Fp]| fs.iter().fold(vec![1u64], |acc, x| fp_mul(&acc, x, p));
    let (g, h) = lift_pair(f, &prod(left), &prod(right), p, k);
    let mut out = lift_all(&g, left, p, k);
    out.extend(lift_all(&h, right, p, k));
    out
}

fn symmetric(a: &[BigInt], m: &BigInt) -> ZPoly {
    let half = m / 2;
    let mut out: ZPoly = a
        .iter()
        .map(|c| {
            let r = c.mod_floor(m);
            if r > half {
                r - m
            } else {
                r
            }
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == size {
            return f(cur);
        }
        for i in start..n {
            cur.push(i);
            if rec(i + 1, n, size, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, size, &mut Vec::new(), &mut f)
}

/// Maximum number of modular factors we are willing to recombine.
const MAX_MODULAR_FACTORS: usize = 18;

/// Irreducible factors of a primitive squarefree polynomial of degree ≥ 1.
/// Returns `None` if the modular image has too many factors to recombine.
fn factor_squarefree(f: &[BigInt]) -> Option<Vec<ZPoly>> {
    let n = degree(f);
    if n <= 1 {
        return Some(vec![f.to_vec()]);
    }
    let lc = f.last().unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    // pick the prime with fewest modular factors among a few candidates
    let mut best: Option<(u64, Vec<Fp>)> = None;
    let mut p = 2u64;
    let mut tried = 0;
    while tried < 5 && p < 100_000 {
        p = next_prime(p);
        if p == 2 || (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = fp_from_z(f, p);
        if fp.len() != f.len() {
            continue;
        }
        let dfp = fp_derivative(&fp, p);
        if fp_gcd(&fp, &dfp, p).len() != 1 {
            continue;
        }
        tried += 1;
        let facs = fp_factor(&fp_monic(&fp, p), p, &mut rng);
        if facs.len() == 1 {
            return Some(vec![f.to_vec()]);
        }
        if best.as_ref().map(|b| facs.len() < b.1.len()).unwrap_or(true) {
            best = Some((p, facs));
        }
    }
    let (p, facs) = best?;
    if facs.len() > MAX_MODULAR_FACTORS {
        return None;
    }
    // coefficient bound for any factor (times lc): |lc| * 2^n * (n+1) * max|a_i|
    let maxc = f.iter().map(|c| c.abs()).max().unwrap();
    let bound = lc.abs() * (BigInt::one() << n) * BigInt::from(n + 1) * maxc;
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut m = pb.clone();
    while m <= &bound * 2 {
        m *= &pb;
        k += 1;
    }
    let monic_f = {
        let inv = mod_inverse(&lc, &m);
        zmod(&f.iter().map(|c| c * &inv).collect::<ZPoly>(), &m)
    };
    let lifted = lift_all(&monic_f, &facs, p, k);

    let mut remaining: Vec<ZPoly> = lifted;
    let mut rest = f.to_vec();
    let mut found = Vec::new();
    let mut size = 1;
    while 2 * size <= remaining.len() {
        let lcr = rest.last().unwrap().clone();
        let mut hit: Option<(Vec<usize>, ZPoly, ZPoly)> = None;
        for_each_subset(remaining.len(), size, |idx| {
            let mut g: ZPoly = vec![lcr.clone()];
            for &i in idx {
                g = zmod(&mul(&g, &remaining[i]), &m);
            }
            let g = primitive(&symmetric(&g, &m));
            if let Some(q) = div_exact(&rest, &g) {
                hit = Some((idx.to_vec(), g, q));
                return true;
            }
            false
        });
        match hit {
            Some((idx, g, q)) => {
                found.push(g);
                rest = q;
                for i in idx.into_iter().rev() {
                    remaining.remove(i);
                }
            }
            None => size += 1,
        }
    }
    if degree(&rest) > 0 {
        found.push(primitive(&rest));
    }
    Some(found)
}

/// Complete factorization of a primitive integer polynomial into irreducible
/// factors with multiplicities. `None` when recombination would be too costly.
pub fn factor(f: &[BigInt]) -> Option<Vec<(ZPoly, u32)>> {
    let f = primitive(f);
    if degree(&f) == 0 {
        return Some(Vec::new());
    }
    let df = derivative(&f);
    let g = gcd(&f, &df);
    let sqf = if degree(&g) == 0 { f.clone() } else { div_exact(&f, &g)? };
    let irreducibles = factor_squarefree(&primitive(&sqf))?;
    let mut out = Vec::new();
    for q in irreducibles {
        let mut mult = 0;
        let mut cur = f.clone();
        while let Some(next) = div_exact(&cur, &q) {
            mult += 1;
            cur = next;
        }
        debug_assert!(mult > 0);
        out.push((q, mult));
    }
    Some(out)
}
