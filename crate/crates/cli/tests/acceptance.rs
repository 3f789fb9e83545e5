//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. `cargo test --test acceptance [name]` runs a subset.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xforge_core::case::{CaseStatus, SolutionFamily};
use xforge_core::poly::parse_poly;
use xforge_core::solver::{method1_system, method2_system, method3_system, Session, SolverConfig};
use xforge_core::{Mono, Poly, Rat, VarId};
use xforge_puzzle::{
    check_assignment, count_assignments, grid_to_system, parse_puzzle, random_grid, reference_grid, replay, CellExpr,
    Convention, DiagMode, LineStatus, Op, OperatorGrid, Provenance, Puzzle,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("uniqueness-fixture", uniqueness_fixture),
        ("system-shape", system_shape),
        ("opset-end-to-end", opset_end_to_end),
        ("splitting-soundness", splitting_soundness),
        ("rationality-test", rationality_test),
        ("generator-loop", generator_loop),
        ("counter-oracle-equivalence", counter_oracle_equivalence),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match r {
            Ok(detail) => println!("PASS {name} ({:.1?}): {detail}", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.1?}): {why}", t.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../puzzle/tests/fixtures/showcase7.txt")
}

// ----- exact fractions for the independent line evaluator -----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Q(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Q {
    fn new(n: i128, d: i128) -> Q {
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Q(s * n / g, s * d / g)
    }
    fn add(self, o: Q) -> Q {
        Q::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Q) -> Q {
        Q::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Q) -> Option<Q> {
        (o.0 != 0).then(|| Q::new(self.0 * o.1, self.1 * o.0))
    }
}

fn numeral(s: &str, a: &BTreeMap<char, u8>) -> i128 {
    s.chars().fold(0, |v, ch| v * 10 + a[&ch] as i128)
}

fn cell_value(c: &CellExpr, a: &BTreeMap<char, u8>) -> Option<Q> {
    let num = numeral(&c.num, a);
    let den = c.den.as_ref().map(|d| numeral(d, a)).unwrap_or(1);
    if den == 0 {
        return None;
    }
    let v = Q::new(num, den);
    Some(if c.negative { Q::new(-v.0, v.1) } else { v })
}

/// Left to right, `×`/`÷` before `+`/`−`. `None` on a zero divisor.
fn line_value(ops: &[Op], vals: &[Q]) -> Option<Q> {
    let mut sum = Q(0, 1);
    let mut term = vals[0];
    let mut sign = 1;
    for (op, &v) in ops.iter().zip(&vals[1..]) {
        match op {
            Op::Times => term = term.mul(v),
            Op::Divide => term = term.div(v)?,
            Op::Plus | Op::Minus => {
                sum = sum.add(Q(sign * term.0, term.1));
                sign = if *op == Op::Minus { -1 } else { 1 };
                term = v;
            }
        }
    }
    Some(sum.add(Q(sign * term.0, term.1)))
}

fn all_lines_zero(p: &Puzzle, a: &BTreeMap<char, u8>) -> usize {
    p.lines()
        .iter()
        .filter(|line| {
            let vals: Option<Vec<Q>> = line.cells.iter().map(|&(r, c)| cell_value(p.grid.cell(r, c), a)).collect();
            matches!(vals.and_then(|v| line_value(&line.ops, &v)), Some(Q(0, _)))
        })
        .count()
}

fn leading_ok(p: &Puzzle, a: &BTreeMap<char, u8>) -> bool {
    !p.convention.leading_zero
        || p.grid.cells().iter().all(|c| {
            std::iter::once(&c.num).chain(c.den.iter()).all(|s| s.len() < 2 || a[&s.chars().next().unwrap()] != 0)
        })
}

/// Every injective letter-to-digit map, checked line by line.
fn naive_count(p: &Puzzle) -> usize {
    fn rec(p: &Puzzle, i: usize, used: &mut [bool; 10], a: &mut BTreeMap<char, u8>, total: usize) -> usize {
        if i == p.letters.len() {
            return (leading_ok(p, a) && all_lines_zero(p, a) == total) as usize;
        }
        let mut n = 0;
        for d in 0..10u8 {
            if !used[d as usize] {
                used[d as usize] = true;
                a.insert(p.letters[i], d);
                n += rec(p, i + 1, used, a, total);
                used[d as usize] = false;
            }
        }
        a.remove(&p.letters[i]);
        n
    }
    let total = p.lines().len();
    rec(p, 0, &mut [false; 10], &mut BTreeMap::new(), total)
}

// ----- criteria -----

fn uniqueness_fixture() -> Outcome {
    let text = std::fs::read_to_string(fixture()).map_err(|e| e.to_string())?;
    let p = parse_puzzle(&text).map_err(|e| e.to_string())?;
    ensure!(p.size() == 7, "fixture is {}x{}", p.size(), p.size());
    ensure!(
        p.convention.leading_zero == Convention::for_size(7).leading_zero,
        "fixture does not use the default leading-zero convention"
    );
    let r = count_assignments(&p, 2);
    ensure!(!r.capped && r.count == 1, "found {} solutions (capped: {})", r.count, r.capped);
    ensure!(r.elapsed < Duration::from_secs(120), "search took {:.1?}", r.elapsed);
    let a = &r.assignments[0];
    let checks = check_assignment(&p, a).map_err(|e| e.to_string())?;
    let zero = checks.iter().filter(|c| c.status == LineStatus::Zero).count();
    ensure!(checks.len() == 36 && zero == 36, "{zero} of {} residuals are zero", checks.len());
    let independent = all_lines_zero(&p, a);
    ensure!(independent == 36, "independent evaluator finds {independent} zero lines");
    let shown: Vec<String> = a.iter().map(|(l, d)| format!("{l}={d}")).collect();
    Ok(format!("1 solution [{}], 36/36 zero residuals, {} nodes in {:.1?}", shown.join(" "), r.nodes, r.elapsed))
}

fn system_shape() -> Outcome {
    let sys = grid_to_system(&reference_grid(), DiagMode::All);
    ensure!(sys.equations.len() == 36, "{} equations", sys.equations.len());
    ensure!(sys.vars.len() == 49, "{} variables", sys.vars.len());
    let row1 = parse_poly("u1 + u2 + u3 - u4 - u5*u6 - u7").unwrap().primitive_normalized();
    ensure!(sys.equations[0].primitive_normalized() == row1, "row 1 is {}", sys.equations[0]);
    for seed in 0..5 {
        let g = random_grid(5, 1, 1, DiagMode::MainOnly, seed).map_err(|e| e.to_string())?;
        let s5 = grid_to_system(&g, DiagMode::MainOnly);
        ensure!(
            s5.equations.len() == 12 && s5.vars.len() == 25,
            "5x5 seed {seed}: {} equations in {} variables",
            s5.equations.len(),
            s5.vars.len()
        );
    }
    Ok(format!("36 equations in 49 variables ({} more unknowns); 5x5 main-only: 12 in 25", 49 - 36))
}

/// Substitutes the family's bindings into `eq` as rational functions and
/// checks the numerator of the sum vanishes.
fn vanishes_identically(eq: &Poly, fam: &SolutionFamily) -> bool {
    let mut acc_n = Poly::zero();
    let mut acc_d = Poly::one();
    for (m, c) in eq.terms() {
        let mut n = Poly::constant(c.clone());
        let mut d = Poly::one();
        for &(v, e) in m.pairs() {
            match fam.binding(v) {
                Some(b) => {
                    n = n.mul(&b.num.pow(e));
                    d = d.mul(&b.den.pow(e));
                }
                None => n = n.mul(&Poly::monomial(Mono::var_pow(v, e), Rat::from_integer(1.into()))),
            }
        }
        if d == acc_d {
            acc_n = acc_n.add(&n);
        } else {
            acc_n = acc_n.mul(&d).add(&n.mul(&acc_d));
            acc_d = acc_d.mul(&d);
        }
    }
    acc_n.is_zero()
}

fn opset_end_to_end() -> Outcome {
    let sys = grid_to_system(&reference_grid(), DiagMode::All);
    let config = SolverConfig::default();
    ensure!(config.plist.to_string() == "(1 89 20 77 47 21 90)", "default proc list is {}", config.plist);
    let mut s = Session::with_universe(
        config,
        &sys.equations,
        &sys.inequalities,
        &sys.or_groups,
        sys.vars.iter().copied().collect(),
    );
    let t = Instant::now();
    let outcome = s.run().map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let mut fams: Vec<&SolutionFamily> = s.solutions().iter().collect();
    fams.sort_by_key(|f| f.total_terms());
    let mut verified = Vec::new();
    for f in fams.iter().filter(|f| f.free_params.len() >= 5 && f.total_terms() <= 20_000) {
        let covered: BTreeSet<VarId> =
            f.free_params.iter().copied().chain(f.bindings.iter().map(|b| b.var)).collect();
        let complete = sys.vars.iter().all(|v| covered.contains(v));
        let dens_ok = f.bindings.iter().all(|b| !b.den.is_zero());
        if complete && dens_ok && sys.equations.iter().all(|e| vanishes_identically(e, f)) {
            verified.push(format!("case {}", f.case));
        }
    }
    let sum = s.summary();
    let statuses: Vec<String> = sum.by_status.iter().map(|(k, v)| format!("{} {v}", k.as_str())).collect();
    let largest = s.nodes().map(|n| n.max_terms()).max().unwrap_or(0);
    let shapes: Vec<String> =
        fams.iter().map(|f| format!("{}p/{}t@{}", f.free_params.len(), f.total_terms(), f.case)).collect();
    let stats = format!(
        "{outcome:?} in {elapsed:.1?}; {} cases ({}); families [{}]; largest equation {largest} terms",
        s.case_count(),
        statuses.join(", "),
        shapes.join(" ")
    );
    ensure!(!verified.is_empty(), "no family verified against all 36 equations; {stats}");
    Ok(format!("verified {} against all 36 equations; {stats}", verified.join(", ")))
}

// ----- splitting -----

fn u(k: u32) -> VarId {
    VarId(k)
}

fn x1() -> Poly {
    Poly::var(u(1))
}

fn rq(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into())
}

fn rq_nonzero(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let r = rq(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

/// A small polynomial in the given variables.
fn small_poly(rng: &mut ChaCha8Rng, vars: &[u32], max_terms: usize, max_exp: u32) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..=max_terms) {
        let pairs: Vec<(VarId, u32)> = vars.iter().map(|&v| (u(v), rng.gen_range(0..=max_exp))).collect();
        let c = Rat::from_integer(rng.gen_range(-6i64..=6).into());
        p = p.add(&Poly::monomial(Mono::from_pairs(pairs), c));
    }
    p
}

fn coeff_polys(rng: &mut ChaCha8Rng, d: usize) -> Vec<Poly> {
    let mut out: Vec<Poly> = (0..=d).map(|_| small_poly(rng, &[2, 3, 4], 3, 2)).collect();
    while out[d].is_zero() {
        out[d] = small_poly(rng, &[2, 3, 4], 3, 2);
    }
    out
}

fn assemble(coeffs: &[Poly]) -> Poly {
    coeffs.iter().enumerate().fold(Poly::zero(), |acc, (n, c)| acc.add(&c.mul(&x1().pow(n as u32))))
}

/// `c - c(pt) + target`: a coefficient taking the value `target` at `pt`.
fn pinned(c: &Poly, pt: &HashMap<VarId, Rat>, target: &Rat) -> Poly {
    c.sub(&Poly::constant(c.eval(pt).unwrap())).add(&Poly::constant(target.clone()))
}

fn zero_at(p: &Poly, pt: &HashMap<VarId, Rat>) -> bool {
    p.eval(pt).unwrap().is_zero()
}

fn set_of(ps: &[Poly]) -> BTreeSet<String> {
    ps.iter().filter(|p| !p.is_zero()).map(|p| p.primitive_normalized().to_string()).collect()
}

/// Exact containment certificates and solution points for one random `P`.
fn chain_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let d = rng.gen_range(2..=4);
    let coeffs = coeff_polys(rng, d);
    let p = assemble(&coeffs);
    if p.degree_in(u(1)) < 2 {
        return Ok(());
    }
    let c = p.coefficients_in(u(1));
    let (m1, m2, m3) = (method1_system(&p, u(1)), method2_system(&p, u(1)), method3_system(&p, u(1)));
    let s1 = set_of(&m1);
    let s2 = set_of(&m2);
    let s3 = set_of(&m3);
    let has = |s: &BTreeSet<String>, q: &Poly| q.is_zero() || s.contains(&q.primitive_normalized().to_string());
    // Method 2 lies in the ideal of Method 1
    let zero = Poly::zero();
    let a0 = c.first().unwrap_or(&zero);
    let a1 = c.get(1).unwrap_or(&zero);
    let low = a0.add(&a1.mul(&x1()));
    ensure!(has(&s1, a0) && has(&s1, a1), "A0/A1 missing from method 1");
    ensure!(c.iter().skip(2).all(|a| has(&s1, a) && has(&s2, a)), "high coefficients missing");
    ensure!(has(&s2, &low), "method 2 lacks A0 + A1 u");
    // Method 3 lies in the ideal of Method 2, and P in that of Method 3
    let q = c.iter().enumerate().skip(2).fold(Poly::zero(), |acc, (n, a)| acc.add(&a.mul(&x1().pow(n as u32 - 2))));
    ensure!(has(&s3, &q) && has(&s3, &low), "method 3 is not {{Q, A0 + A1 u}}");
    ensure!(p == q.mul(&x1().pow(2)).add(&low), "P != Q u^2 + A0 + A1 u");

    // solution points: of Method 1, of Method 2 but not 1, of Method 3 but not 2
    let mut pt: HashMap<VarId, Rat> = [2, 3, 4].iter().map(|&k| (u(k), rq(rng))).collect();
    let x = rq_nonzero(rng);
    pt.insert(u(1), x.clone());
    let targets1: Vec<Rat> = vec![Rat::zero(); d + 1];
    let a1v = rq_nonzero(rng);
    let mut targets2 = vec![Rat::zero(); d + 1];
    targets2[1] = a1v.clone();
    targets2[0] = -(&a1v * &x);
    let mut targets3 = vec![Rat::zero(); d + 1];
    let mut tail = Rat::zero();
    for n in 3..=d {
        targets3[n] = rq_nonzero(rng);
        tail += &targets3[n] * num_traits::pow(x.clone(), n - 2);
    }
    targets3[2] = if d == 2 { Rat::zero() } else { -tail };
    targets3[1] = a1v.clone();
    targets3[0] = -(&a1v * &x);
    for (level, targets) in [(1, targets1), (2, targets2), (3, targets3)] {
        let cs: Vec<Poly> = coeffs.iter().zip(&targets).map(|(c, t)| pinned(c, &pt, t)).collect();
        let p = assemble(&cs);
        let (m1, m2, m3) = (method1_system(&p, u(1)), method2_system(&p, u(1)), method3_system(&p, u(1)));
        let all = |ms: &[Poly]| ms.iter().all(|e| zero_at(e, &pt));
        match level {
            1 => ensure!(all(&m1) && all(&m2) && all(&m3) && zero_at(&p, &pt), "method 1 point fails later systems"),
            2 => ensure!(all(&m2) && all(&m3) && zero_at(&p, &pt), "method 2 point fails method 3 or P"),
            _ => ensure!(all(&m3) && zero_at(&p, &pt), "method 3 point fails P"),
        }
    }
    Ok(())
}

/// Groups the terms of `p` by their exponents in `a` and `b`: the result of
/// splitting fully in both variables, in either order.
fn joint_coefficients(p: &Poly, a: VarId, b: VarId) -> Vec<Poly> {
    let mut groups: BTreeMap<(u32, u32), Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let rest: Vec<(VarId, u32)> = m.pairs().iter().copied().filter(|&(v, _)| v != a && v != b).collect();
        let term = Poly::monomial(Mono::from_pairs(rest), c.clone());
        let slot = groups.entry((m.exp(a), m.exp(b))).or_insert_with(Poly::zero);
        *slot = slot.add(&term);
    }
    groups.into_values().collect()
}

fn splitting_soundness() -> Outcome {
    const N: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..N {
        chain_case(&mut rng).map_err(|e| format!("chain case {k}: {e}"))?;
    }
    let mut quadratics = 0;
    while quadratics < N {
        let p = assemble(&coeff_polys(&mut rng, 2));
        if p.degree_in(u(1)) != 2 {
            continue;
        }
        quadratics += 1;
        ensure!(
            set_of(&method2_system(&p, u(1))) == set_of(&method3_system(&p, u(1))),
            "methods 2 and 3 differ on {p}"
        );
    }
    let split_all = |eqs: Vec<Poly>, v: VarId| -> Vec<Poly> {
        eqs.iter().flat_map(|e| if e.contains_var(v) { method1_system(e, v) } else { vec![e.clone()] }).collect()
    };
    let mut commuting = 0;
    while commuting < N {
        let p = small_poly(&mut rng, &[1, 2, 3, 4], 6, 2);
        let vars: Vec<VarId> = p.vars().into_iter().collect();
        if vars.len() < 2 {
            continue;
        }
        commuting += 1;
        let (a, b) = (vars[0], *vars.last().unwrap());
        let ab = set_of(&split_all(split_all(vec![p.clone()], a), b));
        let ba = set_of(&split_all(split_all(vec![p.clone()], b), a));
        ensure!(ab == ba, "split order matters for {p}");
        ensure!(ab == set_of(&joint_coefficients(&p, a, b)), "double split of {p} is not the joint coefficient set");
    }
    Ok(format!("{N} containment chains, {quadratics} degree-2 coincidences, {commuting} commuting double splits"))
}

// ----- rationality -----

fn solve_univariate(eq: &str) -> Session {
    let p = parse_poly(eq).unwrap();
    let mut s = Session::new(SolverConfig::default(), &[p], &[], &[]);
    s.run().unwrap();
    s
}

fn root_values(s: &Session) -> BTreeSet<Rat> {
    s.solutions().iter().filter_map(|f| f.binding(u(1)).and_then(|b| Some(b.num.as_constant()? / b.den.as_constant()?))).collect()
}

/// Every `±p/q` with `p | a0` and `q | an`, evaluated exactly.
fn rational_root_oracle(coeffs: &[i64]) -> BTreeSet<Rat> {
    let divisors = |n: i64| (1..=n.abs()).filter(move |d| n % d == 0).collect::<Vec<_>>();
    let mut out = BTreeSet::new();
    if coeffs[0] == 0 {
        out.insert(Rat::zero());
    }
    for p in divisors(coeffs[0]) {
        for q in divisors(*coeffs.last().unwrap()) {
            for sign in [-1, 1] {
                let r = Rat::new((sign * p).into(), q.into());
                let v = coeffs.iter().rev().fold(Rat::zero(), |acc, &c| acc * &r + Rat::from_integer(c.into()));
                if v.is_zero() {
                    out.insert(r);
                }
            }
        }
    }
    out
}

fn rationality_test() -> Outcome {
    let s = solve_univariate("u1^2 - 2");
    let root = s.nodes().next().unwrap();
    ensure!(root.status == CaseStatus::NoRationalSolution, "x^2 - 2 ends as {}", root.status);
    ensure!(s.case_count() == 1 && s.solutions().is_empty(), "x^2 - 2 produced cases or solutions");
    ensure!(xforge_cli::report::verdict(&s) == "no rational solutions", "verdict {}", xforge_cli::report::verdict(&s));

    let s = solve_univariate("u1^2 - 9/4");
    let kids = s.nodes().filter(|n| n.id.depth() == 1).count();
    let want: BTreeSet<Rat> = [Rat::new(3.into(), 2.into()), Rat::new((-3).into(), 2.into())].into();
    ensure!(kids == 2, "x^2 - 9/4 gave {kids} child cases");
    ensure!(root_values(&s) == want, "x^2 - 9/4 roots {:?}", root_values(&s));

    // ascending integer coefficients
    let cubics: [(&str, [i64; 4]); 3] = [
        ("6*u1^3 - 5*u1^2 - 2*u1 + 1", [1, -2, -5, 6]),
        ("2*u1^3 - 3*u1^2 - 4*u1 + 6", [6, -4, -3, 2]),
        ("4*u1^3 - 8*u1^2 - u1 + 2", [2, -1, -8, 4]),
    ];
    let mut seen = Vec::new();
    for (text, coeffs) in cubics {
        let s = solve_univariate(text);
        let oracle = rational_root_oracle(&coeffs);
        let found = root_values(&s);
        ensure!(found == oracle, "{text}: found {found:?}, oracle {oracle:?}");
        ensure!(s.solutions().len() == oracle.len(), "{text}: {} solution cases", s.solutions().len());
        seen.push(format!("{}", oracle.len()));
    }
    Ok(format!("x^2-2 closed with no rational solution; x^2-9/4 -> +-3/2; cubic root cases {}", seen.join("/")))
}

// ----- generation -----

fn cli(args: &[&str]) -> (i32, String, String) {
    let args: Vec<String> = std::iter::once("xforge").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = xforge_cli::main_with(&args, &mut out, &mut err, &mut Cursor::new(Vec::new()));
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn generator_loop() -> Outcome {
    let dir = std::env::temp_dir().join(format!("xforge-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let puzzle_path = dir.join("puzzle.txt");
    let prov_path = dir.join("provenance.json");
    let t = Instant::now();
    let (code, _, err) = cli(&[
        "generate",
        "--size",
        "5",
        "--times",
        "1",
        "--div",
        "1",
        "--seed",
        "2024",
        "--out",
        puzzle_path.to_str().unwrap(),
        "--provenance",
        prov_path.to_str().unwrap(),
    ]);
    let elapsed = t.elapsed();
    ensure!(code == 0, "generate exited {code}: {err}");
    ensure!(elapsed < Duration::from_secs(600), "generation took {elapsed:.1?}");
    let text = std::fs::read_to_string(&puzzle_path).map_err(|e| e.to_string())?;
    let p = parse_puzzle(&text).map_err(|e| e.to_string())?;
    let r = count_assignments(&p, 2);
    ensure!(!r.capped && r.count == 1, "generated puzzle has {} solutions", r.count);
    let (code, out, _) = cli(&["unique", puzzle_path.to_str().unwrap()]);
    ensure!(code == 0 && out.starts_with("solutions: 1\n"), "unique command says: {out}");
    let prov: Provenance = serde_json::from_str(&std::fs::read_to_string(&prov_path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(prov.attempt <= 10, "needed {} attempts", prov.attempt);
    let replayed = replay(&prov).map_err(|e| e.to_string())?;
    ensure!(replayed.render_text() == text, "replayed puzzle differs");
    let (code, out, _) = cli(&["replay", prov_path.to_str().unwrap()]);
    ensure!(code == 0 && out == text, "replay command output differs");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "seed 2024: unique puzzle on attempt {} in {elapsed:.1?}, {} letters; provenance replays identically",
        prov.attempt,
        p.letters.len()
    ))
}

// ----- counter oracle -----

fn letters(rng: &mut ChaCha8Rng, k: usize) -> Vec<char> {
    ('a'..='j').collect::<Vec<_>>().choose_multiple(rng, k).copied().collect()
}

fn word(rng: &mut ChaCha8Rng, ls: &[char], len: usize) -> String {
    (0..len).map(|_| *ls.choose(rng).unwrap()).collect()
}

/// 2x2 grids built from two cell shapes with mostly cancelling operators, so
/// that a fair share of them are solvable.
fn cancelling_toy(rng: &mut ChaCha8Rng) -> Puzzle {
    let k = rng.gen_range(3..=6);
    let ls = letters(rng, k);
    let shape = |rng: &mut ChaCha8Rng| {
        let len = rng.gen_range(1..=2);
        let num = word(rng, &ls, len);
        let den = rng.gen_bool(0.5).then(|| word(rng, &ls, 1));
        CellExpr { negative: false, num, den }
    };
    let shapes = [shape(rng), shape(rng)];
    let cells: Vec<CellExpr> = (0..4)
        .map(|_| CellExpr { negative: rng.gen_bool(0.5), ..shapes.choose(rng).unwrap().clone() })
        .collect();
    let op = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
        if rng.gen_bool(0.8) {
            if cells[a].negative == cells[b].negative {
                Op::Minus
            } else {
                Op::Plus
            }
        } else {
            *[Op::Plus, Op::Minus, Op::Times].choose(rng).unwrap()
        }
    };
    let rows = vec![op(rng, 0, 1), op(rng, 2, 3)];
    let cols = vec![op(rng, 0, 2), op(rng, 1, 3)];
    let diag = vec![op(rng, 0, 3)];
    let grid = OperatorGrid::new(2, cells, rows, cols, diag).unwrap();
    Puzzle::new(grid, Convention { leading_zero: rng.gen_bool(0.5), diagonals: DiagMode::All }).unwrap()
}

fn free_toy(rng: &mut ChaCha8Rng) -> Puzzle {
    let n = rng.gen_range(2..=3);
    let k = rng.gen_range(2..=6);
    let ls = letters(rng, k);
    let cells: Vec<CellExpr> = (0..n * n)
        .map(|_| {
            let len = rng.gen_range(1..=2);
            let num = word(rng, &ls, len);
            let den = rng.gen_bool(0.2).then(|| word(rng, &ls, 1));
            CellExpr { negative: rng.gen_bool(0.5), num, den }
        })
        .collect();
    let ops = [Op::Plus, Op::Minus, Op::Times, Op::Divide];
    let pick = |rng: &mut ChaCha8Rng, len: usize| (0..len).map(|_| *ops.choose(rng).unwrap()).collect::<Vec<_>>();
    let rows = pick(rng, n * (n - 1));
    let cols = pick(rng, n * (n - 1));
    let diag = pick(rng, (n - 1) * (n - 1));
    let grid = OperatorGrid::new(n, cells, rows, cols, diag).unwrap();
    let diagonals = if rng.gen_bool(0.5) { DiagMode::All } else { DiagMode::MainOnly };
    Puzzle::new(grid, Convention { leading_zero: rng.gen_bool(0.5), diagonals }).unwrap()
}

fn counter_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5);
    let mut solvable = 0;
    let mut total = 0;
    for k in 0..50 {
        let p = if k % 2 == 0 { cancelling_toy(&mut rng) } else { free_toy(&mut rng) };
        ensure!(p.letters.len() <= 6, "toy {k} has {} letters", p.letters.len());
        let naive = naive_count(&p);
        let pruned = count_assignments(&p, usize::MAX - 1);
        ensure!(!pruned.capped && pruned.count == naive, "toy {k}: pruned {} vs naive {naive}\n{}", pruned.count, p.render_text());
        solvable += (naive > 0) as usize;
        total += naive;
    }
    ensure!(solvable >= 5, "only {solvable} toys have solutions; the comparison is too weak");
    Ok(format!("50 toys agree exactly; {solvable} solvable, {total} assignments in total"))
}
