use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xforge_core::poly::parse_poly;
use xforge_core::{Rat, VarId};
use xforge_puzzle::unique::{count_with_order, letter_order, respects_convention};
use xforge_puzzle::{
    check_assignment, count_assignments, eval_line, eval_ops, grid_to_system, line_count, parse_puzzle, random_grid,
    reference_grid, CellExpr, Convention, DiagMode, LineStatus, Op, OperatorGrid, Puzzle, PuzzleError, System,
};

const SHOWCASE: &str = include_str!("fixtures/showcase7.txt");

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

#[test]
fn line_counts() {
    assert_eq!(line_count(7, DiagMode::All), 36);
    assert_eq!(line_count(5, DiagMode::MainOnly), 12);
    assert_eq!(line_count(5, DiagMode::All), 24);
    assert_eq!(reference_grid().lines(DiagMode::All).len(), 36);
}

#[test]
fn reference_system_shape() {
    let sys = grid_to_system(&reference_grid(), DiagMode::All);
    assert_eq!(sys.equations.len(), 36);
    assert_eq!(sys.vars.len(), 49);
    let row1 = parse_poly("u1+u2+u3-u4-u5*u6-u7").unwrap();
    assert_eq!(sys.equations[0].primitive_normalized(), row1.primitive_normalized());
    assert_eq!(sys.inequalities, vec![parse_poly("u9").unwrap(), parse_poly("u40").unwrap()]);

    let g5 = random_grid(5, 1, 1, DiagMode::MainOnly, 3).unwrap();
    let s5 = grid_to_system(&g5, DiagMode::MainOnly);
    assert_eq!((s5.equations.len(), s5.vars.len()), (12, 25));
}

#[test]
fn evaluation_precedence() {
    let v = |xs: &[i64]| xs.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>();
    assert_eq!(eval_ops(&[Op::Plus, Op::Times], &v(&[2, 3, 4])).unwrap(), rat(14, 1));
    assert_eq!(eval_ops(&[Op::Minus, Op::Minus], &v(&[8, 4, 3])).unwrap(), rat(1, 1));
    assert_eq!(eval_ops(&[Op::Divide, Op::Times], &v(&[8, 4, 1])).unwrap(), rat(2, 1));
    assert!(eval_ops(&[Op::Divide], &v(&[1, 0])).is_err());
}

#[test]
fn division_cleared_by_lcm() {
    let mut row_ops = vec![Op::Plus; 6];
    row_ops[0] = Op::Divide;
    row_ops[1] = Op::Minus;
    let g = OperatorGrid::with_variables(3, row_ops, vec![Op::Plus; 6], vec![Op::Plus; 4]).unwrap();
    let sys = grid_to_system(&g, DiagMode::MainOnly);
    assert_eq!(sys.equations[0], parse_poly("u1 - u2*u3").unwrap());
    assert_eq!(sys.inequalities, vec![parse_poly("u2").unwrap()]);
}

#[test]
fn showcase_operators_match_reference() {
    let p = parse_puzzle(SHOWCASE).unwrap();
    let r = reference_grid();
    assert_eq!(p.grid.row_ops(), r.row_ops());
    assert_eq!(p.grid.col_ops(), r.col_ops());
    assert_eq!(p.grid.diag_ops(), r.diag_ops());
    assert_eq!(p.letters.len(), 10);
}

#[test]
fn showcase_is_unique() {
    let p = parse_puzzle(SHOWCASE).unwrap();
    let report = count_assignments(&p, 2);
    assert_eq!(report.count, 1, "{report:?}");
    let a = &report.assignments[0];
    let checks = check_assignment(&p, a).unwrap();
    assert_eq!(checks.len(), 36);
    assert!(checks.iter().all(|c| c.status == LineStatus::Zero));
    assert!(respects_convention(&p, a));
}

#[test]
fn single_digit_perturbation_is_flagged() {
    let p = parse_puzzle(SHOWCASE).unwrap();
    let a = count_assignments(&p, 1).assignments[0].clone();
    let (&l1, &d1) = a.iter().next().unwrap();
    let (&l2, &d2) = a.iter().nth(1).unwrap();
    let mut swapped = a.clone();
    swapped.insert(l1, d2);
    swapped.insert(l2, d1);
    let checks = check_assignment(&p, &swapped).unwrap();
    assert!(checks.iter().any(|c| c.status != LineStatus::Zero));

    let mut partial = a.clone();
    partial.remove(&l1);
    let checks = check_assignment(&p, &partial).unwrap();
    assert!(checks.iter().any(|c| c.status == LineStatus::Pending));

    let mut dup = a.clone();
    dup.insert(l1, d2);
    assert!(check_assignment(&p, &dup).is_err());
}

#[test]
fn puzzle_text_and_json_round_trip() {
    let p = parse_puzzle(SHOWCASE).unwrap();
    let again = parse_puzzle(&p.render_text()).unwrap();
    assert_eq!(p, again);
    let j = serde_json::to_string(&p.to_json()).unwrap();
    let back = Puzzle::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
    assert_eq!(p, back);
    assert!(p.render_pretty().contains("cgj/af"));
}

#[test]
fn parse_errors_carry_positions() {
    let bad_op = SHOWCASE.replacen("- - / -", "- - ? -", 1);
    match parse_puzzle(&bad_op) {
        Err(PuzzleError::Parse { line, column, .. }) => assert_eq!((line, column), (4, 5)),
        other => panic!("{other:?}"),
    }
    let bad_cell = SHOWCASE.replacen("cgj/af", "cgJ/af", 1);
    match parse_puzzle(&bad_cell) {
        Err(PuzzleError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 1)),
        other => panic!("{other:?}"),
    }
    let double_space = SHOWCASE.replacen("cgj/af +", "cgj/af  +", 1);
    assert!(matches!(parse_puzzle(&double_space), Err(PuzzleError::Parse { line: 3, .. })));
    assert!(matches!(parse_puzzle("size 2\n"), Err(PuzzleError::Parse { line: 2, .. })));
    assert!(matches!(parse_puzzle("size x\n"), Err(PuzzleError::Parse { line: 1, column: 1, .. })));
}

#[test]
fn system_text_round_trip() {
    let sys = grid_to_system(&reference_grid(), DiagMode::All);
    let back = System::parse(&sys.to_text()).unwrap();
    assert_eq!(sys, back);
    let j = serde_json::to_string(&sys).unwrap();
    assert_eq!(serde_json::from_str::<System>(&j).unwrap(), sys);
    let err = System::parse("eq u1+u2\nfoo u3\n").unwrap_err();
    assert_eq!(err.line, 2);
}

#[test]
fn random_grid_respects_budget_and_seed() {
    let g = random_grid(5, 2, 1, DiagMode::MainOnly, 11).unwrap();
    assert_eq!(g.nonlinear_counts(DiagMode::MainOnly), (2, 1));
    assert_eq!(g, random_grid(5, 2, 1, DiagMode::MainOnly, 11).unwrap());
    assert!(random_grid(2, 9, 0, DiagMode::All, 0).is_err());
}

// Toy puzzles for the counter oracle. Even seeds give 2x2 grids of +-E and
// +-F with additive operators, so every line says E = +-F, E = 0 or nothing
// and solutions are common; odd seeds give unstructured 2x2 and 3x3 grids.
fn toy_puzzle(seed: u64) -> Puzzle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        return paired_toy(&mut rng);
    }
    let n = rng.gen_range(2..=3);
    let k = rng.gen_range(2..=6);
    let letters: Vec<char> = ('a'..='j').collect::<Vec<_>>().choose_multiple(&mut rng, k).copied().collect();
    let word = |rng: &mut ChaCha8Rng, len: usize| (0..len).map(|_| *letters.choose(rng).unwrap()).collect::<String>();
    let pool: Vec<CellExpr> = (0..rng.gen_range(2..=4))
        .map(|_| {
            let nl = rng.gen_range(1..=2);
            let num = word(&mut rng, nl);
            let den = if rng.gen_bool(0.25) { Some(word(&mut rng, 1)) } else { None };
            CellExpr { negative: rng.gen_bool(0.5), num, den }
        })
        .collect();
    let cells: Vec<CellExpr> = (0..n * n).map(|_| pool.choose(&mut rng).unwrap().clone()).collect();
    let ops = [Op::Plus, Op::Minus, Op::Minus, Op::Plus, Op::Times, Op::Divide];
    let pick = |rng: &mut ChaCha8Rng, len: usize| (0..len).map(|_| *ops.choose(rng).unwrap()).collect::<Vec<_>>();
    let row_ops = pick(&mut rng, n * (n - 1));
    let col_ops = pick(&mut rng, n * (n - 1));
    let diag_ops = pick(&mut rng, (n - 1) * (n - 1));
    let grid = OperatorGrid::new(n, cells, row_ops, col_ops, diag_ops).unwrap();
    let diagonals = if rng.gen_bool(0.5) { DiagMode::All } else { DiagMode::MainOnly };
    Puzzle::new(grid, Convention { leading_zero: rng.gen_bool(0.5), diagonals }).unwrap()
}

fn paired_toy(rng: &mut ChaCha8Rng) -> Puzzle {
    let k = rng.gen_range(3..=6);
    let letters: Vec<char> = ('a'..='j').collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    let expr = |rng: &mut ChaCha8Rng| {
        let num: String = (0..rng.gen_range(1..=2)).map(|_| *letters.choose(rng).unwrap()).collect();
        let den = rng.gen_bool(0.6).then(|| letters.choose(rng).unwrap().to_string());
        CellExpr { negative: false, num, den }
    };
    let pool = [expr(rng), expr(rng)];
    let cells: Vec<CellExpr> = (0..4)
        .map(|_| {
            let mut c = pool.choose(rng).unwrap().clone();
            c.negative = rng.gen_bool(0.5);
            c
        })
        .collect();
    // mostly pick the operator that cancels two copies of the same cell
    let op = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
        if rng.gen_bool(0.75) {
            if cells[a].negative == cells[b].negative { Op::Minus } else { Op::Plus }
        } else {
            *[Op::Plus, Op::Minus].choose(rng).unwrap()
        }
    };
    let row_ops = vec![op(rng, 0, 1), op(rng, 2, 3)];
    let col_ops = vec![op(rng, 0, 2), op(rng, 1, 3)];
    let diag_ops = vec![op(rng, 0, 3)];
    let grid = OperatorGrid::new(2, cells, row_ops, col_ops, diag_ops).unwrap();
    Puzzle::new(grid, Convention { leading_zero: rng.gen_bool(0.5), diagonals: DiagMode::All }).unwrap()
}

fn naive_count(p: &Puzzle) -> usize {
    fn rec(p: &Puzzle, i: usize, used: &mut [bool; 10], a: &mut BTreeMap<char, u8>) -> usize {
        if i == p.letters.len() {
            if !respects_convention(p, a) {
                return 0;
            }
            let ok = p.lines().iter().all(|line| {
                let vals: Option<Vec<Rat>> =
                    line.cells.iter().map(|&(r, c)| p.grid.cell(r, c).value(|l| a.get(&l).copied())).collect();
                matches!(vals.map(|v| eval_ops(&line.ops, &v)), Some(Ok(x)) if x.is_zero())
            });
            return ok as usize;
        }
        let mut total = 0;
        for d in 0..10u8 {
            if used[d as usize] {
                continue;
            }
            used[d as usize] = true;
            a.insert(p.letters[i], d);
            total += rec(p, i + 1, used, a);
            a.remove(&p.letters[i]);
            used[d as usize] = false;
        }
        total
    }
    rec(p, 0, &mut [false; 10], &mut BTreeMap::new())
}

#[test]
fn pruned_count_matches_naive_enumeration() {
    let mut nonzero = 0;
    for seed in 0..50 {
        let p = toy_puzzle(seed);
        assert!(p.letters.len() <= 6);
        let naive = naive_count(&p);
        let pruned = count_assignments(&p, usize::MAX - 1);
        assert!(!pruned.capped);
        assert_eq!(pruned.count, naive, "toy {seed}:\n{}", p.render_text());
        nonzero += (naive > 0) as usize;
    }
    assert!(nonzero >= 5, "only {nonzero} toys had solutions");
}

#[test]
fn cap_stops_early() {
    let p = (0..200).map(toy_puzzle).find(|p| naive_count(p) > 3).expect("a toy with several solutions");
    let r = count_assignments(&p, 2);
    assert!(r.capped);
    assert_eq!(r.count, 3);
    assert_eq!(r.assignments.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn count_is_independent_of_letter_order(seed in 0u64..10_000, shuffle in any::<u64>()) {
        let p = toy_puzzle(seed);
        let mut order = letter_order(&p);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = count_assignments(&p, usize::MAX - 1);
        let b = count_with_order(&p, usize::MAX - 1, &order);
        prop_assert_eq!(a.count, b.count);
    }

    // Each equation vanishes at a point with nonzero divisors exactly when
    // the line it came from evaluates to zero.
    #[test]
    fn system_is_faithful_to_lines(
        seed in any::<u64>(),
        n in 2usize..=4,
        times in 0usize..=2,
        divs in 0usize..=2,
        vals in proptest::collection::vec(1i64..=4, 16),
        planted in any::<bool>(),
    ) {
        let mode = DiagMode::All;
        let g = random_grid(n, times, divs, mode, seed).unwrap();
        let sys = grid_to_system(&g, mode);
        let mut pt: HashMap<VarId, Rat> = (1..=(n * n) as u32).map(|k| (VarId(k), rat(vals[k as usize - 1], 1))).collect();
        let lines = g.lines(mode);
        if planted {
            // force row 1 to vanish through its last cell when that cell is additive
            let line = &lines[0];
            if line.ops.last().map(|o| !o.is_multiplicative()).unwrap_or(false) {
                let last = *g.cell(line.cells[line.cells.len() - 1].0, line.cells[line.cells.len() - 1].1);
                let old = pt.insert(last, Rat::zero()).unwrap();
                let v = eval_line(line, &g, |x| pt[x].clone()).unwrap();
                let fix = if *line.ops.last().unwrap() == Op::Minus { v } else { -v };
                pt.insert(last, if fix.is_zero() { old } else { fix });
            }
        }
        for (line, eq) in lines.iter().zip(&sys.equations) {
            let lv = eval_line(line, &g, |x| pt[x].clone()).unwrap();
            let ev = eq.eval(&pt).unwrap();
            prop_assert_eq!(lv.is_zero(), ev.is_zero(), "{}", line.label());
        }
    }
}
