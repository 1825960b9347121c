//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stdout (bypassing the
//! harness's capture) before asserting.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use covcheck_core::algebra::{conj, disj, ex_binding};
use covcheck_core::interp::{choice_term, enumerate_domain, eval_prop};
use covcheck_core::smt::{is_forall_exists, subtype_goal};
use covcheck_core::{
    check_definition, check_program, declared_type, definition_term, denotation_member, parse_program, parse_term,
    BaseType, CheckConfig, Constant, DomainBounds, Error, Expr, Outcome, PredicateRegistry, ProgramReport,
    RefinementType, Solver, SolverConfig, Term, TypeContext, Verdict, NU,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE_ORACLE_BUDGET: Duration = Duration::from_secs(5);
const EVEN_GEN_BUDGET: Duration = Duration::from_secs(5);
const BST_BUDGET: Duration = Duration::from_secs(60);
const SIZED_LIST_BUDGET: Duration = Duration::from_secs(30);
const BENCHMARK_BUDGET: Duration = Duration::from_secs(120);
const RANDOM_PROGRAMS: usize = 200;
const RANDOM_SUBTYPINGS: usize = 500;
const ALGEBRA_PAIRS: usize = 100;
const EX_INSTANCES: usize = 100;

fn report(n: u32, ok: bool, detail: impl AsRef<str>) {
    let line = format!("criterion {n}: {} {}\n", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn check_src(solver: &Solver, src: &str) -> ProgramReport {
    check_program(solver, src, None, &CheckConfig::default()).expect("program parses")
}

fn verdict(solver: &Solver, file: &str) -> (Outcome, Duration) {
    let start = Instant::now();
    let r = check_src(solver, &corpus_src(file));
    let v = if r.all_accepted() { Outcome::Accepted } else { r.definitions[0].verdict };
    (v, start.elapsed())
}

fn oracle_member(src: &str, bounds: &DomainBounds) -> bool {
    let program = parse_program(src).unwrap();
    let sigs: BTreeMap<_, _> = program.signatures.iter().cloned().collect();
    let reg = PredicateRegistry::builtin();
    program.definitions.iter().all(|def| {
        let ty = declared_type(def, &sigs).unwrap();
        let term = definition_term(def, &ty).unwrap();
        denotation_member(&reg, &term, &ty, &TypeContext::new(), bounds).unwrap()
    })
}

// Terms and types of the over/under typing table, with the expected ✓/✗.
const TABLE: &[(&str, &[(&str, bool)])] = &[
    (
        "int_gen ()",
        &[
            ("[v:int | true]", true),
            ("[v:int | v == 1 || v == 2]", true),
            ("[v:int | v == 1]", true),
            ("[v:int | false]", true),
            ("{v:int | true}", true),
            ("{v:int | v == 1 || v == 2}", false),
            ("{v:int | v == 1}", false),
            ("{v:int | false}", false),
        ],
    ),
    (
        "1",
        &[
            ("[v:int | v == 1]", true),
            ("[v:int | false]", true),
            ("{v:int | true}", true),
            ("{v:int | v == 1 || v == 2}", true),
            ("{v:int | v == 1}", true),
            ("[v:int | true]", false),
            ("[v:int | v == 1 || v == 2]", false),
            ("{v:int | false}", false),
        ],
    ),
    (
        "err",
        &[
            ("[v:int | false]", true),
            ("[v:int | true]", false),
            ("[v:int | v == 1 || v == 2]", false),
            ("[v:int | v == 1]", false),
            ("{v:int | true}", false),
            ("{v:int | v == 1 || v == 2}", false),
            ("{v:int | v == 1}", false),
            ("{v:int | false}", false),
        ],
    ),
];

#[test]
fn criterion_1_typing_table() {
    let reg = PredicateRegistry::builtin();
    let bounds: DomainBounds = "int=4".parse().unwrap();
    let start = Instant::now();
    let mut oracle_mismatch = Vec::new();
    for (term, row) in TABLE {
        let e = parse_term(term).unwrap();
        for (t, expected) in row.iter() {
            let got = denotation_member(&reg, &e, &ty(t), &TypeContext::new(), &bounds).unwrap();
            if got != *expected {
                oracle_mismatch.push(format!("{term} : {t}"));
            }
        }
    }
    let oracle_time = start.elapsed();

    let solver = solver();
    let mut checker_mismatch = Vec::new();
    let mut under = 0;
    for (term, row) in TABLE {
        for (t, expected) in row.iter().filter(|(t, _)| t.starts_with('[')) {
            under += 1;
            let r = check_src(&solver, &format!("val t : {t}\nlet t = {term}\n"));
            if r.all_accepted() != *expected {
                checker_mismatch.push(format!("{term} : {t}"));
            }
        }
    }
    let judgments: usize = TABLE.iter().map(|(_, r)| r.len()).sum();
    let ok = judgments == 24
        && oracle_mismatch.is_empty()
        && checker_mismatch.is_empty()
        && under == 12
        && oracle_time < TABLE_ORACLE_BUDGET;
    report(
        1,
        ok,
        format!(
            "oracle {}/{judgments} in {:.2}s (budget {}s); checker {}/{under} coverage rows; mismatches {:?} {:?}",
            judgments - oracle_mismatch.len(),
            oracle_time.as_secs_f64(),
            TABLE_ORACLE_BUDGET.as_secs(),
            under - checker_mismatch.len(),
            oracle_mismatch,
            checker_mismatch
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_even_gen() {
    let solver = solver();
    let (acc, t_acc) = verdict(&solver, "even_gen.tg");
    let (rej, t_rej) = verdict(&solver, "even_gen_any.tg");
    let bounds: DomainBounds = "int=4".parse().unwrap();
    let oracle_refutes = !oracle_member(&corpus_src("even_gen_any.tg"), &bounds);
    let oracle_confirms = oracle_member(&corpus_src("even_gen.tg"), &bounds);
    let ok = acc == Outcome::Accepted
        && rej == Outcome::Rejected
        && oracle_refutes
        && oracle_confirms
        && t_acc < EVEN_GEN_BUDGET
        && t_rej < EVEN_GEN_BUDGET;
    report(
        2,
        ok,
        format!(
            "even type {acc:?} ({:.2}s), top type {rej:?} ({:.2}s), oracle refutes top type: {oracle_refutes}",
            t_acc.as_secs_f64(),
            t_rej.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_bst_pair() {
    let solver = solver();
    let start = Instant::now();
    let (with_leaf, _) = verdict(&solver, "bst_complete.tg");
    let (without_leaf, _) = verdict(&solver, "bst_incomplete.tg");
    let (without_leaf_iff, _) = verdict(&solver, "bst_full.tg");
    let total = start.elapsed();
    let ok = with_leaf == Outcome::Accepted
        && without_leaf == Outcome::Rejected
        && without_leaf_iff == Outcome::Accepted
        && total < BST_BUDGET;
    report(
        3,
        ok,
        format!(
            "with early Leaf {with_leaf:?}; without it {without_leaf:?}, at the iff type {without_leaf_iff:?}; {:.2}s",
            total.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_sized_list_trio() {
    let solver = solver();
    let start = Instant::now();
    let (a, _) = verdict(&solver, "sizedlist_complete.tg");
    let (b, _) = verdict(&solver, "sizedlist_incomplete_b.tg");
    let (c, _) = verdict(&solver, "sizedlist_incomplete_c.tg");
    let total = start.elapsed();
    let ok = a == Outcome::Accepted && b == Outcome::Rejected && c == Outcome::Rejected && total < SIZED_LIST_BUDGET;
    report(4, ok, format!("a {a:?}, b {b:?}, c {c:?}; {:.2}s", total.as_secs_f64()));
    assert!(ok);
}

#[test]
fn criterion_5_benchmarks() {
    let solver = solver();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["sized_list", "sorted_list", "unique_list", "sized_tree", "complete_tree"] {
        let (v, t) = verdict(&solver, &format!("{name}.tg"));
        ok &= v == Outcome::Accepted && t < BENCHMARK_BUDGET;
        parts.push(format!("{name} {v:?} {:.2}s", t.as_secs_f64()));
    }
    report(5, ok, parts.join(", "));
    assert!(ok);
}

#[test]
fn criterion_6_query_shape() {
    let dir = tempfile::tempdir().unwrap();
    let solver = Solver::new(
        SolverConfig { dump_dir: Some(dir.path().to_path_buf()), ..SolverConfig::default() },
        PredicateRegistry::builtin(),
    );
    for f in corpus_files() {
        let src = std::fs::read_to_string(&f).unwrap();
        // Every corpus file with a signature goes through the checker.
        if parse_program(&src).unwrap().signatures.is_empty() {
            continue;
        }
        check_src(&solver, &src);
    }
    let queries = solver.queries();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    let shaped = queries.iter().filter(|q| is_forall_exists(&q.goal)).count();

    let globals = TypeContext::from_bindings(vec![("x".into(), ty("[v:nat | v > 0]"))]);
    let def = &parse_program("let f (y: nat) = x + y").unwrap().definitions[0];
    let fty = ty("y:{v:nat | v > x + 1} -> [v:nat | v == x + y]");
    let r = check_definition(&solver, def, &fty, &globals, &CheckConfig::default());
    let non_epr = r.verdict == Outcome::Rejected
        && r.error.as_deref() == Some(Error::NonEPRContext("y".into()).to_string().as_str());

    let ok = !queries.is_empty() && shaped == queries.len() && files == queries.len() && non_epr;
    report(
        6,
        ok,
        format!(
            "{shaped}/{} corpus queries are ∀*∃* ({files} files dumped); nested alternation rejected as non-EPR: {non_epr}",
            queries.len()
        ),
    );
    assert!(ok);
}

fn satisfying(reg: &PredicateRegistry, t: &RefinementType, b: &DomainBounds) -> Vec<Constant> {
    let (base, qual) = (t.base().unwrap(), t.qual().unwrap());
    enumerate_domain(base, b)
        .unwrap()
        .into_iter()
        .filter(|v| {
            let env = BTreeMap::from([(NU.to_string(), v.clone())]);
            eval_prop(reg, qual, &env, b).unwrap()
        })
        .collect()
}

#[test]
fn criterion_7_soundness() {
    let reg = PredicateRegistry::builtin();
    let solver = solver();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Random programs: whatever the checker accepts must be a member.
    let bounds = DomainBounds { nat_max: 3, int_abs_max: 3, fuel: 10_000, ..DomainBounds::default() };
    let mut gen = ProgramGen::new();
    let (mut accepted, mut rejected, mut violations) = (0, 0, Vec::new());
    for _ in 0..RANDOM_PROGRAMS {
        let (src, _) = gen.program(&mut rng);
        let r = check_src(&solver, &src);
        match r.definitions[0].verdict {
            Outcome::Accepted => {
                accepted += 1;
                if !oracle_member(&src, &bounds) {
                    violations.push(src);
                }
            }
            Outcome::Rejected => rejected += 1,
            Outcome::Error => panic!("checker error on generated program:\n{src}\n{:?}", r.definitions[0].error),
        }
    }

    // Random subtyping: Valid must mean inclusion of the enumerated
    // denotations, for every admissible value of the context variable.
    let sub_bounds = DomainBounds { nat_max: 3, int_abs_max: 3, ..DomainBounds::default() };
    let (mut valid, mut sub_violations) = (0, Vec::new());
    for i in 0..RANDOM_SUBTYPINGS {
        let with_x = i % 2 == 1;
        let (s1, s2) = type_pair(&mut rng, with_x);
        let (t1, t2) = (ty(&s1), ty(&s2));
        let (ctx, xs) = if with_x {
            let q = num_qual(&mut rng, false, 0);
            let tx = ty(&format!("{{v:nat | {q}}}"));
            let xs: Vec<i64> = satisfying(&reg, &tx, &sub_bounds).iter().filter_map(Constant::as_int).collect();
            (TypeContext::from_bindings(vec![("x".into(), tx)]), xs.into_iter().map(Some).collect())
        } else {
            (TypeContext::new(), vec![None])
        };
        let goal = subtype_goal(&ctx, &t1, &t2).unwrap();
        if solver.check_valid(&goal, "random-subtyping").unwrap().0 != Verdict::Valid {
            continue;
        }
        valid += 1;
        for x in xs {
            let close = |t: &RefinementType| match x {
                Some(k) => t.subst("x", &Expr::Int(k)),
                None => t.clone(),
            };
            let (c1, c2) = (close(&t1), close(&t2));
            let mut probes = vec![satisfying(&reg, &c1, &sub_bounds)];
            // A few more members of τ1: supersets for coverage types,
            // subsets for overapproximate ones.
            let dom = enumerate_domain(c1.base().unwrap(), &sub_bounds).unwrap();
            for _ in 0..3 {
                let extra: Vec<Constant> = dom.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
                let base = probes[0].clone();
                probes.push(if c1.is_under() {
                    base.into_iter().chain(extra).collect()
                } else {
                    base.into_iter().filter(|v| !extra.contains(v)).collect()
                });
            }
            for vals in probes {
                let mut vals = vals;
                vals.sort();
                vals.dedup();
                let e = choice_term(&vals);
                let in1 = denotation_member(&reg, &e, &c1, &TypeContext::new(), &sub_bounds).unwrap();
                if in1 && !denotation_member(&reg, &e, &c2, &TypeContext::new(), &sub_bounds).unwrap() {
                    sub_violations.push(format!("{ctx:?} ⊢ {s1} <: {s2} at x={x:?} with values {vals:?}"));
                }
            }
        }
    }

    let ok = violations.is_empty() && sub_violations.is_empty() && accepted > 0 && valid > 0;
    report(
        7,
        ok,
        format!(
            "{RANDOM_PROGRAMS} programs ({accepted} accepted, {rejected} rejected), {} membership violations; \
             {RANDOM_SUBTYPINGS} subtypings ({valid} valid), {} inclusion violations",
            violations.len(),
            sub_violations.len()
        ),
    );
    assert!(violations.is_empty(), "accepted but not members:\n{}", violations.join("\n---\n"));
    assert!(sub_violations.is_empty(), "{}", sub_violations.join("\n"));
    assert!(ok);
}

fn equivalent(solver: &Solver, a: &RefinementType, b: &RefinementType) -> bool {
    let ctx = TypeContext::new();
    [(a, b), (b, a)].iter().all(|(l, r)| {
        let goal = subtype_goal(&ctx, l, r).unwrap();
        solver.check_valid(&goal, "algebra").unwrap().0 == Verdict::Valid
    })
}

#[test]
fn criterion_8_algebra() {
    let reg = PredicateRegistry::builtin();
    let solver = solver();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut failures = Vec::new();
    for _ in 0..ALGEBRA_PAIRS {
        let (s1, s2) = type_pair(&mut rng, false);
        let (t1, t2) = (ty(&s1), ty(&s2));
        // A third type over the same base and kind as the pair.
        let base = t1.base().unwrap().clone();
        let q3 = if base == BaseType::Bool { bool_qual(&mut rng, false) } else { num_qual(&mut rng, false, 1) };
        let t3 = if t1.is_under() { RefinementType::under(base, ty(&format!("[v:int | {q3}]")).qual().unwrap().clone()) } else {
            RefinementType::over(base, ty(&format!("[v:int | {q3}]")).qual().unwrap().clone())
        };
        let laws: [(&str, RefinementType, RefinementType); 6] = [
            ("disj comm", disj(&t1, &t2).unwrap(), disj(&t2, &t1).unwrap()),
            ("conj comm", conj(&t1, &t2).unwrap(), conj(&t2, &t1).unwrap()),
            ("disj assoc", disj(&disj(&t1, &t2).unwrap(), &t3).unwrap(), disj(&t1, &disj(&t2, &t3).unwrap()).unwrap()),
            ("conj assoc", conj(&conj(&t1, &t2).unwrap(), &t3).unwrap(), conj(&t1, &conj(&t2, &t3).unwrap()).unwrap()),
            ("disj idem", disj(&t1, &t1).unwrap(), t1.clone()),
            ("conj idem", conj(&t1, &t1).unwrap(), t1.clone()),
        ];
        for (law, l, r) in laws {
            if !equivalent(&solver, &l, &r) {
                failures.push(format!("{law}: {s1} / {s2}"));
            }
        }
    }

    // Ex: the result never mentions the eliminated binding, and a term typed
    // under the binding is, once the binding is let-bound to a member of its
    // type, a member of the existentialized type.
    let bounds = DomainBounds { nat_max: 3, int_abs_max: 3, ..DomainBounds::default() };
    let bodies = ["x", "x + 1", "let (b: bool) = bool_gen () in if b then x else 2", "nat_gen ()", "1", "err"];
    let (mut free_fail, mut ex_fail, mut premises) = (0, Vec::new(), 0);
    for i in 0..EX_INSTANCES {
        let tx = ty(&format!("[v:nat | {}]", num_qual(&mut rng, false, 1)));
        let t = ty(&format!("[v:nat | {}]", num_qual(&mut rng, true, 1)));
        let ex = ex_binding("x", &tx, &t).unwrap();
        if ex.mentions("x") {
            free_fail += 1;
        }
        let e = parse_term(bodies[i % bodies.len()]).unwrap();
        let ctx = TypeContext::from_bindings(vec![("x".into(), tx.clone())]);
        if !denotation_member(&reg, &e, &t, &ctx, &bounds).unwrap() {
            continue;
        }
        premises += 1;
        let ex_term = choice_term(&satisfying(&reg, &tx, &bounds));
        let closed = Term::let_("x", ex_term, e);
        if !denotation_member(&reg, &closed, &ex, &TypeContext::new(), &bounds).unwrap() {
            ex_fail.push(format!("x:{tx} ⊢ {} : {t}", bodies[i % bodies.len()]));
        }
    }

    let ok = failures.is_empty() && free_fail == 0 && ex_fail.is_empty();
    report(
        8,
        ok,
        format!(
            "{} law checks on {ALGEBRA_PAIRS} pairs, {} failures; Ex on {EX_INSTANCES} instances: {free_fail} not free, \
             {}/{premises} equivalence failures",
            ALGEBRA_PAIRS * 6,
            failures.len(),
            ex_fail.len()
        ),
    );
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(ex_fail.is_empty(), "{}", ex_fail.join("\n"));
    assert!(ok);
}
