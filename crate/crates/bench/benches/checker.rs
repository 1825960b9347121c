use std::path::PathBuf;

use covcheck_core::smt::render;
use covcheck_core::{
    check_program, denotation_member, parse_prop, parse_term, parse_type, CheckConfig, DomainBounds,
    PredicateRegistry, Solver, SolverConfig, TypeContext,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

// End-to-end checks; dominated by solver process time.
fn checking(c: &mut Criterion) {
    let mut g = c.benchmark_group("check");
    g.sample_size(10);
    for name in ["even_gen.tg", "sizedlist_complete.tg", "sorted_list.tg", "bst_complete.tg"] {
        let src = corpus(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &src, |b, src| {
            b.iter(|| {
                // A fresh solver each time so the verdict cache does not hide the work.
                let solver = Solver::new(SolverConfig::default(), PredicateRegistry::builtin());
                check_program(&solver, src, None, &CheckConfig::default()).unwrap()
            })
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let reg = PredicateRegistry::builtin();
    let ctx = TypeContext::new();
    let mut g = c.benchmark_group("oracle");
    for int in [2, 4, 8] {
        let bounds: DomainBounds = format!("int={int}").parse().unwrap();
        let e = parse_term("int_gen ()").unwrap();
        let t = parse_type("[v:int | v mod 2 == 0]").unwrap();
        g.bench_with_input(BenchmarkId::new("int_gen", int), &bounds, |b, bounds| {
            b.iter(|| denotation_member(&reg, &e, &t, &ctx, bounds).unwrap())
        });
    }
    g.finish();
}

fn encoding(c: &mut Criterion) {
    let reg = PredicateRegistry::builtin();
    let goal = parse_prop(
        "forall lo:int. forall hi:int. forall t:int tree. bst(t) && (forall u:int. mem(t, u) ==> lo < u && u < hi) \
         ==> (exists x:int. exists l:int tree. root(t, x) && lch(t, l) && lo < x) || emp(t)",
    )
    .unwrap();
    c.bench_function("render/bst_goal", |b| b.iter(|| render(&goal, &reg, "bench").unwrap()));
}

criterion_group!(benches, checking, oracle, encoding);
criterion_main!(benches);
