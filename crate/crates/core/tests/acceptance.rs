use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use tsproject_core::diophantine::{has_nonneg_solution, SolvabilityInstance};
use tsproject_core::oracle_testkit::{window_common_ancestor, window_marginal};
use tsproject_core::summary_mwdg::{
    build_graph_of_cycles, build_mw_summary, enumerate_cycle_classes, tuple_sets, ClassSet, ConeTuple,
};
use tsproject_core::verify::{self, SuiteReport};
use tsproject_core::{cutoff_bound, have_common_ancestor, marginal_ts_admg, TsGraphTemplate, Vertex};

const SEED: u64 = 20_240_611;

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    ok: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn check(cond: bool, what: &str, failures: &mut Vec<String>) {
    if !cond {
        failures.push(what.to_string());
    }
}

fn running() -> TsGraphTemplate {
    TsGraphTemplate::from_names(
        &["X", "Y", "Z"],
        &[("X", "X", 2), ("X", "Y", 1), ("Y", "X", 2), ("Y", "Z", 0), ("Y", "Z", 5)],
        &[],
    )
    .unwrap()
}

fn slow_loops() -> TsGraphTemplate {
    TsGraphTemplate::from_names(&["X", "Y"], &[("X", "X", 5), ("Y", "Y", 3), ("Y", "X", 1)], &[]).unwrap()
}

fn chain() -> TsGraphTemplate {
    TsGraphTemplate::from_names(
        &["X1", "X2", "X3", "X4", "X5"],
        &[
            ("X1", "X1", 1),
            ("X2", "X2", 1),
            ("X3", "X3", 1),
            ("X4", "X4", 1),
            ("X5", "X5", 1),
            ("X2", "X1", 1),
            ("X3", "X2", 1),
            ("X3", "X4", 1),
            ("X4", "X5", 1),
        ],
        &[],
    )
    .unwrap()
}

fn running_example() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let tpl = running();
    let s = build_mw_summary(&tpl).unwrap();
    let classes = enumerate_cycle_classes(&s);
    let goc = build_graph_of_cycles(&classes);
    let empty = ClassSet::new();
    let d1 = tuple_sets(&s, &classes, &goc, 0, &[0, 1, 2], &empty).unwrap();
    check(
        d1 == vec![ConeTuple::new(1, vec![2, 3]), ConeTuple::new(6, vec![2, 3])],
        "D_0((X,Y,Z), {}) != {(1;2,3),(6;2,3)}",
        &mut f,
    );
    let d2 = tuple_sets(&s, &classes, &goc, 0, &[0], &empty).unwrap();
    check(d2 == vec![ConeTuple::new(0, vec![2, 3])], "D_0((X), {}) != {(0;2,3)}", &mut f);
    let inst = SolvabilityInstance::new(ConeTuple::new(0, vec![2, 3]), ConeTuple::new(1, vec![2, 3]));
    check(has_nonneg_solution(&inst).unwrap(), "(0;2,3) = (1;2,3) not solvable", &mut f);
    check(have_common_ancestor(&tpl, 0, 0, 2).unwrap(), "ancestor X 0 Z is false", &mut f);
    for p in 0..3 {
        let c = cutoff_bound(&tpl, p).unwrap();
        check(c.p_cut == 10 * p + 125, &format!("p_cut({p}) = {}", c.p_cut), &mut f);
    }
    Outcome {
        ok: f.is_empty(),
        detail: if f.is_empty() { "tuples, solvability, ancestor, p_cut = 10p+125".into() } else { f.join("; ") },
        elapsed: start.elapsed(),
        limit: Duration::from_secs(1),
    }
}

fn delayed_confounding() -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let v = Vertex::new;
    let (x, y) = (0, 1);

    let marg = marginal_ts_admg(&slow_loops(), &[x, y], 1).unwrap();
    let win = window_marginal(&slow_loops(), &[x, y], 1, 10).unwrap();
    for (a, b, name) in [
        (v(x, 1), v(y, 0), "X[t-1] <-> Y[t]"),
        (v(x, 1), v(x, 0), "X[t-1] <-> X[t]"),
        (v(y, 1), v(x, 0), "Y[t-1] <-> X[t]"),
    ] {
        check(marg.has_bidirected(a, b), &format!("slow loops marginal lacks {name}"), &mut f);
        check(!win.has_bidirected(a, b), &format!("slow loops w=10 window has {name}"), &mut f);
    }
    check(!window_common_ancestor(&slow_loops(), x, 1, y, 10).unwrap(), "slow loops w=10 finds an ancestor", &mut f);
    check(window_common_ancestor(&slow_loops(), x, 1, y, 12).unwrap(), "slow loops w=12 finds none", &mut f);

    let all: Vec<usize> = (0..5).collect();
    let marg = marginal_ts_admg(&chain(), &all, 1).unwrap();
    let win = window_marginal(&chain(), &all, 1, 2).unwrap();
    check(marg.has_bidirected(v(0, 1), v(4, 1)), "chain marginal lacks X1[t-1] <-> X5[t-1]", &mut f);
    check(!win.has_bidirected(v(0, 1), v(4, 1)), "chain w=2 window has X1[t-1] <-> X5[t-1]", &mut f);
    Outcome {
        ok: f.is_empty(),
        detail: if f.is_empty() {
            "slow-loop and chain edges present, short windows miss them".into()
        } else {
            f.join("; ")
        },
        elapsed: start.elapsed(),
        limit: Duration::from_secs(1),
    }
}

fn from_suite(r: SuiteReport, limit: Duration) -> Outcome {
    let mut detail = format!("{} cases, {} mismatches", r.cases, r.mismatches.len());
    for m in r.mismatches.iter().take(3) {
        detail.push_str("\n      ");
        detail.push_str(m);
    }
    Outcome { ok: r.passed(), detail, elapsed: r.elapsed, limit }
}

fn main() -> ExitCode {
    let min = Duration::from_secs(60);
    let criteria: Vec<Criterion> = vec![
        ("1 running example", Box::new(running_example)),
        ("2 delayed confounding", Box::new(delayed_confounding)),
        (
            "3 window equivalence (200 templates, p=0..2)",
            Box::new(move || from_suite(verify::window_equivalence(SEED, 200, &[0, 1, 2]).unwrap(), 5 * min)),
        ),
        (
            "4 cone decomposition (50 graphs, w<=50)",
            Box::new(move || from_suite(verify::decomposition(SEED, 50, 50).unwrap(), 5 * min)),
        ),
        (
            "5 diophantine solver (1000 instances)",
            Box::new(move || from_suite(verify::diophantine(SEED, 1000).unwrap(), 5 * min)),
        ),
        ("6 DMAG projection (100 DAGs)", Box::new(move || from_suite(verify::dmag(SEED, 100).unwrap(), 5 * min))),
        ("7 lag-1 shortcut (50 templates)", Box::new(move || from_suite(verify::lag1(SEED, 50).unwrap(), 5 * min))),
    ];
    let mut failed = BTreeSet::new();
    for (name, run) in &criteria {
        let out = run();
        let in_time = out.elapsed <= out.limit;
        let ok = out.ok && in_time;
        let timing = format!("{:.3}s (limit {}s)", out.elapsed.as_secs_f64(), out.limit.as_secs());
        println!("[{}] criterion {name}: {} {timing}", if ok { "PASS" } else { "FAIL" }, out.detail);
        if !ok {
            failed.insert(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria failed", failed.len(), criteria.len());
        ExitCode::FAILURE
    }
}
