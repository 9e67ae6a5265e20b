//! Release acceptance checks. Prints one `[PASS]` or `[FAIL]` line per
//! criterion and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use jring_cli::expr::Evaluator;
use jring_cli::{parse_ring_expr, run_command};
use jring_core::checker::{
    classify, verify_certificate, Bounds, ClassificationReport, SearchConfig, SearchMode, TargetKind, Verdict,
    Witness,
};
use jring_core::constructions::{direct_product, matrix_parts, quotient, upper_triangular, IdealSpec};
use jring_core::ring::DEFAULT_CAP;
use jring_core::structure::{is_abelian, jacobson_radical, jacobson_radical_oracle, units, Abelian};
use jring_core::{FiniteRing, TableRing};
use serde_json::Value;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/standard.txt");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn json(args: &[&str]) -> (i32, Value, String) {
    let (code, out) = run_command(args.iter().copied());
    let v = serde_json::from_str(&out).unwrap_or(Value::Null);
    (code, v, out)
}

fn corpus_exprs() -> Vec<String> {
    std::fs::read_to_string(CORPUS)
        .expect("corpus file")
        .lines()
        .map(|l| l.split('#').next().unwrap().trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

fn ring(expr: &str) -> FiniteRing {
    Evaluator { cap: DEFAULT_CAP, cache: None }.eval(&parse_ring_expr(expr).unwrap()).unwrap()
}

/// Corpus rings plus their quotients by the radical.
fn corpus_with_quotients() -> Vec<FiniteRing> {
    let mut out = Vec::new();
    for e in corpus_exprs() {
        let r = ring(&e);
        let j = jacobson_radical(&r).unwrap();
        if j.len() > 1 {
            let gens = j.members().iter().map(|&x| r.element(x).unwrap()).collect();
            out.push(quotient(&r, &IdealSpec { generators: gens }).unwrap());
        }
        out.push(r);
    }
    out
}

fn table(r: &FiniteRing) -> &TableRing {
    r.require_table().unwrap()
}

fn label_index(t: &TableRing, l: &str) -> usize {
    t.index_of(l).unwrap_or_else(|| panic!("no element {l}"))
}

fn one_worker() -> SearchConfig {
    SearchConfig::default().with_workers(1)
}

fn ac1() -> Outcome {
    let started = Instant::now();
    let (code, v, out) = json(&["--json", "classify", "m(2,gf(2))", "--target", "j", "--deg-f", "1", "--deg-g", "1"]);
    let elapsed = started.elapsed();
    ensure(code == 1, || format!("exit {code}: {out}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    ensure(v["verdict"] == "Counterexample", || out.clone())?;

    let m2 = ring("m(2,gf(2))");
    let t = table(&m2);
    let m = |entries: &[(usize, usize)]| {
        let label = format!("{:?}", {
            let mut a = [[0u8; 2]; 2];
            for &(i, j) in entries {
                a[i][j] = 1;
            }
            a
        })
        .replace(' ', "");
        assert!(t.index_of(&label).is_some(), "{label}");
        label
    };
    let witness = Witness {
        f: vec![m(&[(0, 1)]), m(&[(0, 0)])],
        g: vec![m(&[(0, 0), (0, 1)]), m(&[(1, 0), (1, 1)])],
        offending: (0, 1),
        product: m(&[(0, 0), (0, 1)]),
        target: TargetKind::Jac,
        target_size: 1,
        power_trace: None,
    };
    // independent arithmetic check of the explicit pair
    let idx = |l: &String| label_index(t, l);
    let (f, g): (Vec<usize>, Vec<usize>) = (witness.f.iter().map(idx).collect(), witness.g.iter().map(idx).collect());
    for k in 0..3 {
        let mut s = 0;
        for i in 0..2 {
            if k >= i && k - i < 2 {
                s = t.add(s, t.mul(f[i], g[k - i]));
            }
        }
        ensure(s == 0, || format!("coefficient {k} of fg is {}", t.label(s)))?;
    }
    ensure(t.mul(f[0], g[1]) == idx(&witness.product), || "a_0 b_1 mismatch".into())?;
    let j = jacobson_radical(&m2).unwrap();
    ensure(j.len() == 1, || format!("|J| = {}", j.len()))?;
    let report = ClassificationReport {
        ring_expr: m2.name().into(),
        ring_size: 16,
        target: TargetKind::Jac,
        bounds: Bounds::new(1, 1),
        mode: SearchMode::Exhaustive,
        verdict: Verdict::Counterexample,
        witness: Some(witness),
        stats: Default::default(),
    };
    ensure(verify_certificate(&m2, &report).unwrap(), || "explicit witness rejected".into())?;
    Ok(format!("exit 1 in {elapsed:.2?}; explicit witness revalidates, a_0 b_1 = e11+e12, J = 0"))
}

fn case_json(case: &str) -> Result<(Value, Duration), String> {
    let started = Instant::now();
    let (code, v, out) = json(&["--json", "verify-paper", "--case", case, "--truncation", "3"]);
    let elapsed = started.elapsed();
    ensure(code == 0, || format!("exit {code}: {out}"))?;
    let c = v["cases"][0].clone();
    ensure(c["passed"] == true, || out.clone())?;
    Ok((c, elapsed))
}

fn check_named(c: &Value, name: &str) -> Result<String, String> {
    let check = c["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["name"] == name)
        .ok_or_else(|| format!("missing check `{name}`"))?;
    ensure(check["passed"] == true, || format!("check `{name}` failed"))?;
    Ok(check["detail"].as_str().unwrap().to_string())
}

/// In a local ring the radical is exactly the set of non-units.
fn radical_is_nonunits(r: &FiniteRing) -> Result<usize, String> {
    let j = jacobson_radical(r).unwrap();
    let u = units(r).unwrap();
    let t = table(r);
    ensure((0..t.size()).all(|x| j.contains(x) != u.contains(x)), || "J is not the set of non-units".into())?;
    Ok(j.len())
}

fn ac2() -> Outcome {
    let (c, elapsed) = case_json("E2")?;
    ensure(c["ring_size"] == 512, || format!("size {}", c["ring_size"]))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    check_named(&c, "radical is the scalar-free part")?;
    check_named(&c, "witness pair annihilates")?;
    let products = check_named(&c, "coefficient products lie in J(R)")?;
    ensure(products.starts_with("8 of 8"), || products.clone())?;
    let cert_detail = check_named(&c, "certified non-nilpotent coefficient product")?;
    ensure(cert_detail.starts_with("a_0 b_1"), || cert_detail.clone())?;
    let cert = &c["certificates"][0];
    ensure(cert["lowest_degree"] == 2 && cert["leading_coefficient"] == "[[1,1,0],[0,0,0],[0,0,0]]", || {
        format!("certificate {cert}")
    })?;

    // independent: R/J = F_2, so J(R) is the set of non-units, and it has the
    // 256 elements with zero scalar part
    let r = ring("paper(e2,3)");
    let j = radical_is_nonunits(&r)?;
    ensure(j == 256, || format!("|J| = {j}"))?;
    let origin = r.origin().unwrap();
    let radical = jacobson_radical(&r).unwrap();
    let scalar_zero = origin.elements.iter().enumerate().all(|(i, e)| (e.parts().unwrap()[8] == 0) == radical.contains(i));
    ensure(scalar_zero, || "radical differs from the scalar-free part".into())?;
    let lead = ring("m(3,gf(2))");
    let e = lead.element_by_label("[[1,1,0],[0,0,0],[0,0,0]]").unwrap();
    ensure(lead.mul(&e, &e).unwrap() == e, || "leading coefficient is not idempotent".into())?;
    Ok(format!("512 elements, |J| = 256, certificate at (0,1) with idempotent t^2 (e11+e12), {elapsed:.2?}"))
}

fn ac3() -> Outcome {
    let (c, elapsed) = case_json("E5")?;
    ensure(c["ring_size"] == 512, || format!("size {}", c["ring_size"]))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    check_named(&c, "ring is local")?;
    check_named(&c, "witness pair annihilates")?;
    let sq = check_named(&c, "(e11 t)^2 is not nilpotent")?;
    ensure(sq == "lowest term t^2 [[1,0],[0,0]]", || sq.clone())?;
    let r = ring("paper(e5,3)");
    radical_is_nonunits(&r)?;
    let (code, _, out) = json(&["--json", "is-local", "paper(e5,3)"]);
    ensure(code == 0, || out.clone())?;
    Ok(format!("512 elements, local, (e11 t)^2 certified non-nilpotent, {elapsed:.2?}"))
}

fn ac4() -> Outcome {
    let t2 = ring("t(2,gf(2))");
    let t = table(&t2);
    match is_abelian(&t2).unwrap() {
        Abelian::Witness { idempotent, .. } => {
            ensure(t.label(idempotent) == "[[0,0],[0,1]]", || format!("witness {}", t.label(idempotent)))?
        }
        Abelian::Abelian => return Err("reported abelian".into()),
    }
    let r = classify(&t2, TargetKind::Jac, Bounds::new(2, 2), SearchMode::Exhaustive, &one_worker()).unwrap();
    ensure(r.verdict == Verdict::Verified, || format!("{:?}", r.verdict))?;
    let (code, v, out) = json(&["--json", "is-abelian", "t(2,gf(2))"]);
    ensure(code == 1 && v["witness"]["idempotent"] == "[[0,0],[0,1]]", || out.clone())?;
    Ok("witness e22; JAC (2,2) exhaustive Verified".into())
}

fn ac5() -> Outcome {
    let mut compared = 0;
    for r in corpus_with_quotients() {
        if r.size() > 64 {
            continue;
        }
        let a = jacobson_radical(&r).unwrap();
        let b = jacobson_radical_oracle(&r, 64).unwrap();
        ensure(a.members() == b.members(), || format!("{}: {:?} vs {:?}", r.name(), a.labels(), b.labels()))?;
        compared += 1;
    }
    Ok(format!("{compared} rings, zero discrepancies"))
}

fn nilpotent(t: &TableRing, x: usize) -> bool {
    let mut p = x;
    for _ in 0..t.size() {
        if p == 0 {
            return true;
        }
        p = t.mul(p, x);
    }
    p == 0
}

fn has_inverse(t: &TableRing, x: usize) -> bool {
    (0..t.size()).any(|y| t.mul(x, y) == t.one() && t.mul(y, x) == t.one())
}

fn ac6() -> Outcome {
    let rings = corpus_with_quotients();
    for r in &rings {
        let t = table(r);
        let j = jacobson_radical(r).unwrap();
        let m = j.members();
        for &x in m {
            ensure(nilpotent(t, x), || format!("{}: {} not nilpotent", r.name(), t.label(x)))?;
            ensure(has_inverse(t, t.add(t.one(), x)), || format!("{}: 1+{} not a unit", r.name(), t.label(x)))?;
            for &y in m {
                ensure(j.contains(t.add(x, y)), || format!("{}: J not additive", r.name()))?;
            }
            for a in 0..t.size() {
                ensure(j.contains(t.mul(a, x)) && j.contains(t.mul(x, a)), || {
                    format!("{}: J not two-sided", r.name())
                })?;
            }
        }
        let gens = m.iter().map(|&x| r.element(x).unwrap()).collect();
        let q = quotient(r, &IdealSpec { generators: gens }).unwrap();
        ensure(jacobson_radical(&q).unwrap().len() == 1, || format!("J(R/J) != 0 for {}", r.name()))?;
    }

    let mut pairs = 0;
    for (i, a) in rings.iter().enumerate() {
        for b in &rings[i..] {
            if a.size() * b.size() > DEFAULT_CAP as u128 {
                continue;
            }
            let p = direct_product(a, b).unwrap().materialize(DEFAULT_CAP).unwrap();
            let (ja, jb, jp) = (jacobson_radical(a).unwrap(), jacobson_radical(b).unwrap(), jacobson_radical(&p).unwrap());
            let origin = p.origin().unwrap();
            for (k, e) in origin.elements.iter().enumerate() {
                let parts = e.parts().unwrap();
                let expected = ja.contains(parts[0] as usize) && jb.contains(parts[1] as usize);
                ensure(jp.contains(k) == expected, || format!("I-PRODJ fails for {}", p.name()))?;
            }
            pairs += 1;
        }
    }

    let mut triangular = 0;
    for r in &rings {
        let j = jacobson_radical(r).unwrap();
        for n in [2usize, 3] {
            let free = n * (n + 1) / 2;
            if r.size().checked_pow(free as u32).is_none_or(|s| s > DEFAULT_CAP as u128) {
                continue;
            }
            let tn = upper_triangular(n, r).unwrap().materialize(DEFAULT_CAP).unwrap();
            let jt = jacobson_radical(&tn).unwrap();
            for (k, e) in tn.origin().unwrap().elements.iter().enumerate() {
                let parts = e.parts().unwrap();
                let expected = (0..n).all(|d| j.contains(parts[d * n + d] as usize));
                ensure(jt.contains(k) == expected, || format!("I-TRIJ fails for {}", tn.name()))?;
            }
            triangular += 1;
        }
    }
    ensure(matrix_parts(2, &[(1, 1, 1)]) == [0, 0, 0, 1], || "matrix layout changed".into())?;
    Ok(format!("{} rings; I-PRODJ on {pairs} pairs; I-TRIJ on {triangular} T_n(R)", rings.len()))
}

fn ac7() -> Outcome {
    let mut summary = Vec::new();
    for bounds in ["1,1", "2,2"] {
        let (code, v, out) = json(&["--json", "check-theorems", "--corpus", CORPUS, "--bounds", bounds]);
        ensure(code == 0 && v["failures"] == 0, || {
            let failing: Vec<String> = v["verdicts"]
                .as_array()
                .map(|a| {
                    a.iter()
                        .filter(|x| x["outcome"] == "fails")
                        .map(|x| format!("{} {}", x["theorem"], x["instance"]))
                        .collect()
                })
                .unwrap_or_default();
            format!("bounds {bounds}: exit {code}; failing {failing:?} {}", if failing.is_empty() { &out } else { "" })
        })?;
        let mut seen: Vec<String> = v["verdicts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x["theorem"].as_str().unwrap().to_string())
            .collect();
        seen.sort();
        seen.dedup();
        ensure(seen.len() == 7, || format!("bounds {bounds}: only {seen:?} exercised"))?;
        summary.push(format!(
            "({bounds}): {} instances hold, {} skipped over budget",
            v["checked"],
            v["skipped"].as_array().unwrap().len()
        ));
    }
    Ok(summary.join("; "))
}

/// First annihilating pair with a product outside `target`, by plain double
/// enumeration: `f` by degree then coefficient tuple, `g` by coefficient
/// tuple over all `deg_g + 1` slots.
type NaiveHit = (Vec<usize>, Vec<usize>, (usize, usize));

fn naive(t: &TableRing, target: &[bool], bounds: Bounds) -> Option<NaiveHit> {
    let s = t.size();
    let tuples = |len: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out.into_iter().flat_map(|p: Vec<usize>| (0..s).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        out
    };
    let gs = tuples(bounds.deg_g + 1);
    for d in 0..=bounds.deg_f {
        for f in tuples(d + 1).into_iter().filter(|f| f[d] != 0) {
            for g in &gs {
                if g.iter().all(|&b| b == 0) {
                    continue;
                }
                let zero = (0..=d + bounds.deg_g).all(|k| {
                    let mut acc = 0;
                    for i in 0..=d.min(k) {
                        if k - i < g.len() {
                            acc = t.add(acc, t.mul(f[i], g[k - i]));
                        }
                    }
                    acc == 0
                });
                if !zero {
                    continue;
                }
                let len = g.iter().rposition(|&b| b != 0).unwrap() + 1;
                for i in 0..=d {
                    for j in 0..len {
                        if !target[t.mul(f[i], g[j])] {
                            return Some((f.clone(), g[..len].to_vec(), (i, j)));
                        }
                    }
                }
            }
        }
    }
    None
}

fn ac8() -> Outcome {
    let mut runs = 0;
    for r in corpus_with_quotients().into_iter().filter(|r| r.size() <= 8) {
        let t = table(&r);
        let radical = jacobson_radical_oracle(&r, 64).unwrap();
        for kind in [TargetKind::Zero, TargetKind::Nil, TargetKind::Jac] {
            let target: Vec<bool> = (0..t.size())
                .map(|x| match kind {
                    TargetKind::Zero => x == 0,
                    TargetKind::Nil => nilpotent(t, x),
                    TargetKind::Jac => radical.contains(x),
                })
                .collect();
            for df in 0..=2 {
                for dg in 0..=2 {
                    let bounds = Bounds::new(df, dg);
                    let rep = classify(&r, kind, bounds, SearchMode::Exhaustive, &one_worker()).unwrap();
                    let expected = naive(t, &target, bounds);
                    let ctx = || format!("{} {kind:?} ({df},{dg})", r.name());
                    match (&expected, &rep.witness) {
                        (None, None) => ensure(rep.verdict == Verdict::Verified, ctx)?,
                        (Some((f, g, off)), Some(w)) => {
                            ensure(rep.verdict == Verdict::Counterexample, ctx)?;
                            ensure(verify_certificate(&r, &rep).unwrap(), ctx)?;
                            let labels = |v: &[usize]| v.iter().map(|&x| t.label(x).to_string()).collect::<Vec<_>>();
                            ensure(w.f == labels(f) && w.g == labels(g) && w.offending == *off, ctx)?;
                        }
                        _ => return Err(format!("{}: verdicts disagree", ctx())),
                    }
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} classifications agree with double enumeration"))
}

fn ac9() -> Outcome {
    let mut checked = 0;
    let mut persisted = 0;
    for e in corpus_exprs() {
        let r = ring(&e);
        for (df, dg) in [(1, 1), (2, 2)] {
            let b = Bounds::new(df, dg);
            let run = |kind, b| classify(&r, kind, b, SearchMode::Exhaustive, &one_worker()).unwrap();
            let reports: Vec<_> = [TargetKind::Zero, TargetKind::Nil, TargetKind::Jac].map(|k| run(k, b)).into();
            if reports[0].is_verified() {
                ensure(reports[1].is_verified() && reports[2].is_verified(), || format!("{e} ({df},{dg})"))?;
            }
            for rep in reports.iter().filter(|r| r.verdict == Verdict::Counterexample) {
                for bigger in [Bounds::new(df + 1, dg), Bounds::new(df, dg + 1)] {
                    let v = run(rep.target, bigger).verdict;
                    ensure(v == Verdict::Counterexample, || format!("{e} {:?} lost at {bigger:?}", rep.target))?;
                    persisted += 1;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} ring/bound pairs; {persisted} enlargements keep their counterexample"))
}

fn criteria_json(workers: &str) -> Vec<String> {
    let runs: [&[&str]; 6] = [
        &["classify", "m(2,gf(2))", "--target", "j", "--deg-f", "1", "--deg-g", "1"],
        &["verify-paper", "--case", "E2", "--truncation", "3"],
        &["verify-paper", "--case", "E5", "--truncation", "3"],
        &["verify-paper", "--case", "E9", "--truncation", "3"],
        &["is-abelian", "t(2,gf(2))"],
        &["classify", "t(2,gf(2))", "--target", "j", "--deg-f", "2", "--deg-g", "2"],
    ];
    runs.iter()
        .map(|args| {
            let argv: Vec<&str> = ["--json", "--workers", workers].iter().chain(args.iter()).copied().collect();
            run_command(argv).1
        })
        .collect()
}

fn ac10() -> Outcome {
    let one = criteria_json("1");
    let eight = criteria_json("8");
    for (i, (a, b)) in one.iter().zip(&eight).enumerate() {
        ensure(a == b, || format!("document {i} differs between 1 and 8 workers"))?;
        ensure(!a.contains("\"error\""), || format!("document {i} is an error: {a}"))?;
    }
    Ok(format!("{} JSON documents byte-identical", one.len()))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] =
        [(1, ac1), (2, ac2), (3, ac3), (4, ac4), (5, ac5), (6, ac6), (7, ac7), (8, ac8), (9, ac9), (10, ac10)];
    let mut failed = 0;
    for (n, check) in criteria {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] AC-{n}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] AC-{n}: {why} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
