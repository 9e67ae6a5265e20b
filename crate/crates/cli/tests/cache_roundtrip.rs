use jring_cli::cache::Cache;
use jring_cli::expr::Evaluator;
use jring_cli::{parse_ring_expr, run_command};

#[test]
fn example_ring_survives_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path()).unwrap();
    let expr = parse_ring_expr("paper(E2, 3)").unwrap();
    assert!(cache.load(&expr.to_string()).is_none());

    let ev = Evaluator { cap: 4096, cache: Some(&cache) };
    let built = ev.eval(&expr).unwrap();
    assert!(cache.path_for("paper(e2,3)").exists());
    let loaded = cache.load("paper(e2,3)").expect("warm cache hit");

    let (a, b) = (built.require_table().unwrap(), loaded.require_table().unwrap());
    assert_eq!(a.size(), 512);
    assert_eq!(a.one(), b.one());
    assert_eq!(a.add_table(), b.add_table());
    assert_eq!(a.mul_table(), b.mul_table());
    assert_eq!(a.labels(), b.labels());
    assert_eq!(loaded.name(), "paper(e2,3)");
}

#[test]
fn commands_agree_with_and_without_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["--json", "info", "trivext(m(2,gf(2)))"];
    let (code, plain) = run_command(args);
    assert_eq!(code, 0);
    for _ in 0..2 {
        let (code, cached) = run_command(["--cache-dir", cache].into_iter().chain(args));
        assert_eq!(code, 0);
        assert_eq!(cached, plain);
    }
    // inner nodes are cached too
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 3);
}
