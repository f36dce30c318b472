use level3_cli::bundled::EXAMPLES;
use level3_cli::{parse_file, CliError};
use std::process::Command;

fn level3(args: &str) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_level3"))
        .args(args.split_whitespace())
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    (String::from_utf8(out.stdout).expect("utf-8"), code)
}

const GOLDEN: &[(&str, &str, i32)] = &[
    ("eval factorial FC 3", "24\n", 0),
    ("eval npown f 3", "aaabccc\n", 0),
    ("eval fib F 0", "1\n", 0),
    ("eval fib F 10", "89\n", 0),
    ("equiv fibonacci fib.F fibonacci fibsum.P", "Equal\n", 0),
    (
        "equiv fibonacci fib.F fibonacci fibshift.Fs",
        "NotEqual a\n",
        1,
    ),
    ("equiv fibonacci fib.F fibonacci fib.F", "Equal\n", 0),
    ("eval factorial Uu 5", "720\n", 0),
    ("--paper-literal eval factorial Uu 5", "1\n", 0),
    (
        "--paper-literal equiv factorial count.U factorial one.K",
        "Equal\n",
        0,
    ),
    (
        "equiv factorial count.U factorial one.K",
        "NotEqual ab\n",
        1,
    ),
    ("eval npown g 2", "xxxxxxxxxxxxxxxx\n", 0),
    ("eval npown g 3 --as-length", "6561\n", 0),
    ("eval npown H ccc --hom", "[x, x x x y]\n", 0),
    ("eval npown H bccc --hom", "[x x x, x]\n", 0),
    ("compose npown g 1", "stage: a b c\nvalue: x\n", 0),
    ("eval gmap G 1011", "144\n", 0),
    ("eval gmap G eps", "1\n", 0),
    ("eval skolem-demo W 4", "120\n", 0),
    ("eval skolem-demo Z 1", "0\n", 0),
    ("run-pda identity-pda id abba", "Accepted abba\n", 0),
    ("run-pda pow2-pda pow2 aaa", "Accepted bbbbbbbb\n", 0),
    ("run-pda pow2-pda pow2 eps", "Accepted b\n", 0),
    (
        "--fuel 3 run-pda pow2-pda pow2 aa",
        "FuelExhausted at (q1, eps, Z[]Z[a])\n",
        1,
    ),
];

#[test]
fn golden_outputs_are_bit_exact() {
    for (args, expected, code) in GOLDEN {
        let (out, c) = level3(args);
        assert_eq!(&out, expected, "level3 {args}");
        assert_eq!(c, *code, "exit code of level3 {args}");
    }
}

#[test]
fn errors_exit_with_two() {
    for args in [
        "eval nosuchfile x 1",
        "eval fibonacci nosuch 1",
        "eval fibonacci F abc",
        "bogus",
    ] {
        let (_, c) = level3(args);
        assert_eq!(c, 2, "level3 {args}");
    }
}

#[test]
fn every_bundled_example_round_trips() {
    for (name, text) in EXAMPLES {
        let parsed = parse_file(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = parsed.to_string();
        let again =
            parse_file(&printed).unwrap_or_else(|e| panic!("{name} reprinted: {e}\n{printed}"));
        assert_eq!(again.to_string(), printed, "{name}");
        assert_eq!(again.decls.len(), parsed.decls.len());
    }
}

#[test]
fn lowered_output_parses_and_evaluates() {
    let (text, _) = level3("lower npown H");
    let file = parse_file(&text).expect("lowered text parses");
    assert_eq!(file.decls.len(), 3);
    let (linrep, _) = level3("lower gmap G");
    assert!(parse_file(&linrep).is_ok());
    let (skolem, _) = level3("lower skolem-demo W");
    assert!(parse_file(&skolem).is_ok());

    let dir = std::env::temp_dir().join(format!("level3-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("npown-lowered.sys");
    std::fs::write(&path, &text).unwrap();
    let (out, code) = level3(&format!("eval {} H_level3 abcc", path.display()));
    assert_eq!((out.as_str(), code), ("xxxx\n", 0));

    let hdt = "hdt0l S {\n  input: a\n  working: x y\n  output: t\n  final: {x -> t, y -> t}\n  seed: x\n  a: [x y, y]\n}\n";
    let path = dir.join("unary.sys");
    std::fs::write(&path, hdt).unwrap();
    let (lin, code) = level3(&format!("lower {} S", path.display()));
    assert_eq!(code, 0);
    let rep = parse_file(&lin).expect("linear representation parses");
    assert_eq!(rep.decls[0].decl.kind(), "linrep");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn groebner_subcommand() {
    let dir = std::env::temp_dir().join(format!("level3-gb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ideal.sys");
    std::fs::write(
        &path,
        "ideal I {\n  vars: x y\n  order: lex\n  x^2 - y\n  x*y - 1\n}\n",
    )
    .unwrap();
    let p = path.display();
    let (basis, code) = level3(&format!("groebner {p} I"));
    assert_eq!(code, 0);
    assert_eq!(basis, "x - y^2\ny^3 - 1\n");
    assert_eq!(
        level3(&format!("groebner {p} I --member x^3-1")),
        ("member\n".into(), 0)
    );
    assert_eq!(level3(&format!("groebner {p} I --member x")).1, 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn diagnostics_name_the_line() {
    let bad_index = "cat s {\n  input: a\n  output: t\n  f(eps) = t\n  f(a w) = g(w)\n}\n";
    match parse_file(bad_index) {
        Err(CliError::Syntax { line, message }) => {
            assert_eq!(line, 5);
            assert!(message.contains("`g`"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
    let missing = "poly p {\n  input: a b\n  F(eps) = 1\n  F(a w) = F\n}\n";
    assert!(matches!(
        parse_file(missing),
        Err(CliError::Syntax { line: 1, .. })
    ));
    let unclosed = "poly p {\n  input: a\n";
    assert!(matches!(
        parse_file(unclosed),
        Err(CliError::Syntax { line: 1, .. })
    ));
    let bad_poly = "poly p {\n  input: a\n  F(eps) = 1\n  F(a w) = F +* 2\n}\n";
    assert!(matches!(
        parse_file(bad_poly),
        Err(CliError::Syntax { line: 4, .. })
    ));
    let twice = "hom h {\n  from: x\n  x -> x\n}\nhom h {\n  from: x\n  x -> x\n}\n";
    assert!(matches!(
        parse_file(twice),
        Err(CliError::Syntax { line: 5, .. })
    ));
}

#[test]
fn regular_blocks_with_classes_and_shifts() {
    let text = "reg r {
  input: a b
  output: t
  classes: even odd
  start: even
  move: even a -> odd
  move: odd a -> even
  move: even b -> even
  move: odd b -> odd
  f(eps) = t
  f(a w) @odd = f(w) f(w)
  f(* w) = f(w) t(w)
  t(eps) = t
  t(* w) = t(w)
}
";
    let file = parse_file(text).unwrap();
    let again = parse_file(&file.to_string()).unwrap();
    assert_eq!(again.to_string(), file.to_string());
    let loops = "reg r {\n  input: a\n  output: t\n  f(eps) = t\n  f(a w) = f(a w)\n}\n";
    let dir = std::env::temp_dir().join(format!("level3-reg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.sys");
    std::fs::write(&path, loops).unwrap();
    let (out, code) = level3(&format!("--fuel 50 eval {} f a", path.display()));
    assert_eq!(code, 1);
    assert!(out.starts_with("FuelExhausted"), "{out}");
    std::fs::remove_dir_all(&dir).ok();
}
