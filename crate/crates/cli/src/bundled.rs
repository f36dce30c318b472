//! Example systems shipped with the binary.

pub const EXAMPLES: &[(&str, &str)] = &[
    ("fibonacci", include_str!("../data/fibonacci.sys")),
    ("gmap", include_str!("../data/gmap.sys")),
    ("factorial", include_str!("../data/factorial.sys")),
    (
        "factorial-literal",
        include_str!("../data/factorial-literal.sys"),
    ),
    ("npown", include_str!("../data/npown.sys")),
    ("skolem-demo", include_str!("../data/skolem-demo.sys")),
    ("identity-pda", include_str!("../data/identity-pda.sys")),
    ("pow2-pda", include_str!("../data/pow2-pda.sys")),
];

const ALIASES: &[(&str, &str)] = &[("fib", "fibonacci"), ("skolem", "skolem-demo")];

/// Text of a bundled example; `literal` prefers the `-literal` variant.
pub fn lookup(name: &str, literal: bool) -> Option<&'static str> {
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map_or(name, |(_, n)| n);
    let find = |n: &str| EXAMPLES.iter().find(|(k, _)| *k == n).map(|(_, t)| *t);
    if literal {
        if let Some(t) = find(&format!("{name}-literal")) {
            return Some(t);
        }
    }
    find(name)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    EXAMPLES.iter().map(|(n, _)| *n)
}
