//! Benchmark programs, sized by `n`, with their standard edits.

use crate::ast::Cmd;
use crate::edit::Edit;
use crate::parse::parse;

pub const PROGRAMS: [&str; 5] = ["fact", "intlog", "intlog;fact", "arraymax", "matmult"];

const FACT: &str = "
u := 7;            // never read
n := N;
r := 1;
i := 1;
while (i <= n) {
    r := r * i;
    r := r - (r / 1000003) * 1000003;
    i := i + 1;
}
";

const INTLOG: &str = "
v := 3;            // never read
x := N;
l := 0;
while (x > 1) {
    x := x / 2;
    l := l + 1;
}
";

const ARRAYMAX: &str = "
n := N;
s := 17;
a := array(n);
i := 0;
while (i < n) {
    s := s * 75 + 74;
    s := s - (s / 65537) * 65537;
    a[i] := s;
    i := i + 1;
}
m := a[0];
j := 1;
while (j < n) {
    t := a[j];
    if (t > m) {
        m := t;
    }
    j := j + 1;
}
";

const MATMULT: &str = "
n := N;
w := 5;
a := array(n * n);
b := array(n * n);
c := array(n * n);
i := 0;
while (i < n * n) {
    a[i] := i + 1;
    b[i] := i * w - i / 3;
    i := i + 1;
}
i := 0;
while (i < n) {
    j := 0;
    while (j < n) {
        s := 0;
        k := 0;
        while (k < n) {
            x := a[i * n + k];
            y := b[k * n + j];
            s := s + x * y;
            k := k + 1;
        }
        c[i * n + j] := s;
        j := j + 1;
    }
    i := i + 1;
}
";

/// Source text of a benchmark program at size `n`.
pub fn source(name: &str, n: u64) -> Option<String> {
    let fill = |t: &str| t.replace("N", &n.to_string());
    Some(match name {
        "fact" => fill(FACT),
        "intlog" => fill(INTLOG),
        "intlog;fact" => fill(INTLOG) + &fill(FACT),
        "arraymax" => fill(ARRAYMAX),
        "matmult" => fill(MATMULT),
        _ => return None,
    })
}

/// Parsed benchmark program.
pub fn program(name: &str, n: u64) -> Option<Cmd> {
    source(name, n).map(|s| parse(&s).expect("benchmark programs parse"))
}

/// Edit kinds applied to every program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EditKind {
    Repl,
    Swap,
    Ext,
}

impl EditKind {
    pub const ALL: [EditKind; 3] = [EditKind::Repl, EditKind::Swap, EditKind::Ext];

    pub fn label(self) -> &'static str {
        match self {
            EditKind::Repl => "repl",
            EditKind::Swap => "swap",
            EditKind::Ext => "ext",
        }
    }
}

/// The standard edit of each kind for a program at size `n`: `repl`
/// rewrites the first constant, `swap` exchanges the first two statements
/// and `ext` grows the size parameter by a tenth (at least one).
pub fn standard_edit(name: &str, n: u64, kind: EditKind) -> Option<Edit> {
    let first = match name {
        "fact" | "intlog" | "intlog;fact" => 1,
        "arraymax" | "matmult" => 2,
        _ => return None,
    };
    let size_stmt = match name {
        "fact" | "intlog" | "intlog;fact" => 2,
        _ => 1,
    };
    let spec = match kind {
        EditKind::Repl => format!("repl@{first}=11"),
        EditKind::Swap => "swap@1".to_owned(),
        EditKind::Ext => format!("ext@{size_stmt}=+{}", (n / 10).max(1)),
    };
    Some(spec.parse().expect("standard edits are well formed"))
}
