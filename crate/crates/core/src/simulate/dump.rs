use std::io::{self, Write};

use super::paths::SamplePath;

/// Column names `t u1.. x1.. y1.. ubar1.. xbar1..`.
pub fn path_columns(path: &SamplePath) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for (prefix, rows) in [
        ("u", path.u.nrows()),
        ("x", path.x.nrows()),
        ("y", path.y.nrows()),
        ("ubar", path.ubar.nrows()),
        ("xbar", path.xbar.nrows()),
    ] {
        cols.extend((1..=rows).map(|i| format!("{prefix}{i}")));
    }
    cols
}

/// Whitespace-separated table, one row per step, shortest round-trip floats.
pub fn write_path_dump<W: Write>(path: &SamplePath, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", path_columns(path).join(" "))?;
    let mut line = String::new();
    for t in 0..path.horizon {
        line.clear();
        line.push_str(&format!("{:?}", t as f64 * path.step));
        for seq in [&path.u, &path.x, &path.y, &path.ubar, &path.xbar] {
            for v in seq.column(t).iter() {
                line.push(' ');
                line.push_str(&format!("{v:?}"));
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
