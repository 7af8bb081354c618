//! CSV artifacts: `#` metadata lines, a fixed header, one row per series and
//! grid point. Floats carry 17 significant digits so they parse back exactly.

use std::fs;
use std::path::Path;

use crate::error::{QbattError, Result};
use crate::scenarios::{Row, SweepResult};

pub const HEADER: &str = "k,l,t,family,s_max,s_acc,p,delta_e,gap";

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn render(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(QbattError::Scenario(format!("sweep {} has no rows", result.name)));
    }
    let mut out = String::new();
    for (key, value) in &result.metadata {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    let nc = result.nonconverged();
    if !nc.is_empty() {
        let idx: Vec<String> = nc.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("# nonconverged: {}\n", idx.join(",")));
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in &result.rows {
        let fields = [
            num(r.k),
            opt(r.l),
            num(r.t),
            r.family.clone(),
            num(r.s_max),
            opt(r.s_acc),
            opt(r.p),
            opt(r.delta_e),
            opt(r.gap),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let text = render(result)?;
    fs::write(path, text).map_err(|source| QbattError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Metadata pairs and rows of an emitted CSV.
pub fn parse(text: &str) -> Result<(Vec<(String, String)>, Vec<Row>)> {
    let bad = |line: usize, what: &str| QbattError::Config(format!("csv line {line}: {what}"));
    let mut meta = Vec::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        if let Some(m) = line.strip_prefix("# ") {
            let (k, v) = m.split_once(": ").ok_or_else(|| bad(n, "metadata without ': '"))?;
            meta.push((k.to_string(), v.to_string()));
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(bad(n, "unexpected header"));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(n, "expected 9 fields"));
        }
        let get = |i: usize| -> Result<Option<f64>> {
            if f[i].is_empty() {
                Ok(None)
            } else {
                f[i].parse::<f64>().map(Some).map_err(|_| bad(n, "bad number"))
            }
        };
        rows.push(Row {
            k: get(0)?.ok_or_else(|| bad(n, "missing k"))?,
            l: get(1)?,
            t: get(2)?.ok_or_else(|| bad(n, "missing t"))?,
            family: f[3].to_string(),
            s_max: get(4)?.unwrap_or(f64::NAN),
            s_acc: get(5)?,
            p: get(6)?,
            delta_e: get(7)?,
            gap: get(8)?,
            converged: true,
        });
    }
    if !header_seen {
        return Err(QbattError::Config("csv has no header".into()));
    }
    if let Some((_, v)) = meta.iter().find(|(k, _)| k == "nonconverged") {
        for i in v.split(',') {
            let i: usize = i.parse().map_err(|_| QbattError::Config("bad nonconverged index".into()))?;
            if let Some(r) = rows.get_mut(i) {
                r.converged = false;
            }
        }
    }
    Ok((meta, rows))
}
