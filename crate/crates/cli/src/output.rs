//! JSON records, point-cloud files and atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use kummer_core::fitting::FormFit;
use kummer_core::lattice::{EllipticPoint, SiegelPoint};
use kummer_core::projective::ProjPoint3;
use kummer_core::scalar::Cx;
use serde_json::{json, Value};

use crate::Failure;

pub fn c(z: Cx<f64>) -> Value {
    json!([z.re, z.im])
}

pub fn cs(v: &[Cx<f64>]) -> Value {
    Value::Array(v.iter().map(|z| c(*z)).collect())
}

pub fn tau_json(t: &SiegelPoint<f64>) -> Value {
    json!({"tau1": c(t.tau1()), "tau2": c(t.tau2()), "tau3": c(t.tau3())})
}

pub fn elliptic(p: &EllipticPoint<f64>) -> Value {
    c(p.rep)
}

pub fn form_fit(f: &FormFit<f64>) -> Value {
    json!({
        "degree": f.degree,
        "nvars": f.nvars,
        "monomial_order": "grlex",
        "coefficients": cs(&f.coefficients),
        "singular_values": f.singular_values,
        "nullity": f.nullity,
        "gap_ratio": finite_or_null(f.gap_ratio()),
        "residual": f.residual,
        "n_train": f.n_train,
        "n_holdout": f.n_holdout,
    })
}

/// JSON has no infinities.
pub fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Wraps a result with the command line and library version.
pub fn record(command: &str, config: Value, result: Value) -> Value {
    json!({
        "tool": "kummer-cli",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    })
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path
        .file_name()
        .ok_or_else(|| Failure::usage(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let io = |e: std::io::Error| Failure::usage(format!("cannot write {}: {e}", path.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn cloud_csv(pts: &[ProjPoint3<f64>]) -> String {
    let mut s = String::from("x0_re,x0_im,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im\n");
    for p in pts {
        let row: Vec<String> = p.coords().iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Bound on the affine coordinates kept in the OBJ slice.
const OBJ_BOUND: f64 = 10.0;

/// Real parts of the affine chart `x₀ = 1`, one vertex per point; points
/// with `|x₀|` small or any coordinate beyond `OBJ_BOUND` are dropped.
pub fn cloud_obj(pts: &[ProjPoint3<f64>]) -> (String, usize) {
    let mut s = String::from("# real parts of x1/x0, x2/x0, x3/x0\n");
    let mut kept = 0;
    for p in pts {
        let x = p.coords();
        if x[0].norm() < 1e-3 {
            continue;
        }
        let a = [x[1] / x[0], x[2] / x[0], x[3] / x[0]];
        if a.iter().any(|v| v.re.abs() > OBJ_BOUND) {
            continue;
        }
        s.push_str(&format!("v {} {} {}\n", a[0].re, a[1].re, a[2].re));
        kept += 1;
    }
    (s, kept)
}
