//! Parsing of command-line values and JSON inputs.

use std::fs;
use std::path::Path;

use kummer_core::lattice::SiegelPoint;
use kummer_core::scalar::Cx;
use kummer_core::theta::Characteristic;
use num_complex::Complex;
use num_rational::Rational64;
use serde_json::Value;

use crate::Failure;

/// `re,im`.
pub fn parse_complex(s: &str) -> Result<Cx<f64>, String> {
    let v = parse_reals(s)?;
    match v.as_slice() {
        [re, im] => Ok(Complex::new(*re, *im)),
        _ => Err(format!("expected `re,im`, got `{s}`")),
    }
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("not a finite real: `{t}`"))
        })
        .collect()
}

/// Four reals `re₁,im₁,re₂,im₂`.
pub fn parse_z(s: &str) -> Result<[Cx<f64>; 2], String> {
    match parse_reals(s)?.as_slice() {
        [a, b, c, d] => Ok([Complex::new(*a, *b), Complex::new(*c, *d)]),
        _ => Err(format!("expected four reals `re,im,re,im`, got `{s}`")),
    }
}

/// `a₁,a₂,b₁,b₂` with each entry an integer or `p/q`.
pub fn parse_characteristic(s: &str) -> Result<Characteristic, Failure> {
    let parts: Vec<Rational64> = s
        .split(',')
        .map(|t| t.trim().parse::<Rational64>().map_err(|_| Failure::usage(format!("not a rational: `{t}`"))))
        .collect::<Result<_, _>>()?;
    if parts.len() != 4 {
        return Err(Failure::usage(format!("expected four entries `a1,a2,b1,b2`, got `{s}`")));
    }
    Characteristic::new([parts[0], parts[1]], [parts[2], parts[3]]).map_err(Failure::from)
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a path.
pub fn read_json_arg(arg: &str) -> Result<Value, Failure> {
    let t = arg.trim_start();
    let (text, origin) = if t.starts_with('{') || t.starts_with('[') {
        (arg.to_string(), "inline JSON".to_string())
    } else {
        let text = fs::read_to_string(Path::new(arg)).map_err(|e| Failure::usage(format!("cannot read `{arg}`: {e}")))?;
        (text, format!("`{arg}`"))
    };
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("malformed JSON in {origin}: {e}")))
}

fn complex_value(v: &Value, what: &str) -> Result<Cx<f64>, Failure> {
    let bad = || Failure::usage(format!("{what}: expected [re, im]"));
    let a = v.as_array().ok_or_else(bad)?;
    if a.len() != 2 {
        return Err(bad());
    }
    let re = a[0].as_f64().ok_or_else(bad)?;
    let im = a[1].as_f64().ok_or_else(bad)?;
    Ok(Complex::new(re, im))
}

/// `{"tau1": [re, im], "tau2": [re, im], "tau3": [re, im]}` or a
/// three-element array of pairs.
pub fn tau_from_value(v: &Value) -> Result<SiegelPoint<f64>, Failure> {
    let (t1, t2, t3) = match v {
        Value::Object(m) => {
            let get = |k: &str| m.get(k).ok_or_else(|| Failure::usage(format!("missing key `{k}`")));
            (
                complex_value(get("tau1")?, "tau1")?,
                complex_value(get("tau2")?, "tau2")?,
                complex_value(get("tau3")?, "tau3")?,
            )
        }
        Value::Array(a) if a.len() == 3 => (
            complex_value(&a[0], "tau[0]")?,
            complex_value(&a[1], "tau[1]")?,
            complex_value(&a[2], "tau[2]")?,
        ),
        _ => return Err(Failure::usage("tau: expected an object with tau1, tau2, tau3 or an array of three [re, im] pairs")),
    };
    SiegelPoint::new(t1, t2, t3).map_err(Failure::from)
}

pub fn read_tau(arg: &str) -> Result<SiegelPoint<f64>, Failure> {
    tau_from_value(&read_json_arg(arg)?)
}

pub type TauList = (Vec<SiegelPoint<f64>>, Vec<SiegelPoint<f64>>);

/// `{"train": [tau, …], "holdout": [tau, …]}`.
pub fn read_tau_list(arg: &str) -> Result<TauList, Failure> {
    let v = read_json_arg(arg)?;
    let list = |k: &str| -> Result<Vec<SiegelPoint<f64>>, Failure> {
        v.get(k)
            .and_then(Value::as_array)
            .ok_or_else(|| Failure::usage(format!("tau list: missing array `{k}`")))?
            .iter()
            .map(tau_from_value)
            .collect()
    };
    Ok((list("train")?, list("holdout")?))
}
