//! File formats and serialization of reports.
//!
//! Every floating-point number is written with 17 significant digits, so the
//! text round-trips to the same `f64` and identical runs give identical bytes.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimation::FractionEstimate;
use crate::linalg::{CMatrix, C64};
use crate::spaces::StateClass;
use crate::witness::{DensityMatrix, WitnessReport};

/// First line of every CSV file; bump the version when columns change.
pub const CSV_VERSION_LINE: &str = "# isocorr csv v1";

pub const FRACTION_CSV_COLUMNS: &str =
    "class,d,L,purity,P_cr,X,N,n_samples,fraction,std_err,bound,mean_f,seed";

/// `x` with 17 significant digits and a signed exponent, e.g.
/// `1.0000000000000001e-1` or `2.5000000000000000e+0`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.16e}");
        match s.split_once('e') {
            Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
            _ => s,
        }
    } else {
        "null".to_string()
    }
}

/// JSON number carrying exactly the text of [`fmt_f64`].
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt_f64(x)).expect("formatted float is valid JSON")
    } else {
        Value::Null
    }
}

pub fn class_json(class: &StateClass) -> Value {
    serde_json::to_value(class).expect("class serializes")
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    class: StateClass,
    dim: usize,
    rho: Vec<[f64; 2]>,
}

/// Parses a state file `{"class": {...}, "dim": N, "rho": [[re, im], ...]}`
/// with `rho` row-major.
pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let n = file.dim;
    if n == 0 || file.rho.len() != n * n {
        return Err(Error::Parse(format!(
            "state file: rho has {} entries, dim {n} needs {}",
            file.rho.len(),
            n * n
        )));
    }
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = file.rho[i * n + j];
        C64::new(re, im)
    });
    Error::check_dim(file.class.dim()?, n)?;
    DensityMatrix::new(matrix)?.with_class(file.class)
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_json(class: &StateClass, rho: &DensityMatrix) -> Value {
    let n = rho.dim();
    let m = rho.matrix();
    let entries: Vec<Value> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| json!([num(m[(i, j)].re), num(m[(i, j)].im)]))
        .collect();
    json!({"class": class_json(class), "dim": n, "rho": entries})
}

/// `{"dim": n, "rows": [[[re, im], ...], ...]}`.
pub fn operator_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)]))
                    .collect(),
            )
        })
        .collect();
    json!({"dim": m.nrows(), "rows": rows})
}

pub fn witness_json(report: &WitnessReport) -> Value {
    json!({
        "f": num(report.f_value),
        "purity": num(report.purity),
        "verdict": report.verdict.as_str(),
        "class": class_json(&report.class),
        "tolerance": num(report.tolerance),
    })
}

pub fn witness_csv(report: &WitnessReport) -> String {
    format!(
        "{CSV_VERSION_LINE}\nclass,d,L,f,purity,verdict,tolerance\n{},{},{},{},{},{},{}\n",
        report.class.kind(),
        report.class.d(),
        l_field(&report.class),
        fmt_f64(report.f_value),
        fmt_f64(report.purity),
        report.verdict.as_str(),
        fmt_f64(report.tolerance),
    )
}

pub fn l_field(class: &StateClass) -> String {
    class.particles().map(|l| l.to_string()).unwrap_or_default()
}

pub fn fraction_json(est: &FractionEstimate) -> Value {
    let p = &est.params;
    let mut m = Map::new();
    m.insert("class".into(), class_json(&est.class));
    m.insert("d".into(), json!(est.class.d()));
    m.insert(
        "L".into(),
        est.class.particles().map_or(Value::Null, |l| json!(l)),
    );
    m.insert("purity".into(), num(p.purity));
    m.insert("P_cr".into(), num(p.p_cr));
    m.insert("X".into(), num(p.x));
    m.insert("N".into(), json!(p.n as u64));
    m.insert("n_samples".into(), json!(est.n_samples));
    m.insert("n_correlated".into(), json!(est.n_correlated));
    m.insert("fraction".into(), num(est.fraction));
    m.insert("std_err".into(), num(est.std_err));
    m.insert("delta".into(), num(p.delta));
    m.insert("bound".into(), num(p.bound.value));
    m.insert("bound_applicable".into(), json!(p.bound.applicable));
    m.insert("mean_f".into(), num(est.mean_f));
    m.insert("mean_f_std_err".into(), num(est.mean_f_std_err));
    m.insert("analytic_mean_f".into(), num(est.analytic_mean_f));
    m.insert("seed".into(), json!(est.seed));
    m.insert("tolerance".into(), num(est.tolerance));
    m.insert(
        "spectrum".into(),
        Value::Array(
            est.spectrum
                .probabilities()
                .iter()
                .map(|&x| num(x))
                .collect(),
        ),
    );
    m.insert(
        "detector".into(),
        json!("quadratic witness f > tolerance; a lower bound on the correlated fraction"),
    );
    Value::Object(m)
}

pub fn fraction_csv_row(est: &FractionEstimate) -> String {
    let p = &est.params;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        est.class.kind(),
        est.class.d(),
        l_field(&est.class),
        fmt_f64(p.purity),
        fmt_f64(p.p_cr),
        fmt_f64(p.x),
        p.n as u64,
        est.n_samples,
        fmt_f64(est.fraction),
        fmt_f64(est.std_err),
        fmt_f64(p.bound.value),
        fmt_f64(est.mean_f),
        est.seed,
    )
}

pub fn fraction_csv(est: &FractionEstimate) -> String {
    format!(
        "{CSV_VERSION_LINE}\n{FRACTION_CSV_COLUMNS}\n{}\n",
        fraction_csv_row(est)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -7.0 / 18.0, 1e-300, 6.02e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
            assert_eq!(num(x).to_string(), s);
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    fn mixed_state_text(dim: usize, class: &str) -> String {
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = if i == j { 1.0 / dim as f64 } else { 0.0 };
                entries.push(format!("[{v}, 0.0]"));
            }
        }
        format!(
            r#"{{"class": {class}, "dim": {dim}, "rho": [{}]}}"#,
            entries.join(",")
        )
    }

    #[test]
    fn state_round_trip() {
        let class = StateClass::slater(4, 2).unwrap();
        let text = mixed_state_text(6, r#"{"kind": "slater", "d": 4, "L": 2}"#);
        let rho = parse_state(&text).unwrap();
        assert_eq!(rho.class(), Some(&class));
        let again = parse_state(&to_json_string(&state_json(&class, &rho))).unwrap();
        assert_eq!(again.matrix(), rho.matrix());
    }

    #[test]
    fn state_errors_map_to_exit_codes() {
        let bad_syntax = "{\"class\": ";
        assert_eq!(parse_state(bad_syntax).unwrap_err().exit_code(), 2);
        let short = r#"{"class": {"kind":"separable","d":2,"L":2}, "dim": 4, "rho": [[1,0]]}"#;
        assert_eq!(parse_state(short).unwrap_err().exit_code(), 2);
        let mismatched = mixed_state_text(3, r#"{"kind": "separable", "d": 2, "L": 2}"#);
        assert_eq!(parse_state(&mismatched).unwrap_err().exit_code(), 3);
        let mut text = mixed_state_text(2, r#"{"kind": "separable", "d": 2, "L": 1}"#);
        text = text.replacen("[0.5, 0.0]", "[1.5, 0.0]", 1);
        assert_eq!(parse_state(&text).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn operator_dump_shape() {
        let v = operator_json(&identity(2));
        assert_eq!(v["dim"], 2);
        assert_eq!(v["rows"][1][1][0].to_string(), "1.0000000000000000e+0");
    }
}
