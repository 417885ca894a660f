#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::Value;

pub fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name)
}

/// Validates `instance` against a shipped schema; returns every violation.
pub fn schema_errors(schema: &str, instance: &Value) -> Vec<String> {
    let text = std::fs::read_to_string(schema_path(schema)).expect("schema file");
    let schema: Value = serde_json::from_str(&text).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("read json")).expect("parse json")
}

/// Checks well-formedness and returns the parsed element names.
pub fn svg_elements(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| e.to_string())?;
    if doc.root_element().tag_name().name() != "svg" {
        return Err("root element is not <svg>".into());
    }
    Ok(doc
        .descendants()
        .filter(|n| n.is_element())
        .map(|n| n.tag_name().name().to_string())
        .collect())
}

/// Count of elements with the given tag and optional class attribute.
pub fn count_elements(path: &Path, tag: &str, class: Option<&str>) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && class.is_none_or(|c| n.attribute("class") == Some(c)))
        .count()
}

/// Dense inverse by Gauss–Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        assert!(p.abs() > 1e-14, "singular matrix in oracle");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|r| {
            (0..b[0].len())
                .map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum())
                .collect()
        })
        .collect()
}

/// Moore–Penrose pseudo-inverse of a full-rank matrix through the normal
/// equations: (XᵀX)⁻¹Xᵀ when tall, Xᵀ(XXᵀ)⁻¹ when wide.
pub fn full_rank_pinv(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let xt = transpose(x);
    if x.len() >= x[0].len() {
        matmul(&gauss_jordan_inverse(&matmul(&xt, x)), &xt)
    } else {
        matmul(&xt, &gauss_jordan_inverse(&matmul(x, &xt)))
    }
}
