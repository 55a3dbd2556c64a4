//! JSON problem definitions.
//!
//! Constraint coefficients are keyed by monomial exponents, so a file never
//! depends on the internal basis order:
//!
//! ```json
//! {
//!   "A": [[0.5]], "B": [[1.0]], "B_w": [[0.0]],
//!   "beta": 0.9, "p": 2,
//!   "theta_box": [[1.0, 2.0]], "w_box": [[0.0, 0.0]],
//!   "constraints": [
//!     {"h": 1.0, "terms": [{"theta_index": 0, "exponents": [2, 0], "coeff": 1.0}]}
//!   ]
//! }
//! ```
//!
//! `exponents` runs over `x_v = [x; v]`. A term with `theta_index` multiplies
//! that parameter; a parameter term with all-zero exponents is a pure `θ` term.
//! Constant terms belong in `h` and are rejected.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::{PolyConstraint, ProblemSpec};
use crate::polykron::PowerBasis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    /// Omitted or empty rows mean no disturbance input.
    #[serde(rename = "B_w", default)]
    pub b_w: Vec<Vec<f64>>,
    pub beta: f64,
    pub p: usize,
    #[serde(default)]
    pub theta_box: Vec<[f64; 2]>,
    #[serde(default)]
    pub w_box: Vec<[f64; 2]>,
    pub constraints: Vec<ConstraintEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub h: f64,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub theta_index: Option<usize>,
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidField {
        field: field.into(),
        reason: reason.into(),
    }
}

fn matrix(field: &str, rows: &[Vec<f64>], n_rows: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n_rows {
        return Err(invalid(field, format!("expected {n_rows} rows, found {}", rows.len())));
    }
    let n_cols = rows.first().map_or(0, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n_cols {
            return Err(invalid(
                format!("{field}[{i}]"),
                format!("expected {n_cols} entries like the first row, found {}", r.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Stable serialization used for hashing and export.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let n_x = self.a.len();
        let a = matrix("A", &self.a, n_x)?;
        let b = matrix("B", &self.b, n_x)?;
        let b_w = if self.b_w.is_empty() {
            DMatrix::zeros(n_x, 0)
        } else {
            matrix("B_w", &self.b_w, n_x)?
        };
        if b.ncols() == 0 {
            return Err(invalid("B", "needs at least one column"));
        }
        let n_xv = n_x + b.ncols();
        let n_theta = self.theta_box.len();
        if self.p == 0 {
            return Err(invalid("p", "degree must be >= 1"));
        }
        let bases: Vec<PowerBasis> = (1..=self.p)
            .map(|j| PowerBasis::new(n_xv, j))
            .collect::<Result<_>>()?;

        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (ci, entry) in self.constraints.iter().enumerate() {
            let mut c = PolyConstraint::zeros(n_xv, self.p, n_theta, entry.h)?;
            for (ti, term) in entry.terms.iter().enumerate() {
                let field = |name: &str| format!("constraints[{ci}].terms[{ti}].{name}");
                if !term.coeff.is_finite() {
                    return Err(invalid(field("coeff"), "must be finite"));
                }
                if term.exponents.len() != n_xv {
                    return Err(invalid(
                        field("exponents"),
                        format!("expected {n_xv} exponents (states then references), found {}", term.exponents.len()),
                    ));
                }
                if let Some(k) = term.theta_index {
                    if k >= n_theta {
                        return Err(invalid(
                            field("theta_index"),
                            format!("index {k} out of range for {n_theta} parameters"),
                        ));
                    }
                }
                let degree: u32 = term.exponents.iter().sum();
                if degree as usize > self.p {
                    return Err(invalid(
                        field("exponents"),
                        format!("degree {degree} exceeds p = {}", self.p),
                    ));
                }
                if degree == 0 {
                    match term.theta_index {
                        Some(k) => c.d0[k] += term.coeff,
                        None => {
                            return Err(invalid(field("exponents"), "constant term; move it into h"));
                        }
                    }
                    continue;
                }
                let j = degree as usize;
                let basis = &bases[j - 1];
                let pos = basis
                    .position(&term.exponents)
                    .expect("every exponent tuple of the right degree is in the basis");
                match term.theta_index {
                    None => c.c[j - 1][pos] += term.coeff,
                    Some(k) => c.d[j - 1][k * basis.len() + pos] += term.coeff,
                }
            }
            constraints.push(c);
        }
        let pairs = |bx: &[[f64; 2]]| bx.iter().map(|&[lo, hi]| (lo, hi)).collect::<Vec<_>>();
        ProblemSpec::new(
            a,
            b,
            b_w,
            self.beta,
            self.p,
            constraints,
            pairs(&self.theta_box),
            pairs(&self.w_box),
        )
    }

    /// Inverse of [`to_spec`](Self::to_spec): nonzero coefficients in basis order.
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        let bases = spec.bases()?;
        let n_xv = spec.n_xv();
        let constraints = spec
            .constraints
            .iter()
            .map(|c| {
                let mut terms = Vec::new();
                for (k, &v) in c.d0.iter().enumerate() {
                    if v != 0.0 {
                        terms.push(Term {
                            theta_index: Some(k),
                            exponents: vec![0; n_xv],
                            coeff: v,
                        });
                    }
                }
                for (j, basis) in bases.iter().enumerate() {
                    let s = basis.len();
                    for (pos, mono) in basis.monomials().iter().enumerate() {
                        if c.c[j][pos] != 0.0 {
                            terms.push(Term {
                                theta_index: None,
                                exponents: mono.exponents().to_vec(),
                                coeff: c.c[j][pos],
                            });
                        }
                        for k in 0..spec.n_theta() {
                            let v = c.d[j][k * s + pos];
                            if v != 0.0 {
                                terms.push(Term {
                                    theta_index: Some(k),
                                    exponents: mono.exponents().to_vec(),
                                    coeff: v,
                                });
                            }
                        }
                    }
                }
                ConstraintEntry { h: c.h, terms }
            })
            .collect();
        let b_w = if spec.n_w() == 0 { Vec::new() } else { rows(&spec.b_w) };
        Ok(Self {
            a: rows(&spec.a),
            b: rows(&spec.b),
            b_w,
            beta: spec.beta,
            p: spec.p,
            theta_box: spec.theta_box.iter().map(|&(l, h)| [l, h]).collect(),
            w_box: spec.w_box.iter().map(|&(l, h)| [l, h]).collect(),
            constraints,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "A": [[0.5]], "B": [[1.0]], "beta": 0.9, "p": 2,
        "theta_box": [[1.0, 2.0]],
        "constraints": [
            {"h": 1.0, "terms": [{"theta_index": 0, "exponents": [2, 0], "coeff": 1.0}]},
            {"h": 3.0, "terms": [{"theta_index": null, "exponents": [0, 1], "coeff": -1.0}]}
        ]
    }"#;

    #[test]
    fn loads_and_evaluates() {
        let spec = ProblemFile::from_json(SMALL).unwrap().to_spec().unwrap();
        let bases = spec.bases().unwrap();
        // θ x² at x = 3, θ = 1.5
        assert_eq!(spec.constraints[0].eval(&[3.0, 0.0], &[1.5], &bases), 13.5);
        assert_eq!(spec.constraints[1].eval(&[0.0, 2.0], &[1.5], &bases), -2.0);
    }

    #[test]
    fn export_round_trips() {
        let file = ProblemFile::from_json(SMALL).unwrap();
        let again = ProblemFile::from_spec(&file.to_spec().unwrap()).unwrap();
        assert_eq!(again, file);
    }

    #[test]
    fn rejects_unknown_field() {
        let text = SMALL.replacen("\"beta\"", "\"gamma\": 1, \"beta\"", 1);
        let err = ProblemFile::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn names_offending_term() {
        let text = SMALL.replace("[0, 1], \"coeff\": -1.0", "[0, 0], \"coeff\": -1.0");
        let err = ProblemFile::from_json(&text).unwrap().to_spec().unwrap_err().to_string();
        assert!(err.contains("constraints[1].terms[0].exponents"), "{err}");

        let text = SMALL.replace("[2, 0]", "[2, 1]");
        let err = ProblemFile::from_json(&text).unwrap().to_spec().unwrap_err().to_string();
        assert!(err.contains("constraints[0].terms[0].exponents"), "{err}");
    }

    #[test]
    fn rejects_non_schur() {
        let text = SMALL.replace("[[0.5]]", "[[1.0]]");
        let err = ProblemFile::from_json(&text).unwrap().to_spec().unwrap_err();
        assert!(matches!(err, Error::NotSchur { .. }));
    }
}
