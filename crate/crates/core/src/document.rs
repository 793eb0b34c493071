//! Text serialization.
//!
//! Operator collections are JSON documents:
//!
//! ```json
//! { "kind": "operator-grid", "d": 2, "mapping": "gellmann-eq-Fg2",
//!   "operators": [[ [[["7.0710678118654746e-1","0.0000000000000000e0"], ...], ...] ]] }
//! ```
//!
//! `operators` holds rows of `d x d` matrices whose entries are `[re, im]`
//! decimal strings with 17 significant digits, which round-trips every `f64`
//! exactly. A measurement set adds `t` and `kappa` in the same format.
//! Loading re-runs every validation of the in-memory type.
//!
//! Probability and count tables are CSV with header `b,n,value` and 1-based
//! labels.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::OperatorGrid;
use crate::error::{MumError, Result};
use crate::mum::MumSet;
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::tomography::{CountTable, ProbabilityTable};
use crate::uncertainty::KappaScanRow;

pub const KIND_GRID: &str = "operator-grid";
pub const KIND_MUM: &str = "mum-set";
pub const KIND_STATE: &str = "density-matrix";
pub const KIND_OPERATOR: &str = "operator";

type Entry = [String; 2];
type MatrixText = Vec<Vec<Entry>>;

#[derive(Serialize, Deserialize)]
struct Document {
    kind: String,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mapping: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<String>,
    operators: Vec<Vec<MatrixText>>,
}

fn err(msg: impl Into<String>) -> MumError {
    MumError::Document(msg.into())
}

/// 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str, what: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| err(format!("{what}: cannot parse {s:?} as a number")))?;
    if !x.is_finite() {
        return Err(err(format!("{what}: non-finite value {s:?}")));
    }
    Ok(x)
}

fn matrix_to_text(m: &ComplexMatrix) -> MatrixText {
    (0..m.dim())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|z| [format_real(z.re + 0.0), format_real(z.im + 0.0)])
                .collect()
        })
        .collect()
}

fn matrix_from_text(text: &MatrixText, d: usize, at: &str) -> Result<HermitianOperator> {
    if text.len() != d || text.iter().any(|r| r.len() != d) {
        return Err(err(format!("{at}: matrix is not {d}x{d}")));
    }
    let mut data = Vec::with_capacity(d * d);
    for (i, row) in text.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            let what = format!("{at} entry ({},{})", i + 1, j + 1);
            data.push(Complex64::new(
                parse_real(re, &what)?,
                parse_real(im, &what)?,
            ));
        }
    }
    HermitianOperator::new(ComplexMatrix::from_row_major(d, data)?)
        .map_err(|e| err(format!("{at}: {e}")))
}

fn rows_from_text(doc: &Document, rows: usize, cols: usize) -> Result<Vec<Vec<HermitianOperator>>> {
    if doc.operators.len() != rows {
        return Err(err(format!(
            "expected {rows} operator rows, found {}",
            doc.operators.len()
        )));
    }
    doc.operators
        .iter()
        .enumerate()
        .map(|(b, row)| {
            if row.len() != cols {
                return Err(err(format!(
                    "row b={} has {} operators, expected {cols}",
                    b + 1,
                    row.len()
                )));
            }
            row.iter()
                .enumerate()
                .map(|(n, m)| matrix_from_text(m, doc.d, &format!("(n={}, b={})", n + 1, b + 1)))
                .collect()
        })
        .collect()
}

fn to_json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

fn parse_doc(text: &str, kind: &str) -> Result<Document> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| err(format!("malformed JSON: {e}")))?;
    if doc.kind != kind {
        return Err(err(format!("expected kind {kind:?}, found {:?}", doc.kind)));
    }
    if doc.d < 2 {
        return Err(MumError::InvalidDimension(doc.d, 2));
    }
    Ok(doc)
}

/// Reads only the `kind` field of a document.
pub fn document_kind(text: &str) -> Result<String> {
    #[derive(Deserialize)]
    struct Kind {
        kind: String,
    }
    let k: Kind = serde_json::from_str(text).map_err(|e| err(format!("malformed JSON: {e}")))?;
    Ok(k.kind)
}

pub fn grid_to_json(grid: &OperatorGrid) -> String {
    let d = grid.dim();
    to_json(&Document {
        kind: KIND_GRID.into(),
        d,
        mapping: Some(grid.mapping().to_string()),
        t: None,
        kappa: None,
        operators: (0..=d)
            .map(|b| {
                grid.row(b)
                    .iter()
                    .map(|c| matrix_to_text(c.matrix()))
                    .collect()
            })
            .collect(),
    })
}

pub fn grid_from_json(text: &str) -> Result<OperatorGrid> {
    let doc = parse_doc(text, KIND_GRID)?;
    let mapping = doc
        .mapping
        .clone()
        .ok_or_else(|| err("missing field `mapping`"))?;
    let cells = rows_from_text(&doc, doc.d + 1, doc.d - 1)?
        .into_iter()
        .flatten()
        .collect();
    OperatorGrid::new(doc.d, mapping, cells)
}

pub fn mum_to_json(m: &MumSet) -> String {
    to_json(&Document {
        kind: KIND_MUM.into(),
        d: m.dim(),
        mapping: Some(m.mapping().to_string()),
        t: Some(format_real(m.t())),
        kappa: Some(format_real(m.kappa())),
        operators: m
            .measurements()
            .iter()
            .map(|row| row.iter().map(|p| matrix_to_text(p.matrix())).collect())
            .collect(),
    })
}

pub fn mum_from_json(text: &str) -> Result<MumSet> {
    let doc = parse_doc(text, KIND_MUM)?;
    let mapping = doc
        .mapping
        .clone()
        .ok_or_else(|| err("missing field `mapping`"))?;
    let t = parse_real(
        doc.t.as_deref().ok_or_else(|| err("missing field `t`"))?,
        "t",
    )?;
    let kappa = parse_real(
        doc.kappa
            .as_deref()
            .ok_or_else(|| err("missing field `kappa`"))?,
        "kappa",
    )?;
    let rows = rows_from_text(&doc, doc.d + 1, doc.d)?;
    MumSet::new(doc.d, t, kappa, mapping, rows)
}

/// Loads a measurement set checking only shape and hermiticity, so that
/// defective sets can still be passed to [`crate::verify_mum`].
pub fn mum_from_json_unverified(text: &str) -> Result<MumSet> {
    let doc = parse_doc(text, KIND_MUM)?;
    let t = parse_real(
        doc.t.as_deref().ok_or_else(|| err("missing field `t`"))?,
        "t",
    )?;
    let kappa = parse_real(
        doc.kappa
            .as_deref()
            .ok_or_else(|| err("missing field `kappa`"))?,
        "kappa",
    )?;
    let rows = rows_from_text(&doc, doc.d + 1, doc.d)?;
    Ok(MumSet::new_unchecked(
        doc.d,
        t,
        kappa,
        doc.mapping.unwrap_or_default(),
        rows,
    ))
}

fn single_to_json(kind: &str, op: &HermitianOperator) -> String {
    to_json(&Document {
        kind: kind.into(),
        d: op.dim(),
        mapping: None,
        t: None,
        kappa: None,
        operators: vec![vec![matrix_to_text(op.matrix())]],
    })
}

fn single_from_json(text: &str, kind: &str) -> Result<HermitianOperator> {
    let doc = parse_doc(text, kind)?;
    Ok(rows_from_text(&doc, 1, 1)?.remove(0).remove(0))
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    single_to_json(KIND_STATE, rho.operator())
}

/// Loads a density matrix, checking hermiticity, unit trace and positivity.
pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(single_from_json(text, KIND_STATE)?)
}

/// A Hermitian operator that need not be a state, e.g. a finite-shot reconstruction.
pub fn operator_to_json(op: &HermitianOperator) -> String {
    single_to_json(KIND_OPERATOR, op)
}

pub fn operator_from_json(text: &str) -> Result<HermitianOperator> {
    single_from_json(text, KIND_OPERATOR)
}

/// Shortest decimal that parses back to the same value.
fn format_shortest(x: f64) -> String {
    format!("{x:?}")
}

fn table_csv<T>(rows: &[Vec<T>], fmt: impl Fn(&T) -> String) -> String {
    let mut s = String::from("b,n,value\n");
    for (b, row) in rows.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            writeln!(s, "{},{},{}", b + 1, n + 1, fmt(v)).unwrap();
        }
    }
    s
}

fn parse_table_csv(text: &str, dim: usize) -> Result<Vec<Vec<String>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "b,n,value" => {}
        other => {
            return Err(err(format!(
                "expected header \"b,n,value\", found {other:?}"
            )))
        }
    }
    let mut cells: Vec<Vec<Option<String>>> = vec![vec![None; dim]; dim + 1];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [b, n, v] = fields[..] else {
            return Err(err(format!("line {}: expected 3 fields", i + 2)));
        };
        let idx = |s: &str, hi: usize, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(k) if (1..=hi).contains(&k) => Ok(k - 1),
                _ => Err(err(format!(
                    "line {}: {what} label {s:?} not in 1..={hi}",
                    i + 2
                ))),
            }
        };
        let (b, n) = (idx(b, dim + 1, "b")?, idx(n, dim, "n")?);
        if cells[b][n].replace(v.to_string()).is_some() {
            return Err(err(format!("duplicate entry (b={}, n={})", b + 1, n + 1)));
        }
    }
    cells
        .into_iter()
        .enumerate()
        .map(|(b, row)| {
            row.into_iter()
                .enumerate()
                .map(|(n, v)| {
                    v.ok_or_else(|| err(format!("missing entry (b={}, n={})", b + 1, n + 1)))
                })
                .collect()
        })
        .collect()
}

pub fn probabilities_to_csv(p: &ProbabilityTable) -> String {
    table_csv(p.rows(), |v| format_shortest(*v))
}

pub fn probabilities_from_csv(text: &str, dim: usize) -> Result<ProbabilityTable> {
    let probs = parse_table_csv(text, dim)?
        .iter()
        .map(|row| row.iter().map(|v| parse_real(v, "value")).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    ProbabilityTable::new(dim, probs)
}

pub fn counts_to_csv(c: &CountTable) -> String {
    table_csv(&c.counts, |v| v.to_string())
}

pub fn counts_from_csv(text: &str, dim: usize) -> Result<CountTable> {
    let counts = parse_table_csv(text, dim)?
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| err(format!("count {v:?} is not a non-negative integer")))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<u64>>>>()?;
    let shots = counts[0].iter().sum();
    if counts.iter().any(|row| row.iter().sum::<u64>() != shots) {
        return Err(err("settings have different shot totals"));
    }
    Ok(CountTable { dim, shots, counts })
}

pub const SCAN_HEADER: &str =
    "kappa,t,bound,delta_mean,upsilon_bound,upsilon_min_sampled,states,seed";

/// 12 significant digits.
fn format_scan(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn scan_to_csv(rows: &[KappaScanRow]) -> String {
    let mut s = format!("{SCAN_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            format_scan(r.kappa),
            format_scan(r.t),
            format_scan(r.bound),
            format_scan(r.delta_mean),
            format_scan(r.upsilon_bound),
            format_scan(r.upsilon_min_sampled),
            r.states,
            r.seed
        )
        .unwrap();
    }
    s
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{arrange_grid, gellmann_basis, gellmann_grid, GridMapping};
    use crate::mum::{build_f_operators, build_mum, t_opt};
    use crate::random::random_state;
    use crate::tomography::{born_probabilities, sample_counts};

    fn same_grid(a: &OperatorGrid, b: &OperatorGrid) -> bool {
        a.dim() == b.dim()
            && a.mapping() == b.mapping()
            && a.cells().iter().zip(b.cells()).all(|(x, y)| x == y)
    }

    #[test]
    fn real_format_round_trips_exactly() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.0f64.sqrt(),
            1e-300,
            5e-324,
            f64::MAX,
            0.0,
            -0.0,
        ] {
            assert_eq!(
                parse_real(&format_real(x), "x").unwrap().to_bits(),
                x.to_bits()
            );
        }
    }

    #[test]
    fn matrix_text_has_no_negative_zero() {
        let m = ComplexMatrix::from_diagonal(&[-0.0, 1.0]);
        assert!(!serde_json::to_string(&matrix_to_text(&m))
            .unwrap()
            .contains("-0.0"));
    }

    #[test]
    fn grid_round_trip_d3() {
        let g = gellmann_grid(3).unwrap();
        let text = grid_to_json(&g);
        let back = grid_from_json(&text).unwrap();
        assert!(same_grid(&g, &back));
        assert_eq!(grid_to_json(&back), text);
    }

    #[test]
    fn grid_round_trip_keeps_mapping() {
        let g = arrange_grid(&gellmann_basis(4).unwrap(), 4, &GridMapping::RowMajor).unwrap();
        let back = grid_from_json(&grid_to_json(&g)).unwrap();
        assert_eq!(back.mapping(), "row-major");
        assert!(same_grid(&g, &back));
    }

    #[test]
    fn grid_load_revalidates() {
        let g = gellmann_grid(2).unwrap();
        let text = grid_to_json(&g).replacen("7.0710678118654746e-1", "8.0000000000000000e-1", 1);
        let e = grid_from_json(&text).unwrap_err();
        assert!(matches!(e, MumError::InvalidBasis(_)), "{e}");
        let text = grid_to_json(&g).replace("\"d\": 2", "\"d\": 3");
        assert!(grid_from_json(&text).is_err());
        assert!(grid_from_json("{").is_err());
    }

    #[test]
    fn grid_load_rejects_wrong_kind() {
        let m = build_mum(&gellmann_grid(2).unwrap(), 0.1).unwrap();
        let e = grid_from_json(&mum_to_json(&m)).unwrap_err();
        assert!(e.to_string().contains("operator-grid"));
        assert_eq!(document_kind(&mum_to_json(&m)).unwrap(), KIND_MUM);
    }

    #[test]
    fn mum_round_trip() {
        let grid = gellmann_grid(3).unwrap();
        let t = t_opt(&build_f_operators(&grid).unwrap()).unwrap();
        let m = build_mum(&grid, t).unwrap();
        let text = mum_to_json(&m);
        let back = mum_from_json(&text).unwrap();
        assert_eq!(back.t().to_bits(), m.t().to_bits());
        assert_eq!(back.kappa().to_bits(), m.kappa().to_bits());
        assert_eq!(back.measurements(), m.measurements());
        assert_eq!(mum_to_json(&back), text);
    }

    #[test]
    fn mum_load_rejects_inconsistent_kappa() {
        let m = build_mum(&gellmann_grid(3).unwrap(), 0.05).unwrap();
        let text = mum_to_json(&m).replace(&format_real(m.kappa()), "5.0000000000000000e-1");
        assert!(mum_from_json(&text).is_err());
    }

    #[test]
    fn unverified_load_accepts_defects() {
        let m = build_mum(&gellmann_grid(3).unwrap(), 0.05).unwrap();
        let text = mum_to_json(&m).replace(&format_real(m.kappa()), "5.0000000000000000e-1");
        let loaded = mum_from_json_unverified(&text).unwrap();
        assert!(!crate::mum::verify_mum(&loaded, 1e-10).passed);
    }

    #[test]
    fn state_round_trip() {
        let rho = random_state(4, 2, 11).unwrap();
        let back = state_from_json(&state_to_json(&rho)).unwrap();
        assert_eq!(back, rho);
        let bad = operator_to_json(&HermitianOperator::from_diagonal(&[1.5, -0.5]));
        assert!(state_from_json(&bad).is_err());
        assert!(operator_from_json(&bad).is_ok());
    }

    #[test]
    fn probability_csv_round_trip() {
        let m = build_mum(&gellmann_grid(3).unwrap(), 0.1).unwrap();
        let p = born_probabilities(&m, &random_state(3, 1, 5).unwrap()).unwrap();
        let text = probabilities_to_csv(&p);
        assert!(text.starts_with("b,n,value\n1,1,"));
        assert_eq!(text.lines().count(), 1 + 4 * 3);
        assert_eq!(probabilities_from_csv(&text, 3).unwrap(), p);
    }

    #[test]
    fn count_csv_round_trip() {
        let m = build_mum(&gellmann_grid(2).unwrap(), 0.2).unwrap();
        let p = born_probabilities(&m, &random_state(2, 1, 5).unwrap()).unwrap();
        let c = sample_counts(&p, 1000, 3).unwrap();
        let back = counts_from_csv(&counts_to_csv(&c), 2).unwrap();
        assert_eq!(back.counts, c.counts);
        assert_eq!(back.shots, 1000);
    }

    #[test]
    fn table_csv_errors() {
        assert!(probabilities_from_csv("x,y,z\n", 2).is_err());
        let text = "b,n,value\n1,1,0.5\n1,2,0.5\n2,1,0.5\n2,2,0.5\n3,1,0.5\n";
        assert!(probabilities_from_csv(text, 2)
            .unwrap_err()
            .to_string()
            .contains("b=3, n=2"));
        let text = "b,n,value\n1,1,0.5\n1,1,0.5\n";
        assert!(probabilities_from_csv(text, 2).is_err());
        let text = "b,n,value\n4,1,0.5\n";
        assert!(probabilities_from_csv(text, 2).is_err());
    }

    #[test]
    fn scan_csv_format() {
        let row = KappaScanRow {
            kappa: 2.0 / 9.0,
            t: 0.03,
            bound: 2.5,
            delta_mean: 0.0,
            upsilon_bound: 2.5,
            upsilon_min_sampled: 2.6,
            states: 10,
            seed: 7,
        };
        let text = scan_to_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SCAN_HEADER));
        assert_eq!(
            lines.next(),
            Some("2.22222222222e-1,3.00000000000e-2,2.50000000000e0,0.00000000000e0,2.50000000000e0,2.60000000000e0,10,7")
        );
    }
}
