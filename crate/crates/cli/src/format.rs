//! The HLP-1 package file format.
//!
//! JSON with every matrix entry a rational literal (`p/q` or a bare
//! integer). Operator, pairing and Weil blocks are nested row arrays whose
//! shapes are implied by `dims`; fiber matrices carry explicit shapes since
//! fiber dimensions are not part of the graded space. Serialization is
//! canonical: fixed field order, numerically ordered map keys, entries in
//! lowest terms, so parse-then-serialize is byte-identical for canonical
//! documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hlp_core::filtration::Filtration;
use hlp_core::graded::{GradedOperator, GradedSpace, PoincarePairing};
use hlp_core::perverse::{DefectEntry, FiberRecord, PerversePackage};
use hlp_core::scalar::{format_rational, parse_rational};
use hlp_core::weil::WeilOperator;
use hlp_core::{Matrix, Rational, Subspace};

pub const FORMAT_TAG: &str = "HLP-1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HlpDocument {
    pub format: String,
    pub name: String,
    pub n: usize,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub eta_blocks: BTreeMap<usize, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub l_blocks: BTreeMap<usize, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pairing_blocks: BTreeMap<usize, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weil_blocks: Option<BTreeMap<usize, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_table: Option<Vec<DefectRow>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fibers: Vec<FiberDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectRow {
    pub i: usize,
    pub dim_yi: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberDocument {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codim_h: Option<usize>,
    pub class_maps: BTreeMap<i64, MatrixDocument>,
    pub restriction_maps: BTreeMap<i64, MatrixDocument>,
    pub homology_filtration: BTreeMap<i64, FiltrationDocument>,
}

/// Shape-explicit matrix, rationals as strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationDocument {
    /// Ambient dimension of the filtered space.
    pub dim: usize,
    /// Index of the first stored step.
    pub lo: i64,
    /// Increasing chain of subspace bases.
    pub steps: Vec<MatrixDocument>,
}

pub fn matrix_to_rows(m: &Matrix<Rational>) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| format_rational(&m[(r, c)])).collect())
        .collect()
}

pub fn rows_to_matrix(
    rows: &[Vec<String>],
    expected: (usize, usize),
    what: &str,
) -> Result<Matrix<Rational>, String> {
    let (er, ec) = expected;
    if rows.len() != er || rows.iter().any(|r| r.len() != ec) {
        return Err(format!(
            "{what}: expected a {er}x{ec} matrix, found {} rows of lengths {:?}",
            rows.len(),
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    let mut out = Matrix::zeros(er, ec);
    for (r, row) in rows.iter().enumerate() {
        for (c, text) in row.iter().enumerate() {
            out[(r, c)] = parse_rational(text).map_err(|e| format!("{what}[{r}][{c}]: {e}"))?;
        }
    }
    Ok(out)
}

fn matrix_to_doc(m: &Matrix<Rational>) -> MatrixDocument {
    MatrixDocument {
        rows: m.rows(),
        cols: m.cols(),
        entries: matrix_to_rows(m),
    }
}

fn doc_to_matrix(doc: &MatrixDocument, what: &str) -> Result<Matrix<Rational>, String> {
    rows_to_matrix(&doc.entries, (doc.rows, doc.cols), what)
}

/// Serializes a package into its canonical document.
pub fn package_to_document(package: &PerversePackage<Rational>) -> HlpDocument {
    let space = &package.space;
    let n = space.half_dim();
    let block_map = |op: &GradedOperator<Rational>| -> BTreeMap<usize, Vec<Vec<String>>> {
        space
            .degrees()
            .filter_map(|l| {
                let block = op.block(l);
                if block.is_empty() || block.is_zero() {
                    None
                } else {
                    Some((l, matrix_to_rows(&block)))
                }
            })
            .collect()
    };
    let pairing_blocks = (0..=n)
        .filter(|&l| space.dim(l) > 0)
        .map(|l| (l, matrix_to_rows(&package.pairing.block(l))))
        .collect();
    let weil_blocks = package.weil.as_ref().map(|weil| {
        space
            .degrees()
            .filter(|&l| space.dim(l) > 0)
            .map(|l| (l, matrix_to_rows(&weil.block(l))))
            .collect()
    });
    let defect_table = package.defect_table.as_ref().map(|table| {
        table
            .iter()
            .map(|e| DefectRow {
                i: e.fiber_dim,
                dim_yi: e.dim_yi,
            })
            .collect()
    });
    let fibers = package
        .fibers
        .iter()
        .map(|fiber| FiberDocument {
            label: fiber.label.clone(),
            codim_h: fiber.codim_h,
            class_maps: fiber
                .class_maps
                .iter()
                .map(|(&b, m)| (b, matrix_to_doc(m)))
                .collect(),
            restriction_maps: fiber
                .restriction_maps
                .iter()
                .map(|(&b, m)| (b, matrix_to_doc(m)))
                .collect(),
            homology_filtration: fiber
                .homology_filtration
                .iter()
                .map(|(&b, chain)| {
                    let steps = (chain.lo()..=chain.hi())
                        .map(|i| matrix_to_doc(chain.step(i).basis()))
                        .collect();
                    (
                        b,
                        FiltrationDocument {
                            dim: chain.ambient_dim(),
                            lo: chain.lo(),
                            steps,
                        },
                    )
                })
                .collect(),
        })
        .collect();

    HlpDocument {
        format: FORMAT_TAG.to_string(),
        name: package.name.clone(),
        n,
        dims: space.dims().to_vec(),
        eta_blocks: block_map(&package.eta),
        l_blocks: block_map(&package.l_op),
        pairing_blocks,
        weil_blocks,
        defect_table,
        fibers,
    }
}

/// Structural reconstruction of the package. All shape errors surface here;
/// hypothesis-level invariants are checked separately by `validate`.
pub fn document_to_package(doc: &HlpDocument) -> Result<PerversePackage<Rational>, String> {
    if doc.format != FORMAT_TAG {
        return Err(format!(
            "unsupported format {:?}; expected {FORMAT_TAG:?}",
            doc.format
        ));
    }
    if doc.dims.len() != 2 * doc.n + 1 {
        return Err(format!(
            "dims has {} entries; n = {} requires {}",
            doc.dims.len(),
            doc.n,
            2 * doc.n + 1
        ));
    }
    let space = GradedSpace::new(doc.n, doc.dims.clone()).map_err(|e| e.to_string())?;
    let top = space.top_degree();

    let read_blocks = |raw: &BTreeMap<usize, Vec<Vec<String>>>,
                       what: &str|
     -> Result<BTreeMap<usize, Matrix<Rational>>, String> {
        let mut out = BTreeMap::new();
        for (&l, rows) in raw {
            if l + 2 > top {
                return Err(format!("{what} block at degree {l} maps outside the grading"));
            }
            let m = rows_to_matrix(
                rows,
                (space.dim(l + 2), space.dim(l)),
                &format!("{what} block at degree {l}"),
            )?;
            out.insert(l, m);
        }
        Ok(out)
    };
    let eta = GradedOperator::new(space.clone(), 2, read_blocks(&doc.eta_blocks, "eta")?)
        .map_err(|e| e.to_string())?;
    let l_op = GradedOperator::new(space.clone(), 2, read_blocks(&doc.l_blocks, "L")?)
        .map_err(|e| e.to_string())?;

    let mut pairing_blocks = BTreeMap::new();
    for (&l, rows) in &doc.pairing_blocks {
        if l > doc.n {
            return Err(format!(
                "pairing block at degree {l} > n = {}; upper blocks are implied",
                doc.n
            ));
        }
        let m = rows_to_matrix(
            rows,
            (space.dim(l), space.dim(top - l)),
            &format!("pairing block at degree {l}"),
        )?;
        pairing_blocks.insert(l, m);
    }
    let pairing = PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks)
        .map_err(|e| e.to_string())?;

    let weil = match &doc.weil_blocks {
        None => None,
        Some(raw) => {
            let mut blocks = BTreeMap::new();
            for (&l, rows) in raw {
                if l > top {
                    return Err(format!("Weil block at degree {l} outside the grading"));
                }
                let m = rows_to_matrix(
                    rows,
                    (space.dim(l), space.dim(l)),
                    &format!("Weil block at degree {l}"),
                )?;
                blocks.insert(l, m);
            }
            Some(WeilOperator::new(space.clone(), blocks).map_err(|e| e.to_string())?)
        }
    };

    let defect_table = doc.defect_table.as_ref().map(|rows| {
        rows.iter()
            .map(|r| DefectEntry {
                fiber_dim: r.i,
                dim_yi: r.dim_yi,
            })
            .collect()
    });

    let mut fibers = Vec::new();
    for fdoc in &doc.fibers {
        let mut class_maps = BTreeMap::new();
        for (&b, m) in &fdoc.class_maps {
            let degree = doc.n as i64 + b;
            if degree < 0 || degree > top as i64 {
                return Err(format!(
                    "fiber {}: class map level b = {b} outside the grading",
                    fdoc.label
                ));
            }
            let matrix = doc_to_matrix(m, &format!("fiber {} class map at b = {b}", fdoc.label))?;
            if matrix.rows() != space.dim(degree as usize) {
                return Err(format!(
                    "fiber {}: class map at b = {b} has {} rows, H^{degree} has dimension {}",
                    fdoc.label,
                    matrix.rows(),
                    space.dim(degree as usize)
                ));
            }
            class_maps.insert(b, matrix);
        }
        let mut restriction_maps = BTreeMap::new();
        for (&b, m) in &fdoc.restriction_maps {
            let degree = doc.n as i64 + b;
            if degree < 0 || degree > top as i64 {
                return Err(format!(
                    "fiber {}: restriction map level b = {b} outside the grading",
                    fdoc.label
                ));
            }
            let matrix = doc_to_matrix(
                m,
                &format!("fiber {} restriction map at b = {b}", fdoc.label),
            )?;
            if matrix.cols() != space.dim(degree as usize) {
                return Err(format!(
                    "fiber {}: restriction map at b = {b} has {} columns, H^{degree} has dimension {}",
                    fdoc.label,
                    matrix.cols(),
                    space.dim(degree as usize)
                ));
            }
            restriction_maps.insert(b, matrix);
        }
        let mut homology_filtration = BTreeMap::new();
        for (&b, chain_doc) in &fdoc.homology_filtration {
            let mut steps = Vec::new();
            for (k, basis) in chain_doc.steps.iter().enumerate() {
                if basis.rows != chain_doc.dim {
                    return Err(format!(
                        "fiber {}: filtration step {k} at b = {b} has ambient {} instead of {}",
                        fdoc.label, basis.rows, chain_doc.dim
                    ));
                }
                let m = doc_to_matrix(
                    basis,
                    &format!("fiber {} filtration step {k} at b = {b}", fdoc.label),
                )?;
                steps.push(Subspace::span(&m));
            }
            let chain = Filtration::new(chain_doc.dim, chain_doc.lo, steps)
                .map_err(|e| format!("fiber {} filtration at b = {b}: {e}", fdoc.label))?;
            homology_filtration.insert(b, chain);
        }
        for b in class_maps.keys() {
            if !restriction_maps.contains_key(b) || !homology_filtration.contains_key(b) {
                return Err(format!(
                    "fiber {}: level b = {b} needs a class map, a restriction map and a homology filtration",
                    fdoc.label
                ));
            }
        }
        fibers.push(FiberRecord {
            label: fdoc.label.clone(),
            codim_h: fdoc.codim_h,
            class_maps,
            restriction_maps,
            homology_filtration,
        });
    }

    PerversePackage::new(
        doc.name.clone(),
        space,
        eta,
        l_op,
        pairing,
        weil,
        defect_table,
        fibers,
    )
    .map_err(|e| e.to_string())
}

/// Canonical serialization of a document.
pub fn to_canonical_json(doc: &HlpDocument) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use hlp_core::corpus::build_blowup_p2;

    #[test]
    fn round_trip_is_canonical() {
        let (package, _) = build_blowup_p2::<Rational>();
        let doc = package_to_document(&package);
        let text = to_canonical_json(&doc);
        let parsed: HlpDocument = serde_json::from_str(&text).unwrap();
        let rebuilt = document_to_package(&parsed).unwrap();
        assert_eq!(rebuilt.space.dims(), package.space.dims());
        assert_eq!(rebuilt.eta.total(), package.eta.total());
        assert_eq!(rebuilt.l_op.total(), package.l_op.total());
        assert_eq!(rebuilt.form.gram, package.form.gram);
        // byte-identical re-serialization
        assert_eq!(to_canonical_json(&package_to_document(&rebuilt)), text);
    }

    #[test]
    fn shape_mismatch_is_a_parse_error() {
        let (package, _) = build_blowup_p2::<Rational>();
        let mut doc = package_to_document(&package);
        doc.dims[2] = 3;
        assert!(document_to_package(&doc).is_err());
    }
}
