//! Stable JSON schema for analyze reports and builder manifests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hlp_core::corpus::Manifest;
use hlp_core::report::{Report, Status};

pub const REPORT_TAG: &str = "HLP-REPORT-1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format: String,
    pub package: String,
    pub n: usize,
    pub betti: Vec<usize>,
    pub passed: bool,
    /// check name -> outcome, in fixed BTreeMap order
    pub checks: BTreeMap<String, CheckDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckDocument {
    pub passed: bool,
    pub items: Vec<ItemDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemDocument {
    pub label: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub fn check_document(report: &Report, data: Option<serde_json::Value>) -> CheckDocument {
    CheckDocument {
        passed: report.passed(),
        items: report
            .items
            .iter()
            .map(|item| ItemDocument {
                label: item.label.clone(),
                status: match item.status {
                    Status::Pass => "pass".into(),
                    Status::Fail => "fail".into(),
                    Status::Info => "info".into(),
                },
                detail: item.detail.clone(),
            })
            .collect(),
        data,
    }
}

/// Sidecar manifest for generated packages.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestDocument {
    pub name: String,
    pub perverse_table: Vec<PerverseRow>,
    pub biprimitives: Vec<BiprimitiveRow>,
    pub lambda_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fibers: Vec<FiberManifest>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PerverseRow {
    pub degree: usize,
    pub perversity: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BiprimitiveRow {
    pub i: i64,
    pub j: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FiberManifest {
    pub label: String,
    pub splitting_ranks: Vec<SplittingRank>,
    pub semismall_signature: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SplittingRank {
    pub b: i64,
    pub rank: usize,
}

/// Sidecar manifest for corrupted variants: names the check expected to
/// fail instead of promising analyzer values.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CorruptManifestDocument {
    pub name: String,
    pub target_check: String,
}

pub fn manifest_document(manifest: &Manifest) -> ManifestDocument {
    ManifestDocument {
        name: manifest.name.clone(),
        perverse_table: manifest
            .perverse_table
            .iter()
            .map(|(&(degree, perversity), &dim)| PerverseRow {
                degree,
                perversity,
                dim,
            })
            .collect(),
        biprimitives: manifest
            .biprimitives
            .iter()
            .map(|(&(i, j), &dim)| BiprimitiveRow { i, j, dim })
            .collect(),
        lambda_dim: manifest.lambda_dim,
        defect: manifest.defect,
        fibers: manifest
            .fibers
            .iter()
            .map(|f| FiberManifest {
                label: f.label.clone(),
                splitting_ranks: f
                    .splitting_ranks
                    .iter()
                    .map(|(&b, &rank)| SplittingRank { b, rank })
                    .collect(),
                semismall_signature: f.semismall_signature,
            })
            .collect(),
    }
}

pub fn perverse_rows(table: &BTreeMap<(usize, i64), usize>) -> Vec<PerverseRow> {
    table
        .iter()
        .map(|(&(degree, perversity), &dim)| PerverseRow {
            degree,
            perversity,
            dim,
        })
        .collect()
}

pub fn biprimitive_rows(table: &BTreeMap<(i64, i64), usize>) -> Vec<BiprimitiveRow> {
    table
        .iter()
        .map(|(&(i, j), &dim)| BiprimitiveRow { i, j, dim })
        .collect()
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    text
}
