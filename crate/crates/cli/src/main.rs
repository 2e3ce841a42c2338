//! Batch front end: validate HLP package files, run check suites, generate
//! corpus packages.
//!
//! Exit codes: 0 = success / all checks pass; 1 = checks failed on
//! structurally sound input; 2 = malformed input or usage error.

mod format;
mod report_json;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hlp_core::corpus::{
    build_blowup_p2, build_product_family, build_projective_space, build_sl2sl2_package,
    build_threefold_model, corrupted_variants, Manifest, PieceSpec,
};
use hlp_core::perverse::{defect, Analysis, PerversePackage};
use hlp_core::Rational;

use format::{document_to_package, package_to_document, to_canonical_json, HlpDocument};
use report_json::{
    biprimitive_rows, check_document, manifest_document, perverse_rows, CheckDocument,
    CorruptManifestDocument, ReportDocument, REPORT_TAG,
};

#[derive(Parser)]
#[command(name = "hlp", version, about = "Exact verification of Hodge-Lefschetz packages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a package file and verify its structural invariants.
    Validate {
        /// Path to an HLP-1 JSON document.
        file: PathBuf,
    },
    /// Run check suites on a package file and emit a report.
    Analyze {
        /// Path to an HLP-1 JSON document.
        file: PathBuf,
        /// Comma-separated checks: filtration, hl, decomp, hrr, lambda,
        /// defect, rif, grauert, signature, splitting, or all.
        #[arg(long, default_value = "all")]
        checks: String,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a corpus package (with its manifest sidecar) to disk.
    Generate {
        /// Builder name: projective-space, product-family, blowup-p2,
        /// threefold, sl2sl2, or corrupt-<variant>.
        builder: String,
        /// Builder parameters, repeated key=value pairs.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Output path for the package document.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

const ALL_CHECKS: [&str; 10] = [
    "filtration",
    "hl",
    "decomp",
    "hrr",
    "lambda",
    "defect",
    "rif",
    "grauert",
    "signature",
    "splitting",
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { file } => run_validate(&file),
        Command::Analyze {
            file,
            checks,
            format,
            out,
        } => run_analyze(&file, &checks, format, out.as_deref()),
        Command::Generate { builder, params, out } => run_generate(&builder, &params, &out),
    };
    ExitCode::from(code)
}

fn load_package(path: &Path) -> Result<PerversePackage<Rational>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let doc: HlpDocument = serde_json::from_str(&text).map_err(|e| {
        format!(
            "{}: JSON parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    document_to_package(&doc).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_validate(path: &Path) -> u8 {
    let package = match load_package(path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = package.validate();
    print!("{report}");
    if report.passed() {
        println!("{}: valid package", package.name);
        0
    } else {
        1
    }
}

fn parse_checks(raw: &str) -> Result<Vec<&'static str>, String> {
    let mut selected = Vec::new();
    for token in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token == "all" {
            for c in ALL_CHECKS {
                if !selected.contains(&c) {
                    selected.push(c);
                }
            }
            continue;
        }
        match ALL_CHECKS.iter().find(|&&c| c == token) {
            Some(&c) => {
                if !selected.contains(&c) {
                    selected.push(c);
                }
            }
            None => {
                return Err(format!(
                    "unknown check {token:?}; known checks: {}, all",
                    ALL_CHECKS.join(", ")
                ))
            }
        }
    }
    if selected.is_empty() {
        return Err("no checks selected".into());
    }
    Ok(selected)
}

fn run_analyze(path: &Path, checks: &str, format: OutputFormat, out: Option<&Path>) -> u8 {
    let selected = match parse_checks(checks) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("usage error: {e}");
            return 2;
        }
    };
    let package = match load_package(path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let mut checks_out: BTreeMap<String, CheckDocument> = BTreeMap::new();
    let name = package.name.clone();
    let n = package.half_dim();
    let betti = package.betti();

    let validation = package.validate();
    let valid = validation.passed();
    checks_out.insert("validate".into(), check_document(&validation, None));

    if valid {
        match Analysis::new(package) {
            Ok(analysis) => {
                for &check in &selected {
                    let doc = run_check(&analysis, check);
                    checks_out.insert(check.to_string(), doc);
                }
            }
            Err(e) => {
                let mut report = hlp_core::Report::new("analysis");
                report.fail("analysis construction", e.to_string());
                checks_out.insert("analysis".into(), check_document(&report, None));
            }
        }
    }

    let passed = checks_out.values().all(|c| c.passed);
    let report_doc = ReportDocument {
        format: REPORT_TAG.into(),
        package: name,
        n,
        betti,
        passed,
        checks: checks_out,
    };

    let rendered = match format {
        OutputFormat::Json => report_json::to_canonical_json(&report_doc),
        OutputFormat::Text => render_text(&report_doc),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{rendered}"),
    }
    if passed {
        0
    } else {
        1
    }
}

fn run_check(analysis: &Analysis<Rational>, check: &str) -> CheckDocument {
    match check {
        "filtration" => {
            let mut report = analysis.filtration_report();
            report.merge(analysis.filtered_cup_report());
            let data = serde_json::json!({
                "perverse_table": perverse_rows(&analysis.perverse.graded_dims()),
            });
            check_document(&report, Some(data))
        }
        "hl" => check_document(&analysis.hard_lefschetz_report(), None),
        "decomp" => match analysis.decomposition_report() {
            Ok((report, biprims)) => {
                let data = serde_json::json!({
                    "biprimitives": biprimitive_rows(&biprims),
                });
                check_document(&report, Some(data))
            }
            Err(e) => error_check("decomposition", &e.to_string()),
        },
        "hrr" => match analysis.hrr_report() {
            Ok(report) => check_document(&report, None),
            Err(e) => error_check("hodge-riemann", &e.to_string()),
        },
        "lambda" => match analysis.lambda() {
            Ok((lambda, report)) => {
                let data = serde_json::json!({ "dim": lambda.dim() });
                check_document(&report, Some(data))
            }
            Err(e) => error_check("lambda", &e.to_string()),
        },
        "defect" => {
            let mut report = hlp_core::Report::new("defect");
            let data = match &analysis.package.defect_table {
                Some(table) => match defect(table, analysis.package.half_dim()) {
                    Ok(r) => {
                        report.pass(format!("defect of semismallness r = {r}"));
                        if r == 0 {
                            report.info("classification", "semismall");
                        } else {
                            report.info("classification", format!("not semismall (r = {r})"));
                        }
                        Some(serde_json::json!({ "r": r, "semismall": r == 0 }))
                    }
                    Err(e) => {
                        report.fail("defect", e.to_string());
                        None
                    }
                },
                None => {
                    report.info("defect", "no defect table supplied; skipped");
                    None
                }
            };
            check_document(&report, data)
        }
        "rif" => fiber_check(analysis, "refined intersection form", |a, f, b| {
            a.refined_intersection(f, b)
        }),
        "grauert" => fiber_check(analysis, "contractibility", |a, f, b| a.grauert(f, b)),
        "signature" => {
            let mut report = hlp_core::Report::new("signature");
            let mut applied = Vec::new();
            let semismall = analysis
                .package
                .defect_table
                .as_ref()
                .and_then(|t| defect(t, analysis.package.half_dim()).ok())
                .map(|r| r == 0);
            match semismall {
                Some(true) => {
                    let mut any = false;
                    for fiber in &analysis.package.fibers {
                        if fiber.codim_h.is_none() {
                            report.info(
                                format!("fiber {}", fiber.label),
                                "no stratum codimension; skipped",
                            );
                            continue;
                        }
                        any = true;
                        match analysis.semismall_signature(fiber) {
                            Ok(r) => {
                                applied.push(serde_json::json!({
                                    "label": fiber.label,
                                    "definite": r.passed(),
                                }));
                                report.merge(r);
                            }
                            Err(e) => report.fail(format!("fiber {}", fiber.label), e.to_string()),
                        }
                    }
                    if !any && analysis.package.fibers.is_empty() {
                        report.info("signature", "no fiber records supplied; skipped");
                    }
                }
                Some(false) => {
                    report.info("signature", "package is not semismall; criterion not applicable");
                }
                None => {
                    report.info("signature", "no defect table supplied; skipped");
                }
            }
            check_document(&report, Some(serde_json::json!({ "fibers": applied })))
        }
        "splitting" => {
            let mut report = hlp_core::Report::new("splitting");
            let mut ranks = Vec::new();
            if analysis.package.fibers.is_empty() {
                report.info("splitting", "no fiber records supplied; skipped");
            }
            for fiber in &analysis.package.fibers {
                for b in fiber.levels().collect::<Vec<_>>() {
                    match analysis.splitting(fiber, b) {
                        Ok(r) => {
                            let rank = r
                                .items
                                .iter()
                                .find(|i| i.label == "skyscraper rank")
                                .and_then(|i| i.detail.as_deref())
                                .and_then(|d| d.parse::<usize>().ok())
                                .unwrap_or(0);
                            ranks.push(serde_json::json!({
                                "label": fiber.label,
                                "b": b,
                                "splits": r.passed(),
                                "rank": rank,
                            }));
                            report.merge(r);
                        }
                        Err(e) => {
                            report.fail(format!("fiber {} b = {b}", fiber.label), e.to_string())
                        }
                    }
                }
            }
            check_document(&report, Some(serde_json::json!({ "skyscrapers": ranks })))
        }
        other => error_check(other, "unknown check"),
    }
}

fn fiber_check<F>(analysis: &Analysis<Rational>, what: &str, run: F) -> CheckDocument
where
    F: Fn(
        &Analysis<Rational>,
        &hlp_core::perverse::FiberRecord<Rational>,
        i64,
    ) -> hlp_core::Result<hlp_core::Report>,
{
    let mut report = hlp_core::Report::new(what);
    if analysis.package.fibers.is_empty() {
        report.info(what, "no fiber records supplied; skipped");
    }
    for fiber in &analysis.package.fibers {
        for b in fiber.levels().collect::<Vec<_>>() {
            match run(analysis, fiber, b) {
                Ok(r) => report.merge(r),
                Err(e) => report.fail(format!("fiber {} b = {b}", fiber.label), e.to_string()),
            }
        }
    }
    check_document(&report, None)
}

fn error_check(label: &str, message: &str) -> CheckDocument {
    let mut report = hlp_core::Report::new(label);
    report.fail(label, message);
    check_document(&report, None)
}

fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "package {} (n = {}, betti {:?})\n",
        doc.package, doc.n, doc.betti
    ));
    for (check, result) in &doc.checks {
        out.push_str(&format!(
            "[{}] {check}\n",
            if result.passed { "PASS" } else { "FAIL" }
        ));
        for item in &result.items {
            let tag = match item.status.as_str() {
                "pass" => "ok",
                "fail" => "FAIL",
                _ => "info",
            };
            match &item.detail {
                Some(d) => out.push_str(&format!("  {tag:4} {} -- {d}\n", item.label)),
                None => out.push_str(&format!("  {tag:4} {}\n", item.label)),
            }
        }
    }
    out.push_str(&format!(
        "result: {}\n",
        if doc.passed { "PASS" } else { "FAIL" }
    ));
    out
}

fn parse_params(params: &[String]) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| format!("parameter {p:?} is not key=value"))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn get_usize(
    params: &BTreeMap<String, String>,
    keys: &[&str],
    default: usize,
) -> Result<usize, String> {
    for key in keys {
        if let Some(v) = params.get(*key) {
            return v
                .parse::<usize>()
                .map_err(|e| format!("parameter {key} = {v:?}: {e}"));
        }
    }
    Ok(default)
}

enum Generated {
    Normal(PerversePackage<Rational>, Manifest),
    Corrupt(PerversePackage<Rational>, &'static str),
}

fn build_by_name(builder: &str, params: &BTreeMap<String, String>) -> Result<Generated, String> {
    match builder {
        "projective-space" => {
            let a = get_usize(params, &["a", "dim"], 2)?;
            let (pkg, manifest) = build_projective_space::<Rational>(a);
            Ok(Generated::Normal(pkg, manifest))
        }
        "product-family" => {
            let a = get_usize(params, &["a"], 1)?;
            let b = get_usize(params, &["b"], 1)?;
            if a == 0 || b == 0 {
                return Err("product-family needs a >= 1 and b >= 1".into());
            }
            let (pkg, manifest) = build_product_family::<Rational>(a, b);
            Ok(Generated::Normal(pkg, manifest))
        }
        "blowup-p2" => {
            let (pkg, manifest) = build_blowup_p2::<Rational>();
            Ok(Generated::Normal(pkg, manifest))
        }
        "threefold" => {
            let r = get_usize(params, &["r", "rank_r"], 1)?;
            let c = get_usize(params, &["c", "curve_rank", "curve_data"], 0)?;
            let (pkg, manifest) =
                build_threefold_model::<Rational>(r, c).map_err(|e| e.to_string())?;
            Ok(Generated::Normal(pkg, manifest))
        }
        "sl2sl2" => {
            let mut pieces = Vec::new();
            for (key, value) in params {
                let digits: Vec<char> = key.chars().collect();
                if digits.len() == 3 && digits[0] == 'm' {
                    let a = digits[1]
                        .to_digit(10)
                        .ok_or_else(|| format!("bad key {key}"))?;
                    let b = digits[2]
                        .to_digit(10)
                        .ok_or_else(|| format!("bad key {key}"))?;
                    let mult = value
                        .parse::<usize>()
                        .map_err(|e| format!("parameter {key} = {value:?}: {e}"))?;
                    pieces.push(PieceSpec {
                        a: a as usize,
                        b: b as usize,
                        mult,
                    });
                } else {
                    return Err(format!(
                        "unknown sl2sl2 parameter {key:?}; use mAB=multiplicity, e.g. m11=1"
                    ));
                }
            }
            if pieces.is_empty() {
                return Err("sl2sl2 needs at least one mAB=multiplicity parameter".into());
            }
            let (pkg, manifest) =
                build_sl2sl2_package::<Rational>(&pieces).map_err(|e| e.to_string())?;
            Ok(Generated::Normal(pkg, manifest))
        }
        _ => {
            if let Some(variant_name) = builder.strip_prefix("corrupt-") {
                for variant in corrupted_variants::<Rational>() {
                    if variant.name == variant_name {
                        return Ok(Generated::Corrupt(variant.package, variant.target_check));
                    }
                }
                return Err(format!(
                    "unknown corrupted variant {variant_name:?}; known: {}",
                    corrupted_variants::<Rational>()
                        .iter()
                        .map(|v| v.name.clone())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            Err(format!(
                "unknown builder {builder:?}; known: projective-space, product-family, \
                 blowup-p2, threefold, sl2sl2, corrupt-<variant>"
            ))
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let name = out.file_name().and_then(|n| n.to_str()).unwrap_or("package");
    let stem = name.strip_suffix(".json").unwrap_or(name);
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn run_generate(builder: &str, params: &[String], out: &Path) -> u8 {
    let params = match parse_params(params) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("usage error: {e}");
            return 2;
        }
    };
    let generated = match build_by_name(builder, &params) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let (package, manifest_text) = match generated {
        Generated::Normal(pkg, manifest) => {
            let doc = manifest_document(&manifest);
            (pkg, report_json::to_canonical_json(&doc))
        }
        Generated::Corrupt(pkg, target_check) => {
            let doc = CorruptManifestDocument {
                name: pkg.name.clone(),
                target_check: target_check.to_string(),
            };
            (pkg, report_json::to_canonical_json(&doc))
        }
    };
    let document = package_to_document(&package);
    let text = to_canonical_json(&document);
    if let Err(e) = std::fs::write(out, text) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return 2;
    }
    let sidecar = manifest_path(out);
    if let Err(e) = std::fs::write(&sidecar, manifest_text) {
        eprintln!("error: cannot write {}: {e}", sidecar.display());
        return 2;
    }
    println!("wrote {} and {}", out.display(), sidecar.display());
    0
}
