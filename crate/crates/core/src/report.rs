//! Machine-readable verification reports.
//!
//! Every analyzer operation produces a `Report`: a named list of items, each
//! pass/fail/info with an optional witness. Reports aggregate without losing
//! the witnesses, and the CLI serializes them verbatim.

use crate::graded::CheckOutcome;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Pass,
    Fail,
    /// Informational item; does not affect the verdict.
    Info,
}

#[derive(Clone, Debug)]
pub struct ReportItem {
    pub label: String,
    pub status: Status,
    pub detail: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub items: Vec<ReportItem>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report {
            name: name.into(),
            items: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status != Status::Fail)
    }

    pub fn pass(&mut self, label: impl Into<String>) {
        self.items.push(ReportItem {
            label: label.into(),
            status: Status::Pass,
            detail: None,
        });
    }

    pub fn fail(&mut self, label: impl Into<String>, witness: impl Into<String>) {
        self.items.push(ReportItem {
            label: label.into(),
            status: Status::Fail,
            detail: Some(witness.into()),
        });
    }

    pub fn info(&mut self, label: impl Into<String>, detail: impl Into<String>) {
        self.items.push(ReportItem {
            label: label.into(),
            status: Status::Info,
            detail: Some(detail.into()),
        });
    }

    /// Records a check outcome under the given label.
    pub fn outcome(&mut self, label: impl Into<String>, outcome: CheckOutcome) {
        match outcome {
            CheckOutcome::Pass => self.pass(label),
            CheckOutcome::Fail { witness } => self.fail(label, witness),
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.items.extend(other.items);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| i.status == Status::Fail)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "[{}] {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name
        )?;
        for item in &self.items {
            let tag = match item.status {
                Status::Pass => "ok",
                Status::Fail => "FAIL",
                Status::Info => "info",
            };
            match &item.detail {
                Some(d) => writeln!(f, "  {tag:4} {} -- {d}", item.label)?,
                None => writeln!(f, "  {tag:4} {}", item.label)?,
            }
        }
        Ok(())
    }
}
