//! Campaigns over (size, elementary rule) grids.
//!
//! Each cell `(n, R)` asks whether the lift of rule `R` is well formed on a
//! ring of `n` binary cells, which for lifted rules is exactly bijectivity of
//! the classical map. Cells are independent, so the scan distributes them
//! over the worker pool and the verdicts do not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, RuleTable};
use crate::par;
use crate::reversibility::{affine_analyze, affine_bijective, check_bijective_with_budget};
use crate::DEFAULT_BUDGET;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRequest {
    pub n_min: usize,
    pub n_max: usize,
    pub r_min: u8,
    pub r_max: u8,
    /// Most configurations one cell may visit; larger cells are skipped.
    pub budget: u64,
    /// Worker count; `None` uses the default pool, `Some(1)` runs serially.
    pub jobs: Option<usize>,
    /// Record wall-clock fields. Off gives byte-identical reports.
    pub timing: bool,
}

impl ScanRequest {
    pub fn new(sizes: (usize, usize), rules: (u8, u8)) -> Self {
        Self {
            n_min: sizes.0,
            n_max: sizes.1,
            r_min: rules.0,
            r_max: rules.1,
            budget: DEFAULT_BUDGET,
            jobs: None,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 3 {
            return Err(Error::InvalidRequest(format!("n_min = {} < 3", self.n_min)));
        }
        if self.n_min > self.n_max {
            return Err(Error::InvalidRequest(format!(
                "empty size range {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.r_min > self.r_max {
            return Err(Error::InvalidRequest(format!(
                "empty rule range {}..{}",
                self.r_min, self.r_max
            )));
        }
        if self.n_max > 63 {
            return Err(Error::InvalidRequest(format!("n_max = {} > 63", self.n_max)));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidRequest("jobs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Forms,
    NotForms,
    /// Over budget; no verdict.
    Skipped,
}

impl CellStatus {
    fn csv_token(self) -> &'static str {
        match self {
            CellStatus::Forms => "true",
            CellStatus::NotForms => "false",
            CellStatus::Skipped => "skipped",
        }
    }

    fn from_csv_token(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(CellStatus::Forms),
            "false" => Ok(CellStatus::NotForms),
            "skipped" => Ok(CellStatus::Skipped),
            other => Err(Error::Parse(format!("bad forms_qca value `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCell {
    pub n: usize,
    pub rule: u8,
    pub status: CellStatus,
    pub elapsed_us: u64,
    pub witness: Option<(u64, u64)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub tool_version: String,
    /// Seconds since the Unix epoch; 0 when timing is off.
    pub timestamp: u64,
    pub budget: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub r_min: u8,
    pub r_max: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub meta: ScanMeta,
    /// Sorted by `(n, rule)`.
    pub cells: Vec<ScanCell>,
    /// Per size, the rules that form a QCA, ascending.
    pub forming: BTreeMap<usize, Vec<u8>>,
}

impl ScanReport {
    fn from_cells(meta: ScanMeta, mut cells: Vec<ScanCell>) -> Self {
        cells.sort_by_key(|c| (c.n, c.rule));
        let mut forming: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
        for c in &cells {
            let entry = forming.entry(c.n).or_default();
            if c.status == CellStatus::Forms {
                entry.push(c.rule);
            }
        }
        Self {
            meta,
            cells,
            forming,
        }
    }

    pub fn cell(&self, n: usize, rule: u8) -> Option<&ScanCell> {
        self.cells
            .binary_search_by_key(&(n, rule), |c| (c.n, c.rule))
            .ok()
            .map(|i| &self.cells[i])
    }

    pub fn forming_set(&self, n: usize) -> Option<&[u8]> {
        self.forming.get(&n).map(Vec::as_slice)
    }

    /// Zeroes every timing field.
    pub fn strip_timing(&mut self) {
        self.meta.timestamp = 0;
        for c in &mut self.cells {
            c.elapsed_us = 0;
        }
    }
}

fn scan_cell(n: usize, rule: u8, budget: u64, timing: bool) -> ScanCell {
    let start = Instant::now();
    let table = RuleTable::elementary(rule.into()).expect("u8 rule number");
    let spec = LatticeSpec::binary(n).expect("validated size");
    let (status, witness) = match check_bijective_with_budget(&table, &spec, budget) {
        Ok(v) if v.bijective => (CellStatus::Forms, None),
        Ok(v) => (
            CellStatus::NotForms,
            v.collision.map(|(a, b)| (a.value(), b.value())),
        ),
        Err(_) => (CellStatus::Skipped, None),
    };
    ScanCell {
        n,
        rule,
        status,
        elapsed_us: if timing {
            start.elapsed().as_micros() as u64
        } else {
            0
        },
        witness,
    }
}

pub fn scan(request: &ScanRequest) -> Result<ScanReport> {
    request.validate()?;
    // Largest sizes first: they dominate the run time.
    let work: Vec<(usize, u8)> = (request.n_min..=request.n_max)
        .rev()
        .flat_map(|n| (request.r_min..=request.r_max).map(move |r| (n, r)))
        .collect();
    let cells = par::map_ordered(&work, request.jobs, |&(n, r)| {
        scan_cell(n, r, request.budget, request.timing)
    });
    let meta = ScanMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: if request.timing {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        } else {
            0
        },
        budget: request.budget,
        n_min: request.n_min,
        n_max: request.n_max,
        r_min: request.r_min,
        r_max: request.r_max,
    };
    Ok(ScanReport::from_cells(meta, cells))
}

/// Renders the per-size forming sets, grouping sizes with identical sets.
pub fn format_table(report: &ScanReport) -> String {
    let mut groups: Vec<(Vec<usize>, &Vec<u8>)> = Vec::new();
    for (n, rules) in &report.forming {
        match groups.iter_mut().find(|(_, r)| *r == rules) {
            Some((sizes, _)) => sizes.push(*n),
            None => groups.push((vec![*n], rules)),
        }
    }
    let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(", ");
    let rows: Vec<(String, String)> = groups
        .iter()
        .map(|(sizes, rules)| {
            let rules = if rules.is_empty() {
                "-".to_string()
            } else {
                join(&mut rules.iter().map(|r| r.to_string()))
            };
            (join(&mut sizes.iter().map(|n| n.to_string())), rules)
        })
        .collect();
    let width = rows
        .iter()
        .map(|(s, _)| s.len())
        .chain(["Size n".len()])
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$} | Rule number R", "Size n");
    let _ = writeln!(out, "{}-+-{}", "-".repeat(width), "-".repeat(13));
    for (sizes, rules) in rows {
        let _ = writeln!(out, "{sizes:<width$} | {rules}");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryViolation {
    pub n: usize,
    pub rule: u8,
    pub rule_forms: bool,
    pub complement_forms: bool,
}

/// Lists the sizes and rules where `R` and `255 - R` disagree.
///
/// Every cell in the report must have its complement present with a verdict.
pub fn symmetry_check(report: &ScanReport) -> Result<Vec<SymmetryViolation>> {
    let mut violations = Vec::new();
    for cell in &report.cells {
        let partner = 255 - cell.rule;
        let other = report
            .cell(cell.n, partner)
            .filter(|c| c.status != CellStatus::Skipped && cell.status != CellStatus::Skipped)
            .ok_or(Error::IncompleteCoverage {
                n: cell.n,
                rule: cell.rule,
                missing: partner,
            })?;
        let (a, b) = (
            cell.status == CellStatus::Forms,
            other.status == CellStatus::Forms,
        );
        if cell.rule < partner && a != b {
            violations.push(SymmetryViolation {
                n: cell.n,
                rule: cell.rule,
                rule_forms: a,
                complement_forms: b,
            });
        }
    }
    Ok(violations)
}

/// Residue classes of the size modulo 6 used by the conjectured table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResidueClass {
    /// `n = 6k`
    SixK,
    /// `n = 6k ± 1`
    SixKPlusMinusOne,
    /// `n = 6k ± 2`
    SixKPlusMinusTwo,
    /// `n = 6k + 3`
    SixKPlusThree,
}

/// Rules that appear in the conjectured table.
pub const CONJECTURE_RULES: [u8; 8] = [150, 154, 166, 170, 180, 204, 210, 240];

impl ResidueClass {
    /// The class of `n` for `k ≥ 1`; `None` for sizes the table does not cover.
    pub fn of(n: usize) -> Option<Self> {
        if n < 4 {
            return None;
        }
        Some(match n % 6 {
            0 => ResidueClass::SixK,
            1 | 5 => ResidueClass::SixKPlusMinusOne,
            2 | 4 => ResidueClass::SixKPlusMinusTwo,
            _ => ResidueClass::SixKPlusThree,
        })
    }

    pub fn expected_rules(self) -> &'static [u8] {
        match self {
            ResidueClass::SixKPlusMinusTwo => &[150, 170, 204, 240],
            ResidueClass::SixKPlusMinusOne => &[150, 154, 166, 170, 180, 204, 210, 240],
            ResidueClass::SixKPlusThree => &[154, 166, 170, 180, 204, 210, 240],
            ResidueClass::SixK => &[170, 204, 240],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ResidueClass::SixK => "6k",
            ResidueClass::SixKPlusMinusOne => "6k±1",
            ResidueClass::SixKPlusMinusTwo => "6k±2",
            ResidueClass::SixKPlusThree => "6k+3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjectureStatus {
    /// Every rule in 128..=255 decided and the forming set equals the prediction.
    Match,
    /// Some decided rule contradicts the prediction.
    Mismatch,
    /// Decided rules agree, but some rules are undecided.
    Partial,
    /// The size is outside the conjectured table.
    Uncovered,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureVerdict {
    pub n: usize,
    pub residue_class: Option<ResidueClass>,
    pub expected_rules: Vec<u8>,
    pub computed_rules: Vec<u8>,
    /// Rules in 128..=255 without a verdict (over budget or non-affine in
    /// affine-only mode).
    pub undecided_rules: Vec<u8>,
    pub status: ConjectureStatus,
    pub matches: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjectureOptions {
    pub budget: u64,
    /// Decide affine rules through the GF(2) rank only; other rules stay undecided.
    pub affine_only: bool,
    pub jobs: Option<usize>,
}

impl Default for ConjectureOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            affine_only: false,
            jobs: None,
        }
    }
}

const CONJECTURE_RANGE: std::ops::RangeInclusive<u8> = 128..=255;

/// Compares the forming set at size `n` (rules 128..=255) with the
/// conjectured residue-class table. The table is a guess; a mismatch is
/// reported, never raised as an error.
pub fn conjecture_eval(
    n: usize,
    report: Option<&ScanReport>,
    opts: &ConjectureOptions,
) -> Result<ConjectureVerdict> {
    if n < 3 {
        return Err(Error::InvalidRequest(format!("n = {n} < 3")));
    }
    let mut decided: BTreeMap<u8, bool> = BTreeMap::new();
    if let Some(report) = report {
        for r in CONJECTURE_RANGE {
            match report.cell(n, r).map(|c| c.status) {
                Some(CellStatus::Forms) => decided.insert(r, true),
                Some(CellStatus::NotForms) => decided.insert(r, false),
                _ => None,
            };
        }
    } else if opts.affine_only {
        let spec = LatticeSpec::binary(n)?;
        for r in CONJECTURE_RANGE {
            let table = RuleTable::elementary(r.into())?;
            if let Some(form) = affine_analyze(&table)? {
                decided.insert(r, affine_bijective(&form, &spec)?);
            }
        }
    } else {
        let needed = LatticeSpec::binary(n)?.config_count();
        if needed > opts.budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: opts.budget,
            });
        }
        let fresh = scan(&ScanRequest {
            budget: opts.budget,
            jobs: opts.jobs,
            timing: false,
            ..ScanRequest::new((n, n), (*CONJECTURE_RANGE.start(), *CONJECTURE_RANGE.end()))
        })?;
        return conjecture_eval(n, Some(&fresh), opts);
    }
    Ok(judge(n, &decided))
}

fn judge(n: usize, decided: &BTreeMap<u8, bool>) -> ConjectureVerdict {
    let residue_class = ResidueClass::of(n);
    let expected: BTreeSet<u8> = residue_class
        .map(|c| c.expected_rules().iter().copied().collect())
        .unwrap_or_default();
    let computed_rules: Vec<u8> = decided
        .iter()
        .filter_map(|(&r, &f)| f.then_some(r))
        .collect();
    let undecided_rules: Vec<u8> = CONJECTURE_RANGE
        .filter(|r| !decided.contains_key(r))
        .collect();
    let status = match residue_class {
        None => ConjectureStatus::Uncovered,
        Some(_) => {
            let consistent = decided
                .iter()
                .all(|(r, &f)| expected.contains(r) == f);
            match (consistent, undecided_rules.is_empty()) {
                (false, _) => ConjectureStatus::Mismatch,
                (true, true) => ConjectureStatus::Match,
                (true, false) => ConjectureStatus::Partial,
            }
        }
    };
    ConjectureVerdict {
        n,
        residue_class,
        expected_rules: expected.into_iter().collect(),
        computed_rules,
        undecided_rules,
        status,
        matches: status == ConjectureStatus::Match,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

pub const CSV_HEADER: [&str; 6] = ["n", "rule", "forms_qca", "elapsed_us", "witness_a", "witness_b"];

pub fn export_report(report: &ScanReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for c in &report.cells {
                let (a, b) = c
                    .witness
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .unwrap_or_default();
                w.write_record([
                    c.n.to_string().as_str(),
                    c.rule.to_string().as_str(),
                    c.status.csv_token(),
                    c.elapsed_us.to_string().as_str(),
                    &a,
                    &b,
                ])?;
            }
            w.into_inner().map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

/// Reads a report back. CSV carries only the cells, so the metadata is
/// reconstructed from the cell ranges with an empty version and zero budget.
pub fn import_report(bytes: &[u8], format: ReportFormat) -> Result<ScanReport> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_slice(bytes)?),
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(bytes);
            let header = r.headers()?.clone();
            if header.iter().ne(CSV_HEADER) {
                return Err(Error::Parse(format!("unexpected header {header:?}")));
            }
            let parse_num = |s: &str| -> Result<u64> {
                s.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
            };
            let mut cells = Vec::new();
            for rec in r.records() {
                let rec = rec?;
                let witness = match (&rec[4], &rec[5]) {
                    ("", "") => None,
                    (a, b) => Some((parse_num(a)?, parse_num(b)?)),
                };
                cells.push(ScanCell {
                    n: parse_num(&rec[0])? as usize,
                    rule: u8::try_from(parse_num(&rec[1])?)
                        .map_err(|e| Error::Parse(e.to_string()))?,
                    status: CellStatus::from_csv_token(&rec[2])?,
                    elapsed_us: parse_num(&rec[3])?,
                    witness,
                });
            }
            let meta = ScanMeta {
                n_min: cells.iter().map(|c| c.n).min().unwrap_or(0),
                n_max: cells.iter().map(|c| c.n).max().unwrap_or(0),
                r_min: cells.iter().map(|c| c.rule).min().unwrap_or(0),
                r_max: cells.iter().map(|c| c.rule).max().unwrap_or(0),
                ..ScanMeta::default()
            };
            Ok(ScanReport::from_cells(meta, cells))
        }
    }
}
