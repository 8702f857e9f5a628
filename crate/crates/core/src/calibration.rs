//! Demographic calibration of the L2 speaker fraction.
//!
//! Records are read from a long-format CSV (`year,group,count`). A pool file
//! names the groups that contribute adult L2 speakers and, optionally, how to
//! split columns that merge two groups:
//!
//! ```text
//! [l2_pool]
//! Black
//! Indigenous
//!
//! [pooled]
//! Black+Mixed AfE,0.92
//! ```
//!
//! Lines starting with `#` are comments. The interval for a year runs from
//! `low_fraction * share` to `share`, where `share` is the pooled groups'
//! fraction of the total population.

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::environment::GrammarAdvantages;
use crate::error::{domain, ModelError, Result};

/// Lower endpoint as a fraction of the upper one.
pub const DEFAULT_LOW_FRACTION: f64 = 0.5;
/// Share of the majority group in a merged African / mixed African-European column.
pub const DEFAULT_SPLIT_RATIO: f64 = 0.92;

pub const CAPE_CSV: &str = include_str!("../data/cape.csv");
pub const CAPE_POOL: &str = include_str!("../data/cape.pool");
pub const LIMA_CSV: &str = include_str!("../data/lima.csv");
pub const LIMA_POOL: &str = include_str!("../data/lima.pool");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicRecord {
    pub year: i32,
    /// Group counts in input order.
    pub counts: Vec<(String, u64)>,
    /// Groups whose count merges several populations (names joined by `+`).
    pub pooled_flags: Vec<String>,
}

impl DemographicRecord {
    pub fn new(year: i32, counts: Vec<(String, u64)>) -> Result<Self> {
        if counts.is_empty() {
            return Err(ModelError::EmptyRecord);
        }
        let pooled_flags = counts
            .iter()
            .filter(|(g, _)| g.contains('+'))
            .map(|(g, _)| g.clone())
            .collect();
        Ok(Self {
            year,
            counts,
            pooled_flags,
        })
    }

    pub fn count(&self, group: &str) -> Option<u64> {
        self.counts
            .iter()
            .find(|(g, _)| g == group)
            .map(|&(_, c)| c)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    /// Replaces the merged column `"A+B"` by `A` and `B` via [`split_pooled`].
    pub fn split_group(&mut self, pooled: &str, ratio: f64) -> Result<()> {
        let Some(pos) = self.counts.iter().position(|(g, _)| g == pooled) else {
            return Ok(());
        };
        let Some((major, minor)) = pooled.split_once('+') else {
            return Err(domain(format!(
                "pooled group {pooled:?} does not name two groups"
            )));
        };
        let (major_count, minor_count) = split_pooled(self.counts[pos].1, ratio)?;
        self.counts.splice(
            pos..=pos,
            [
                (major.trim().to_string(), major_count),
                (minor.trim().to_string(), minor_count),
            ],
        );
        self.pooled_flags.retain(|g| g != pooled);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaInterval {
    pub low: f64,
    pub high: f64,
}

impl SigmaInterval {
    /// Both endpoints rounded half-up to two decimals.
    pub fn rounded(&self) -> (f64, f64) {
        (round_half_up(self.low, 2), round_half_up(self.high, 2))
    }
}

pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    // The nudge keeps values like 0.345 (stored as 0.34499..) rounding up.
    ((x * scale) + 0.5 + 1e-9).floor() / scale
}

/// Interval estimate of the L2 fraction for one record.
///
/// Pool groups missing from the record count as zero.
pub fn sigma_interval(
    record: &DemographicRecord,
    l2_pool: &BTreeSet<String>,
    low_fraction: f64,
) -> Result<SigmaInterval> {
    if !(0.0..=1.0).contains(&low_fraction) {
        return Err(domain(format!(
            "low fraction must lie in [0, 1], got {low_fraction}"
        )));
    }
    let total = record.total();
    if total == 0 {
        return Err(ModelError::EmptyRecord);
    }
    let pooled: u64 = record
        .counts
        .iter()
        .filter(|(g, _)| l2_pool.contains(g))
        .map(|&(_, c)| c)
        .sum();
    let high = pooled as f64 / total as f64;
    Ok(SigmaInterval {
        low: low_fraction * high,
        high,
    })
}

/// Splits a merged count into `(round(ratio * pooled), remainder)`.
pub fn split_pooled(pooled_count: u64, ratio: f64) -> Result<(u64, u64)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(domain(format!(
            "split ratio must lie in [0, 1], got {ratio}"
        )));
    }
    let major = (ratio * pooled_count as f64).round() as u64;
    Ok((major, pooled_count - major))
}

/// Yearly imports needed to sustain `net_growth` given `natural_growth`.
pub fn required_imports(net_growth: f64, natural_growth: f64) -> f64 {
    net_growth - natural_growth
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoolSpec {
    pub l2_pool: BTreeSet<String>,
    /// Merged columns and the share of their first-named group.
    pub pooled: Vec<(String, f64)>,
}

impl PoolSpec {
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Pool,
            Pooled,
        }
        let mut spec = PoolSpec::default();
        let mut section = Section::None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[l2_pool]" => section = Section::Pool,
                "[pooled]" => section = Section::Pooled,
                _ if line.starts_with('[') => {
                    return Err(ModelError::Parse(format!(
                        "line {}: unknown section {line}",
                        lineno + 1
                    )))
                }
                _ => match section {
                    Section::Pool => {
                        spec.l2_pool.insert(line.to_string());
                    }
                    Section::Pooled => {
                        let (group, ratio) = line.rsplit_once(',').ok_or_else(|| {
                            ModelError::Parse(format!(
                                "line {}: expected `group_a+group_b,ratio`",
                                lineno + 1
                            ))
                        })?;
                        let ratio: f64 = ratio.trim().parse().map_err(|_| {
                            ModelError::Parse(format!("line {}: bad ratio {ratio:?}", lineno + 1))
                        })?;
                        if !group.contains('+') {
                            return Err(ModelError::Parse(format!(
                                "line {}: pooled group must join two names with `+`",
                                lineno + 1
                            )));
                        }
                        spec.pooled.push((group.trim().to_string(), ratio));
                    }
                    Section::None => {
                        return Err(ModelError::Parse(format!(
                            "line {}: entry outside of a section",
                            lineno + 1
                        )))
                    }
                },
            }
        }
        Ok(spec)
    }

    /// Copy of `record` with every listed merged column split.
    pub fn apply(&self, record: &DemographicRecord) -> Result<DemographicRecord> {
        let mut out = record.clone();
        for (group, ratio) in &self.pooled {
            out.split_group(group, *ratio)?;
        }
        Ok(out)
    }
}

#[derive(Deserialize)]
struct CsvRow {
    year: i32,
    group: String,
    count: u64,
}

/// Reads `year,group,count` rows into one record per year, in order of first appearance.
pub fn read_demographics<R: Read>(reader: R) -> Result<Vec<DemographicRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| ModelError::Parse(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["year", "group", "count"] {
        return Err(ModelError::Parse(format!(
            "expected header `year,group,count`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut grouped: Vec<(i32, Vec<(String, u64)>)> = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(|e| ModelError::Parse(e.to_string()))?;
        match grouped.iter_mut().find(|(y, _)| *y == row.year) {
            Some((_, counts)) => counts.push((row.group, row.count)),
            None => grouped.push((row.year, vec![(row.group, row.count)])),
        }
    }
    grouped
        .into_iter()
        .map(|(year, counts)| DemographicRecord::new(year, counts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearInterval {
    pub year: i32,
    pub interval: SigmaInterval,
}

/// Applies the pool spec to every record and estimates its interval.
pub fn estimate_intervals(
    records: &[DemographicRecord],
    spec: &PoolSpec,
    low_fraction: f64,
) -> Result<Vec<YearInterval>> {
    records
        .iter()
        .map(|r| {
            let split = spec.apply(r)?;
            Ok(YearInterval {
                year: r.year,
                interval: sigma_interval(&split, &spec.l2_pool, low_fraction)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasePreset {
    pub name: String,
    pub advantages: GrammarAdvantages,
    pub sigma_intervals: Vec<YearInterval>,
    pub notes: String,
}

fn bundled_intervals(csv_text: &str, pool_text: &str) -> Vec<YearInterval> {
    let records = read_demographics(csv_text.as_bytes()).expect("bundled CSV parses");
    let spec = PoolSpec::parse(pool_text).expect("bundled pool file parses");
    estimate_intervals(&records, &spec, DEFAULT_LOW_FRACTION).expect("bundled data is valid")
}

/// The two case studies: Afrikaans (Cape Colony) and Afro-Peruvian Spanish (Lima).
pub fn case_presets() -> Vec<CasePreset> {
    vec![
        CasePreset {
            name: "afrikaans".into(),
            advantages: GrammarAdvantages::new(1.0, 1.0).expect("valid"),
            sigma_intervals: bundled_intervals(CAPE_CSV, CAPE_POOL),
            notes: "Verbal inflection: equal advantages (alpha = 1), so D = d. \
                    Khoekhoe counts exist only from 1798."
                .into(),
        },
        CasePreset {
            name: "afro_peruvian".into(),
            advantages: GrammarAdvantages::new(0.7, 0.05).expect("valid"),
            sigma_intervals: bundled_intervals(LIMA_CSV, LIMA_POOL),
            notes: "Null subjects: alpha1 = 0.7, alpha2 = 0.05, alpha = 14. \
                    Mixed groups are excluded from the L2 pool."
                .into(),
        },
    ]
}

/// Looks up a bundled preset by name.
pub fn preset(name: &str) -> Option<CasePreset> {
    case_presets().into_iter().find(|p| p.name == name)
}
