//! Plain-text report format.
//!
//! A report is a sequence of lines:
//!
//! ```text
//! # antdyn <kind>
//! key = value
//! [table name]
//! col_a,col_b,col_c
//! 1,2,3
//! [end]
//! ```
//!
//! Keys are unique within a report and values never contain newlines. Table
//! bodies are CSV with a header row, so each table can also be exported on its
//! own with [`Report::table_csv`]. Floats use 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::Complex;

use crate::analysis::{RateReport, Ranking, Theorem2Report};
use crate::error::{Error, Result};
use crate::integrate::fmt_sig17;
use crate::models::ModelSpec;
use crate::stability::EquilibriumReport;

#[derive(Debug, Clone, PartialEq)]
enum Block {
    Pair(String, String),
    Table(Table),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    kind: String,
    blocks: Vec<Block>,
}

impl Report {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            blocks: Vec::new(),
        }
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn pair(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        self.blocks.push(Block::Pair(key.into(), value));
        self
    }

    pub fn float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.pair(key, fmt_sig17(value))
    }

    pub fn table(&mut self, name: impl Into<String>, header: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        self.blocks.push(Block::Table(Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }));
        self
    }

    /// Appends every block of `other`, prefixing its keys and table names.
    pub fn merge(&mut self, prefix: &str, other: &Report) -> &mut Self {
        for b in &other.blocks {
            self.blocks.push(match b {
                Block::Pair(k, v) => Block::Pair(format!("{prefix}.{k}"), v.clone()),
                Block::Table(t) => Block::Table(Table {
                    name: format!("{prefix}.{}", t.name),
                    ..t.clone()
                }),
            });
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.blocks.iter().find_map(|b| match b {
            Block::Pair(k, v) if k == key => Some(v.as_str()),
            _ => None,
        })
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Table(t) => Some(t),
            Block::Pair(..) => None,
        })
    }

    pub fn table_csv(&self, name: &str) -> Option<String> {
        self.tables().find(|t| t.name == name).map(Table::to_csv)
    }

    pub fn render(&self) -> String {
        let mut out = format!("# antdyn {}\n", self.kind);
        for b in &self.blocks {
            match b {
                Block::Pair(k, v) => {
                    let _ = writeln!(out, "{k} = {v}");
                }
                Block::Table(t) => {
                    let _ = writeln!(out, "[{}]", t.name);
                    out.push_str(&t.to_csv());
                    out.push_str("[end]\n");
                }
            }
        }
        out
    }
}

/// Writes `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", format!("`{}` has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn fmt_complex(z: Complex<f64>) -> String {
    if z.im == 0.0 {
        fmt_sig17(z.re)
    } else {
        format!("{}{}{}i", fmt_sig17(z.re), if z.im < 0.0 { "" } else { "+" }, fmt_sig17(z.im))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), fmt_sig17)
}

/// Model parameters, path lengths in canonical order and the user-order permutation.
pub fn model_section(model: &ModelSpec) -> Report {
    let mut r = Report::new("model");
    let paths = model.paths();
    r.pair("variant", model.variant_name())
        .float("alpha", model.alpha())
        .float("beta", model.beta())
        .float("gamma", model.gamma())
        .pair("n", model.dim())
        .pair(
            "lengths",
            paths.lengths().iter().map(|&l| fmt_sig17(l)).collect::<Vec<_>>().join(" "),
        )
        .pair(
            "permutation",
            paths.permutation().iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(" "),
        )
        .float("shortest_limit", model.shortest_limit());
    r
}

pub fn equilibria(model: &ModelSpec, report: &EquilibriumReport) -> Report {
    let mut r = Report::new("equilibria");
    r.merge("model", &model_section(model));
    r.pair("count", report.equilibria.len());
    let rows = report
        .equilibria
        .iter()
        .zip(&report.spectra)
        .zip(&report.labels)
        .zip(&report.notes)
        .map(|(((eq, spec), label), note)| {
            vec![
                (eq.index + 1).to_string(),
                fmt_sig17(model.paths().lengths()[eq.index]),
                fmt_sig17(eq.mu),
                label.as_str().to_string(),
                fmt_sig17(eq.residual),
                spec.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join(" "),
                note.clone().unwrap_or_default().replace(',', ";"),
            ]
        })
        .collect();
    r.table(
        "equilibria",
        &["index", "length", "mu", "label", "residual", "spectrum", "note"],
        rows,
    );
    r
}

pub fn rates(report: &RateReport) -> Report {
    let mut r = Report::new("rates");
    r.float("gamma", report.gamma)
        .pair("time_scale", "gamma-scaled (divide rates by gamma for model time)");
    let rows = report
        .components
        .iter()
        .map(|c| {
            vec![
                (c.index + 1).to_string(),
                fmt_sig17(c.fitted_rate),
                fmt_sig17(c.theoretical_rate),
                fmt_opt(c.relative_rate_error),
                fmt_sig17(c.fitted_limit),
                fmt_sig17(c.theoretical_limit),
                fmt_sig17(c.fit_window.0),
                fmt_sig17(c.fit_window.1),
                fmt_sig17(c.fit_quality),
                c.note.clone().unwrap_or_default().replace(',', ";"),
            ]
        })
        .collect();
    r.table(
        "components",
        &[
            "index",
            "fitted_rate",
            "theoretical_rate",
            "relative_error",
            "fitted_limit",
            "theoretical_limit",
            "window_lo",
            "window_hi",
            "r_squared",
            "note",
        ],
        rows,
    );
    r
}

pub fn theorem2(report: &Theorem2Report) -> Report {
    let mut r = Report::new("verify");
    r.pair("status", report.status)
        .float("final_sum", report.final_sum)
        .float("shortest_sum", report.shortest_sum)
        .float("shortest_target", report.shortest_target)
        .float("settle_change", report.settle_change)
        .float("vanish_threshold", report.vanish_threshold);
    match &report.envelope {
        Some(env) => {
            r.pair("envelope", if env.holds() { "holds" } else { "violated" })
                .float("envelope.allowance", env.epsilon)
                .float("envelope.max_violation", env.max_violation);
        }
        None => {
            r.pair("envelope", "not-applicable");
        }
    }
    r.pair("failures", report.failures.len());
    for (k, f) in report.failures.iter().enumerate() {
        r.pair(format!("failure.{}", k + 1), f);
    }
    let rows = report
        .vanishing
        .iter()
        .map(|&(i, v)| vec![(i + 1).to_string(), fmt_sig17(v)])
        .collect();
    r.table("non_shortest_final", &["index", "value"], rows);
    r
}

pub fn ranking(ranking: &Ranking) -> Report {
    let mut r = Report::new("ranking");
    r.float("theta", ranking.theta);
    let rows = ranking
        .entries
        .iter()
        .map(|e| {
            vec![
                e.rank.to_string(),
                e.label.clone(),
                fmt_sig17(e.time_to_threshold),
                fmt_sig17(e.limit),
            ]
        })
        .collect();
    r.table("ranking", &["rank", "label", "time_to_threshold", "limit"], rows);
    r
}
