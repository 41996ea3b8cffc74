//! `report.json` and the plot-data CSV files.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which reads
//! back to the same `f64`. Non-finite values become `null` in JSON and an
//! empty cell in CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::alpha_select::{standardized_eigvals, AlphaSelectionTrace, HScanTrace};
use crate::error::{MrctError, Result};
use crate::mrct::{AlphaSpec, ChainOutcome, ChainStart, MrctConfig, MrctResult, Selection};

/// A float serialized with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Sig17 {
    pub fn text(self) -> Option<String> {
        self.0.is_finite().then(|| format!("{:.16e}", self.0))
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.text() {
            Some(t) => RawValue::from_string(t).map_err(serde::ser::Error::custom)?.serialize(s),
            None => s.serialize_none(),
        }
    }
}

fn csv_cell(v: f64) -> String {
    Sig17(v).text().unwrap_or_default()
}

/// Configuration as run, echoed into the report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub h: usize,
    pub alpha: String,
    pub n_starts: usize,
    pub eps_k: Sig17,
    pub max_k_iters: usize,
    pub max_outer_iters: usize,
    pub cutoff_q: Sig17,
    pub mc_n: usize,
    pub mc_n_cutoff: usize,
    pub selection: String,
    pub rank_tol: Sig17,
    pub seed: u64,
}

impl From<&MrctConfig> for ConfigEcho {
    fn from(c: &MrctConfig) -> Self {
        Self {
            h: c.h,
            alpha: match c.alpha {
                AlphaSpec::Auto => "auto".to_string(),
                AlphaSpec::Fixed(a) => Sig17(a).text().unwrap_or_default(),
            },
            n_starts: c.n_starts,
            eps_k: Sig17(c.eps_k),
            max_k_iters: c.max_k_iters,
            max_outer_iters: c.max_outer_iters,
            cutoff_q: Sig17(c.cutoff_q),
            mc_n: c.mc_n,
            mc_n_cutoff: c.mc_n_cutoff,
            selection: match c.selection {
                Selection::Trace => "trace".to_string(),
                Selection::TraceQ(q) => format!("trace-q={q}"),
                Selection::Kurtosis => "kurtosis".to_string(),
            },
            rank_tol: Sig17(c.rank_tol),
            seed: c.seed,
        }
    }
}

/// Where the data came from and how it was represented.
#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub path: String,
    pub format: String,
    pub n: usize,
    /// Grid points or basis functions per curve.
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_degree: Option<usize>,
}

#[derive(Debug, Serialize)]
struct CurveEntry<'a> {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    distance: Sig17,
    flagged: bool,
}

#[derive(Debug, Serialize)]
struct ChainEntry {
    start: ChainStart,
    outcome: ChainOutcome,
    iterations: usize,
    score: Option<Sig17>,
}

#[derive(Debug, Serialize)]
struct AlphaSelectionEcho {
    chosen_alpha: Sig17,
    converged: bool,
    history: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    command: &'a str,
    input: &'a InputEcho,
    config: ConfigEcho,
    alpha: Sig17,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_selection: Option<AlphaSelectionEcho>,
    k: Sig17,
    h: usize,
    subset: &'a [usize],
    cutoff: Sig17,
    converged: bool,
    k_converged: bool,
    n_starts_converged: usize,
    trace_objective: Sig17,
    selection_objective: Sig17,
    n_flagged: usize,
    curves: Vec<CurveEntry<'a>>,
    chains: Vec<ChainEntry>,
}

/// Everything needed to write the outputs of one fit.
pub struct FitOutputs<'a> {
    pub command: &'a str,
    pub input: &'a InputEcho,
    pub config: &'a MrctConfig,
    pub result: &'a MrctResult,
    pub ids: Option<&'a [String]>,
    pub selection: Option<&'a AlphaSelectionTrace>,
}

fn io_error(path: &Path, source: std::io::Error) -> MrctError {
    MrctError::Io { path: path.to_path_buf(), source }
}

/// Writes `contents` to `dir/name`.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

pub fn report_json(out: &FitOutputs) -> String {
    let r = out.result;
    let report = Report {
        command: out.command,
        input: out.input,
        config: ConfigEcho::from(out.config),
        alpha: Sig17(r.alpha),
        alpha_selection: out.selection.map(|s| AlphaSelectionEcho {
            chosen_alpha: Sig17(s.chosen_alpha),
            converged: s.converged,
            history: s.history.clone(),
        }),
        k: Sig17(r.k),
        h: r.h(),
        subset: r.subset.indices(),
        cutoff: Sig17(r.cutoff),
        converged: r.converged,
        k_converged: r.k_converged,
        n_starts_converged: r.n_starts_converged,
        trace_objective: Sig17(r.trace_objective),
        selection_objective: Sig17(r.selection_objective),
        n_flagged: r.n_flagged(),
        curves: r
            .distances
            .iter()
            .zip(&r.flags)
            .enumerate()
            .map(|(index, (d, f))| CurveEntry {
                index,
                id: out.ids.map(|ids| ids[index].as_str()),
                distance: Sig17(*d),
                flagged: *f,
            })
            .collect(),
        chains: r
            .chains
            .iter()
            .map(|c| ChainEntry {
                start: c.start,
                outcome: c.outcome,
                iterations: c.iterations,
                score: c.score.map(Sig17),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// `index,distance,flag`.
pub fn distances_csv(r: &MrctResult) -> String {
    let mut s = String::from("index,distance,flag\n");
    for (i, (d, f)) in r.distances.iter().zip(&r.flags).enumerate() {
        writeln!(s, "{i},{},{}", csv_cell(*d), *f as u8).unwrap();
    }
    s
}

/// `i,robust_eigval,standardized_eigval` at the fitted `alpha`.
pub fn scree_csv(r: &MrctResult) -> String {
    let robust = r.robust_eigvals();
    let st = standardized_eigvals(&robust, r.alpha);
    let mut s = String::from("i,robust_eigval,standardized_eigval\n");
    for (i, (x, y)) in robust.iter().zip(&st).enumerate() {
        writeln!(s, "{i},{},{}", csv_cell(*x), csv_cell(*y)).unwrap();
    }
    s
}

/// `alpha,g,m` over the selection grid.
pub fn alpha_objective_csv(t: &AlphaSelectionTrace) -> String {
    let mut s = String::from("alpha,g,m\n");
    for ((a, g), m) in t.grid.iter().zip(&t.g_values).zip(&t.m_alpha) {
        writeln!(s, "{},{},{m}", csv_cell(*a), csv_cell(*g)).unwrap();
    }
    s
}

/// `h,objective,cov_shift,k,n_flagged`; `cov_shift` is empty on the first row.
pub fn h_scan_csv(t: &HScanTrace) -> String {
    let mut s = String::from("h,objective,cov_shift,k,n_flagged\n");
    for (i, h) in t.h_values.iter().enumerate() {
        let shift = i.checked_sub(1).map(|j| csv_cell(t.cov_shift[j])).unwrap_or_default();
        writeln!(
            s,
            "{h},{},{shift},{},{}",
            csv_cell(t.objective[i]),
            csv_cell(t.k[i]),
            t.n_flagged[i]
        )
        .unwrap();
    }
    s
}

/// Writes `report.json`, `distances.csv`, `scree.csv` and, when selection
/// ran, `alpha_objective.csv`.
pub fn emit_report(out: &FitOutputs, dir: &Path) -> Result<()> {
    write_file(dir, "report.json", &report_json(out))?;
    write_file(dir, "distances.csv", &distances_csv(out.result))?;
    write_file(dir, "scree.csv", &scree_csv(out.result))?;
    if let Some(t) = out.selection {
        write_file(dir, "alpha_objective.csv", &alpha_objective_csv(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let t = Sig17(v).text().unwrap();
            assert_eq!(t.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(Sig17(f64::NAN).text(), None);
        assert_eq!(serde_json::to_string(&Sig17(0.5)).unwrap(), "5.0000000000000000e-1");
        assert_eq!(serde_json::to_string(&Sig17(f64::INFINITY)).unwrap(), "null");
    }

    #[test]
    fn h_scan_rows() {
        let t = HScanTrace {
            h_values: vec![5, 6],
            objective: vec![1.0, 2.0],
            cov_shift: vec![0.5],
            k: vec![1.0, 1.0],
            n_flagged: vec![0, 1],
        };
        let csv = h_scan_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "5,1.0000000000000000e0,,1.0000000000000000e0,0");
        assert!(lines[2].starts_with("6,2.0000000000000000e0,5.0000000000000000e-1,"));
    }
}
