//! Human-readable tables and plotting CSVs for reports.

use std::fmt::Write as _;

use ndlayer_core::eval::{AsymmetricPair, CoeffRatioMatrix, EvalReport, FoldResult, GradcheckReport};
use ndlayer_core::net::Arch;

use crate::run::RunMeta;

/// Columns shared by every plotting CSV.
pub const CURVE_HEADER: &str = "value,fold,arch,depth";

/// Per-epoch training curves that are exported.
pub const HISTORY_METRICS: [&str; 3] = ["train_loss", "val_loss", "val_accuracy"];

pub fn crossval_text(meta: &RunMeta, report: &EvalReport) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(s, "\n{} depth {} ({} bands)", report.arch, report.depth, report.n_bands);
    let _ = writeln!(
        s,
        "{:>4}  {:>8}  {:>8}  {:>10}  {:>7}  {:>8}",
        "fold", "test %", "val %", "best epoch", "stopped", "deg pp"
    );
    for f in &report.folds {
        let _ = writeln!(
            s,
            "{:>4}  {:>8.2}  {:>8.2}  {:>10}  {:>7}  {:>8.2}",
            f.fold, f.test_accuracy_pct, f.best_val_accuracy_pct, f.best_epoch, f.stopped_epoch, f.degradation_pct
        );
    }
    let _ = writeln!(s, "\naccuracy    {:.2} ± {:.2} %", report.mean_accuracy_pct, report.std_accuracy_pct);
    let _ = writeln!(s, "parameters  {}", report.param_count);
    let _ = writeln!(s, "efficiency  {:.2} %/100 params", report.efficiency);
    let _ = writeln!(s, "degradation {:.2} pp", report.mean_degradation_pct);
    let _ = writeln!(s, "\n{:>6}  {:>10}", "eta", "accuracy %");
    for p in &report.noise {
        let _ = writeln!(s, "{:>6.2}  {:>10.2}", p.eta, p.accuracy_pct);
    }
    s
}

/// One line per report, for the run summary.
pub fn summary_text(meta: &RunMeta, reports: &[EvalReport]) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(
        s,
        "\n{:<6}  {:>5}  {:>6}  {:>15}  {:>10}  {:>8}",
        "arch", "depth", "params", "accuracy %", "efficiency", "deg pp"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<6}  {:>5}  {:>6}  {:>7.2} ± {:>5.2}  {:>10.2}  {:>8.2}",
            r.arch.to_string(),
            r.depth,
            r.param_count,
            r.mean_accuracy_pct,
            r.std_accuracy_pct,
            r.efficiency,
            r.mean_degradation_pct
        );
    }
    s
}

/// Long-format CSV of one history metric across folds.
pub fn history_csv(meta: &RunMeta, arch: Arch, depth: usize, folds: &[&FoldResult], metric: &str) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(s, "# metric={metric}");
    let _ = writeln!(s, "epoch,{CURVE_HEADER}");
    for f in folds {
        for e in &f.history.epochs {
            let value = match metric {
                "train_loss" => e.train_loss,
                "val_loss" => e.val_loss,
                _ => e.val_accuracy,
            };
            let _ = writeln!(s, "{},{},{},{},{}", e.epoch, value, f.fold, arch, depth);
        }
    }
    s
}

/// One row of a noise sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    /// Accuracy in percent.
    pub value: f64,
    pub fold: usize,
    pub arch: Arch,
    pub depth: usize,
}

pub fn sweep_csv(meta: &RunMeta, rows: &[SweepRow]) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(s, "# metric=accuracy_pct");
    let _ = writeln!(s, "eta,{CURVE_HEADER}");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.eta, r.value, r.fold, r.arch, r.depth);
    }
    s
}

pub fn gradcheck_text(meta: &RunMeta, reports: &[GradcheckReport]) -> String {
    let mut s = meta.header_lines("#");
    for r in reports {
        let _ = writeln!(
            s,
            "\n{}  trials={} tol={:e} step={:e} stencil={:?}  {}",
            r.target,
            r.trials,
            r.tolerance,
            r.step,
            r.stencil,
            if r.passed { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(s, "{:<10}  {:>12}  {:>8}  {:>8}", "family", "max rel err", "checked", "skipped");
        for f in &r.families {
            let _ = writeln!(
                s,
                "{:<10}  {:>12.3e}  {:>8}  {:>8}",
                f.family.as_str(),
                f.max_rel_error,
                f.checked,
                f.skipped
            );
        }
    }
    s
}

/// Square ratio matrix with band names on both axes.
pub fn ratio_matrix_csv(meta: &RunMeta, m: &CoeffRatioMatrix) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(s, "band,{}", m.band_names().join(","));
    for (i, name) in m.band_names().iter().enumerate() {
        let row: Vec<String> = (0..m.n_bands()).map(|j| m.get(i, j).to_string()).collect();
        let _ = writeln!(s, "{name},{}", row.join(","));
    }
    s
}

pub fn top_pairs_csv(meta: &RunMeta, m: &CoeffRatioMatrix, pairs: &[AsymmetricPair]) -> String {
    let mut s = meta.header_lines("#");
    let _ = writeln!(s, "rank,band_i,band_j,pair,ratio,asymmetry");
    for (rank, p) in pairs.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            rank + 1,
            m.band_names()[p.i],
            m.band_names()[p.j],
            p.pair,
            p.ratio,
            p.asymmetry
        );
    }
    s
}

pub fn top_pairs_text(m: &CoeffRatioMatrix, pairs: &[AsymmetricPair]) -> String {
    let mut s = format!("{:>4}  {:<13}  {:>9}  {:>9}\n", "rank", "pair", "ratio", "asymmetry");
    for (rank, p) in pairs.iter().enumerate() {
        let label = format!("{}/{}", m.band_names()[p.i], m.band_names()[p.j]);
        let _ = writeln!(s, "{:>4}  {:<13}  {:>9.4}  {:>9.4}", rank + 1, label, p.ratio, p.asymmetry);
    }
    s
}
