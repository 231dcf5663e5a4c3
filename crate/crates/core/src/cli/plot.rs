//! Emits standalone matplotlib scripts that redraw the evaluation figures
//! from a sweep CSV.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::SweepVariable;
use super::sweep::{RowTier, RunManifest};
use crate::error::{Error, Result};
use crate::params::AssociationPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Coverage vs n̄_as, Policy 1, one line per σ_s.
    Fig2,
    /// Coverage vs n̄_as, Policy 2.
    Fig3,
    /// Throughput vs n̄_as, Policy 1.
    Fig4,
    /// Throughput vs n̄_as, Policy 2.
    Fig5,
    /// Per-tier coverage vs σ_s, Policy 1.
    Fig6,
    /// Association probability vs σ_s, Policy 1.
    Fig7,
    /// Policy 2 coverage vs D, one line per n̄_as, maxima marked.
    Fig8,
    /// Policy 2 coverage vs D, one line per σ_s, maxima marked.
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 8] =
        [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6, Figure::Fig7, Figure::Fig8, Figure::Fig9];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }

    fn layout(self) -> Layout {
        use AssociationPolicy::{MaxPower as P1, Threshold as P2};
        use SweepVariable::{NbarAs, SigmaS, D};
        let total: &[RowTier] = &[RowTier::Total];
        let (x, policy, column, tiers, series, mark_max) = match self {
            Figure::Fig2 => (NbarAs, P1, "coverage", total, None, false),
            Figure::Fig3 => (NbarAs, P2, "coverage", total, None, false),
            Figure::Fig4 => (NbarAs, P1, "throughput", total, None, false),
            Figure::Fig5 => (NbarAs, P2, "throughput", total, None, false),
            Figure::Fig6 => (SigmaS, P1, "coverage", &RowTier::ALL[..], None, false),
            Figure::Fig7 => (SigmaS, P1, "assoc_prob", &RowTier::ALL[..2], None, false),
            Figure::Fig8 => (D, P2, "coverage", total, Some(NbarAs), true),
            Figure::Fig9 => (D, P2, "coverage", total, Some(SigmaS), true),
        };
        Layout { x, policy, column, tiers, series, mark_max }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("figure", format!("expected one of fig2..fig9, got `{s}`")))
    }
}

struct Layout {
    x: SweepVariable,
    policy: AssociationPolicy,
    column: &'static str,
    tiers: &'static [RowTier],
    /// Series variable the figure cannot do without.
    series: Option<SweepVariable>,
    mark_max: bool,
}

fn axis_label(v: SweepVariable) -> &'static str {
    match v {
        SweepVariable::NbarAs => "average number of simultaneously active SBSs per cluster",
        SweepVariable::SigmaS => "SBS scattering standard deviation sigma_s (km)",
        SweepVariable::D => "distance threshold D (km)",
        SweepVariable::BetaDb => "SIR threshold (dB)",
        SweepVariable::NS0 => "SBSs per cluster",
    }
}

fn y_label(column: &str) -> &'static str {
    match column {
        "throughput" => "throughput (bit/s/Hz/km^2)",
        "assoc_prob" => "association probability",
        _ => "coverage probability",
    }
}

/// Script text for `figure`, reading the CSV at `csv_path`. Fails without
/// producing anything when the manifest lacks the sweep the figure needs.
pub fn emit_plot_script(manifest: &RunManifest, figure: Figure, csv_path: &str) -> Result<String> {
    let l = figure.layout();
    let requirement = || {
        let series = l.series.map(|s| format!(", series_var = {s}")).unwrap_or_default();
        format!(
            "{figure} needs a sweep with sweep_var = {}{series}, policy {}; required columns: value, policy, tier, engine, {}, ci_half_width, series_var, series_value, status",
            l.x, l.policy, l.column
        )
    };
    if manifest.rows.is_empty() {
        return Err(Error::Config(format!("manifest holds no results; {}", requirement())));
    }
    let usable = manifest.rows.iter().any(|r| {
        r.sweep_var == l.x && r.policy == l.policy && r.is_ok() && l.series.is_none_or(|s| r.series_var == Some(s))
    });
    if !usable {
        return Err(Error::Config(format!("missing sweep: {}", requirement())));
    }
    let series_var = manifest.rows[0].series_var.map(|v| v.name()).unwrap_or("");
    let tiers: Vec<String> = l.tiers.iter().map(|t| format!("{:?}", t.name())).collect();
    Ok(format!(
        r#"#!/usr/bin/env python3
"""{id}: {y} vs {x} ({policy}). Generated from a sweep manifest."""
import csv
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV = {csv:?}
HERE = os.path.dirname(os.path.abspath(__file__))
path = CSV if os.path.isabs(CSV) else os.path.join(HERE, CSV)

lines = defaultdict(list)
with open(path, newline="", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        if row["status"] != "ok" or row["sweep_var"] != {xname:?} or row["policy"] != {policy:?}:
            continue
        if row["tier"] not in ({tiers},):
            continue
        key = (row["series_value"], row["tier"], row["engine"])
        hw = float(row["ci_half_width"]) if row["ci_half_width"] else 0.0
        lines[key].append((float(row["value"]), float(row[{column:?}]), hw))

fig, ax = plt.subplots(figsize=(6.4, 4.8))
colors = {{}}
for (series, tier, engine), pts in sorted(lines.items()):
    pts.sort()
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    label = tier if not series else "{series_var} = %g, %s" % (float(series), tier)
    color = colors.setdefault((series, tier), "C%d" % len(colors))
    if engine == "analytic":
        ax.plot(xs, ys, "-", color=color, label=label + " (analysis)")
        if {mark_max}:
            i = max(range(len(ys)), key=lambda k: ys[k])
            ax.plot([xs[i]], [ys[i]], "*", color=color, markersize=12)
    else:
        ax.errorbar(xs, ys, yerr=[p[2] for p in pts], fmt="o", color=color, mfc="none", label=label + " (simulation)")
ax.set_xlabel({xlabel:?})
ax.set_ylabel({ylabel:?})
ax.grid(True, alpha=0.3)
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "{id}.pdf"))
fig.savefig(os.path.join(HERE, "{id}.png"), dpi=150)
"#,
        id = figure.id(),
        y = l.column,
        x = l.x,
        policy = l.policy.to_string(),
        csv = csv_path,
        xname = l.x.name(),
        tiers = tiers.join(", "),
        column = l.column,
        series_var = series_var,
        mark_max = if l.mark_max { "True" } else { "False" },
        xlabel = axis_label(l.x),
        ylabel = y_label(l.column),
    ))
}

/// Writes `<out_dir>/<figure>.py`. The CSV is located relative to the
/// manifest's directory.
pub fn write_plot_script(
    manifest: &RunManifest,
    manifest_dir: &Path,
    figure: Figure,
    out_dir: &Path,
) -> Result<PathBuf> {
    let csv = manifest_dir.join(&manifest.csv_file);
    let csv = std::path::absolute(&csv).unwrap_or(csv);
    let text = emit_plot_script(manifest, figure, &csv.to_string_lossy())?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.py", figure.id()));
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::Config;
    use crate::cli::sweep::run_sweep;

    #[test]
    fn figure_ids_parse() {
        for f in Figure::ALL {
            assert_eq!(f.id().parse::<Figure>().unwrap(), f);
        }
        assert!("fig1".parse::<Figure>().is_err());
    }

    #[test]
    fn empty_manifest_is_refused_and_nothing_is_written() {
        let c = Config::parse("format_version = 1\n").unwrap();
        let mut m = run_sweep(&c).unwrap().manifest;
        m.rows.clear();
        let dir = tempfile::tempdir().unwrap();
        let err = write_plot_script(&m, dir.path(), Figure::Fig2, dir.path()).unwrap_err();
        assert!(err.to_string().contains("required columns"), "{err}");
        assert!(!dir.path().join("fig2.py").exists());
    }

    #[test]
    fn missing_sweep_lists_requirements() {
        let c = Config::parse("format_version = 1\n").unwrap();
        let m = run_sweep(&c).unwrap().manifest;
        let err = emit_plot_script(&m, Figure::Fig8, "x.csv").unwrap_err().to_string();
        assert!(err.contains("D_km") && err.contains("nbar_as"), "{err}");
        let script = emit_plot_script(&m, Figure::Fig2, "x.csv").unwrap();
        assert!(script.contains("\"coverage\"") && script.contains("\"P1\""));
    }
}
