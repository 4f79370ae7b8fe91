//! Figure emission for the analysis pipeline: SVG plots via plotters, with
//! the underlying data written as CSV sidecars.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use beamstrike_core::analysis::{kde_curve, TransitionMatrix, Upos};
use plotters::prelude::*;

use crate::RunnerError;

fn chart_error<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> RunnerError + '_ {
    move |e| RunnerError::Other(format!("figure {}: {e}", path.display()))
}

/// One WSR observation, as written to `wsr_data.csv`.
#[derive(Debug, Clone)]
pub struct WsrRow {
    pub sample_id: String,
    pub task: String,
    pub victim: String,
    pub wsr_percent: f64,
}

/// Density lines need a handful of points; smaller groups fall back to
/// unit-width bars at their observed values.
const KDE_MIN_SAMPLES: usize = 5;
const KDE_POINTS: usize = 200;

/// (a) WSR distribution per task: KDE lines, bar fallback for tiny groups.
pub fn wsr_figure(rows: &[WsrRow], out_dir: &Path) -> Result<Vec<PathBuf>, RunnerError> {
    let svg_path = out_dir.join("wsr_by_task.svg");
    let csv_path = out_dir.join("wsr_data.csv");

    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for row in rows {
        groups.entry(&row.task).or_default().push(row.wsr_percent);
    }

    {
        let root = SVGBackend::new(&svg_path, (900, 540)).into_drawing_area();
        root.fill(&WHITE).map_err(chart_error(&svg_path))?;

        let x_max = rows
            .iter()
            .map(|r| r.wsr_percent)
            .fold(1.0f64, f64::max)
            .max(1.0)
            * 1.15;
        let curves: BTreeMap<&str, Vec<(f64, f64)>> = groups
            .iter()
            .map(|(task, values)| {
                let curve = if values.len() >= KDE_MIN_SAMPLES {
                    kde_curve(values, KDE_POINTS)
                } else {
                    Vec::new()
                };
                (*task, curve)
            })
            .collect();
        let y_max = curves
            .values()
            .flatten()
            .map(|(_, d)| *d)
            .fold(0.05f64, f64::max)
            * 1.2;

        let mut chart = ChartBuilder::on(&root)
            .caption("Word substitution rate per task", ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(42)
            .y_label_area_size(56)
            .build_cartesian_2d(0.0..x_max, 0.0..y_max)
            .map_err(chart_error(&svg_path))?;
        chart
            .configure_mesh()
            .x_desc("WSR (%)")
            .y_desc("density")
            .draw()
            .map_err(chart_error(&svg_path))?;

        for (idx, (task, values)) in groups.iter().enumerate() {
            let color = Palette99::pick(idx).to_rgba();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let label = format!("{task} (mean {mean:.1}%)");
            if values.len() >= KDE_MIN_SAMPLES {
                chart
                    .draw_series(LineSeries::new(curves[*task].clone(), color.stroke_width(2)))
                    .map_err(chart_error(&svg_path))?
                    .label(label)
                    .legend(move |(x, y)| {
                        PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
                    });
            } else {
                // Too few points for a density estimate: unit-width bars.
                chart
                    .draw_series(values.iter().map(|v| {
                        Rectangle::new([(v - 0.4, 0.0), (v + 0.4, y_max * 0.4)], color.filled())
                    }))
                    .map_err(chart_error(&svg_path))?
                    .label(label)
                    .legend(move |(x, y)| {
                        Rectangle::new([(x, y - 4), (x + 12, y + 4)], color.filled())
                    });
            }
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()
            .map_err(chart_error(&svg_path))?;
        root.present().map_err(chart_error(&svg_path))?;
    }

    let mut writer =
        csv::Writer::from_path(&csv_path).map_err(|e| RunnerError::Other(e.to_string()))?;
    writer
        .write_record(["sample_id", "task", "victim", "wsr_percent"])
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.sample_id.clone(),
                row.task.clone(),
                row.victim.clone(),
                format!("{:.4}", row.wsr_percent),
            ])
            .map_err(|e| RunnerError::Other(e.to_string()))?;
    }
    writer.flush()?;

    Ok(vec![svg_path, csv_path])
}

/// (b) Histogram of POS tag changes among single-substitution,
/// length-preserving samples.
pub fn pos_change_figure(
    counts: &BTreeMap<usize, u64>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunnerError> {
    let svg_path = out_dir.join("pos_change_histogram.svg");
    let csv_path = out_dir.join("pos_change_counts.csv");

    {
        let root = SVGBackend::new(&svg_path, (720, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(chart_error(&svg_path))?;
        let x_max = counts.keys().max().copied().unwrap_or(1) as f64 + 1.0;
        let y_max = counts.values().max().copied().unwrap_or(1) as f64 * 1.2;
        let mut chart = ChartBuilder::on(&root)
            .caption("POS tag changes per single-substitution sample", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(42)
            .y_label_area_size(56)
            .build_cartesian_2d(-0.5..x_max, 0.0..y_max)
            .map_err(chart_error(&svg_path))?;
        chart
            .configure_mesh()
            .x_desc("changed POS tags")
            .y_desc("samples")
            .draw()
            .map_err(chart_error(&svg_path))?;
        let color = Palette99::pick(0).to_rgba();
        chart
            .draw_series(counts.iter().map(|(&changes, &count)| {
                Rectangle::new(
                    [(changes as f64 - 0.4, 0.0), (changes as f64 + 0.4, count as f64)],
                    color.filled(),
                )
            }))
            .map_err(chart_error(&svg_path))?;
        root.present().map_err(chart_error(&svg_path))?;
    }

    let mut writer =
        csv::Writer::from_path(&csv_path).map_err(|e| RunnerError::Other(e.to_string()))?;
    writer
        .write_record(["changes", "count"])
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    for (changes, count) in counts {
        writer
            .write_record([changes.to_string(), count.to_string()])
            .map_err(|e| RunnerError::Other(e.to_string()))?;
    }
    writer.flush()?;

    Ok(vec![svg_path, csv_path])
}

/// (c) The POS transition matrix as a heatmap, with raw and row-normalized
/// counts in the CSV.
pub fn transition_figure(
    matrix: &TransitionMatrix,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunnerError> {
    let svg_path = out_dir.join("pos_transition_matrix.svg");
    let csv_path = out_dir.join("pos_transition_matrix.csv");

    {
        let root = SVGBackend::new(&svg_path, (760, 720)).into_drawing_area();
        root.fill(&WHITE).map_err(chart_error(&svg_path))?;
        let n = Upos::ALL.len() as i32;
        let max_count = Upos::ALL
            .iter()
            .flat_map(|&from| Upos::ALL.iter().map(move |&to| matrix.count(from, to)))
            .max()
            .unwrap_or(0)
            .max(1) as f64;

        let mut chart = ChartBuilder::on(&root)
            .caption("POS transitions (original -> adversarial)", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(64)
            .y_label_area_size(72)
            .build_cartesian_2d(0..n, 0..n)
            .map_err(chart_error(&svg_path))?;
        chart
            .configure_mesh()
            .disable_mesh()
            .x_labels(Upos::ALL.len())
            .y_labels(Upos::ALL.len())
            .x_label_formatter(&|v| upos_label(*v))
            .y_label_formatter(&|v| upos_label(*v))
            .x_desc("to")
            .y_desc("from")
            .draw()
            .map_err(chart_error(&svg_path))?;

        chart
            .draw_series(Upos::ALL.iter().enumerate().flat_map(|(fi, &from)| {
                Upos::ALL.iter().enumerate().map(move |(ti, &to)| {
                    let count = matrix.count(from, to);
                    let intensity = (count as f64 / max_count).clamp(0.0, 1.0);
                    let shade = (255.0 - intensity * 205.0) as u8;
                    let color = RGBColor(shade, shade, 255);
                    Rectangle::new(
                        [(ti as i32, fi as i32), (ti as i32 + 1, fi as i32 + 1)],
                        color.filled(),
                    )
                })
            }))
            .map_err(chart_error(&svg_path))?;
        root.present().map_err(chart_error(&svg_path))?;
    }

    let mut writer =
        csv::Writer::from_path(&csv_path).map_err(|e| RunnerError::Other(e.to_string()))?;
    writer
        .write_record(["from", "to", "count", "row_normalized"])
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    for (from, to, count) in matrix.nonzero_cells() {
        writer
            .write_record([
                from.as_str().to_string(),
                to.as_str().to_string(),
                count.to_string(),
                format!("{:.4}", matrix.row_normalized(from, to)),
            ])
            .map_err(|e| RunnerError::Other(e.to_string()))?;
    }
    writer.flush()?;

    Ok(vec![svg_path, csv_path])
}

fn upos_label(index: i32) -> String {
    Upos::ALL
        .get(index as usize)
        .map(|u| u.as_str().to_string())
        .unwrap_or_default()
}

/// (d) Histogram of real edits per successful sample, grouped by victim.
pub fn victim_edit_figure(
    groups: &BTreeMap<String, BTreeMap<usize, u64>>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunnerError> {
    let svg_path = out_dir.join("word_changes_by_victim.svg");
    let csv_path = out_dir.join("word_changes_by_victim.csv");

    {
        let root = SVGBackend::new(&svg_path, (900, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(chart_error(&svg_path))?;
        let x_max = groups
            .values()
            .flat_map(|counts| counts.keys().copied())
            .max()
            .unwrap_or(1) as f64
            + 1.0;
        let y_max = groups
            .values()
            .flat_map(|counts| counts.values().copied())
            .max()
            .unwrap_or(1) as f64
            * 1.2;
        let mut chart = ChartBuilder::on(&root)
            .caption("Word changes per sample by victim", ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(42)
            .y_label_area_size(56)
            .build_cartesian_2d(0.0..x_max, 0.0..y_max)
            .map_err(chart_error(&svg_path))?;
        chart
            .configure_mesh()
            .x_desc("edited words")
            .y_desc("samples")
            .draw()
            .map_err(chart_error(&svg_path))?;

        let slot = 0.8 / groups.len().max(1) as f64;
        for (idx, (victim, counts)) in groups.iter().enumerate() {
            let color = Palette99::pick(idx).to_rgba();
            let offset = -0.4 + idx as f64 * slot;
            chart
                .draw_series(counts.iter().map(|(&edits, &count)| {
                    let x0 = edits as f64 + offset;
                    Rectangle::new([(x0, 0.0), (x0 + slot, count as f64)], color.filled())
                }))
                .map_err(chart_error(&svg_path))?
                .label(victim.clone())
                .legend(move |(x, y)| {
                    Rectangle::new([(x, y - 4), (x + 12, y + 4)], color.filled())
                });
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()
            .map_err(chart_error(&svg_path))?;
        root.present().map_err(chart_error(&svg_path))?;
    }

    let mut writer =
        csv::Writer::from_path(&csv_path).map_err(|e| RunnerError::Other(e.to_string()))?;
    writer
        .write_record(["victim", "edits", "count"])
        .map_err(|e| RunnerError::Other(e.to_string()))?;
    for (victim, counts) in groups {
        for (edits, count) in counts {
            writer
                .write_record([victim.clone(), edits.to_string(), count.to_string()])
                .map_err(|e| RunnerError::Other(e.to_string()))?;
        }
    }
    writer.flush()?;

    Ok(vec![svg_path, csv_path])
}
