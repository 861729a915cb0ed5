//! Batch SVG renderer for accuracy-vs-epoch charts.
//!
//! One chart per `(attack, attack_target)` group found in a results CSV:
//! solid lines are the single model, dashed lines the snapshot ensemble, one
//! color per epsilon. This mirrors how the experiment figures are read.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{fmt_sig, CSV_HEADER};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 168.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
struct Row {
    epoch: usize,
    attack: String,
    epsilon: f32,
    predictor: String,
    target: String,
    accuracy: f32,
}

fn parse_rows(text: &str, path: &Path) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::data(format!(
                "{}: unexpected CSV header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::data(format!(
                "{}: line {} has {} fields, expected 7",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str| {
            Error::data(format!("{}: line {}: bad {what}", path.display(), lineno + 2))
        };
        rows.push(Row {
            epoch: fields[0].parse().map_err(|_| parse_err("epoch"))?,
            attack: fields[1].to_string(),
            epsilon: fields[2].parse().map_err(|_| parse_err("epsilon"))?,
            predictor: fields[3].to_string(),
            target: fields[4].to_string(),
            accuracy: fields[5].parse().map_err(|_| parse_err("accuracy"))?,
        });
    }
    Ok(rows)
}

/// Renders one SVG per `(attack, target)` group of `csv_path` into `out_dir`,
/// returning the written paths.
pub fn plot_csv(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(csv_path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", csv_path.display())))?;
    let rows = parse_rows(&text, csv_path)?;
    if rows.is_empty() {
        return Err(Error::data(format!("{}: no data rows", csv_path.display())));
    }
    fs::create_dir_all(out_dir)?;

    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".to_string());

    let mut groups: BTreeMap<(String, String), Vec<&Row>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.attack.clone(), row.target.clone()))
            .or_default()
            .push(row);
    }

    let mut written = Vec::new();
    for ((attack, target), group) in groups {
        let svg = render_group(&attack, &target, &group);
        let path = out_dir.join(format!("{stem}-{attack}-{target}.svg"));
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn render_group(attack: &str, target: &str, rows: &[&Row]) -> String {
    // Series keyed by (epsilon bits for ordering, predictor).
    let mut series: BTreeMap<(u32, String), Vec<(usize, f32)>> = BTreeMap::new();
    let mut epsilons: Vec<f32> = Vec::new();
    for row in rows {
        let key = (row.epsilon.to_bits(), row.predictor.clone());
        series.entry(key).or_default().push((row.epoch, row.accuracy));
        if !epsilons.iter().any(|&e| e == row.epsilon) {
            epsilons.push(row.epsilon);
        }
    }
    epsilons.sort_by(f32::total_cmp);

    let min_epoch = rows.iter().map(|r| r.epoch).min().unwrap_or(1);
    let max_epoch = rows.iter().map(|r| r.epoch).max().unwrap_or(1);
    let span = (max_epoch.saturating_sub(min_epoch)).max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |epoch: usize| MARGIN_LEFT + (epoch - min_epoch) as f64 / span * plot_w;
    let y = |acc: f32| MARGIN_TOP + (1.0 - acc as f64) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-size=\"15\">robust accuracy vs epoch \u{2014} {attack} ({target})</text>\n",
        MARGIN_LEFT
    ));

    // Axes and gridlines.
    for i in 0..=10 {
        let acc = i as f32 / 10.0;
        let yy = y(acc);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{yy}\" x2=\"{}\" y2=\"{yy}\" stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            yy + 4.0,
            fmt_sig(acc as f64, 2)
        ));
    }
    let epoch_ticks = ((max_epoch - min_epoch).max(1)).min(10);
    for i in 0..=epoch_ticks {
        let epoch = min_epoch + i * (max_epoch - min_epoch).max(1) / epoch_ticks;
        let xx = x(epoch);
        svg.push_str(&format!(
            "<text x=\"{xx}\" y=\"{}\" text-anchor=\"middle\">{epoch}</text>\n",
            MARGIN_TOP + plot_h + 20.0
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">epoch</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    ));

    // Series polylines.
    for ((eps_bits, predictor), mut points) in series {
        let epsilon = f32::from_bits(eps_bits);
        let color_idx = epsilons.iter().position(|&e| e == epsilon).unwrap_or(0);
        let color = PALETTE[color_idx % PALETTE.len()];
        let dash = if predictor == "ensemble" {
            " stroke-dasharray=\"7,4\""
        } else {
            ""
        };
        points.sort_by_key(|&(epoch, _)| epoch);
        let coords: Vec<String> = points
            .iter()
            .map(|&(e, a)| format!("{:.2},{:.2}", x(e), y(a)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash} points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    // Legend: one entry per (epsilon, predictor).
    let mut legend_y = MARGIN_TOP + 6.0;
    let legend_x = MARGIN_LEFT + plot_w + 14.0;
    for (i, &epsilon) in epsilons.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (dash, label) in [("", "single"), (" stroke-dasharray=\"7,4\"", "ensemble")] {
            svg.push_str(&format!(
                "<line x1=\"{legend_x}\" y1=\"{legend_y}\" x2=\"{}\" y2=\"{legend_y}\" \
                 stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                legend_x + 26.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">eps {} {label}</text>\n",
                legend_x + 32.0,
                legend_y + 4.0,
                fmt_sig(epsilon as f64, 6)
            ));
            legend_y += 17.0;
        }
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::AttackFamily;
    use crate::harness::{write_csv_file, AttackTarget, PredictorMode, RunRecord};

    fn sample_records() -> Vec<RunRecord> {
        let mut records = Vec::new();
        for epoch in 1..=3 {
            for &eps in &[0.0f32, 0.02] {
                for predictor in [PredictorMode::Single, PredictorMode::Ensemble] {
                    records.push(RunRecord {
                        epoch,
                        attack: AttackFamily::Fgsm,
                        epsilon: eps,
                        predictor,
                        attack_target: AttackTarget::EnsembleWhitebox,
                        accuracy: 0.5 + 0.1 * epoch as f32 + eps,
                        seconds: 1.0,
                    });
                }
            }
        }
        records
    }

    #[test]
    fn plot_writes_one_svg_per_attack_group() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("run.csv");
        write_csv_file(&sample_records(), &csv).unwrap();
        let out = dir.path().join("plots");
        let written = plot_csv(&csv, &out).unwrap();
        assert_eq!(written.len(), 1);
        let svg = std::fs::read_to_string(&written[0]).unwrap();
        assert!(svg.starts_with("<svg"));
        // 2 epsilons x 2 predictors = 4 polylines.
        assert_eq!(svg.matches("<polyline").count(), 4);
        // Ensemble series are dashed.
        assert_eq!(svg.matches("stroke-dasharray").count(), 2 + 2); // 2 lines + 2 legend keys
        assert!(written[0].file_name().unwrap().to_string_lossy().contains("fgsm"));
    }

    #[test]
    fn plot_rejects_malformed_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("bad.csv");
        std::fs::write(&csv, "nope\n1,2\n").unwrap();
        assert!(plot_csv(&csv, dir.path()).is_err());

        std::fs::write(&csv, format!("{CSV_HEADER}\n1,fgsm,0.01,single\n")).unwrap();
        assert!(plot_csv(&csv, dir.path()).is_err());

        std::fs::write(&csv, format!("{CSV_HEADER}\n")).unwrap();
        assert!(plot_csv(&csv, dir.path()).is_err());
    }
}
