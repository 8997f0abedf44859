//! Figures. Every plot is drawn from CSV files already written to a run
//! directory, so plotting can never change numeric outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use psynet::io::{read_csv, read_matrix_csv, CsvTable};
use psynet::seed::derive_seed;
use psynet::stats::quantile_type6;

use crate::svg::{extent, Panel, Svg, DARK, GRAY, GREEN, PALETTE, RED};

fn save(dst: &Path, name: &str, svg: Svg) -> Result<PathBuf> {
    let path = dst.join(name);
    std::fs::write(&path, svg.finish()).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn num(t: &CsvTable, col: &str) -> Result<Vec<f64>> {
    Ok(t.numbers(col)?.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Fruchterman-Reingold layout on |weights|, started from a jittered circle.
fn layout(w: &[Vec<f64>], seed: u64) -> Vec<(f64, f64)> {
    let p = w.len();
    let unit = |i: usize, k: u64| (derive_seed(seed, &[i as u64, k]) >> 11) as f64 / (1u64 << 53) as f64;
    let mut pos: Vec<(f64, f64)> = (0..p)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / p.max(1) as f64;
            (a.cos() + 0.1 * (unit(i, 0) - 0.5), a.sin() + 0.1 * (unit(i, 1) - 0.5))
        })
        .collect();
    if p < 2 {
        return pos;
    }
    let k = (4.0 / p as f64).sqrt();
    let iters = 500;
    for it in 0..iters {
        let temp = 0.1 * (1.0 - it as f64 / iters as f64) + 1e-3;
        let mut disp = vec![(0.0, 0.0); p];
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                let mut f = k * k / d;
                f -= w[i][j].abs() * d * d / k * 4.0;
                disp[i].0 += dx / d * f;
                disp[i].1 += dy / d * f;
            }
        }
        for i in 0..p {
            // weak pull to the centre keeps disconnected nodes on the canvas
            disp[i].0 -= 0.05 * pos[i].0;
            disp[i].1 -= 0.05 * pos[i].1;
            let len = (disp[i].0 * disp[i].0 + disp[i].1 * disp[i].1).sqrt().max(1e-12);
            let step = len.min(temp);
            pos[i].0 += disp[i].0 / len * step;
            pos[i].1 += disp[i].1 / len * step;
        }
    }
    pos
}

/// `network.svg` from `weights.csv`: green positive and red negative edges,
/// width proportional to |weight|.
pub fn network(src: &Path, dst: &Path, seed: u64) -> Result<PathBuf> {
    let (labels, m) = read_matrix_csv(&src.join("weights.csv"))?;
    let p = labels.len();
    let w: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| m[(i, j)]).collect()).collect();
    let pos = layout(&w, seed);
    let size = 600.0;
    let xr = extent(pos.iter().map(|q| q.0));
    let yr = extent(pos.iter().map(|q| q.1));
    let panel = Panel {
        left: 40.0,
        top: 40.0,
        width: size - 80.0,
        height: size - 80.0,
        x_range: xr,
        y_range: yr,
    };
    let max_w = w.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
    let mut svg = Svg::new(size, size);
    for i in 0..p {
        for j in (i + 1)..p {
            let v = w[i][j];
            if v == 0.0 {
                continue;
            }
            let colour = if v > 0.0 { GREEN } else { RED };
            let (a, b) = (pos[i], pos[j]);
            svg.line(panel.x(a.0), panel.y(a.1), panel.x(b.0), panel.y(b.1), colour, 0.5 + 7.5 * v.abs() / max_w);
        }
    }
    for (i, l) in labels.iter().enumerate() {
        let (x, y) = (panel.x(pos[i].0), panel.y(pos[i].1));
        svg.circle(x, y, 16.0, "white", DARK);
        svg.text(x, y + 4.0, l, 11.0, "middle");
    }
    save(dst, "network.svg", svg)
}

/// `centrality.svg` from `centrality.csv`: z-scores per index, nodes on the y axis.
pub fn centrality(src: &Path, dst: &Path) -> Result<PathBuf> {
    let t = read_csv(&src.join("centrality.csv"))?;
    let nodes: Vec<String> = t.strings("node")?.into_iter().map(str::to_owned).collect();
    let cols = ["z_strength", "z_closeness", "z_betweenness"];
    let titles = ["Strength", "Closeness", "Betweenness"];
    let values: Vec<Vec<f64>> = cols.iter().map(|c| num(&t, c)).collect::<Result<_>>()?;
    let xr = extent(values.iter().flatten().copied());
    let row_h = 18.0;
    let (pw, top) = (200.0, 40.0);
    let height = top + row_h * nodes.len().max(1) as f64 + 50.0;
    let mut svg = Svg::new(100.0 + 3.0 * (pw + 30.0), height);
    for (k, v) in values.iter().enumerate() {
        let panel = Panel {
            left: 100.0 + k as f64 * (pw + 30.0),
            top,
            width: pw,
            height: row_h * nodes.len().max(1) as f64,
            x_range: xr,
            y_range: (nodes.len() as f64 - 0.5, -0.5),
        };
        panel.frame(&mut svg);
        panel.x_ticks(&mut svg, 4);
        svg.text(panel.left + pw / 2.0, top - 10.0, titles[k], 12.0, "middle");
        let pts: Vec<(f64, f64)> = v.iter().enumerate().map(|(i, &z)| (panel.x(z), panel.y(i as f64))).collect();
        svg.polyline(&pts, DARK, 1.0);
        for &(x, y) in &pts {
            svg.circle(x, y, 3.0, DARK, DARK);
        }
        if k == 0 {
            for (i, n) in nodes.iter().enumerate() {
                svg.text(panel.left - 8.0, panel.y(i as f64) + 4.0, n, 10.0, "end");
            }
        }
    }
    save(dst, "centrality.svg", svg)
}

/// `edge_ci.svg` from `edge_ci.csv`: edges ordered by sample weight, gray
/// band for the interval, red sample values, black bootstrap means.
pub fn edge_ci(src: &Path, dst: &Path) -> Result<PathBuf> {
    let t = read_csv(&src.join("edge_ci.csv"))?;
    let edges = t.strings("edge")?;
    let sample = num(&t, "sample")?;
    let boot_mean = num(&t, "mean")?;
    let lower = num(&t, "lower")?;
    let upper = num(&t, "upper")?;
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| sample[a].total_cmp(&sample[b]).then(a.cmp(&b)));
    let k = order.len().max(1);
    let row_h = (500.0 / k as f64).clamp(3.0, 16.0);
    let top = 30.0;
    let panel = Panel {
        left: 140.0,
        top,
        width: 420.0,
        height: row_h * k as f64,
        x_range: extent(lower.iter().chain(&upper).chain(&sample).copied()),
        // largest weight at the top
        y_range: (-0.5, k as f64 - 0.5),
    };
    let mut svg = Svg::new(600.0, top + panel.height + 50.0);
    let band: Vec<(f64, f64)> = order
        .iter()
        .enumerate()
        .map(|(r, &e)| (panel.x(lower[e]), panel.y(r as f64)))
        .chain(order.iter().enumerate().rev().map(|(r, &e)| (panel.x(upper[e]), panel.y(r as f64))))
        .collect();
    svg.polygon(&band, GRAY, 0.8);
    if panel.x_range.0 < 0.0 && panel.x_range.1 > 0.0 {
        panel.vline(&mut svg, 0.0, GRAY);
    }
    let line = |v: &[f64]| -> Vec<(f64, f64)> {
        order
            .iter()
            .enumerate()
            .map(|(r, &e)| (panel.x(v[e]), panel.y(r as f64)))
            .collect()
    };
    svg.polyline(&line(&boot_mean), DARK, 1.0);
    svg.polyline(&line(&sample), RED, 1.5);
    panel.frame(&mut svg);
    panel.x_ticks(&mut svg, 6);
    if k <= 60 {
        for (r, &e) in order.iter().enumerate() {
            svg.text(panel.left - 6.0, panel.y(r as f64) + 3.0, edges[e], (row_h * 0.7).min(10.0), "end");
        }
    }
    svg.text(panel.left + panel.width / 2.0, top - 10.0, "edge weight: sample (red), bootstrap mean (black), CI (gray)", 11.0, "middle");
    save(dst, "edge_ci.svg", svg)
}

/// `diff_<stat>.svg` from `diff_<stat>.csv`: black cells differ significantly,
/// gray cells do not.
pub fn difference(src: &Path, dst: &Path, stat: &str) -> Result<PathBuf> {
    let t = read_csv(&src.join(format!("diff_{stat}.csv")))?;
    let a = t.strings("element_a")?;
    let b = t.strings("element_b")?;
    let sig = t.strings("significant")?;
    let mut elements: Vec<&str> = Vec::new();
    for e in &a {
        if !elements.contains(e) {
            elements.push(e);
        }
    }
    let k = elements.len().max(1);
    let cell = (600.0 / k as f64).clamp(4.0, 24.0);
    let margin = 110.0;
    let mut svg = Svg::new(margin + cell * k as f64 + 20.0, margin + cell * k as f64 + 20.0);
    let idx: BTreeMap<&str, usize> = elements.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    for r in 0..a.len() {
        let (i, j) = (idx[a[r]], idx[b[r]]);
        let fill = match sig[r] {
            "1" => DARK,
            "0" => GRAY,
            _ => "white",
        };
        svg.rect(margin + j as f64 * cell, margin + i as f64 * cell, cell, cell, fill, Some("white"));
    }
    if k <= 60 {
        let size = (cell * 0.6).min(10.0);
        for (i, e) in elements.iter().enumerate() {
            svg.text(margin - 4.0, margin + (i as f64 + 0.7) * cell, e, size, "end");
            svg.text_rotated(margin + (i as f64 + 0.5) * cell, margin - 30.0, e, size);
        }
    }
    svg.text(10.0, 16.0, &format!("{stat}: black = significant difference"), 11.0, "start");
    save(dst, &format!("diff_{stat}.svg"), svg)
}

/// `stability.svg` from `subset.csv`: mean correlation with the full-data
/// values and its 2.5-97.5% band per index, against the proportion kept.
pub fn stability(src: &Path, dst: &Path) -> Result<PathBuf> {
    let t = read_csv(&src.join("subset.csv"))?;
    let drop = num(&t, "drop")?;
    let mut levels: Vec<f64> = drop.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let xr = (levels.last().map_or(0.0, |l| 1.0 - l) - 0.05, 1.02);
    let panel = Panel {
        left: 60.0,
        top: 30.0,
        width: 460.0,
        height: 300.0,
        x_range: (xr.1, xr.0),
        y_range: (-1.0, 1.0),
    };
    let mut svg = Svg::new(640.0, 390.0);
    panel.hline(&mut svg, 0.0, GRAY, false);
    panel.hline(&mut svg, 0.7, GRAY, true);
    let indices = ["strength", "closeness", "betweenness", "edge"];
    for (k, name) in indices.iter().enumerate() {
        let values = t.numbers(name)?;
        let mut mean_line = vec![(panel.x(1.0), panel.y(1.0))];
        let mut lo = vec![(panel.x(1.0), panel.y(1.0))];
        let mut hi = vec![(panel.x(1.0), panel.y(1.0))];
        for &l in &levels {
            let v: Vec<f64> = drop
                .iter()
                .zip(&values)
                .filter(|(d, _)| **d == l)
                .filter_map(|(_, v)| *v)
                .collect();
            if v.is_empty() {
                continue;
            }
            let x = panel.x(1.0 - l);
            mean_line.push((x, panel.y(mean(&v))));
            lo.push((x, panel.y(quantile_type6(&v, 0.025)?)));
            hi.push((x, panel.y(quantile_type6(&v, 0.975)?)));
        }
        let colour = PALETTE[k % PALETTE.len()];
        let band: Vec<(f64, f64)> = lo.iter().copied().chain(hi.iter().rev().copied()).collect();
        svg.polygon(&band, colour, 0.15);
        svg.polyline(&mean_line, colour, 2.0);
        for &(x, y) in &mean_line {
            svg.circle(x, y, 2.5, colour, colour);
        }
        svg.rect(535.0, 40.0 + 20.0 * k as f64, 12.0, 12.0, colour, None);
        svg.text(552.0, 50.0 + 20.0 * k as f64, name, 11.0, "start");
    }
    panel.frame(&mut svg);
    panel.x_ticks(&mut svg, 6);
    panel.y_ticks(&mut svg, 4);
    svg.text(panel.left + panel.width / 2.0, 370.0, "sampled proportion", 12.0, "middle");
    svg.text_rotated(18.0, panel.top + panel.height / 2.0, "correlation with original sample", 12.0);
    save(dst, "stability.svg", svg)
}

struct SimCells {
    /// (rewiring, metric, alpha) -> n -> values
    cells: BTreeMap<(String, String, String), BTreeMap<usize, Vec<f64>>>,
    rewirings: Vec<String>,
    sizes: Vec<usize>,
}

fn sim_cells(t: &CsvTable) -> Result<SimCells> {
    let rw = t.strings("rewiring")?;
    let n = t.strings("n")?;
    let metric = t.strings("metric")?;
    let alpha = t.strings("alpha")?;
    let value = num(t, "value")?;
    let mut cells: BTreeMap<(String, String, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    let mut rewirings: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in 0..value.len() {
        let nn: usize = n[r].parse().context("bad sample size in simulation.csv")?;
        if !rewirings.iter().any(|x| x == rw[r]) {
            rewirings.push(rw[r].to_owned());
        }
        if !sizes.contains(&nn) {
            sizes.push(nn);
        }
        cells
            .entry((rw[r].to_owned(), metric[r].to_owned(), alpha[r].to_owned()))
            .or_default()
            .entry(nn)
            .or_default()
            .push(value[r]);
    }
    sizes.sort_unstable();
    Ok(SimCells {
        cells,
        rewirings,
        sizes,
    })
}

fn sim_panel(col: usize, row: usize, x_n: usize, y_range: (f64, f64)) -> Panel {
    Panel {
        left: 70.0 + col as f64 * 230.0,
        top: 40.0 + row as f64 * 220.0,
        width: 190.0,
        height: 160.0,
        x_range: (-0.5, x_n as f64 - 0.5),
        y_range,
    }
}

/// Boxplots of CS values per sample size, one column per rewiring
/// probability and one row per index.
fn sim_cs(dst: &Path, s: &SimCells) -> Result<PathBuf> {
    let indices = ["strength", "closeness", "betweenness", "edge"];
    let size_labels: Vec<String> = s.sizes.iter().map(|n| n.to_string()).collect();
    let mut svg = Svg::new(80.0 + 230.0 * s.rewirings.len() as f64, 60.0 + 220.0 * indices.len() as f64);
    for (row, idx) in indices.iter().enumerate() {
        for (col, rw) in s.rewirings.iter().enumerate() {
            let panel = sim_panel(col, row, s.sizes.len(), (0.0, 1.0));
            panel.hline(&mut svg, 0.25, GRAY, true);
            panel.hline(&mut svg, 0.5, GRAY, true);
            if let Some(by_n) = s.cells.get(&(rw.clone(), format!("cs_{idx}"), String::new())) {
                for (k, n) in s.sizes.iter().enumerate() {
                    let Some(v) = by_n.get(n) else { continue };
                    let v: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
                    if v.is_empty() {
                        continue;
                    }
                    let q = |p| quantile_type6(&v, p).unwrap_or(f64::NAN);
                    let (x, hw) = (panel.x(k as f64), 18.0);
                    let (q1, q2, q3) = (q(0.25), q(0.5), q(0.75));
                    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    svg.line(x, panel.y(lo), x, panel.y(q1), DARK, 1.0);
                    svg.line(x, panel.y(q3), x, panel.y(hi), DARK, 1.0);
                    svg.rect(x - hw, panel.y(q3), 2.0 * hw, panel.y(q1) - panel.y(q3), "#dddddd", Some(DARK));
                    svg.line(x - hw, panel.y(q2), x + hw, panel.y(q2), DARK, 2.0);
                }
            }
            panel.frame(&mut svg);
            panel.x_categories(&mut svg, &size_labels);
            panel.y_ticks(&mut svg, 4);
            svg.text(panel.left + panel.width / 2.0, panel.top - 8.0, &format!("CS({idx}), rewiring {rw}"), 11.0, "middle");
        }
    }
    save(dst, "simulation.svg", svg)
}

/// Mean rejection rate per sample size with a band of 1.96 Monte-Carlo
/// standard errors; dashed lines mark the nominal levels.
fn sim_rates(dst: &Path, s: &SimCells, series: &[(String, String, String)], nominal: &[f64]) -> Result<PathBuf> {
    let size_labels: Vec<String> = s.sizes.iter().map(|n| n.to_string()).collect();
    let mut stats: Vec<(usize, usize, Vec<(f64, f64)>)> = Vec::new();
    let mut y_max: f64 = nominal.iter().copied().fold(0.1, f64::max);
    for (k, (metric, alpha, _)) in series.iter().enumerate() {
        for (col, rw) in s.rewirings.iter().enumerate() {
            let Some(by_n) = s.cells.get(&(rw.clone(), metric.clone(), alpha.clone())) else { continue };
            let pts: Vec<(f64, f64)> = s
                .sizes
                .iter()
                .map(|n| {
                    let v: Vec<f64> = by_n.get(n).map_or(Vec::new(), |v| v.iter().copied().filter(|x| x.is_finite()).collect());
                    if v.is_empty() {
                        return (f64::NAN, f64::NAN);
                    }
                    let m = mean(&v);
                    let sd = if v.len() > 1 {
                        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
                    } else {
                        0.0
                    };
                    (m, sd / (v.len() as f64).sqrt())
                })
                .collect();
            for &(m, se) in &pts {
                if m.is_finite() {
                    y_max = y_max.max(m + 1.96 * se);
                }
            }
            stats.push((k, col, pts));
        }
    }
    let y_range = (0.0, (y_max * 1.1).min(1.0));
    let mut svg = Svg::new(80.0 + 230.0 * s.rewirings.len() as f64 + 220.0, 300.0);
    let panels: Vec<Panel> = (0..s.rewirings.len())
        .map(|c| sim_panel(c, 0, s.sizes.len(), y_range))
        .collect();
    for (c, panel) in panels.iter().enumerate() {
        for &a in nominal {
            panel.hline(&mut svg, a, GRAY, true);
        }
        svg.text(panel.left + panel.width / 2.0, panel.top - 8.0, &format!("rewiring {}", s.rewirings[c]), 11.0, "middle");
    }
    for (k, col, pts) in &stats {
        let panel = &panels[*col];
        let colour = PALETTE[k % PALETTE.len()];
        let ok: Vec<(usize, f64, f64)> = pts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.0.is_finite())
            .map(|(i, p)| (i, p.0, p.1))
            .collect();
        let band: Vec<(f64, f64)> = ok
            .iter()
            .map(|&(i, m, se)| (panel.x(i as f64), panel.y((m - 1.96 * se).max(0.0))))
            .chain(ok.iter().rev().map(|&(i, m, se)| (panel.x(i as f64), panel.y(m + 1.96 * se))))
            .collect();
        svg.polygon(&band, colour, 0.2);
        let line: Vec<(f64, f64)> = ok.iter().map(|&(i, m, _)| (panel.x(i as f64), panel.y(m))).collect();
        svg.polyline(&line, colour, 2.0);
        for &(x, y) in &line {
            svg.circle(x, y, 2.5, colour, colour);
        }
    }
    for panel in &panels {
        panel.frame(&mut svg);
        panel.x_categories(&mut svg, &size_labels);
        panel.y_ticks(&mut svg, 4);
    }
    let legend_x = 80.0 + 230.0 * s.rewirings.len() as f64;
    for (k, (_, _, label)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        svg.rect(legend_x, 50.0 + 20.0 * k as f64, 12.0, 12.0, colour, None);
        svg.text(legend_x + 18.0, 60.0 + 20.0 * k as f64, label, 11.0, "start");
    }
    svg.text(legend_x, 40.0 + 20.0 * series.len() as f64 + 30.0, "rejection rate vs sample size", 10.0, "start");
    save(dst, "simulation.svg", svg)
}

/// `simulation.svg` from `simulation.csv`, laid out by study.
pub fn simulation(src: &Path, dst: &Path) -> Result<PathBuf> {
    let t = read_csv(&src.join("simulation.csv"))?;
    let study = t.strings("study")?.first().map(|s| s.to_string()).unwrap_or_default();
    let s = sim_cells(&t)?;
    let alphas: Vec<String> = {
        let mut a: Vec<String> = s.cells.keys().map(|k| k.2.clone()).filter(|a| !a.is_empty()).collect();
        a.sort_by(|x, y| y.parse::<f64>().unwrap_or(0.0).total_cmp(&x.parse::<f64>().unwrap_or(0.0)));
        a.dedup();
        a
    };
    let nominal: Vec<f64> = alphas.iter().filter_map(|a| a.parse().ok()).collect();
    match study.as_str() {
        "cs" => sim_cs(dst, &s),
        "edge-diff" => {
            let series: Vec<_> = alphas
                .iter()
                .map(|a| ("edge_rejection_rate".to_owned(), a.clone(), format!("alpha = {a}")))
                .collect();
            sim_rates(dst, &s, &series, &nominal)
        }
        _ => {
            let mut series = Vec::new();
            for a in &alphas {
                for idx in ["strength", "closeness", "betweenness"] {
                    series.push((format!("{idx}_rejection_rate"), a.clone(), format!("{idx}, alpha = {a}")));
                }
            }
            sim_rates(dst, &s, &series, &nominal)
        }
    }
}

/// Redraw every figure whose source CSV exists in `dir`.
pub fn all(src: &Path, dst: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dst).with_context(|| format!("creating {}", dst.display()))?;
    let dir = src;
    let mut out = Vec::new();
    if dir.join("weights.csv").exists() {
        out.push(network(src, dst, seed)?);
    }
    if dir.join("centrality.csv").exists() {
        out.push(centrality(src, dst)?);
    }
    if dir.join("edge_ci.csv").exists() {
        out.push(edge_ci(src, dst)?);
    }
    for stat in ["edge", "strength", "closeness", "betweenness"] {
        if dir.join(format!("diff_{stat}.csv")).exists() {
            out.push(difference(src, dst, stat)?);
        }
    }
    if dir.join("subset.csv").exists() {
        out.push(stability(src, dst)?);
    }
    if dir.join("simulation.csv").exists() {
        out.push(simulation(src, dst)?);
    }
    Ok(out)
}
