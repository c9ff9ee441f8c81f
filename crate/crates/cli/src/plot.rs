//! SVG figures from files written by the other subcommands. Nothing here
//! recomputes; every number comes from the input file.

use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{CliError, CliResult};
use crate::io::{self, Header, Table};

const SIZE: (u32, u32) = (900, 600);

type Series = (String, Vec<(f64, f64)>);

fn draw_err<E: std::fmt::Debug>(e: E) -> CliError {
    CliError::Failed(format!("drawing: {e:?}"))
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, pts) in series {
        for &(a, b) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = (x.0.min(a), x.1.max(a));
            y = (y.0.min(b), y.1.max(b));
        }
    }
    let pad = |(lo, hi): (f64, f64)| {
        if !(lo.is_finite() && hi.is_finite()) {
            (0.0, 1.0)
        } else if hi - lo < 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            let d = 0.03 * (hi - lo);
            (lo - d, hi + d)
        }
    };
    (pad(x), pad(y))
}

fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> CliResult<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let ((x0, x1), (y0, y1)) = bounds(series);
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(draw_err)?;
        chart.configure_mesh().x_desc(xlabel).y_desc(ylabel).draw().map_err(draw_err)?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(draw_err)?
                .label(name.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
        }
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(draw_err)?;
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

fn heatmap(title: &str, xs: &[f64], ys: &[f64], value: &BTreeMap<(usize, usize), f64>) -> CliResult<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let (y0, y1) = (ys[0], ys[ys.len() - 1]);
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(draw_err)?;
        chart.configure_mesh().x_desc("lambda").y_desc("r").disable_mesh().draw().map_err(draw_err)?;
        let vmax = value.values().fold(0.0f64, |m, &v| m.max(v)).max(f64::MIN_POSITIVE);
        let edge = |v: &[f64], i: usize| -> (f64, f64) {
            let lo = if i == 0 { v[0] } else { 0.5 * (v[i - 1] + v[i]) };
            let hi = if i + 1 == v.len() { v[i] } else { 0.5 * (v[i] + v[i + 1]) };
            (lo, hi)
        };
        chart
            .draw_series(value.iter().map(|(&(i, j), &v)| {
                let (xa, xb) = edge(xs, i);
                let (ya, yb) = edge(ys, j);
                let s = (v / vmax).sqrt();
                Rectangle::new([(xa, ya), (xb, yb)], ramp(s).filled())
            }))
            .map_err(draw_err)?;
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

/// White at 0 to dark blue at 1.
fn ramp(s: f64) -> RGBColor {
    let s = s.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * s).round() as u8;
    RGBColor(mix(255.0, 8.0), mix(255.0, 29.0), mix(255.0, 88.0))
}

fn with_header(svg: String, h: &Header) -> String {
    let comment = format!(
        "<!-- {} {} plot of `{}` output, config_hash = {} -->\n",
        h.tool, h.version, h.command, h.config_hash
    );
    match svg.find("<svg") {
        Some(i) => format!("{}{comment}{}", &svg[..i], &svg[i..]),
        None => comment + &svg,
    }
}

fn column_pairs(t: &Table, x: &str, y: &str) -> CliResult<Vec<(f64, f64)>> {
    Ok(t.column(x)?.into_iter().zip(t.column(y)?).collect())
}

fn complex(v: &serde_json::Value) -> Option<(f64, f64)> {
    let a = v.as_array()?;
    Some((a.first()?.as_f64()?, a.get(1)?.as_f64()?))
}

pub fn plot(input: &Path, out: &Path) -> CliResult<()> {
    let header = io::read_header(input)?;
    let svg = match header.command.as_str() {
        "profile" => {
            let (_, t) = io::read_csv(input)?;
            let s = vec![("rho".to_string(), column_pairs(&t, "r", "rho")?), ("rho'".to_string(), column_pairs(&t, "r", "rho_prime")?)];
            line_plot("vortex profile", "r", "", &s)?
        }
        "roots" => {
            let (_, recs) = io::read_jsonl(input)?;
            let mut s: Vec<Series> = vec![("k1".into(), Vec::new()), ("k2".into(), Vec::new())];
            for r in &recs {
                for (j, series) in s.iter_mut().enumerate() {
                    if let Some(k) = r.get("k").and_then(|k| k.get(j)).and_then(complex) {
                        series.1.push(k);
                    }
                }
            }
            line_plot("root loci", "Re k", "Im k", &s)?
        }
        "connect" => {
            let (_, recs) = io::read_jsonl(input)?;
            let mut s: Vec<Series> = ["d_plus", "d_minus", "kappa"].iter().map(|n| (format!("|{n}|"), Vec::new())).collect();
            for r in &recs {
                let lam = r.get("lambda").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
                for (name, series) in ["d_plus", "d_minus", "kappa"].iter().zip(s.iter_mut()) {
                    if let Some((a, b)) = r.get(*name).and_then(complex) {
                        series.1.push((lam, a.hypot(b)));
                    }
                }
            }
            line_plot("connection data", "lambda", "modulus", &s)?
        }
        "jost" => {
            let (_, t) = io::read_csv(input)?;
            let r = t.column("r")?;
            let mag = |a: &str, b: &str| -> CliResult<Vec<(f64, f64)>> {
                Ok(r.iter().zip(t.column(a)?.into_iter().zip(t.column(b)?)).map(|(&r, (x, y))| (r, x.hypot(y))).collect())
            };
            let s = vec![("|phi|".to_string(), mag("phi_re", "phi_im")?), ("|psi|".to_string(), mag("psi_re", "psi_im")?)];
            line_plot("solution branch", "r", "modulus", &s)?
        }
        "evolve" => {
            let (_, t) = io::read_csv(input)?;
            let mut by_t: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
            let idx = |n: &str| t.columns.iter().position(|c| c == n).ok_or_else(|| CliError::Usage(format!("no column {n}")));
            let (it, ir, a, b, c, d) = (idx("t")?, idx("r")?, idx("phi_re")?, idx("phi_im")?, idx("psi_re")?, idx("psi_im")?);
            let mut order = Vec::new();
            for row in &t.rows {
                let key = row[it].to_bits();
                if !by_t.contains_key(&key) {
                    order.push(row[it]);
                }
                let m = (row[a].powi(2) + row[b].powi(2) + row[c].powi(2) + row[d].powi(2)).sqrt();
                by_t.entry(key).or_default().push((row[ir], m));
            }
            let s: Vec<Series> = order.iter().map(|&tt| (format!("t = {tt}"), by_t.remove(&tt.to_bits()).unwrap_or_default())).collect();
            line_plot("evolution snapshots", "r", "|(phi, psi)|", &s)?
        }
        "transform-theta" => {
            let (_, t) = io::read_csv(input)?;
            let (lam, r) = (t.column("lambda")?, t.column("r")?);
            let (a, b) = (t.column("abs_theta1")?, t.column("abs_theta2")?);
            let uniq = |v: &[f64]| {
                let mut u = v.to_vec();
                u.sort_by(f64::total_cmp);
                u.dedup();
                u
            };
            let (xs, ys) = (uniq(&lam), uniq(&r));
            if xs.len() < 2 || ys.len() < 2 {
                return Err(CliError::Usage("heatmap needs at least two lambda and two r samples".into()));
            }
            let pos = |v: &[f64], x: f64| v.binary_search_by(|p| p.total_cmp(&x)).unwrap_or(0);
            let value = (0..lam.len()).map(|k| ((pos(&xs, lam[k]), pos(&ys, r[k])), a[k].hypot(b[k]))).collect();
            heatmap("|Theta(r, lambda)|", &xs, &ys, &value)?
        }
        other => return Err(CliError::Usage(format!("no plot for `{other}` output"))),
    };
    io::save(Some(out), with_header(svg, &header).as_bytes())
}
