use std::path::{Path, PathBuf};

use crate::runner::{DseReport, DseRow};
use crate::space::ObjectivePair;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 17] = [
    "config_id",
    "pes",
    "lanes",
    "vector_width",
    "precision_bits",
    "weight_buffer_kb",
    "latency_us",
    "power_w",
    "area_mm2",
    "energy_uj",
    "pareto_lat_power",
    "pareto_lat_area",
    "knee_lat_power",
    "knee_lat_area",
    "vehicle_class",
    "feasible",
    "reject_reason",
];

/// Renders the sweep as CSV text; infeasible rows keep empty metric cells.
pub fn render_csv(report: &DseReport) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_COLUMNS)?;
    for row in &report.rows {
        let c = &row.config;
        let (latency, power, area, energy, class) = match &row.metrics {
            Some(m) => (
                m.latency_us.to_string(),
                m.power_w.to_string(),
                m.area_mm2.to_string(),
                m.energy_uj.to_string(),
                m.vehicle_class.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new(), "none".into()),
        };
        wtr.write_record([
            c.config_id(),
            c.num_pes.to_string(),
            c.mac_lanes.to_string(),
            c.vector_width.to_string(),
            c.precision_bits.to_string(),
            c.weight_buffer_kb.to_string(),
            latency,
            power,
            area,
            energy,
            row.pareto_lat_power.to_string(),
            row.pareto_lat_area.to_string(),
            row.knee_lat_power.to_string(),
            row.knee_lat_area.to_string(),
            class,
            row.feasible().to_string(),
            row.reject_reason.clone().unwrap_or_default(),
        ])?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(report: &DseReport, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, render_csv(report)?)?)
}

fn pair_axes(pair: ObjectivePair) -> (&'static str, &'static str) {
    match pair {
        ObjectivePair::LatencyPower => ("latency_us", "power_w"),
        ObjectivePair::LatencyArea => ("latency_us", "area_mm2"),
    }
}

fn pair_slug(pair: ObjectivePair) -> &'static str {
    match pair {
        ObjectivePair::LatencyPower => "latency_power",
        ObjectivePair::LatencyArea => "latency_area",
    }
}

fn pick(row: &DseRow, pair: ObjectivePair) -> Option<(f64, f64)> {
    row.metrics.as_ref().map(|m| match pair {
        ObjectivePair::LatencyPower => (m.latency_us, m.power_w),
        ObjectivePair::LatencyArea => (m.latency_us, m.area_mm2),
    })
}

/// Standalone SVG scatter of one objective pair: feasible candidates as dots,
/// front members ringed, the knee filled and labeled.
pub fn scatter_svg(report: &DseReport, pair: ObjectivePair) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 64.0;
    let (x_name, y_name) = pair_axes(pair);

    let pts: Vec<(&DseRow, (f64, f64))> =
        report.rows.iter().filter_map(|r| pick(r, pair).map(|p| (r, p))).collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{y_name} vs {x_name}</text>\n",
        W / 2.0
    ));

    if pts.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no feasible candidates</text>\n</svg>\n",
            W / 2.0,
            H / 2.0
        ));
        return svg;
    }

    let min = |f: &dyn Fn(&(f64, f64)) -> f64| {
        pts.iter().map(|(_, p)| f(p)).fold(f64::INFINITY, f64::min)
    };
    let max = |f: &dyn Fn(&(f64, f64)) -> f64| {
        pts.iter().map(|(_, p)| f(p)).fold(f64::NEG_INFINITY, f64::max)
    };
    let (x0, x1) = (min(&|p| p.0), max(&|p| p.0));
    let (y0, y1) = (min(&|p| p.1), max(&|p| p.1));
    let sx = |x: f64| if x1 > x0 { M + (x - x0) / (x1 - x0) * (W - 2.0 * M) } else { W / 2.0 };
    let sy = |y: f64| if y1 > y0 { H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M) } else { H / 2.0 };

    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - M,
        W - M,
        H - M
    ));
    svg.push_str(&format!("<line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n", H - M));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_name}</text>\n",
        W / 2.0,
        H - 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_name}</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{fx:.3}</text>\n",
            sx(fx),
            H - M + 16.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{fy:.3}</text>\n",
            M - 6.0,
            sy(fy) + 4.0
        ));
    }

    for (row, (x, y)) in &pts {
        let on_front = match pair {
            ObjectivePair::LatencyPower => row.pareto_lat_power,
            ObjectivePair::LatencyArea => row.pareto_lat_area,
        };
        let is_knee = match pair {
            ObjectivePair::LatencyPower => row.knee_lat_power,
            ObjectivePair::LatencyArea => row.knee_lat_area,
        };
        let (cx, cy) = (sx(*x), sy(*y));
        if is_knee {
            svg.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"7\" fill=\"#d62728\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-size=\"11\">{} (knee)</text>\n",
                cx + 10.0,
                cy + 4.0,
                row.config.config_id()
            ));
        } else if on_front {
            svg.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"5\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n"
            ));
        } else {
            svg.push_str(&format!("<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"#9e9e9e\"/>\n"));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes one scatter per objective pair into `dir`; returns the paths.
pub fn write_scatter_svgs(report: &DseReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for &pair in &report.objective_pairs {
        let path = dir.join(format!("dse_{}.svg", pair_slug(pair)));
        std::fs::write(&path, scatter_svg(report, pair))?;
        paths.push(path);
    }
    Ok(paths)
}
