//! CSV, JSON and SVG renderings of region reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::RegionReport;
use crate::error::{Error, Result};
use crate::poly::StabilityClass;

impl RegionReport {
    /// One row per cell in row-major order: `theta_1..theta_d, verdict,
    /// component_id`, the id left empty for cells that are not stable.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (1..=self.dim()).map(|a| format!("theta_{a}")).collect();
        header.push("verdict".into());
        header.push("component_id".into());
        w.write_record(&header).map_err(csv_error)?;
        for flat in 0..self.cell_count() {
            let mut record: Vec<String> = self.cell_center(flat).iter().map(|x| x.to_string()).collect();
            record.push(self.verdicts[flat].as_str().into());
            record.push(self.labels[flat].map(|l| l.to_string()).unwrap_or_default());
            w.write_record(&record).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Rebuilds a report from [`RegionReport::to_csv`] output. The box is
    /// recovered from the cell centers, so it matches the original only up
    /// to rounding; component ids must agree with a fresh labeling.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let d = r.headers().map_err(csv_error)?.len().checked_sub(2).filter(|&d| d >= 1).ok_or_else(|| {
            Error::Parse("region CSV needs theta columns, verdict and component_id".into())
        })?;
        let mut centers: Vec<Vec<f64>> = Vec::new();
        let mut verdicts = Vec::new();
        let mut labels = Vec::new();
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            let theta = (0..d)
                .map(|a| record[a].parse::<f64>().map_err(|e| Error::Parse(format!("theta_{}: {e}", a + 1))))
                .collect::<Result<Vec<_>>>()?;
            centers.push(theta);
            verdicts.push(parse_class(&record[d])?);
            labels.push(match &record[d + 1] {
                "" => None,
                s => Some(s.parse::<usize>().map_err(|e| Error::Parse(format!("component_id: {e}")))?),
            });
        }
        let mut bounds = Vec::with_capacity(d);
        let mut resolution = Vec::with_capacity(d);
        for a in 0..d {
            let mut values: Vec<f64> = centers.iter().map(|c| c[a]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            if values.len() < 2 {
                return Err(Error::Parse(format!("axis {} has fewer than two cells", a + 1)));
            }
            let w = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
            bounds.push((values[0] - w / 2.0, values[values.len() - 1] + w / 2.0));
            resolution.push(values.len());
        }
        let report = Self::from_verdicts(bounds, resolution, verdicts)?;
        if report.labels != labels {
            return Err(Error::Parse("component ids do not match the verdict grid".into()));
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Equality with box coordinates compared to a relative tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()));
        let pairs_close = |a: &[(f64, f64)], b: &[(f64, f64)]| {
            a.len() == b.len() && a.iter().zip(b).all(|(p, q)| close(p.0, q.0) && close(p.1, q.1))
        };
        self.resolution == other.resolution
            && self.verdicts == other.verdicts
            && self.labels == other.labels
            && self.component_count == other.component_count
            && pairs_close(&self.bounds, &other.bounds)
            && self.component_boxes.len() == other.component_boxes.len()
            && self.component_boxes.iter().zip(&other.component_boxes).all(|(a, b)| pairs_close(a, b))
    }

    /// Static SVG map for one or two parameters. Stable cells are filled by
    /// component, marginal cells gray; `ticks` marks known boundary values
    /// on the first axis.
    pub fn to_svg(&self, ticks: &[f64]) -> Result<String> {
        let d = self.dim();
        if d > 2 {
            return Err(Error::Dimensionality(d));
        }
        let (left, top, width) = (60.0, 20.0, 720.0);
        let height = if d == 1 { 60.0 } else { 480.0 };
        let (x_lo, x_hi) = self.bounds[0];
        let sx = width / (x_hi - x_lo);
        let (rx, ry) = (self.resolution[0], if d == 2 { self.resolution[1] } else { 1 });
        let (cw, ch) = (width / rx as f64, height / ry as f64);

        let mut svg = String::new();
        let total_w = left + width + 20.0;
        let total_h = top + height + 50.0;
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(svg, r#"<rect x="{left}" y="{top}" width="{width}" height="{height}" fill="white" stroke="black"/>"#).unwrap();
        for i in 0..rx {
            // Merge runs of equal cells along the second axis.
            let mut j = 0;
            while j < ry {
                let flat = i * ry + j;
                let key = (self.verdicts[flat], self.labels[flat]);
                let mut end = j + 1;
                while end < ry && (self.verdicts[i * ry + end], self.labels[i * ry + end]) == key {
                    end += 1;
                }
                if let Some(fill) = cell_fill(key.0, key.1) {
                    let x = left + i as f64 * cw;
                    let y = top + height - end as f64 * ch;
                    let h = (end - j) as f64 * ch;
                    writeln!(svg, r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{h:.3}" fill="{fill}"/>"#).unwrap();
                }
                j = end;
            }
        }
        for &t in ticks.iter().filter(|t| (x_lo..=x_hi).contains(*t)) {
            let x = left + (t - x_lo) * sx;
            writeln!(
                svg,
                r#"<line x1="{x:.3}" y1="{top}" x2="{x:.3}" y2="{}" stroke="crimson" stroke-dasharray="4 3"/>"#,
                top + height + 6.0
            )
            .unwrap();
        }
        let base = top + height + 18.0;
        writeln!(svg, r#"<text x="{left}" y="{base}">{x_lo}</text>"#).unwrap();
        writeln!(svg, r#"<text x="{}" y="{base}" text-anchor="end">{x_hi}</text>"#, left + width).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">θ1</text>"#, left + width / 2.0, base + 18.0).unwrap();
        if d == 2 {
            let (y_lo, y_hi) = self.bounds[1];
            writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y_lo}</text>"#, left - 4.0, top + height).unwrap();
            writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y_hi}</text>"#, left - 4.0, top + 12.0).unwrap();
            writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">θ2</text>"#, left - 4.0, top + height / 2.0).unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">components: {}</text>"#,
            left + width,
            base + 18.0,
            self.component_count
        )
        .unwrap();
        svg.push_str("</svg>\n");
        Ok(svg)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_csv()?)?)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_json()?)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write_svg(&self, path: &Path, ticks: &[f64]) -> Result<()> {
        Ok(fs::write(path, self.to_svg(ticks)?)?)
    }
}

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76b7b2", "#edc948", "#e15759", "#9c755f"];

fn cell_fill(class: StabilityClass, label: Option<usize>) -> Option<&'static str> {
    match (class, label) {
        (StabilityClass::Stable, Some(l)) => Some(PALETTE[l % PALETTE.len()]),
        (StabilityClass::Marginal, _) => Some("#9e9e9e"),
        _ => None,
    }
}

fn parse_class(s: &str) -> Result<StabilityClass> {
    match s {
        "stable" => Ok(StabilityClass::Stable),
        "marginal" => Ok(StabilityClass::Marginal),
        "unstable" => Ok(StabilityClass::Unstable),
        other => Err(Error::Parse(format!("unknown verdict '{other}'"))),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
