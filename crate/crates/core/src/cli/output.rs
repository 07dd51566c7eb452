//! Sampled series, their CSV and SVG renderings, and the verification report.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::CliError;
use crate::error::Error;
use crate::lattice::Branch;
use crate::verify::{pole_mask, GridSpec, ResidualReport, Tolerances};

/// z (and optionally u) on a grid; `None` marks a masked point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub x: Vec<f64>,
    pub z: Vec<Option<f64>>,
    pub u: Option<Vec<Option<f64>>>,
}

impl SampleSeries {
    /// Samples a branch, masking points near its poles and points where the
    /// evaluation itself reports a pole.
    pub fn sample<B: Branch>(branch: &B, grid: &GridSpec, with_u: bool) -> Result<Self, CliError> {
        let xs = grid.points();
        let mask = pole_mask(&[branch as &dyn Branch], &xs, grid.pole_mask_radius());
        let mut z = Vec::with_capacity(xs.len());
        let mut u = Vec::with_capacity(xs.len());
        for (&x, &masked) in xs.iter().zip(&mask) {
            if masked {
                z.push(None);
                u.push(None);
                continue;
            }
            match branch.jet(x) {
                Ok(j) => {
                    z.push(Some(j.z()));
                    u.push(Some(j.u()));
                }
                Err(Error::PoleProximity { .. } | Error::PrecisionLoss { .. }) => {
                    z.push(None);
                    u.push(None);
                }
                Err(e) => return Err(CliError::Numeric(e)),
            }
        }
        Ok(Self {
            x: xs,
            z,
            u: with_u.then_some(u),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_pole(&self, i: usize) -> bool {
        self.z[i].is_none()
    }

    pub fn to_csv(&self) -> String {
        let field = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let mut out = String::from(if self.u.is_some() { "x,z,u,pole\n" } else { "x,z,pole\n" });
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e},{}", self.x[i], field(self.z[i]));
            if let Some(u) = &self.u {
                let _ = write!(out, ",{}", field(u[i]));
            }
            let _ = writeln!(out, ",{}", u8::from(self.is_pole(i)));
        }
        out
    }

    /// Polylines broken at masked points and at values outside the plotted
    /// band, which is the 2%–98% quantile range of the finite values.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 800.0;
        const H: f64 = 500.0;
        const PAD: f64 = 40.0;
        let mut curves = vec![("z", "#1f4e99", &self.z)];
        if let Some(u) = &self.u {
            curves.push(("u", "#b03a2e", u));
        }
        let mut finite: Vec<f64> = curves
            .iter()
            .flat_map(|(_, _, v)| v.iter().flatten().copied())
            .filter(|v| v.is_finite())
            .collect();
        finite.sort_by(f64::total_cmp);
        let (lo, hi) = if finite.is_empty() {
            (-1.0, 1.0)
        } else {
            let q = |p: f64| finite[((finite.len() - 1) as f64 * p).round() as usize];
            let (a, b) = (q(0.02), q(0.98));
            if a < b {
                (a, b)
            } else {
                (a - 1.0, b + 1.0)
            }
        };
        let (x0, x1) = (self.x[0], self.x[self.len() - 1]);
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - lo) / (hi - lo) * (H - 2.0 * PAD);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        if lo < 0.0 && hi > 0.0 {
            let y = py(0.0);
            let _ = writeln!(
                svg,
                r##"<line x1="{PAD}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#999"/>"##,
                W - PAD
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{PAD}" y="{}" font-size="14">{title}  [{lo:.3e}, {hi:.3e}]</text>"#,
            PAD - 10.0
        );
        for (name, colour, values) in curves {
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, svg: &mut String| {
                if run.len() > 1 {
                    let _ = writeln!(
                        svg,
                        r#"<polyline class="{name}" fill="none" stroke="{colour}" points="{}"/>"#,
                        run.join(" ")
                    );
                }
                run.clear();
            };
            for (&x, v) in self.x.iter().zip(values.iter()) {
                match v {
                    Some(y) if (lo..=hi).contains(y) => run.push(format!("{:.2},{:.2}", px(x), py(*y))),
                    _ => flush(&mut run, &mut svg),
                }
            }
            flush(&mut run, &mut svg);
        }
        svg.push_str("</svg>\n");
        svg
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[derive(Serialize)]
struct ReportGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    mask_radius: f64,
}

#[derive(Serialize)]
struct ReportRun {
    g2: f64,
    g3: f64,
    deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    grid: ReportGrid,
    passed: bool,
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    #[serde(flatten)]
    report: &'a ResidualReport,
    /// "default" for built-in tolerances, "override" for configured ones.
    tolerance_source: &'static str,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    run: ReportRun,
    identity: Vec<ReportEntry<'a>>,
}

/// TOML report: a `[run]` table and one `[[identity]]` record per check.
pub fn render_report(
    inv: (f64, f64),
    deltas: &[f64],
    b: Option<f64>,
    grid: &GridSpec,
    reports: &[ResidualReport],
    overridden: &Tolerances,
) -> Result<String, CliError> {
    let defaults = Tolerances::default();
    let doc = ReportDoc {
        run: ReportRun {
            g2: inv.0,
            g3: inv.1,
            deltas: deltas.to_vec(),
            b,
            grid: ReportGrid {
                x_min: grid.x_min(),
                x_max: grid.x_max(),
                n_points: grid.n_points(),
                mask_radius: grid.pole_mask_radius(),
            },
            passed: reports.iter().all(|r| r.verdict != crate::verify::Verdict::Fail),
        },
        identity: reports
            .iter()
            .map(|r| ReportEntry {
                report: r,
                tolerance_source: if overridden.get(&r.name) == defaults.get(&r.name) {
                    "default"
                } else {
                    "override"
                },
            })
            .collect(),
    };
    toml::to_string(&doc).map_err(|e| CliError::Config {
        field: "report".into(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> SampleSeries {
        SampleSeries {
            x: vec![-1.0, 0.0, 1.0],
            z: vec![Some(1.0), None, Some(-0.5)],
            u: Some(vec![Some(2.0), None, Some(0.25)]),
        }
    }

    #[test]
    fn csv_marks_poles_with_empty_fields() {
        let csv = series().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,z,u,pole");
        assert_eq!(lines[2], "0.0000000000000000e0,,,1");
        assert!(lines[1].ends_with(",0"));
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, 1.0);
    }

    #[test]
    fn csv_round_trips_seventeen_digits() {
        let v = 0.1 + 0.2;
        let s = SampleSeries {
            x: vec![v],
            z: vec![Some(v / 3.0)],
            u: None,
        };
        let csv = s.to_csv();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), v);
        assert_eq!(row[1].parse::<f64>().unwrap(), v / 3.0);
    }

    #[test]
    fn svg_breaks_at_poles() {
        let svg = series().to_svg("t");
        assert!(svg.starts_with("<svg"));
        // each curve has two isolated points around the pole, so no segment
        assert_eq!(svg.matches("<polyline").count(), 0);
        let long = SampleSeries {
            x: (0..10).map(f64::from).collect(),
            z: (0..10).map(|i| (i != 5).then_some(f64::from(i))).collect(),
            u: None,
        };
        assert_eq!(long.to_svg("t").matches("<polyline").count(), 2);
    }
}
