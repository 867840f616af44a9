//! Serialisation helpers shared by the subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    result: &'a T,
}

pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(w: &mut dyn Write, command: &str, result: &T) -> io::Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        result,
    };
    serde_json::to_writer_pretty(&mut *w, &env)?;
    writeln!(w)?;
    w.flush()
}

/// 17 significant digits, always with `.` as the decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()
}

/// A bare-bones SVG of polylines in the `(λ, μ)` plane, clipped to a window.
pub struct Plot {
    pub lambda: (f64, f64),
    pub mu: (f64, f64),
    pub lines: Vec<(String, Vec<(f64, f64)>)>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 40.0;

impl Plot {
    fn x(&self, l: f64) -> f64 {
        PAD + (l - self.lambda.0) / (self.lambda.1 - self.lambda.0) * (W - 2.0 * PAD)
    }

    fn y(&self, m: f64) -> f64 {
        H - PAD - (m - self.mu.0) / (self.mu.1 - self.mu.0) * (H - 2.0 * PAD)
    }

    fn inside(&self, (l, m): (f64, f64)) -> bool {
        l >= self.lambda.0 && l <= self.lambda.1 && m >= self.mu.0 && m <= self.mu.1
    }

    pub fn render(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">"#
        )?;
        let (x0, x1) = (self.x(self.lambda.0), self.x(self.lambda.1));
        let (y0, y1) = (self.y(self.mu.0), self.y(self.mu.1));
        writeln!(
            w,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        )?;
        if self.lambda.0 < 0.0 && self.lambda.1 > 0.0 {
            let x = self.x(0.0);
            writeln!(
                w,
                r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{y1}" stroke="gray"/>"#
            )?;
        }
        if self.mu.0 < 0.0 && self.mu.1 > 0.0 {
            let y = self.y(0.0);
            writeln!(
                w,
                r#"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="gray"/>"#
            )?;
        }
        writeln!(w, r#"<text x="{}" y="{}">lambda</text>"#, W / 2.0, H - 10.0)?;
        writeln!(w, r#"<text x="5" y="{}">mu</text>"#, H / 2.0)?;
        for (label, pts) in &self.lines {
            // split at points outside the window so clipped pieces stay separate
            for run in pts.split(|p| !self.inside(*p)).filter(|r| r.len() > 1) {
                let d: Vec<String> = run
                    .iter()
                    .map(|&(l, m)| format!("{:.2},{:.2}", self.x(l), self.y(m)))
                    .collect();
                writeln!(
                    w,
                    r#"<polyline class="{label}" fill="none" stroke="black" points="{}"/>"#,
                    d.join(" ")
                )?;
            }
        }
        writeln!(w, "</svg>")?;
        w.flush()
    }
}
