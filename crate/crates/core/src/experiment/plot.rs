//! SVG line plots with optional log axes, drawn with plotters.

use plotters::coord::ranged1d::{AsRangedCoord, ValueFormatter};
use plotters::prelude::*;

use crate::error::{Error, Result};

const SIZE: (u32, u32) = (640, 420);
const COLORS: [RGBColor; 6] = [
    RGBColor(0x1f, 0x77, 0xb4),
    RGBColor(0xd6, 0x27, 0x28),
    RGBColor(0x2c, 0xa0, 0x2c),
    RGBColor(0x94, 0x67, 0xbd),
    RGBColor(0xff, 0x7f, 0x0e),
    RGBColor(0x17, 0xbe, 0xcf),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

/// Data range, widened when degenerate and snapped to decades on log axes.
fn extent(values: impl Iterator<Item = f64>, log: bool) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    if log {
        lo = 10f64.powf(lo.log10().floor());
        hi = 10f64.powf(hi.log10().ceil());
        if hi <= lo {
            hi = lo * 10.0;
        }
    } else if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    Some((lo, hi))
}

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Resource(format!("plot rendering failed: {e}"))
}

impl LinePlot {
    fn usable(&self, p: &(f64, f64)) -> bool {
        p.0.is_finite()
            && p.1.is_finite()
            && (!self.log_x || p.0 > 0.0)
            && (!self.log_y || p.1 > 0.0)
    }

    fn draw<X, Y>(
        &self,
        area: &DrawingArea<SVGBackend<'_>, plotters::coord::Shift>,
        x: X,
        y: Y,
    ) -> Result<()>
    where
        X: AsRangedCoord<Value = f64>,
        Y: AsRangedCoord<Value = f64>,
        X::CoordDescType: ValueFormatter<f64>,
        Y::CoordDescType: ValueFormatter<f64>,
    {
        let mut chart = ChartBuilder::on(area)
            .caption(&self.title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(64)
            .build_cartesian_2d(x, y)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(&self.x_label)
            .y_desc(&self.y_label)
            .draw()
            .map_err(plot_err)?;
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|p| self.usable(p))
                .collect();
            chart
                .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
                .map_err(plot_err)?
                .label(&s.label)
                .legend(move |(x, y)| {
                    PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2))
                });
            chart
                .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
                .map_err(plot_err)?;
        }
        if !self.series.is_empty() {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }
        Ok(())
    }

    /// Render to SVG. Points that cannot be shown on a log axis are dropped.
    pub fn to_svg(&self) -> Result<String> {
        let mut svg = String::new();
        {
            let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
            root.fill(&WHITE).map_err(plot_err)?;
            let pts = || {
                self.series
                    .iter()
                    .flat_map(|s| s.points.iter())
                    .filter(|p| self.usable(p))
            };
            match (
                extent(pts().map(|p| p.0), self.log_x),
                extent(pts().map(|p| p.1), self.log_y),
            ) {
                (Some((x0, x1)), Some((y0, y1))) => match (self.log_x, self.log_y) {
                    (false, false) => self.draw(&root, x0..x1, y0..y1)?,
                    (true, false) => self.draw(&root, (x0..x1).log_scale(), y0..y1)?,
                    (false, true) => self.draw(&root, x0..x1, (y0..y1).log_scale())?,
                    (true, true) => self.draw(&root, (x0..x1).log_scale(), (y0..y1).log_scale())?,
                },
                _ => {
                    let (w, h) = SIZE;
                    root.draw(&Text::new(
                        format!("{}: no plottable data", self.title),
                        (w as i32 / 2 - 100, h as i32 / 2),
                        ("sans-serif", 16),
                    ))
                    .map_err(plot_err)?;
                }
            }
            root.present().map_err(plot_err)?;
        }
        if !svg.ends_with('\n') {
            svg.push('\n');
        }
        Ok(svg)
    }
}
