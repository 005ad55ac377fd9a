//! Static SVG heatmaps and line charts.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use plotters::prelude::*;

/// Blue-white-red ramp over `[-1, 1]`.
fn diverging(t: f64) -> RGBColor {
    let t = t.clamp(-1.0, 1.0);
    let fade = |c: u8, s: f64| (255.0 - (255.0 - c as f64) * s).round() as u8;
    if t >= 0.0 {
        RGBColor(fade(178, t), fade(24, t), fade(43, t))
    } else {
        RGBColor(fade(33, -t), fade(102, -t), fade(172, -t))
    }
}

/// Cell `(i, j)` is drawn at row `i`, column `j`. Cells where `mask` is true
/// are left blank. Colours scale with `|value| / max|value|`.
pub fn heatmap(title: &str, labels: &[String], values: &DMatrix<f64>, mask: Option<&DMatrix<bool>>) -> String {
    let k = labels.len();
    let cell = 56u32;
    let margin = 110u32;
    let size = (margin + cell * k as u32 + 30, margin + cell * k as u32 + 30);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, size).into_drawing_area();
        root.fill(&WHITE).expect("svg");
        root.draw(&Text::new(title.to_string(), (10, 10), ("sans-serif", 18))).expect("svg");
        let origin = |i: usize, j: usize| ((margin + cell * j as u32) as i32, (margin + cell * i as u32) as i32);
        for i in 0..k {
            let (_, y) = origin(i, 0);
            root.draw(&Text::new(labels[i].clone(), (8, y + cell as i32 / 2 - 6), ("sans-serif", 12))).expect("svg");
            let (x, _) = origin(0, i);
            root.draw(&Text::new(labels[i].clone(), (x + 4, margin as i32 - 20), ("sans-serif", 12))).expect("svg");
            for j in 0..k {
                let (x, y) = origin(i, j);
                let blank = mask.is_some_and(|m| m[(i, j)]);
                let fill = if blank { WHITE } else { diverging(values[(i, j)] / scale) };
                root.draw(&Rectangle::new([(x, y), (x + cell as i32, y + cell as i32)], fill.filled())).expect("svg");
                root.draw(&Rectangle::new([(x, y), (x + cell as i32, y + cell as i32)], BLACK.mix(0.2))).expect("svg");
                if !blank {
                    let text = format!("{:.2}", values[(i, j)]);
                    root.draw(&Text::new(text, (x + 6, y + cell as i32 / 2 - 6), ("sans-serif", 11))).expect("svg");
                }
            }
        }
        root.present().expect("svg");
    }
    out
}

/// One line per named series over a shared date axis. `NaN` breaks a line.
pub fn line_chart(title: &str, y_label: &str, dates: &[NaiveDate], series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, (960, 480)).into_drawing_area();
        root.fill(&WHITE).expect("svg");
        let finite = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
        let pad = ((hi - lo) * 0.05).max(1e-12);
        let n = dates.len().max(2);
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(64)
            .build_cartesian_2d(0f64..(n - 1) as f64, (lo - pad)..(hi + pad))
            .expect("svg");
        chart
            .configure_mesh()
            .disable_mesh()
            .x_labels(6)
            .x_label_formatter(&|x| dates.get(x.round() as usize).map(|d| d.to_string()).unwrap_or_default())
            .y_desc(y_label)
            .draw()
            .expect("svg");
        for (idx, (name, values)) in series.iter().enumerate() {
            let color = Palette99::pick(idx).to_rgba();
            let mut segment: Vec<(f64, f64)> = Vec::new();
            let mut segments = Vec::new();
            for (t, v) in values.iter().enumerate() {
                if v.is_finite() {
                    segment.push((t as f64, *v));
                } else if !segment.is_empty() {
                    segments.push(std::mem::take(&mut segment));
                }
            }
            segments.push(segment);
            for (s, points) in segments.into_iter().enumerate() {
                let drawn = chart.draw_series(LineSeries::new(points, color.stroke_width(1))).expect("svg");
                if s == 0 {
                    drawn
                        .label(name.clone())
                        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
                }
            }
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK.mix(0.3))
            .draw()
            .expect("svg");
        root.present().expect("svg");
    }
    out
}
