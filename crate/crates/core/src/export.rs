//! On-disk formats for trial logs.
//!
//! Sample CSV columns (version 1, header mandatory):
//! `t,fsx,fsy,fs,mode,alarm,progress,dx,dy,v0,v1,v2,v3,v4,v5`.
//! Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::control::ControlMode;
use crate::error::Result;
use crate::operator::AlarmLevel;
use crate::sim::{Event, Sample, TrialLog};

pub const CSV_COLUMNS: [&str; 15] = [
    "t", "fsx", "fsy", "fs", "mode", "alarm", "progress", "dx", "dy", "v0", "v1", "v2", "v3", "v4", "v5",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    fsx: f64,
    fsy: f64,
    fs: f64,
    mode: ControlMode,
    alarm: AlarmLevel,
    progress: f64,
    dx: f64,
    dy: f64,
    v0: f64,
    v1: f64,
    v2: f64,
    v3: f64,
    v4: f64,
    v5: f64,
}

impl From<&Sample> for CsvRow {
    fn from(s: &Sample) -> Self {
        let [v0, v1, v2, v3, v4, v5] = s.twist;
        Self {
            t: s.t,
            fsx: s.fsx,
            fsy: s.fsy,
            fs: s.fs,
            mode: s.mode,
            alarm: s.alarm,
            progress: s.progress,
            dx: s.dx,
            dy: s.dy,
            v0,
            v1,
            v2,
            v3,
            v4,
            v5,
        }
    }
}

impl From<CsvRow> for Sample {
    fn from(r: CsvRow) -> Self {
        Sample {
            t: r.t,
            fsx: r.fsx,
            fsy: r.fsy,
            fs: r.fs,
            mode: r.mode,
            alarm: r.alarm,
            progress: r.progress,
            dx: r.dx,
            dy: r.dy,
            twist: [r.v0, r.v1, r.v2, r.v3, r.v4, r.v5],
        }
    }
}

pub fn write_samples_csv<W: Write>(samples: &[Sample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(CsvRow::from(s))?;
    }
    if samples.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CsvRow>()
        .map(|row| Ok(Sample::from(row?)))
        .collect()
}

#[derive(Debug, Serialize)]
struct EventFile<'a> {
    mode: &'a str,
    skill: &'a str,
    seed: u64,
    dt: f64,
    vessel_order: [usize; 4],
    events: &'a [Event],
}

pub fn write_events_json<W: Write>(log: &TrialLog, out: W) -> Result<()> {
    let file = EventFile {
        mode: log.mode.as_str(),
        skill: log.skill.as_str(),
        seed: log.seed,
        dt: log.dt,
        vessel_order: log.vessel_order.0,
        events: &log.events,
    };
    serde_json::to_writer_pretty(out, &file)?;
    Ok(())
}

/// Force trace plot: F_sx, F_sy and F_s against time, with the unsafe bound
/// drawn as a dashed line and adaptive intervals shaded.
pub fn render_force_svg(log: &TrialLog, unsafe_bound: f64) -> String {
    const W: f64 = 900.0;
    const H: f64 = 360.0;
    const ML: f64 = 60.0;
    const MR: f64 = 20.0;
    const MT: f64 = 30.0;
    const MB: f64 = 45.0;

    let samples = &log.samples;
    let t_end = samples.last().map_or(1.0, |s| s.t).max(1e-9);
    let (mut lo, mut hi) = (0.0f64, unsafe_bound * 1.2);
    for s in samples {
        lo = lo.min(s.fsx).min(s.fsy);
        hi = hi.max(s.fs);
    }
    let lo = (lo / 20.0).floor() * 20.0;
    let hi = (hi / 20.0).ceil() * 20.0;
    let px = |t: f64| ML + (W - ML - MR) * t / t_end;
    let py = |f: f64| MT + (H - MT - MB) * (hi - f) / (hi - lo);

    // About 2000 points per curve is plenty for a static plot.
    let stride = (samples.len() / 2000).max(1);
    let polyline = |get: &dyn Fn(&Sample) -> f64, color: &str| {
        let mut pts = String::new();
        for s in samples.iter().step_by(stride) {
            let _ = write!(pts, "{:.1},{:.1} ", px(s.t), py(get(s)));
        }
        format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n", pts.trim_end())
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");

    let mut start = None;
    for s in samples {
        match (s.mode, start) {
            (ControlMode::Adaptive, None) => start = Some(s.t),
            (ControlMode::Impedance, Some(t0)) => {
                let _ = writeln!(
                    svg,
                    "<rect x=\"{:.1}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#fde9c8\"/>",
                    px(t0),
                    (px(s.t) - px(t0)).max(0.5),
                    H - MT - MB
                );
                start = None;
            }
            _ => {}
        }
    }
    if let Some(t0) = start {
        let _ = writeln!(
            svg,
            "<rect x=\"{:.1}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#fde9c8\"/>",
            px(t0),
            (px(t_end) - px(t0)).max(0.5),
            H - MT - MB
        );
    }

    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - ML - MR,
        H - MT - MB
    );
    let mut tick = lo;
    while tick <= hi + 1e-9 {
        let y = py(tick);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{ML}\" y2=\"{y:.1}\" stroke=\"black\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{tick}</text>",
            ML - 4.0,
            ML - 6.0,
            y + 4.0
        );
        tick += if hi - lo > 200.0 { 40.0 } else { 20.0 };
    }
    let t_step = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
        .into_iter()
        .find(|s| t_end / s <= 12.0)
        .unwrap_or(100.0);
    let mut t = 0.0;
    while t <= t_end + 1e-9 {
        let x = px(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/><text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t}</text>",
            H - MB,
            H - MB + 4.0,
            H - MB + 16.0
        );
        t += t_step;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">time [s]</text>",
        ML + (W - ML - MR) / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">force [mN]</text>",
        H / 2.0,
        H / 2.0
    );

    let zero = py(0.0);
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{zero:.1}\" x2=\"{:.1}\" y2=\"{zero:.1}\" stroke=\"#999\" stroke-width=\"0.5\"/>",
        W - MR
    );
    let bound = py(unsafe_bound);
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{bound:.1}\" x2=\"{:.1}\" y2=\"{bound:.1}\" stroke=\"red\" stroke-dasharray=\"6,4\"/>",
        W - MR
    );

    svg.push_str(&polyline(&|s| s.fsx, "#1f77b4"));
    svg.push_str(&polyline(&|s| s.fsy, "#2ca02c"));
    svg.push_str(&polyline(&|s| s.fs, "black"));

    let legend = [("#1f77b4", "F_sx"), ("#2ca02c", "F_sy"), ("black", "F_s"), ("red", "unsafe bound")];
    for (i, (color, label)) in legend.iter().enumerate() {
        let x = ML + 10.0 + 110.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"16\" x2=\"{:.1}\" y2=\"16\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{:.1}\" y=\"20\">{label}</text>",
            x + 20.0,
            x + 24.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"end\">{} / {} / seed {}</text>",
        W - MR,
        log.mode.as_str(),
        log.skill.as_str(),
        log.seed
    );
    svg.push_str("</svg>\n");
    svg
}
