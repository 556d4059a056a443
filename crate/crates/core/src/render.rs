//! Offline SVG frames from replay files.
//!
//! North is up: map `y` grows toward the top of the image.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{read_records, Frame, Header, Record};

pub const PIXELS_PER_UNIT: f64 = 16.0;

const ALLY_COLOR: &str = "#2b6cb0";
const ENEMY_COLOR: &str = "#c53030";
const HEALTH_COLOR: &str = "#38a169";
const SHIELD_COLOR: &str = "#63b3ed";

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed replay: {0}")]
    Malformed(String),
    #[error("every_n must be at least 1")]
    ZeroInterval,
}

/// Renders one frame as a standalone SVG document.
pub fn render_svg(header: &Header, frame: &Frame) -> String {
    let w = header.width as f64 * PIXELS_PER_UNIT;
    let h = header.height as f64 * PIXELS_PER_UNIT;
    let px = |v: f64| v * PIXELS_PER_UNIT;
    let flip = |y: f64| h - px(y);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, "<title>{} step {}</title>", escape(&header.scenario), frame.step);
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#f7fafc" stroke="#2d3748"/>"##);
    for &[x, y, rw, rh] in &header.obstacles {
        let _ = writeln!(
            svg,
            r##"<rect class="obstacle" x="{}" y="{}" width="{}" height="{}" fill="#4a5568"/>"##,
            px(x),
            flip(y + rh),
            px(rw),
            px(rh)
        );
    }
    for record in frame.units.iter().filter(|u| u.alive) {
        let Some(info) = header.units.iter().find(|i| i.id == record.id) else {
            continue;
        };
        let (cx, cy, r) = (px(record.x), flip(record.y), px(info.radius));
        let color = if info.faction == "ALLY" { ALLY_COLOR } else { ENEMY_COLOR };
        let _ = writeln!(
            svg,
            r#"<circle class="unit" data-id="{}" cx="{cx}" cy="{cy}" r="{r}" fill="{color}"/>"#,
            record.id
        );
        let mut ring = |fraction: f64, color: &str, offset: f64| {
            let ring_r = r + offset;
            let circumference = std::f64::consts::TAU * ring_r;
            let _ = writeln!(
                svg,
                r#"<circle cx="{cx}" cy="{cy}" r="{ring_r}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{} {circumference}" transform="rotate(-90 {cx} {cy})"/>"#,
                fraction.clamp(0.0, 1.0) * circumference
            );
        };
        ring(record.health / info.max_health, HEALTH_COLOR, 2.0);
        if info.max_shield > 0.0 {
            ring(record.shield / info.max_shield, SHIELD_COLOR, 4.0);
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Frames whose step is a multiple of `every_n`, plus the final frame.
pub fn sample_frames(frames: &[Frame], every_n: u64) -> Vec<&Frame> {
    let last = frames.last().map(|f| f.step);
    frames
        .iter()
        .filter(|f| f.step % every_n == 0 || Some(f.step) == last)
        .collect()
}

/// Writes `frame_<step>.svg` files into `out_dir` and returns their paths.
pub fn render_frames(records: &[Record], out_dir: &Path, every_n: u64) -> Result<Vec<PathBuf>, RenderError> {
    if every_n == 0 {
        return Err(RenderError::ZeroInterval);
    }
    fs::create_dir_all(out_dir)?;
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let Record::Header(header) = first else {
        return Err(RenderError::Malformed("first record is not a header".into()));
    };
    let mut frames = Vec::new();
    for record in &records[1..] {
        match record {
            Record::Header(_) => return Err(RenderError::Malformed("second header".into())),
            Record::Actions { .. } => {}
            Record::Step(frame) => {
                if let Some(u) = frame.units.iter().find(|u| header.units.iter().all(|i| i.id != u.id)) {
                    return Err(RenderError::Malformed(format!(
                        "step {} mentions unknown unit {}",
                        frame.step, u.id
                    )));
                }
                frames.push(frame.clone());
            }
        }
    }
    let mut written = Vec::new();
    for frame in sample_frames(&frames, every_n) {
        let path = out_dir.join(format!("frame_{:06}.svg", frame.step));
        fs::write(&path, render_svg(header, frame))?;
        written.push(path);
    }
    Ok(written)
}

pub fn render_replay_file(replay: &Path, out_dir: &Path, every_n: u64) -> Result<Vec<PathBuf>, RenderError> {
    let records = read_records(BufReader::new(fs::File::open(replay)?)).map_err(|e| {
        if e.kind() == io::ErrorKind::InvalidData {
            RenderError::Malformed(e.to_string())
        } else {
            RenderError::Io(e)
        }
    })?;
    render_frames(&records, out_dir, every_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{UnitInfo, UnitRecord};

    fn header() -> Header {
        Header {
            scenario: "t".into(),
            seed: 0,
            width: 32,
            height: 32,
            obstacles: vec![[0.0, 0.0, 2.0, 1.0]],
            units: vec![UnitInfo {
                id: 0,
                faction: "ALLY".into(),
                unit_type: "MARINE".into(),
                radius: 0.5,
                max_health: 45.0,
                max_shield: 0.0,
            }],
        }
    }

    fn frame(step: u64) -> Frame {
        Frame {
            step,
            units: vec![UnitRecord {
                id: 0,
                x: 16.0,
                y: 16.0,
                health: 45.0,
                shield: 0.0,
                energy: 0.0,
                cooldown: 0.0,
                alive: true,
            }],
            ledger: Vec::new(),
        }
    }

    fn attr(svg: &str, prefix: &str, name: &str) -> f64 {
        let start = svg.find(prefix).unwrap();
        let tail = &svg[start..];
        let key = format!(" {name}=\"");
        let at = tail.find(&key).unwrap() + key.len();
        tail[at..].split('"').next().unwrap().parse().unwrap()
    }

    #[test]
    fn unit_maps_to_the_center() {
        let svg = render_svg(&header(), &frame(1));
        let width = 32.0 * PIXELS_PER_UNIT;
        assert_eq!(attr(&svg, "<circle class=\"unit\"", "cx") / width, 0.5);
        assert_eq!(attr(&svg, "<circle class=\"unit\"", "cy") / width, 0.5);
        assert_eq!(attr(&svg, "<circle class=\"unit\"", "r") / width, 1.0 / 64.0);
    }

    #[test]
    fn obstacles_are_flipped() {
        let svg = render_svg(&header(), &frame(1));
        assert_eq!(attr(&svg, "<rect class=\"obstacle\"", "y"), 31.0 * PIXELS_PER_UNIT);
    }

    #[test]
    fn sampling_keeps_multiples_and_the_last_frame() {
        let frames: Vec<Frame> = (1..=20).map(frame).collect();
        let steps: Vec<u64> = sample_frames(&frames, 8).iter().map(|f| f.step).collect();
        assert_eq!(steps, vec![8, 16, 20]);
    }

    #[test]
    fn empty_and_malformed_replays() {
        let dir = tempfile::tempdir().unwrap();
        assert!(render_frames(&[], dir.path(), 8).unwrap().is_empty());
        assert!(matches!(
            render_frames(&[Record::Step(frame(1))], dir.path(), 8),
            Err(RenderError::Malformed(_))
        ));
        assert!(matches!(render_frames(&[], dir.path(), 0), Err(RenderError::ZeroInterval)));
        let mut stray = frame(1);
        stray.units[0].id = 9;
        assert!(matches!(
            render_frames(&[Record::Header(header()), Record::Step(stray)], dir.path(), 1),
            Err(RenderError::Malformed(_))
        ));
    }

    #[test]
    fn writes_one_file_per_sampled_frame() {
        let dir = tempfile::tempdir().unwrap();
        let mut records = vec![Record::Header(header())];
        records.extend((1..=16).map(|s| Record::Step(frame(s))));
        let files = render_frames(&records, dir.path(), 8).unwrap();
        assert_eq!(files.len(), 2);
        assert!(fs::read_to_string(&files[1]).unwrap().contains("step 16"));
    }
}
