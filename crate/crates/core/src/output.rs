//! Files written by the command-line runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;
use crate::experiment::RateFit;

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub config_hash: String,
    pub output_dir: PathBuf,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: Option<&Path>,
        config_hash: String,
        output_dir: &Path,
        elapsed: Duration,
    ) -> Self {
        Self {
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            config_hash,
            output_dir: output_dir.to_path_buf(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Log-log scatter of per-replicate sup errors, per-`eps` means and the
/// fitted line.
pub fn rates_svg(fit: &RateFit) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;

    let positive: Vec<(f64, f64)> = fit
        .records
        .iter()
        .filter(|r| r.sup_error > 0.0)
        .map(|r| (r.epsilon.log10(), r.sup_error.log10()))
        .collect();
    let means: Vec<(f64, f64)> = fit
        .per_epsilon
        .iter()
        .filter(|s| s.mean_error > 0.0)
        .map(|s| (s.epsilon.log10(), s.mean_error.log10()))
        .collect();
    let all = positive.iter().chain(&means);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (-1.0, 0.0, -1.0, 0.0);
    }
    let (x0, x1) = (x0 - 0.1, x1 + 0.1);
    let (y0, y1) = (y0 - 0.1, y1 + 0.1);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{tb}\" text-anchor=\"middle\" font-size=\"14\">log10 eps</text>\n\
         <text x=\"15\" y=\"{cy}\" font-size=\"14\" transform=\"rotate(-90 15 {cy})\">log10 sup error</text>\n",
        b = H - PAD,
        r = W - PAD,
        cx = W / 2.0,
        cy = H / 2.0,
        tb = H - 15.0,
    );
    for (x, y) in &positive {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#4477aa\" fill-opacity=\"0.4\"/>\n",
            px(*x),
            py(*y)
        ));
    }
    for (x, y) in &means {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#cc3311\"/>\n",
            px(*x),
            py(*y)
        ));
    }
    if let (Some(first), Some(last)) = (means.first(), means.last()) {
        // Line through the mean centroid with the fitted slope.
        let n = means.len() as f64;
        let mx = means.iter().map(|p| p.0).sum::<f64>() / n;
        let my = means.iter().map(|p| p.1).sum::<f64>() / n;
        let line = |x: f64| my + fit.slope * (x - mx);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cc3311\"/>\n",
            px(first.0),
            py(line(first.0)),
            px(last.0),
            py(line(last.0))
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"30\" font-size=\"14\">slope {:.3} +/- {:.3}</text>\n</svg>\n",
        PAD, fit.slope, fit.slope_stderr
    ));
    s
}
