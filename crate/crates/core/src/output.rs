//! File outputs of a scenario run: the entropy series, snapshot grids,
//! the configuration echo and optional grayscale heatmaps.
//!
//! All CSV files are UTF-8 with LF line endings and reals formatted as
//! C-style `%.12e`. Output is byte-deterministic for a fixed
//! configuration.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::ArrayView2;

use crate::error::Result;
use crate::scenario::{ScenarioConfig, ScenarioResult, Snapshot};

/// Format a real as C-style `%.12e` (two-or-more exponent digits with
/// an explicit sign), e.g. `3.648057207438e+00`.
pub fn fmt_e12(x: f64) -> String {
    let base = format!("{x:.12e}");
    let (mantissa, exponent) = base
        .split_once('e')
        .expect("exponential format always contains 'e'");
    let exp: i32 = exponent.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Write `entropy.csv`: header `t,wse_half,cse_half`, one row per time
/// step, the classical column left empty where it was strided out.
pub fn write_entropy_csv(path: &Path, result: &ScenarioResult) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(b"t,wse_half,cse_half\n")?;
    for row in &result.series.rows {
        let cse = row.cse_half.map(fmt_e12).unwrap_or_default();
        writeln!(out, "{},{},{}", row.t, fmt_e12(row.wse_half), cse)?;
    }
    out.flush()?;
    Ok(())
}

/// Write a matrix as rows of comma-separated `%.12e` reals.
pub fn write_grid_csv(path: &Path, grid: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for row in grid.rows() {
        let line: Vec<String> = row.iter().map(|v| fmt_e12(*v)).collect();
        out.write_all(line.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Render a matrix as a linear-grayscale PNG (min maps to black, max
/// to white).
pub fn write_png(path: &Path, grid: ArrayView2<'_, f64>) -> Result<()> {
    let (rows, cols) = grid.dim();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in grid.iter() {
        min = min.min(v);
        max = max.max(v);
    }
    let span = if max > min { max - min } else { 1.0 };
    let mut img = image::GrayImage::new(cols as u32, rows as u32);
    for ((r, c), &v) in grid.indexed_iter() {
        let level = ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8;
        img.put_pixel(c as u32, r as u32, image::Luma([level]));
    }
    img.save(path)?;
    Ok(())
}

/// Write the `config_echo` key-value file recording every effective
/// parameter of a run.
pub fn write_config_echo(path: &Path, config: &ScenarioConfig, png: bool) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let snaps: Vec<String> = config.snapshot_times.iter().map(|t| t.to_string()).collect();
    let space = crate::torus::TorusHilbert::new(config.dim.max(2))
        .expect("validated configuration has dim >= 2");
    for (key, value) in [
        ("case", config.case.label().to_string()),
        ("dim", config.dim.to_string()),
        ("k", fmt_e12(config.k)),
        ("kc", fmt_e12(config.kc)),
        ("q1", fmt_e12(config.center1.0)),
        ("p1", fmt_e12(config.center1.1)),
        ("q2", fmt_e12(config.center2.0)),
        ("p2", fmt_e12(config.center2.1)),
        ("steps", config.steps.to_string()),
        ("cse_stride", config.cse_stride.to_string()),
        ("cse_enabled", config.cse_enabled.to_string()),
        ("subsample", config.subsample.to_string()),
        ("nc", config.dim.to_string()),
        ("hbar", fmt_e12(space.hbar())),
        ("snapshot_times", snaps.join(",")),
        ("snapshot_wigner", "mode1_reduced_2Nx2N".to_string()),
        ("snapshot_liouville", "q1p1_marginal_NcxNc".to_string()),
        ("serial", config.serial.to_string()),
        ("png", png.to_string()),
    ] {
        writeln!(out, "{key}={value}")?;
    }
    out.flush()?;
    Ok(())
}

/// Write every output of a completed run into `out_dir`.
pub fn emit_outputs(
    result: &ScenarioResult,
    config: &ScenarioConfig,
    out_dir: &Path,
    png: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let entropy = out_dir.join("entropy.csv");
    write_entropy_csv(&entropy, result)?;
    written.push(entropy);

    for Snapshot {
        t,
        wigner_dof1,
        liouville_q1p1,
    } in &result.snapshots
    {
        let wigner_path = out_dir.join(format!("wigner_dof1_t{t}.csv"));
        write_grid_csv(&wigner_path, wigner_dof1.view())?;
        written.push(wigner_path);

        let liouville_path = out_dir.join(format!("liouville_q1p1_t{t}.csv"));
        write_grid_csv(&liouville_path, liouville_q1p1.view())?;
        written.push(liouville_path);

        if png {
            let wigner_png = out_dir.join(format!("wigner_dof1_t{t}.png"));
            write_png(&wigner_png, wigner_dof1.view())?;
            written.push(wigner_png);

            let liouville_png = out_dir.join(format!("liouville_q1p1_t{t}.png"));
            write_png(&liouville_png, liouville_q1p1.view())?;
            written.push(liouville_png);
        }
    }

    let echo = out_dir.join("config_echo");
    write_config_echo(&echo, config, png)?;
    written.push(echo);

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e12_matches_c_formatting() {
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(38.4), "3.840000000000e+01");
        assert_eq!(fmt_e12(-0.00125), "-1.250000000000e-03");
        assert_eq!(fmt_e12(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e12(6.02214076e23), "6.022140760000e+23");
        assert_eq!(fmt_e12(3.648057207437728), "3.648057207438e+00");
    }
}
