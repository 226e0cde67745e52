//! Active-node ratio, coverage ratios and the per-deployment summary table.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{disc_contains, Disc, Point2D};

pub const DEFAULT_GRID_RESOLUTION: usize = 500;
pub const MIN_GRID_RESOLUTION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub deployed_count: usize,
    pub active_count: usize,
    pub cluster_count: usize,
    pub outlier_count: usize,
    /// Active nodes as a percentage of deployed nodes.
    pub ratio_r: f64,
    /// `active * pi * r^2 / area`, in percent, overlap ignored.
    pub analytic_cr: f64,
    /// Fraction of grid cell centers inside some active disc, in percent.
    pub grid_cr: f64,
}

/// `100 * active / deployed`.
pub fn active_ratio(active: usize, deployed: usize) -> f64 {
    assert!(deployed >= 1, "deployed count must be positive");
    100.0 * active as f64 / deployed as f64
}

/// Coverage ratio that multiplies one disc area by the active count.
///
/// Overlap between discs and clipping at the region border are ignored, so
/// the value is an upper bound and can exceed 100.
pub fn analytic_cr(active: usize, r: f64, area: f64) -> f64 {
    100.0 * active as f64 * PI * r * r / area
}

/// Boolean coverage raster over `[0, width] x [0, height]`, sampled at
/// `resolution x resolution` cell centers. Row `j` holds cells whose center
/// has `y = (j + 0.5) * height / resolution`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageGrid {
    resolution: usize,
    cells: Vec<bool>,
}

impl CoverageGrid {
    pub fn compute(discs: &[Disc], width: f64, height: f64, resolution: usize) -> Result<Self> {
        if resolution < MIN_GRID_RESOLUTION {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least {MIN_GRID_RESOLUTION}, got {resolution}"
            )));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidConfig("grid region must have positive size".into()));
        }
        let cw = width / resolution as f64;
        let ch = height / resolution as f64;
        let last = resolution as i64 - 1;
        let span = |lo: f64, hi: f64, step: f64| {
            let a = ((lo / step) - 0.5).floor().max(0.0) as i64;
            let b = (((hi / step) - 0.5).ceil() as i64).min(last);
            (a, b)
        };
        let mut cells = vec![false; resolution * resolution];
        for disc in discs {
            let (x0, x1) = span(disc.center.x - disc.radius, disc.center.x + disc.radius, cw);
            let (y0, y1) = span(disc.center.y - disc.radius, disc.center.y + disc.radius, ch);
            for j in y0.max(0)..=y1 {
                let y = (j as f64 + 0.5) * ch;
                for i in x0.max(0)..=x1 {
                    let k = j as usize * resolution + i as usize;
                    if !cells[k] && disc_contains(disc, Point2D::new((i as f64 + 0.5) * cw, y)) {
                        cells[k] = true;
                    }
                }
            }
        }
        Ok(Self { resolution, cells })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn covered(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.resolution + i]
    }

    pub fn percent(&self) -> f64 {
        let hit = self.cells.iter().filter(|&&c| c).count();
        100.0 * hit as f64 / self.cells.len() as f64
    }

    /// One CSV line per row of cells, `1` for covered and `0` otherwise.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut line = String::with_capacity(self.resolution * 2);
        for row in self.cells.chunks(self.resolution) {
            line.clear();
            for (i, &c) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push(if c { '1' } else { '0' });
            }
            line.push('\n');
            writer
                .write_all(line.as_bytes())
                .map_err(|e| Error::io("<coverage grid>", e))?;
        }
        Ok(())
    }
}

/// Grid estimate of the covered percentage of the region.
pub fn grid_cr(discs: &[Disc], width: f64, height: f64, resolution: usize) -> Result<f64> {
    Ok(CoverageGrid::compute(discs, width, height, resolution)?.percent())
}

/// Integer rounding with halves going up.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Summary of one deployment size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub deployed: usize,
    pub trials: Vec<usize>,
    /// Unrounded mean of the trials.
    pub mean_active: f64,
    /// Mean rounded half up.
    pub n: u64,
    /// Unrounded `100 * n / deployed`.
    pub ratio: f64,
    /// `100 * n / deployed` rounded up to the next integer percent.
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
    /// Mean of the integer `r` column.
    pub r_avg: f64,
}

impl ExperimentSummary {
    pub fn r_avg_display(&self) -> i64 {
        round_half_up(self.r_avg)
    }

    /// Writes `D,n1,n2,n3,N,R` rows (one `n` column per trial) followed by
    /// an `R_avg` footer carrying the rounded average in the `R` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let k = self.rows.iter().map(|r| r.trials.len()).max().unwrap_or(0);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["D".to_string()];
        header.extend((1..=k).map(|i| format!("n{i}")));
        header.extend(["N".to_string(), "R".to_string()]);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.deployed.to_string()];
            rec.extend((0..k).map(|i| row.trials.get(i).map(|v| v.to_string()).unwrap_or_default()));
            rec.extend([row.n.to_string(), row.r.to_string()]);
            w.write_record(&rec)?;
        }
        let mut footer = vec!["R_avg".to_string()];
        footer.extend(std::iter::repeat_n(String::new(), k + 1));
        footer.push(self.r_avg_display().to_string());
        w.write_record(&footer)?;
        w.flush().map_err(|e| Error::io("<summary csv>", e))?;
        Ok(())
    }
}

/// Builds the per-D summary from the active counts of each trial.
///
/// `N` is the trial mean rounded half up; `R` is `100 * N / D` rounded up
/// to a whole percent (82/300 -> 28, 152/500 -> 31).
pub fn summarize_experiment(trials: &[(usize, Vec<usize>)]) -> Result<ExperimentSummary> {
    let mut rows = Vec::with_capacity(trials.len());
    for (deployed, counts) in trials {
        let (deployed, k) = (*deployed as u64, counts.len() as u64);
        if deployed == 0 {
            return Err(Error::InvalidInput("deployed count must be positive".into()));
        }
        if k == 0 {
            return Err(Error::InvalidInput(format!("no trials for D = {deployed}")));
        }
        let sum: u64 = counts.iter().map(|&c| c as u64).sum();
        let n = (2 * sum + k) / (2 * k);
        let r = (100 * n).div_ceil(deployed);
        rows.push(SummaryRow {
            deployed: deployed as usize,
            trials: counts.clone(),
            mean_active: sum as f64 / k as f64,
            n,
            ratio: 100.0 * n as f64 / deployed as f64,
            r,
        });
    }
    let r_avg = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.r as f64).sum::<f64>() / rows.len() as f64
    };
    Ok(ExperimentSummary { rows, r_avg })
}
