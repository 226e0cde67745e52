//! Round trace in JSON lines: one record per simulated round.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Disc;
use crate::metrics::{CoverageGrid, RoundReport};
use crate::network::{Deployment, NodeId};
use crate::optics::OrderedPoint;
use crate::protocol::{RoundOutput, SelectionTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub deployed: usize,
    pub trial: usize,
    pub seed: u64,
    pub round: usize,
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    pub active: Vec<NodeId>,
    /// `[x, y]` of each id in `active`, same order.
    pub active_positions: Vec<[f64; 2]>,
    pub trees: Vec<SelectionTree>,
    pub report: RoundReport,
    pub ordering: Vec<OrderedPoint>,
}

impl TraceRecord {
    pub fn from_round(trial: usize, deployment: &Deployment, output: &RoundOutput) -> Self {
        Self {
            deployed: deployment.len(),
            trial,
            seed: deployment.seed,
            round: output.report.round,
            width: deployment.width,
            height: deployment.height,
            radius: deployment.radius,
            active: output.active.clone(),
            active_positions: output
                .active
                .iter()
                .map(|&id| {
                    let p = deployment.nodes[id].position;
                    [p.x, p.y]
                })
                .collect(),
            trees: output.trees.clone(),
            report: output.report,
            ordering: output.ordering.clone(),
        }
    }

    /// Short file stem identifying the round, e.g. `D100_t0_r1`.
    pub fn stem(&self) -> String {
        format!("D{}_t{}_r{}", self.deployed, self.trial, self.round)
    }

    pub fn coverage_grid(&self, resolution: usize) -> Result<CoverageGrid> {
        let discs: Vec<Disc> = self
            .active_positions
            .iter()
            .map(|&[x, y]| Disc::new(crate::geometry::Point2D::new(x, y), self.radius))
            .collect::<Result<_>>()?;
        CoverageGrid::compute(&discs, self.width, self.height, resolution)
    }
}

pub fn write_record<W: Write>(mut writer: W, record: &TraceRecord) -> Result<()> {
    serde_json::to_writer(&mut writer, record)?;
    writer
        .write_all(b"\n")
        .map_err(|e| Error::io("<trace>", e))
}

/// Parses a trace; blank lines are ignored, an empty trace is an error.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<trace>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidInput(format!("trace line {}: {e}", i + 1)))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::InvalidInput("trace contains no records".into()));
    }
    Ok(records)
}
