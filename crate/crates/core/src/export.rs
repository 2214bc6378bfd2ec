//! CSV artifacts for pedal meshes, parabolic curves and indicatrix branches.

use std::io::Write;

use crate::error::{Error, Result};
use crate::indicatrix::IndicatrixResult;
use crate::loci::{ParabolicCurve, PedalMesh};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_pedal_csv<W: Write>(out: W, mesh: &PedalMesh) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "dir1", "dir2", "dir3", "dir4", "support"]).map_err(csv_err)?;
    for n in &mesh.nodes {
        let d = n.pedal.direction.0;
        w.serialize((n.x, n.y, d[0], d[1], d[2], d[3], n.pedal.support)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// One row per curve point; a point carries the flag of the segment that
/// starts there (the last point of an open curve repeats the final flag).
pub fn write_curves_csv<W: Write>(out: W, curves: &[ParabolicCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve_id", "x", "y", "kl_value", "transversal"]).map_err(csv_err)?;
    for (id, c) in curves.iter().enumerate() {
        for (k, (p, kv)) in c.points.iter().zip(&c.kl_values).enumerate() {
            let flag = c.transversal.get(k).or(c.transversal.last()).copied().unwrap_or(false);
            w.serialize((id, p.0, p.1, kv, flag)).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_indicatrix_csv<W: Write>(out: W, result: &IndicatrixResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["branch_id", "x", "y"]).map_err(csv_err)?;
    for (id, line) in result.polylines.iter().enumerate() {
        for p in line {
            w.serialize((id, p.0, p.1)).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
