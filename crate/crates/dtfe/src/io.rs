//! Pattern, field and grid files.
//!
//! Patterns are CSV with header `x,ghost` or `x,y,ghost`. Fields are CSV
//! `cell_id,value,volume`, evaluation grids CSV `x[,y],dtfe,bd,kernelK`,
//! and tessellations JSON.

use std::io::{Read, Write};

use dtfe_core::estimators::IntensityEstimate;
use dtfe_core::geometry::{Dim, Point, PointPattern, Tessellation};
use serde::{Deserialize, Serialize};

use crate::Error;

pub fn read_pattern<R: Read>(reader: R) -> Result<PointPattern, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let dim = match headers
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .as_slice()
    {
        ["x", "ghost"] => Dim::One,
        ["x", "y", "ghost"] => Dim::Two,
        other => {
            return Err(Error::Input(format!(
                "pattern header must be `x,ghost` or `x,y,ghost`, got `{}`",
                other.join(",")
            )))
        }
    };
    let mut points = Vec::new();
    let mut ghost = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64, Error> {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("line {line}, column {}: {e}", headers[k])))
        };
        let p: Point = match dim {
            Dim::One => [num(0)?, 0.0],
            Dim::Two => [num(0)?, num(1)?],
        };
        let g = match &rec[dim.get()] {
            "0" => false,
            "1" => true,
            v => {
                return Err(Error::Input(format!(
                    "line {line}: ghost must be 0 or 1, got `{v}`"
                )))
            }
        };
        points.push(p);
        ghost.push(g);
    }
    Ok(PointPattern::new(dim, points, ghost)?)
}

pub fn write_pattern<W: Write>(writer: W, pattern: &PointPattern) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    match pattern.dim() {
        Dim::One => w.write_record(["x", "ghost"])?,
        Dim::Two => w.write_record(["x", "y", "ghost"])?,
    }
    for (p, g) in pattern.points().iter().zip(pattern.ghost_flags()) {
        let g = if *g { "1" } else { "0" };
        match pattern.dim() {
            Dim::One => w.write_record([p[0].to_string().as_str(), g])?,
            Dim::Two => w.write_record([p[0].to_string().as_str(), &p[1].to_string(), g])?,
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TessellationExport {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub ghost: Vec<bool>,
    /// Vertex indices of each Delaunay cell.
    pub cells: Vec<Vec<usize>>,
    pub volumes: Vec<f64>,
    /// Delaunay neighbours of each point.
    pub neighbors: Vec<Vec<usize>>,
    /// `|W(x_i)|`, the contiguous Voronoi cell volumes.
    pub contiguous_volumes: Vec<f64>,
}

impl TessellationExport {
    pub fn new(t: &Tessellation) -> Self {
        let d = t.dim().get();
        let base = t.base();
        TessellationExport {
            dim: d,
            points: base.points().iter().map(|p| p[..d].to_vec()).collect(),
            ghost: base.ghost_flags().to_vec(),
            cells: t.cells().map(<[usize]>::to_vec).collect(),
            volumes: t.cell_volumes().to_vec(),
            neighbors: (0..base.len()).map(|i| t.neighbors(i).to_vec()).collect(),
            contiguous_volumes: t.contiguous_volumes().to_vec(),
        }
    }
}

/// One row per Delaunay cell. The constant fallback for too few points
/// is written as a single row with id 0 covering the window.
pub fn write_field<W: Write>(writer: W, est: &IntensityEstimate) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cell_id", "value", "volume"])?;
    match est.tessellation() {
        Some(t) => {
            for (j, (v, vol)) in est.cell_values().iter().zip(t.cell_volumes()).enumerate() {
                w.serialize((j, v, vol))?;
            }
        }
        None => {
            let c = est.constant_value().unwrap_or(0.0);
            w.serialize((0, c, est.window().volume()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: Point,
    pub dtfe: f64,
    pub bd: Option<f64>,
    #[serde(rename = "kernelK")]
    pub kernel_k: Option<f64>,
}

/// Empty `bd`/`kernelK` cells mean no bandwidth was given.
pub fn write_grid<W: Write>(writer: W, dim: Dim, rows: &[GridRow]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    match dim {
        Dim::One => w.write_record(["x", "dtfe", "bd", "kernelK"])?,
        Dim::Two => w.write_record(["x", "y", "dtfe", "bd", "kernelK"])?,
    }
    for r in rows {
        let mut rec = vec![r.x[0].to_string()];
        if dim == Dim::Two {
            rec.push(r.x[1].to_string());
        }
        rec.extend([r.dtfe.to_string(), opt(r.bd), opt(r.kernel_k)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-replicate values, one column per evaluation point.
pub fn write_replicates<W: Write>(writer: W, values: &[Vec<f64>]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    let width = values.first().map_or(0, Vec::len);
    let mut header = vec!["replicate".to_string()];
    header.extend((0..width).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (r, row) in values.iter().enumerate() {
        let mut rec = vec![r.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dtfe_core::estimators::{dtfe_field, Correction};
    use dtfe_core::geometry::Window;

    #[test]
    fn pattern_round_trip() {
        let p = PointPattern::new(
            Dim::Two,
            vec![[0.1, 0.2], [1.5, -3.25], [2.0, 2.0]],
            vec![false, false, true],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_pattern(&mut buf, &p).unwrap();
        assert!(std::str::from_utf8(&buf)
            .unwrap()
            .starts_with("x,y,ghost\n0.1,0.2,0\n"));
        assert_eq!(read_pattern(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn bad_rows_are_located() {
        let err = read_pattern("x,ghost\n1.0,0\nabc,0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_pattern("x,y\n1,2\n".as_bytes()).is_err());
        assert!(read_pattern("x,ghost\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn field_csv() {
        let w = Window::interval(-2.0, 2.0).unwrap();
        let p = PointPattern::from_1d(&[-1.0, 1.0]).unwrap();
        let est = dtfe_field(&p, &w, Correction::GhostBoundary).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &est).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("cell_id,value,volume\n"));
    }
}
