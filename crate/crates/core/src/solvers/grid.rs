use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::SolverError;

/// Scheme metadata carried with every grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual_history: Vec<f64>,
}

/// `φ` sampled at `y = y0 + i·hy`, `z = z0 + j·hz`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub y0: f64,
    pub z0: f64,
    pub hy: f64,
    pub hz: f64,
    pub values: Array2<f64>,
    pub meta: SolverMeta,
}

/// The JSON header written next to a grid CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub y_range: [f64; 2],
    pub z_range: [f64; 2],
    pub hy: f64,
    pub hz: f64,
    pub ny: usize,
    pub nz: usize,
    #[serde(flatten)]
    pub meta: SolverMeta,
}

#[derive(Deserialize)]
struct Row {
    y: f64,
    z: f64,
    phi: f64,
}

impl GridSolution {
    pub fn new(y0: f64, z0: f64, hy: f64, hz: f64, values: Array2<f64>, meta: SolverMeta) -> Self {
        GridSolution { y0, z0, hy, hz, values, meta }
    }

    pub fn ny(&self) -> usize {
        self.values.nrows()
    }

    pub fn nz(&self) -> usize {
        self.values.ncols()
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y0 + i as f64 * self.hy
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z0 + j as f64 * self.hz
    }

    pub fn y_range(&self) -> [f64; 2] {
        [self.y0, self.y(self.ny() - 1)]
    }

    pub fn z_range(&self) -> [f64; 2] {
        [self.z0, self.z(self.nz() - 1)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest `|φ − exact|` over the grid.
    pub fn max_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        self.values
            .indexed_iter()
            .map(|((i, j), v)| (v - exact(self.y(i), self.z(j))).abs())
            .fold(0.0, f64::max)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            y_range: self.y_range(),
            z_range: self.z_range(),
            hy: self.hy,
            hz: self.hz,
            ny: self.ny(),
            nz: self.nz(),
            meta: self.meta.clone(),
        }
    }

    /// Writes `y,z,phi` rows, `y` outermost.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["y", "z", "phi"])?;
        for ((i, j), v) in self.values.indexed_iter() {
            w.write_record(&[self.y(i).to_string(), self.z(j).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a grid back from its header and CSV rows.
    pub fn read_csv<R: Read>(header: &GridHeader, input: R) -> Result<GridSolution, SolverError> {
        let bad = |m: String| SolverError::Setup(m);
        let mut values = Array2::<f64>::from_elem((header.ny, header.nz), f64::NAN);
        let mut rdr = csv::Reader::from_reader(input);
        let mut count = 0usize;
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| bad(format!("grid csv: {e}")))?;
            let i = ((row.y - header.y_range[0]) / header.hy).round();
            let j = ((row.z - header.z_range[0]) / header.hz).round();
            if i < 0.0 || j < 0.0 || i as usize >= header.ny || j as usize >= header.nz {
                return Err(bad(format!("row ({}, {}) outside the header's grid", row.y, row.z)));
            }
            values[(i as usize, j as usize)] = row.phi;
            count += 1;
        }
        if count != header.ny * header.nz || values.iter().any(|v| v.is_nan()) {
            return Err(bad(format!("expected {} grid rows, got {count}", header.ny * header.nz)));
        }
        Ok(GridSolution::new(header.y_range[0], header.z_range[0], header.hy, header.hz, values, header.meta.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let values = Array2::from_shape_fn((3, 4), |(i, j)| i as f64 * 0.5 - j as f64 / 3.0);
        let g = GridSolution::new(-1.0, 0.0, 0.5, 0.25, values, SolverMeta { scheme: "test".into(), ..Default::default() });
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("y,z,phi\n-1,0,0\n"));
        let h: GridHeader = serde_json::from_str(&serde_json::to_string(&g.header()).unwrap()).unwrap();
        assert_eq!(h.ny, 3);
        assert_eq!(h.z_range, [0.0, 0.75]);
        let back = GridSolution::read_csv(&h, buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }
}
