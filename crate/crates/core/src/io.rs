//! Text and binary trace files.
//!
//! CSV numbers are written in scientific notation with 15 significant digits so that
//! repeated runs can be compared byte for byte.
//!
//! Binary density snapshots are little-endian:
//!
//! | field       | type  |
//! |-------------|-------|
//! | n_points    | u64   |
//! | extent      | f64   |
//! | n_times     | u64   |
//! | times       | f64 x n_times |
//! | densities   | f64 x (n_times * n_points), row-major, one row per time |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::propagation::DensityTrace;

pub fn format_value(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn write_csv<W: Write>(mut out: W, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "row of {} values for {} columns",
                row.len(),
                header.len()
            )));
        }
        let line: Vec<String> = row.into_iter().map(format_value).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(&mut out, header, rows)?;
    out.flush()?;
    Ok(())
}

/// Header and numeric rows of a CSV file written by [`write_csv`].
pub fn read_csv_file(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header: Vec<String> = match lines.next() {
        Some(line) => line?.split(',').map(str::to_owned).collect(),
        None => return Err(Error::InvalidParameter(format!("{} is empty", path.display()))),
    };
    let mut rows = Vec::new();
    for (number, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("{} line {}: {e}", path.display(), number + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "{} line {}: {} values for {} columns",
                path.display(),
                number + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Columns `t, x_0, ..., x_{n-1}`; the header carries the grid positions.
pub fn write_density_csv(path: &Path, trace: &DensityTrace) -> Result<()> {
    let mut header = vec!["t".to_owned()];
    header.extend(trace.grid.points().into_iter().map(format_value));
    let rows = trace.times.iter().zip(&trace.densities).map(|(t, n)| {
        let mut row = Vec::with_capacity(n.len() + 1);
        row.push(*t);
        row.extend_from_slice(n);
        row
    });
    write_csv_file(path, &header, rows)
}

/// Times and densities stored in a binary snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshots {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

impl DensitySnapshots {
    /// Reattaches provenance to build a trace.
    pub fn into_trace(self, source: crate::propagation::TraceSource, tau: f64) -> DensityTrace {
        let mut trace = DensityTrace::new(source, self.grid, tau);
        for (t, n) in self.times.into_iter().zip(self.densities) {
            trace.push(t, n);
        }
        trace
    }
}

pub fn write_density_binary<W: Write>(mut out: W, trace: &DensityTrace) -> Result<()> {
    out.write_all(&(trace.grid.n_points() as u64).to_le_bytes())?;
    out.write_all(&trace.grid.extent().to_le_bytes())?;
    out.write_all(&(trace.len() as u64).to_le_bytes())?;
    for t in &trace.times {
        out.write_all(&t.to_le_bytes())?;
    }
    for n in &trace.densities {
        for v in n {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_density_binary<R: Read>(mut input: R) -> Result<DensitySnapshots> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let n_points = u64::from_le_bytes(next(&mut input)?) as usize;
    let extent = f64::from_le_bytes(next(&mut input)?);
    let n_times = u64::from_le_bytes(next(&mut input)?) as usize;
    let grid = Grid1D::new(extent, n_points)?;
    let times = (0..n_times)
        .map(|_| Ok(f64::from_le_bytes(next(&mut input)?)))
        .collect::<Result<Vec<f64>>>()?;
    let densities = (0..n_times)
        .map(|_| {
            (0..n_points)
                .map(|_| Ok(f64::from_le_bytes(next(&mut input)?)))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(DensitySnapshots { grid, times, densities })
}

pub fn write_density_binary_file(path: &Path, trace: &DensityTrace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_density_binary(&mut out, trace)?;
    out.flush()?;
    Ok(())
}

pub fn read_density_binary_file(path: &Path) -> Result<DensitySnapshots> {
    read_density_binary(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::propagation::TraceSource;

    fn trace() -> DensityTrace {
        let g = make_grid(2.0, 16).unwrap();
        let mut trace = DensityTrace::new(TraceSource::Exact, g, 0.5);
        for k in 0..3 {
            let t = 0.5 * k as f64;
            trace.push(
                t,
                g.points()
                    .iter()
                    .map(|x| (-(x - t) * (x - t)).exp() / 3.0f64.sqrt())
                    .collect(),
            );
        }
        trace
    }

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(format_value(0.25), "2.50000000000000e-1");
        assert_eq!(format_value(-1234.5), "-1.23450000000000e3");
        assert_eq!(format_value(0.0), "0.00000000000000e0");
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let tr = trace();
        let mut bytes = Vec::new();
        write_density_binary(&mut bytes, &tr).unwrap();
        assert_eq!(bytes.len(), 8 * (3 + 3 + 3 * 16));
        assert_eq!(&bytes[..8], &16u64.to_le_bytes());
        let back = read_density_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.grid, tr.grid);
        assert_eq!(back.times, tr.times);
        assert_eq!(back.densities, tr.densities);
        assert!(read_density_binary(&bytes[..30]).is_err());
    }

    #[test]
    fn csv_round_trip_to_print_precision() {
        let dir = std::env::temp_dir().join(format!("qdot-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("density.csv");
        let tr = trace();
        write_density_csv(&path, &tr).unwrap();
        let (header, rows) = read_csv_file(&path).unwrap();
        assert_eq!(header.len(), 17);
        assert_eq!(header[0], "t");
        assert_eq!(header[1], "-2.00000000000000e0");
        for (row, (t, n)) in rows.iter().zip(tr.times.iter().zip(&tr.densities)) {
            assert_eq!(row[0], *t);
            for (a, b) in row[1..].iter().zip(n) {
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300));
            }
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let header = vec!["a".to_owned(), "b".to_owned()];
        assert!(write_csv(Vec::new(), &header, vec![vec![1.0]]).is_err());
    }
}
