//! CSV tables and matrix dumps.
//!
//! CSV: `#`-prefixed comment lines, one header line, then comma-separated
//! rows. Floats are written with 17 significant digits.
//!
//! Binary matrix layout: the 4 bytes `HHMX`, rows and columns as
//! little-endian `u64`, then the entries row-major as little-endian `f64`.

use std::io::{self, BufRead, Read, Write};

use nalgebra::DMatrix;

use crate::basis::BasisFunction;
use crate::potential::{self, PotentialError, PotentialModel};

pub const MATRIX_MAGIC: &[u8; 4] = b"HHMX";

/// Full-precision float formatting used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { comments: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| fmt_f64(v)).collect());
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV cells are UTF-8")
    }

    pub fn read_from(r: impl BufRead) -> io::Result<Self> {
        let mut table = CsvTable::default();
        let mut have_header = false;
        for line in r.lines() {
            let line = line?;
            if let Some(comment) = line.strip_prefix('#') {
                table.comments.push(comment.trim_start().to_string());
            } else if line.trim().is_empty() {
                continue;
            } else if !have_header {
                table.columns = line.split(',').map(str::to_string).collect();
                have_header = true;
            } else {
                table.rows.push(line.split(',').map(str::to_string).collect());
            }
        }
        Ok(table)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parses one column as floats.
    pub fn float_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows.iter().map(|row| row.get(idx)?.parse().ok()).collect()
    }
}

pub fn write_matrix_binary(mut w: impl Write, m: &DMatrix<f64>) -> io::Result<()> {
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary(mut r: impl Read) -> io::Result<DMatrix<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a matrix dump"));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn matrix_table(m: &DMatrix<f64>) -> CsvTable {
    let mut table = CsvTable::new((0..m.ncols()).map(|j| format!("c{j}")));
    for i in 0..m.nrows() {
        table.push_floats(&m.row(i).iter().copied().collect::<Vec<_>>());
    }
    table
}

/// `index,kind,nu,norm`.
pub fn basis_table(functions: &[BasisFunction]) -> CsvTable {
    let mut table = CsvTable::new(["index", "kind", "nu", "norm"]);
    for (i, f) in functions.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), f.kind.to_string(), fmt_f64(f.nu), fmt_f64(f.norm)]);
    }
    table
}

/// `R,V_BO,V_scaled,delta_lep_mh`.
pub fn potential_curve_table(
    bo: &PotentialModel,
    scaled: &PotentialModel,
    grid: &[f64],
) -> Result<CsvTable, PotentialError> {
    let mut table = CsvTable::new(["R", "V_BO", "V_scaled", "delta_lep_mh"]);
    for &r in grid {
        table.push_floats(&[r, bo.eval(r)?, scaled.eval(r)?, potential::delta_lep(bo, scaled, r)?]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build, BasisSpec};
    use crate::potential::Flavor;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -459.28810584, 1e-300, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(["a", "b"]);
        t.comment("hello");
        t.push_floats(&[1.0, 2.5]);
        let text = t.to_string_lossy();
        assert!(text.starts_with("# hello\na,b\n"));
        let back = CsvTable::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.float_column("b").unwrap(), vec![2.5]);
    }

    #[test]
    fn binary_matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, -6.5]);
        let mut buf = Vec::new();
        write_matrix_binary(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 4 + 16 + 6 * 8);
        assert_eq!(f64::from_le_bytes(buf[20..28].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(buf[28..36].try_into().unwrap()), 2.0);
        assert_eq!(read_matrix_binary(buf.as_slice()).unwrap(), m);
        assert!(read_matrix_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn basis_dump_columns() {
        let t = basis_table(&build(&BasisSpec::new(2, 1.0, 4.0, 0)).unwrap());
        assert_eq!(t.columns, ["index", "kind", "nu", "norm"]);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[1][1], "sin");
    }

    #[test]
    fn potential_dump_columns() {
        let bo = PotentialModel::load_builtin(Flavor::BornOppenheimer);
        let sc = PotentialModel::load_builtin(Flavor::MassScaled);
        let t = potential_curve_table(&bo, &sc, &[1.0, 2.0]).unwrap();
        assert_eq!(t.columns, ["R", "V_BO", "V_scaled", "delta_lep_mh"]);
        assert!(potential_curve_table(&bo, &sc, &[0.0]).is_err());
    }
}
