//! Text, CSV and JSON file formats.
//!
//! Floats in text and CSV files are written with 17 significant digits
//! (`%.17g`, trailing zeros dropped), which round-trips every `f64`. JSON
//! goes through `serde_json`, whose shortest round-trip output is also exact.

use std::io::{self, BufRead, Write};

use rag_core::{AnnulusParams, GraphCounts, PositionSet};
use serde::Serialize;

use crate::harness::ExperimentRecord;

/// `%.17g` with trailing fractional zeros removed.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `# rag n=<n> r1=<r1> r2=<r2> seed=<seed>` followed by one `i j` line per
/// edge, `i < j`.
pub fn write_edge_list<W: Write>(
    mut w: W,
    params: &AnnulusParams,
    seed: u64,
    edges: &[(usize, usize)],
) -> io::Result<()> {
    writeln!(w, "# rag n={} r1={} r2={} seed={seed}", params.n(), fmt_f64(params.r1()), fmt_f64(params.r2()))?;
    for (i, j) in edges {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListFile {
    /// Node count from the header, if present.
    pub n: Option<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Reads an edge list. `#` lines are comments; an `n=<n>` token in a comment
/// sets the node count.
pub fn read_edge_list<R: BufRead>(r: R) -> io::Result<EdgeListFile> {
    let mut out = EdgeListFile { n: None, edges: Vec::new() };
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.split_whitespace().find_map(|t| t.strip_prefix("n=")) {
                out.n = Some(n.parse().map_err(|_| invalid(lineno, "bad node count"))?);
            }
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(i)), Some(Ok(j)), None) => out.edges.push((i, j)),
            _ => return Err(invalid(lineno, "expected two node indices")),
        }
    }
    Ok(out)
}

fn invalid(lineno: usize, what: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {what}", lineno + 1))
}

/// CSV with header `index,position`.
pub fn write_positions<W: Write>(w: W, ps: &PositionSet) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["index", "position"])?;
    for (i, &x) in ps.positions().iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a positions CSV; rows must be in index order.
pub fn read_positions<R: io::Read>(r: R) -> csv::Result<Vec<f64>> {
    #[derive(serde::Deserialize)]
    struct Row {
        index: usize,
        position: f64,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        if row.index != out.len() {
            return Err(csv::Error::from(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("expected index {}, found {}", out.len(), row.index),
            )));
        }
        out.push(row.position);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsDump {
    pub n: usize,
    pub r1: f64,
    pub r2: f64,
    pub ordered_triangles: u64,
    pub ordered_paths: u64,
    pub max_degree: u32,
}

impl CountsDump {
    pub fn new(params: &AnnulusParams, counts: &GraphCounts) -> Self {
        Self {
            n: params.n(),
            r1: params.r1(),
            r2: params.r2(),
            ordered_triangles: counts.ordered_triangles,
            ordered_paths: counts.ordered_paths,
            max_degree: counts.max_degree(),
        }
    }
}

pub const RECORD_HEADER: [&str; 7] =
    ["replicate", "seed", "cn", "ordered_triangles", "ordered_paths", "standardized", "duration_ms"];

/// One row per replicate. Undefined values and untimed runs leave the field
/// empty.
pub fn write_records<W: Write>(w: W, records: &[ExperimentRecord]) -> csv::Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_writer(w);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.replicate.to_string(),
            r.seed.to_string(),
            opt(r.cn),
            r.ordered_triangles.to_string(),
            r.ordered_paths.to_string(),
            opt(r.standardized),
            opt(r.duration_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Serialises a table of flat rows as CSV, header taken from field names.
/// Floats use the same 17-digit form as the other CSV writers; `None` is an
/// empty field.
pub fn write_csv_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> csv::Result<()> {
    use serde_json::Value;
    let mut w = csv::Writer::from_writer(w);
    for (k, row) in rows.iter().enumerate() {
        let Value::Object(fields) = serde_json::to_value(row).map_err(io::Error::from)? else {
            return Err(csv::Error::from(io::Error::new(io::ErrorKind::InvalidInput, "CSV rows must be structs")));
        };
        if k == 0 {
            w.write_record(fields.keys())?;
        }
        w.write_record(fields.values().map(|v| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            Value::Number(x) if x.is_f64() => fmt_f64(x.as_f64().unwrap_or(f64::NAN)),
            other => other.to_string(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_floats() {
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-2.25), "-2.25");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1e-7), "9.9999999999999995e-08");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_f64(123456.0), "123456");
        for x in [0.1875, 1.0 / 3.0, 6.02e23, -1.5e-300, 0.999_999_999_999_999_9, 0.0001] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x, "{x}");
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let p = AnnulusParams::new(4, 0.3, 0.1).unwrap();
        let edges = vec![(0, 1), (1, 3), (2, 3)];
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &p, 7, &edges).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# rag n=4 r1=0.29999999999999999 r2=0.10000000000000001 seed=7\n0 1\n"));
        let back = read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, EdgeListFile { n: Some(4), edges });
        assert!(read_edge_list(&b"0 1 2\n"[..]).is_err());
        assert!(read_edge_list(&b"0 x\n"[..]).is_err());
    }

    #[test]
    fn positions_round_trip() {
        let ps = PositionSet::from_positions(vec![0.1, 0.0, 0.999_999_999_999]).unwrap();
        let mut buf = Vec::new();
        write_positions(&mut buf, &ps).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("index,position\n0,0.10000000000000001\n1,0\n"));
        assert_eq!(read_positions(&buf[..]).unwrap(), ps.positions());
        assert!(read_positions(&b"index,position\n1,0.5\n"[..]).is_err());
    }

    #[test]
    fn records_leave_undefined_fields_empty() {
        let rec = ExperimentRecord {
            replicate: 3,
            seed: 9,
            cn: None,
            ordered_triangles: 0,
            ordered_paths: 0,
            standardized: None,
            duration_ms: None,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[rec]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "replicate,seed,cn,ordered_triangles,ordered_paths,standardized,duration_ms\n3,9,,0,0,,\n"
        );
    }

    #[test]
    fn csv_rows_use_seventeen_digits() {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            label: &'static str,
            x: f64,
            y: Option<f64>,
        }
        let mut buf = Vec::new();
        write_csv_rows(&mut buf, &[Row { n: 2, label: "a", x: 0.1, y: None }, Row { n: 3, label: "b", x: 0.0, y: Some(1.5) }])
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,label,x,y\n2,a,0.10000000000000001,\n3,b,0,1.5\n");
    }
}
