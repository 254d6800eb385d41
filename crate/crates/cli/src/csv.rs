//! Trace export as CSV.

use std::io::{self, BufRead, Write};

use funnelim::SimulationTrace;

fn vector_names(base: &str, m: usize) -> Vec<String> {
    if m == 1 {
        vec![base.to_string()]
    } else {
        (1..=m).map(|i| format!("{base}_{i}")).collect()
    }
}

/// `t,y,y_ref,e1,psi1,…,e{r},psi{r},k,w,u`; vector columns get a `_j`
/// suffix when there is more than one channel.
pub fn header(m: usize, r: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(vector_names("y", m));
    cols.extend(vector_names("y_ref", m));
    for level in 1..=r {
        cols.extend(vector_names(&format!("e{level}"), m));
        cols.push(format!("psi{level}"));
    }
    cols.push("k".into());
    cols.extend(vector_names("w", m));
    cols.extend(vector_names("u", m));
    cols
}

/// Writes every recorded sample with `precision` significant digits.
pub fn write_trace(out: &mut impl Write, trace: &SimulationTrace<f64>, precision: usize) -> io::Result<()> {
    let digits = precision.clamp(1, 17) - 1;
    writeln!(out, "{}", header(trace.m, trace.r).join(","))?;
    let mut row = String::new();
    for s in &trace.samples {
        row.clear();
        let mut push = |v: f64| {
            if !row.is_empty() {
                row.push(',');
            }
            row.push_str(&format!("{v:.digits$e}"));
        };
        push(s.t);
        s.y.iter().for_each(|&v| push(v));
        s.y_ref.iter().for_each(|&v| push(v));
        for level in 0..trace.r {
            s.errors.column(level).iter().for_each(|&v| push(v));
            push(s.psi[level]);
        }
        push(s.k);
        s.w.iter().for_each(|&v| push(v));
        s.u.iter().for_each(|&v| push(v));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Parsed CSV: header and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_table(input: impl BufRead) -> io::Result<Table> {
    let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = input.lines();
    let header: Vec<String> = match lines.next() {
        Some(line) => line?.split(',').map(str::to_string).collect(),
        None => return Err(invalid("empty CSV".into())),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| invalid(format!("row {}: {e}", i + 1))))
            .collect::<io::Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(invalid(format!("row {} has {} fields, header has {}", i + 1, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}
