use std::io::Write;

/// A rectangular CSV table with an optional trailing summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    trailer: Option<String>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            trailer: None,
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn trailer(&self) -> Option<&str> {
        self.trailer.as_deref()
    }

    pub fn push_values(&mut self, values: &[f64]) {
        self.push(values.iter().map(|&v| number(v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// A `key=value` line written after the last row.
    pub fn set_trailer(&mut self, line: String) {
        self.trailer = Some(line);
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        let mut out = writer.into_inner().map_err(|e| e.into_error())?;
        if let Some(line) = &self.trailer {
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// 17 significant digits, enough to round-trip any `f64`. Negative zero is written as
/// zero so that exact crossings print the same on either side.
pub fn number(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// Column suffix for a magnetic quantum number: `0.5`, `-0.5`, `1`, `0`.
pub fn m_label(m: f64) -> String {
    let m = if m == 0.0 { 0.0 } else { m };
    format!("{m}")
}
