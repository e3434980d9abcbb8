use std::io::Write;

/// One output row. Failed rows keep their metadata and carry the error in
/// the status column.
#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<String>,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.ok)
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            debug_assert_eq!(r.cells.len(), self.header.len());
            w.write_record(&r.cells)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 15 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.14e}")
    }
}

pub fn status(r: &Result<(), String>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(e) => format!("error: {e}"),
    }
}
