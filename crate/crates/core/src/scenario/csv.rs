/// A CSV table with a fixed header. Numbers use Rust's shortest
/// round-trip formatting, so equal values always print identically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

/// Formats a number for a CSV cell; `None` is an empty cell.
pub(crate) fn num(x: impl Into<Option<f64>>) -> String {
    match x.into() {
        Some(v) if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) => format!("{v}"),
        Some(v) => format!("{v:e}"),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_quotes() {
        let mut c = Csv::new(&["a", "b"]);
        c.push(vec![num(0.1), "x,y".into()]);
        c.push(vec![num(None), "q\"".into()]);
        assert_eq!(num(1.5e-12), "1.5e-12");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(c.render(), "a,b\n0.1,\"x,y\"\n,\"q\"\"\"\n");
    }
}
