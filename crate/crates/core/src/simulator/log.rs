use super::SimError;
use crate::guidance::Status;
use crate::Vec2;

pub const CSV_HEADER: [&str; 23] = [
    "t", "x", "y", "theta", "zx", "zy", "xhat", "yhat", "c1", "c2", "c3", "c4", "chat", "gx", "gy", "lap", "ux", "uy",
    "nu", "omega", "sat", "status", "ctrue",
];

/// One control step.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub position: Vec2,
    pub heading: f64,
    pub head: Vec2,
    pub x_hat: Vec2,
    pub readings: [f64; 4],
    pub c_hat: f64,
    pub grad: Vec2,
    pub lap: f64,
    pub u: Vec2,
    pub nu: f64,
    pub omega: f64,
    pub saturated: bool,
    pub status: Status,
    /// True concentration at the head point, analytic fields only.
    pub c_true: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// The vessel left the field's domain at `time`.
    Truncated { time: f64, reason: String },
    /// A numerical failure (degenerate stencil, non-finite state) at `time`.
    Aborted { time: f64, reason: String },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Truncated { .. } => "truncated",
            Termination::Aborted { .. } => "aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<Record>,
    pub termination: Termination,
    pub seed: u64,
    pub dt_control: f64,
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros dropped.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..9).contains(&exp) {
        let m = trim(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim(&format!("{v:.*}", (8 - exp) as usize))
    }
}

impl Record {
    fn fields(&self) -> Vec<String> {
        let f = fmt_sig9;
        let mut out = vec![
            f(self.t),
            f(self.position.x),
            f(self.position.y),
            f(self.heading),
            f(self.head.x),
            f(self.head.y),
            f(self.x_hat.x),
            f(self.x_hat.y),
        ];
        out.extend(self.readings.iter().map(|&c| f(c)));
        out.extend([
            f(self.c_hat),
            f(self.grad.x),
            f(self.grad.y),
            f(self.lap),
            f(self.u.x),
            f(self.u.y),
            f(self.nu),
            f(self.omega),
            if self.saturated { "1" } else { "0" }.to_string(),
            self.status.as_str().to_string(),
            self.c_true.map(f).unwrap_or_default(),
        ]);
        out
    }

    fn parse(row: &csv::StringRecord, line: u64) -> Result<Record, SimError> {
        let bad = |what: &str| SimError::Parse(format!("log line {line}: {what}"));
        if row.len() != CSV_HEADER.len() {
            return Err(bad(&format!("expected {} columns, found {}", CSV_HEADER.len(), row.len())));
        }
        let num = |i: usize| -> Result<f64, SimError> {
            row[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("column {} is not a number: {:?}", CSV_HEADER[i], &row[i])))
        };
        let sat = match row[20].trim() {
            "0" => false,
            "1" => true,
            other => return Err(bad(&format!("sat must be 0 or 1, got {other:?}"))),
        };
        let status: Status = row[21].trim().parse().map_err(|e: String| bad(&e))?;
        let c_true = if row[22].trim().is_empty() { None } else { Some(num(22)?) };
        Ok(Record {
            t: num(0)?,
            position: Vec2::new(num(1)?, num(2)?),
            heading: num(3)?,
            head: Vec2::new(num(4)?, num(5)?),
            x_hat: Vec2::new(num(6)?, num(7)?),
            readings: [num(8)?, num(9)?, num(10)?, num(11)?],
            c_hat: num(12)?,
            grad: Vec2::new(num(13)?, num(14)?),
            lap: num(15)?,
            u: Vec2::new(num(16)?, num(17)?),
            nu: num(18)?,
            omega: num(19)?,
            saturated: sat,
            status,
            c_true,
        })
    }
}

impl RunLog {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record(r.fields()).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Parses records written by [`RunLog::to_csv`]. Run metadata is not part
    /// of the CSV, so `seed` is zero and `dt_control` is inferred.
    pub fn records_from_csv(data: &[u8]) -> Result<Vec<Record>, SimError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(data);
        let header = r.headers().map_err(|e| SimError::Parse(format!("log header: {e}")))?;
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(SimError::Parse(format!(
                "log header must be {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut out = Vec::new();
        for (i, row) in r.records().enumerate() {
            let row = row.map_err(|e| SimError::Parse(format!("log line {}: {e}", i + 2)))?;
            out.push(Record::parse(&row, i as u64 + 2)?);
        }
        Ok(out)
    }
}
