//! Result rows and their CSV serialisation.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::channel::ChannelPoint;
use crate::sweep::SweepVariable;

pub const CSV_HEADER: &str = "var,eta,kappa,n_e,lb_direct,lb_reverse,lb_best,ub,mu_used,flags";

/// Per-row annotation, serialised as `;`-separated tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowFlag {
    /// The optimal `mu` is unbounded; the row reports the limit.
    Unbounded,
    /// `ub` is `+inf` (Eve collects nothing).
    UpperBoundDiverged,
    /// `ub` is the surrogate `-log2(kappa (1 - eta))`.
    SurrogateUpperBound,
    Error(String),
}

impl RowFlag {
    pub fn token(&self) -> String {
        match self {
            RowFlag::Unbounded => "unbounded".into(),
            RowFlag::UpperBoundDiverged => "ub_inf".into(),
            RowFlag::SurrogateUpperBound => "ub_surrogate".into(),
            RowFlag::Error(kind) => format!("error:{kind}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub var: f64,
    /// `None` when the channel itself could not be evaluated.
    pub channel: Option<ChannelPoint>,
    pub lb_direct: f64,
    pub lb_reverse: f64,
    pub lb_best: f64,
    pub ub: f64,
    /// Input power used; `inf` when the optimum is unbounded.
    pub mu_used: f64,
    pub flags: Vec<RowFlag>,
}

impl ResultRow {
    pub fn error(var: f64, kind: impl Into<String>) -> Self {
        Self {
            var,
            channel: None,
            lb_direct: f64::NAN,
            lb_reverse: f64::NAN,
            lb_best: f64::NAN,
            ub: f64::NAN,
            mu_used: f64::NAN,
            flags: vec![RowFlag::Error(kind.into())],
        }
    }

    /// The error kind, if this row failed.
    pub fn error_kind(&self) -> Option<&str> {
        self.flags.iter().find_map(|f| match f {
            RowFlag::Error(k) => Some(k.as_str()),
            _ => None,
        })
    }

    pub fn is_unbounded(&self) -> bool {
        self.flags.contains(&RowFlag::Unbounded)
    }

    fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let (eta, kappa, n_e) = match self.channel {
            Some(c) => (c.eta, c.kappa, c.n_e),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let cells = [
            self.var,
            eta,
            kappa,
            n_e,
            self.lb_direct,
            self.lb_reverse,
            self.lb_best,
            self.ub,
            self.mu_used,
        ];
        for v in cells {
            write!(out, "{},", format_g12(v))?;
        }
        let flags: Vec<String> = self.flags.iter().map(RowFlag::token).collect();
        writeln!(out, "{}", flags.join(";"))
    }
}

/// Ordered sweep output with optional `#` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub variable: SweepVariable,
    pub comments: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error_kind().is_some())
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for c in &self.comments {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            row.write_csv(out)?;
        }
        Ok(())
    }

    /// Writes the table to `path`, replacing any existing file.
    pub fn emit_csv(&self, path: &Path) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Formats like C's `%.12g`, with `inf`, `-inf` and `nan` spelled out.
pub fn format_g12(x: f64) -> String {
    format_g(x, 12)
}

fn format_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    // Exponent after rounding to p significant digits.
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1e-4, "0.0001"),
            (1e-5, "1e-05"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e7, "10000000"),
            (1e100, "1e+100"),
            (-2.5e-300, "-2.5e-300"),
            (std::f64::consts::PI, "3.14159265359"),
            (0.999999999999951, "1"),
            (0.99999999999949, "0.999999999999"),
            (0.9999999999999999, "1"),
            (9.9999999999995e-5, "0.0001"),
            (f64::INFINITY, "inf"),
            (f64::NEG_INFINITY, "-inf"),
            (f64::NAN, "nan"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g12(x), want, "{x:e}");
        }
    }

    #[test]
    fn formatted_values_round_trip_to_12_digits() {
        for &x in &[1.0 / 3.0, 2.0 / 7.0 * 1e-9, 6.02214076e23, 1.2345678901234567] {
            let back: f64 = format_g12(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
    }

    #[test]
    fn csv_layout() {
        let ok = ResultRow {
            var: 1.0,
            channel: Some(ChannelPoint::new(0.5, 0.25, 0.0).unwrap()),
            lb_direct: 1.0,
            lb_reverse: 0.5,
            lb_best: 1.0,
            ub: f64::INFINITY,
            mu_used: 1.0,
            flags: vec![RowFlag::UpperBoundDiverged, RowFlag::SurrogateUpperBound],
        };
        let table = ResultTable {
            variable: SweepVariable::Mu,
            comments: vec!["label: test".into()],
            rows: vec![ok, ResultRow::error(2.0, "far_field")],
        };
        let csv = table.to_csv_string();
        assert_eq!(
            csv,
            "# label: test\n\
             var,eta,kappa,n_e,lb_direct,lb_reverse,lb_best,ub,mu_used,flags\n\
             1,0.5,0.25,0,1,0.5,1,inf,1,ub_inf;ub_surrogate\n\
             2,nan,nan,nan,nan,nan,nan,nan,nan,error:far_field\n"
        );
        assert!(table.has_errors());
        assert!(!csv.contains('\r'));
    }
}
