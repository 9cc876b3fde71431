//! Header-plus-TSV reader shared by the alpha and gamma files.

use std::io::BufRead;
use std::str::FromStr;

use rug::Rational;

use crate::decimal;
use crate::error::{Error, Result};

pub(crate) struct Records {
    headers: Vec<(String, String, usize)>,
    /// `(line number, fields)`.
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Records {
    pub fn read(mut r: impl BufRead, title: &str, columns: usize) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut headers = Vec::new();
        let mut rows = Vec::new();
        for (idx, raw) in text.split_inclusive('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches(['\n', '\r']);
            if idx == 0 && line.trim() != format!("# {title}") {
                return Err(Error::parse(1, format!("not a {title} file")));
            }
            if line.trim().is_empty() {
                continue;
            }
            if !raw.ends_with('\n') {
                return Err(Error::parse(line_no, "incomplete last line"));
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                headers.push((key.to_owned(), value.trim().to_owned(), line_no));
                continue;
            }
            let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
            if fields.len() != columns {
                return Err(Error::parse(
                    line_no,
                    format!("expected {columns} tab-separated fields, found {}", fields.len()),
                ));
            }
            rows.push((line_no, fields));
        }
        if text.is_empty() {
            return Err(Error::parse(1, format!("not a {title} file")));
        }
        Ok(Records { headers, rows })
    }

    pub fn header(&self, key: &str) -> Result<&str> {
        self.headers
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
            .ok_or_else(|| Error::parse(1, format!("missing '# {key}' header")))
    }

    pub fn header_line(&self, key: &str) -> usize {
        self.headers.iter().find(|(k, _, _)| k == key).map_or(1, |(_, _, l)| *l)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        field(self.header_line(key), self.header(key)?, key)
    }

    pub fn rational(&self, key: &str) -> Result<Rational> {
        decimal::parse_rational(self.header(key)?)
            .ok_or_else(|| Error::parse(self.header_line(key), format!("bad {key}")))
    }
}

pub(crate) fn field<T: FromStr>(line: usize, text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {text:?}")))
}
