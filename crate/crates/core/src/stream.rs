//! Tab-separated weighted streams: one `id<TAB>weight` record per line.
//!
//! Blank lines and lines starting with `#` are skipped. Ids are opaque UTF-8
//! tokens; weights must parse to positive finite reals.

use std::io::BufRead;

use thiserror::Error;

use crate::latent::WeightedItem;

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Parses one line. `Ok(None)` for blank and comment lines.
pub fn parse_line(text: &str, line: usize) -> Result<Option<WeightedItem<String>>, ParseError> {
    let err = |message: String| ParseError { line, message };
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.trim().is_empty() || text.starts_with('#') {
        return Ok(None);
    }
    let mut fields = text.split('\t');
    let (id, weight) = match (fields.next(), fields.next(), fields.next()) {
        (Some(id), Some(weight), None) => (id, weight),
        _ => return Err(err(format!("expected `id<TAB>weight`, got {text:?}"))),
    };
    if id.is_empty() {
        return Err(err("empty id".into()));
    }
    let weight: f64 = weight
        .trim()
        .parse()
        .map_err(|_| err(format!("weight {weight:?} is not a number")))?;
    WeightedItem::new(id.to_string(), weight)
        .map(Some)
        .map_err(|e| err(e.to_string()))
}

/// Iterator over the records of a TSV stream.
pub struct TsvReader<R> {
    input: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> TsvReader<R> {
    pub fn new(input: R) -> Self {
        Self {
            input,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for TsvReader<R> {
    type Item = Result<WeightedItem<String>, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(ParseError {
                        line: self.line,
                        message: e.to_string(),
                    }))
                }
            }
            let text = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
            match parse_line(text, self.line) {
                Ok(None) => continue,
                Ok(Some(item)) => return Some(Ok(item)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn read_all<R: BufRead>(input: R) -> Result<Vec<WeightedItem<String>>, ParseError> {
    TsvReader::new(input).collect()
}
