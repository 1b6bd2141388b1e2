//! Sectioned line format shared by species files and run configs.
//!
//! ```text
//! # comment
//! [section]
//! key value value ...
//! ```
//!
//! Rows are whitespace-separated tokens. Text after `#` is ignored. Rows
//! before the first section header are rejected.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub line: usize,
    pub tokens: Vec<String>,
}

impl Row {
    pub fn key(&self) -> &str {
        &self.tokens[0]
    }

    pub fn values(&self) -> &[String] {
        &self.tokens[1..]
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Parses token `i` as `T`, naming the key in the error.
    pub fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        let tok = self
            .tokens
            .get(i)
            .ok_or_else(|| self.error(format!("`{}` needs at least {i} value(s)", self.key())))?;
        tok.parse()
            .map_err(|_| self.error(format!("`{}`: cannot parse `{tok}`", self.key())))
    }

    pub fn expect_len(&self, n: usize) -> Result<()> {
        if self.tokens.len() != n {
            return Err(self.error(format!(
                "`{}` expects {} value(s), found {}",
                self.key(),
                n - 1,
                self.tokens.len() - 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub rows: Vec<Row>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.key() == key)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.sections.iter().all(|s| s.rows.is_empty())
    }
}

pub fn parse(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(Error::Parse {
                line,
                msg: format!("unterminated section header `{body}`"),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty section name".into(),
                });
            }
            if doc.section(name).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate section [{name}]"),
                });
            }
            doc.sections.push(Section {
                name: name.to_string(),
                line,
                rows: Vec::new(),
            });
            continue;
        }
        let tokens: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        match doc.sections.last_mut() {
            Some(s) => s.rows.push(Row { line, tokens }),
            None => {
                return Err(Error::Parse {
                    line,
                    msg: "row appears before any [section] header".into(),
                })
            }
        }
    }
    Ok(doc)
}
