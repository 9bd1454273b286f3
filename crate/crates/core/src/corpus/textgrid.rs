//! Reading and writing Praat TextGrid files.
//!
//! Both the long ("verbose") and the short text layouts are accepted on
//! input. Praat's text reader only cares about the sequence of numbers,
//! quoted strings and `<flag>` tokens; labels such as `xmin =` or
//! `item [1]:` are decoration. The tokenizer below follows the same idea,
//! which is why a single parser handles both layouts.
//!
//! Output is always the long layout, matching what Praat itself writes.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Times closer than this are considered equal.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TextGridError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid TextGrid: {0}")]
    Invalid(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl TextGridError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        TextGridError::Parse {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierKind {
    Interval,
    Point,
}

impl TierKind {
    fn class_name(self) -> &'static str {
        match self {
            TierKind::Interval => "IntervalTier",
            TierKind::Point => "TextTier",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub xmin: f64,
    pub xmax: f64,
    pub text: String,
}

impl Interval {
    pub fn new(xmin: f64, xmax: f64, text: impl Into<String>) -> Self {
        Interval {
            xmin,
            xmax,
            text: text.into(),
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.xmin + self.xmax)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub time: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    pub name: String,
    pub kind: TierKind,
    pub xmin: f64,
    pub xmax: f64,
    pub intervals: Vec<Interval>,
    pub points: Vec<Point>,
}

impl Tier {
    pub fn interval_tier(name: impl Into<String>, xmin: f64, xmax: f64, intervals: Vec<Interval>) -> Self {
        Tier {
            name: name.into(),
            kind: TierKind::Interval,
            xmin,
            xmax,
            intervals,
            points: Vec::new(),
        }
    }

    pub fn point_tier(name: impl Into<String>, xmin: f64, xmax: f64, points: Vec<Point>) -> Self {
        Tier {
            name: name.into(),
            kind: TierKind::Point,
            xmin,
            xmax,
            intervals: Vec::new(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        match self.kind {
            TierKind::Interval => self.intervals.len(),
            TierKind::Point => self.points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, doc_min: f64, doc_max: f64) -> Result<(), String> {
        if self.xmin > self.xmax + TIME_EPS {
            return Err(format!("tier {:?}: xmin {} > xmax {}", self.name, self.xmin, self.xmax));
        }
        if self.xmin < doc_min - TIME_EPS || self.xmax > doc_max + TIME_EPS {
            return Err(format!(
                "tier {:?}: bounds [{}, {}] outside document [{}, {}]",
                self.name, self.xmin, self.xmax, doc_min, doc_max
            ));
        }
        match self.kind {
            TierKind::Interval => {
                if !self.points.is_empty() {
                    return Err(format!("interval tier {:?} carries points", self.name));
                }
                let mut prev_end = f64::NEG_INFINITY;
                for (i, iv) in self.intervals.iter().enumerate() {
                    if !(iv.xmin.is_finite() && iv.xmax.is_finite()) {
                        return Err(format!("tier {:?}: interval {} has non-finite bounds", self.name, i + 1));
                    }
                    if iv.xmin > iv.xmax + TIME_EPS {
                        return Err(format!("tier {:?}: interval {} has xmin > xmax", self.name, i + 1));
                    }
                    if iv.xmin < prev_end - TIME_EPS {
                        return Err(format!("tier {:?}: interval {} overlaps its predecessor", self.name, i + 1));
                    }
                    prev_end = iv.xmax;
                }
            }
            TierKind::Point => {
                if !self.intervals.is_empty() {
                    return Err(format!("point tier {:?} carries intervals", self.name));
                }
                let mut prev = f64::NEG_INFINITY;
                for (i, p) in self.points.iter().enumerate() {
                    if !p.time.is_finite() || p.time < prev - TIME_EPS {
                        return Err(format!("tier {:?}: point {} out of order", self.name, i + 1));
                    }
                    prev = p.time;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextGridDoc {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<Tier>,
}

impl TextGridDoc {
    pub fn new(xmin: f64, xmax: f64) -> Self {
        TextGridDoc {
            xmin,
            xmax,
            tiers: Vec::new(),
        }
    }

    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name == name)
    }

    pub fn validate(&self) -> Result<(), TextGridError> {
        if !(self.xmin.is_finite() && self.xmax.is_finite()) || self.xmin > self.xmax + TIME_EPS {
            return Err(TextGridError::Invalid(format!(
                "document bounds [{}, {}]",
                self.xmin, self.xmax
            )));
        }
        for tier in &self.tiers {
            tier.validate(self.xmin, self.xmax).map_err(TextGridError::Invalid)?;
        }
        Ok(())
    }

    /// Structural equality with times compared at [`TIME_EPS`].
    pub fn approx_eq(&self, other: &TextGridDoc) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= TIME_EPS;
        close(self.xmin, other.xmin)
            && close(self.xmax, other.xmax)
            && self.tiers.len() == other.tiers.len()
            && self.tiers.iter().zip(&other.tiers).all(|(a, b)| {
                a.name == b.name
                    && a.kind == b.kind
                    && close(a.xmin, b.xmin)
                    && close(a.xmax, b.xmax)
                    && a.intervals.len() == b.intervals.len()
                    && a.points.len() == b.points.len()
                    && a.intervals.iter().zip(&b.intervals).all(|(x, y)| {
                        close(x.xmin, y.xmin) && close(x.xmax, y.xmax) && x.text == y.text
                    })
                    && a
                        .points
                        .iter()
                        .zip(&b.points)
                        .all(|(x, y)| close(x.time, y.time) && x.text == y.text)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Text(String),
    Flag(String),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
}

fn tokenize(content: &str) -> Result<Vec<Token>, TextGridError> {
    let mut tokens = Vec::new();
    let mut chars = content.chars().peekable();
    let mut line = 1usize;

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' => {
                let start_line = line;
                chars.next();
                let mut text = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                text.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            text.push(ch);
                        }
                        None => return Err(TextGridError::parse(start_line, "unterminated string")),
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Text(text),
                    line: start_line,
                });
            }
            '!' => {
                // comment until end of line
                while let Some(&ch) = chars.peek() {
                    if ch == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '[' => {
                // index decoration such as `item [3]:`
                while let Some(ch) = chars.next() {
                    if ch == ']' {
                        break;
                    }
                    if ch == '\n' {
                        return Err(TextGridError::parse(line, "unterminated '['"));
                    }
                }
            }
            '<' => {
                let mut flag = String::new();
                chars.next();
                loop {
                    match chars.next() {
                        Some('>') => break,
                        Some('\n') | None => return Err(TextGridError::parse(line, "unterminated '<' flag")),
                        Some(ch) => flag.push(ch),
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Flag(flag),
                    line,
                });
            }
            _ => {
                let mut word = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '"' || ch == '[' || ch == '<' || ch == '!' {
                        break;
                    }
                    word.push(ch);
                    chars.next();
                }
                if let Ok(value) = word.parse::<f64>() {
                    if value.is_finite() {
                        tokens.push(Token {
                            kind: TokenKind::Number(value),
                            line,
                        });
                    }
                }
            }
        }
    }
    Ok(tokens)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn line(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.line).unwrap_or(self.last_line)
    }

    fn next(&mut self, what: &str) -> Result<Token, TextGridError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| TextGridError::parse(self.last_line, format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn number(&mut self, what: &str) -> Result<f64, TextGridError> {
        let tok = self.next(what)?;
        match tok.kind {
            TokenKind::Number(v) => Ok(v),
            other => Err(TextGridError::parse(tok.line, format!("expected {what}, found {other:?}"))),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, TextGridError> {
        let line = self.line();
        let v = self.number(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(TextGridError::parse(line, format!("{what} must be a non-negative integer, found {v}")));
        }
        Ok(v as usize)
    }

    fn text(&mut self, what: &str) -> Result<String, TextGridError> {
        let tok = self.next(what)?;
        match tok.kind {
            TokenKind::Text(s) => Ok(s),
            other => Err(TextGridError::parse(tok.line, format!("expected {what}, found {other:?}"))),
        }
    }
}

/// Decodes raw file bytes (UTF-8, or UTF-16 with a byte-order mark).
pub fn decode_bytes(bytes: &[u8]) -> Result<String, TextGridError> {
    let utf16 = |be: bool| -> Result<String, TextGridError> {
        let body = &bytes[2..];
        if body.len() % 2 != 0 {
            return Err(TextGridError::Encoding("odd byte count in UTF-16 data".into()));
        }
        let units: Vec<u16> = body
            .chunks_exact(2)
            .map(|c| if be { u16::from_be_bytes([c[0], c[1]]) } else { u16::from_le_bytes([c[0], c[1]]) })
            .collect();
        String::from_utf16(&units).map_err(|e| TextGridError::Encoding(e.to_string()))
    };
    match bytes {
        [0xFF, 0xFE, ..] => utf16(false),
        [0xFE, 0xFF, ..] => utf16(true),
        [0xEF, 0xBB, 0xBF, rest @ ..] => {
            String::from_utf8(rest.to_vec()).map_err(|e| TextGridError::Encoding(e.to_string()))
        }
        _ => String::from_utf8(bytes.to_vec()).map_err(|e| TextGridError::Encoding(e.to_string())),
    }
}

pub fn parse_textgrid(content: &str) -> Result<TextGridDoc, TextGridError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let last_line = content.lines().count().max(1);
    let mut cur = Cursor {
        tokens: tokenize(content)?,
        pos: 0,
        last_line,
    };

    let file_type = cur.text("file type")?;
    if file_type != "ooTextFile" {
        return Err(TextGridError::parse(1, format!("malformed header: file type {file_type:?}")));
    }
    let class_line = cur.line();
    let class = cur.text("object class")?;
    if class != "TextGrid" {
        return Err(TextGridError::parse(class_line, format!("malformed header: object class {class:?}")));
    }

    let xmin = cur.number("xmin")?;
    let xmax_line = cur.line();
    let xmax = cur.number("xmax")?;
    if xmin > xmax + TIME_EPS {
        return Err(TextGridError::parse(xmax_line, format!("xmax {xmax} precedes xmin {xmin}")));
    }

    let flag = cur.next("tiers flag")?;
    let n_tiers = match flag.kind {
        TokenKind::Flag(ref f) if f == "exists" => cur.count("tier count")?,
        TokenKind::Flag(ref f) if f == "absent" => 0,
        other => return Err(TextGridError::parse(flag.line, format!("expected <exists> or <absent>, found {other:?}"))),
    };

    let mut tiers = Vec::with_capacity(n_tiers);
    for _ in 0..n_tiers {
        tiers.push(parse_tier(&mut cur, xmin, xmax)?);
    }
    if let Some(extra) = cur.tokens.get(cur.pos) {
        return Err(TextGridError::parse(
            extra.line,
            format!("tier-count mismatch: header declares {n_tiers} tiers but more content follows"),
        ));
    }
    Ok(TextGridDoc { xmin, xmax, tiers })
}

fn parse_tier(cur: &mut Cursor, doc_min: f64, doc_max: f64) -> Result<Tier, TextGridError> {
    let class_line = cur.line();
    let class = cur.text("tier class").map_err(|e| match e {
        TextGridError::Parse { line, message } if message.starts_with("unexpected end") => TextGridError::parse(
            line,
            "tier-count mismatch: file ends before all declared tiers were read",
        ),
        other => other,
    })?;
    let kind = match class.as_str() {
        "IntervalTier" => TierKind::Interval,
        "TextTier" | "PointTier" => TierKind::Point,
        other => return Err(TextGridError::parse(class_line, format!("unknown tier class {other:?}"))),
    };
    let name = cur.text("tier name")?;
    let xmin = cur.number("tier xmin")?;
    let xmax_line = cur.line();
    let xmax = cur.number("tier xmax")?;
    if xmin > xmax + TIME_EPS || xmin < doc_min - TIME_EPS || xmax > doc_max + TIME_EPS {
        return Err(TextGridError::parse(
            xmax_line,
            format!("tier {name:?} bounds [{xmin}, {xmax}] invalid for document [{doc_min}, {doc_max}]"),
        ));
    }
    let n = cur.count("entry count")?;

    let mut tier = Tier {
        name,
        kind,
        xmin,
        xmax,
        intervals: Vec::new(),
        points: Vec::new(),
    };
    match kind {
        TierKind::Interval => {
            let mut prev_end = f64::NEG_INFINITY;
            for _ in 0..n {
                let line = cur.line();
                let a = cur.number("interval xmin")?;
                let b = cur.number("interval xmax")?;
                let text = cur.text("interval text")?;
                if a > b + TIME_EPS {
                    return Err(TextGridError::parse(line, format!("interval [{a}, {b}] has xmin > xmax")));
                }
                if a < prev_end - TIME_EPS {
                    return Err(TextGridError::parse(
                        line,
                        format!("non-monotone intervals: {a} starts before previous end {prev_end}"),
                    ));
                }
                prev_end = b;
                tier.intervals.push(Interval { xmin: a, xmax: b, text });
            }
        }
        TierKind::Point => {
            let mut prev = f64::NEG_INFINITY;
            for _ in 0..n {
                let line = cur.line();
                let time = cur.number("point time")?;
                let text = cur.text("point mark")?;
                if time < prev - TIME_EPS {
                    return Err(TextGridError::parse(line, format!("non-monotone points: {time} after {prev}")));
                }
                prev = time;
                tier.points.push(Point { time, text });
            }
        }
    }
    Ok(tier)
}

fn escape(text: &str) -> String {
    text.replace('"', "\"\"")
}

/// Serializes to the long text layout. Numbers use the shortest decimal
/// form that reads back to the identical `f64`.
pub fn serialize_textgrid(doc: &TextGridDoc) -> Result<String, TextGridError> {
    doc.validate()?;
    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\n");
    out.push_str("Object class = \"TextGrid\"\n\n");
    let _ = writeln!(out, "xmin = {} ", doc.xmin);
    let _ = writeln!(out, "xmax = {} ", doc.xmax);
    out.push_str("tiers? <exists> \n");
    let _ = writeln!(out, "size = {} ", doc.tiers.len());
    out.push_str("item []: \n");
    for (i, tier) in doc.tiers.iter().enumerate() {
        let _ = writeln!(out, "    item [{}]:", i + 1);
        let _ = writeln!(out, "        class = \"{}\" ", tier.kind.class_name());
        let _ = writeln!(out, "        name = \"{}\" ", escape(&tier.name));
        let _ = writeln!(out, "        xmin = {} ", tier.xmin);
        let _ = writeln!(out, "        xmax = {} ", tier.xmax);
        match tier.kind {
            TierKind::Interval => {
                let _ = writeln!(out, "        intervals: size = {} ", tier.intervals.len());
                for (j, iv) in tier.intervals.iter().enumerate() {
                    let _ = writeln!(out, "        intervals [{}]:", j + 1);
                    let _ = writeln!(out, "            xmin = {} ", iv.xmin);
                    let _ = writeln!(out, "            xmax = {} ", iv.xmax);
                    let _ = writeln!(out, "            text = \"{}\" ", escape(&iv.text));
                }
            }
            TierKind::Point => {
                let _ = writeln!(out, "        points: size = {} ", tier.points.len());
                for (j, p) in tier.points.iter().enumerate() {
                    let _ = writeln!(out, "        points [{}]:", j + 1);
                    let _ = writeln!(out, "            number = {} ", p.time);
                    let _ = writeln!(out, "            mark = \"{}\" ", escape(&p.text));
                }
            }
        }
    }
    Ok(out)
}

pub fn read_textgrid(path: impl AsRef<Path>) -> Result<TextGridDoc, TextGridError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| TextGridError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_textgrid(&decode_bytes(&bytes)?)
}

pub fn write_textgrid(path: impl AsRef<Path>, doc: &TextGridDoc) -> Result<(), TextGridError> {
    let path = path.as_ref();
    let text = serialize_textgrid(doc)?;
    std::fs::write(path, text).map_err(|e| TextGridError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
