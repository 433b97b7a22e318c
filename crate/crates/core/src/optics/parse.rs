//! Line-oriented parser for the `.oct` optical-table format.
//!
//! Grammar, one element per line:
//!
//! ```text
//! <element> [@ <angle_deg>] [path=<U|L>] [label=<id>] [# comment]
//! ```
//!
//! Elements: `hwp`, `qwp`, `polarizer`, `calcite split`, `calcite merge`,
//! `semihwp`, `dichroic`, `detector`. Angles are decimal degrees; no other
//! unit is accepted. Blank lines and comment-only lines are skipped.

use std::fmt;

use super::element::{Circuit, ElementKind, OpticalElement, PathSelector};

/// A single position-annotated problem in a `.oct` source.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// 1-based line; 0 for whole-circuit semantic errors.
    pub line: usize,
    /// 1-based column.
    pub column: usize,
    pub message: String,
    /// Token classes that would have been accepted at this position
    /// (empty for semantic errors).
    pub expected: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: ", self.line, self.column)?;
        }
        write!(f, "{}", self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" | "))?;
        }
        Ok(())
    }
}

/// Parse failure: one or more diagnostics.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn one(line: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        ParseError {
            diagnostics: vec![Diagnostic {
                line,
                column,
                message: message.into(),
                expected: expected.iter().map(|s| s.to_string()).collect(),
            }],
        }
    }
}

/// Parses `.oct` source into a validated [`Circuit`].
pub fn parse_circuit(source: &str) -> Result<Circuit, ParseError> {
    let mut elements = Vec::new();
    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        elements.push(parse_line(line, line_no)?);
    }
    let circuit = Circuit::new(elements);
    validate(&circuit)?;
    Ok(circuit)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

struct Cursor<'a> {
    line: &'a str,
    line_no: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.line.len() && self.line.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.line.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.line[self.pos..].chars().next()
    }

    fn take_word(&mut self) -> Option<(&'a str, usize)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.line.as_bytes();
        while self.pos < bytes.len()
            && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some((&self.line[start..self.pos], start + 1))
        }
    }

    fn take_char(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.line[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_number(&mut self) -> Result<(f64, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.line.as_bytes();
        if self.pos < bytes.len() && (bytes[self.pos] == b'-' || bytes[self.pos] == b'+') {
            self.pos += 1;
        }
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = &self.line[start..self.pos];
        let value: f64 = text.parse().map_err(|_| {
            ParseError::one(
                self.line_no,
                start + 1,
                format!("'{text}' is not a decimal angle in degrees"),
                &["number"],
            )
        })?;
        if !value.is_finite() {
            return Err(ParseError::one(self.line_no, start + 1, "angle must be finite", &["number"]));
        }
        // Degrees only: a trailing unit word is a grammar error.
        if self.pos < bytes.len() && bytes[self.pos].is_ascii_alphabetic() {
            return Err(ParseError::one(
                self.line_no,
                self.pos + 1,
                "angles are plain decimal degrees; unit suffixes (e.g. 'rad') are not accepted",
                &["whitespace", "end of line"],
            ));
        }
        Ok((value, start + 1))
    }
}

const ELEMENT_KEYWORDS: &[&str] = &[
    "hwp", "qwp", "polarizer", "calcite split", "calcite merge", "semihwp", "dichroic", "detector",
];

fn parse_line(line: &str, line_no: usize) -> Result<OpticalElement, ParseError> {
    let mut cur = Cursor { line, line_no, pos: 0 };

    let (word, col) = cur.take_word().ok_or_else(|| {
        ParseError::one(line_no, cur.column(), "expected an element keyword", ELEMENT_KEYWORDS)
    })?;
    let kind = match word {
        "hwp" => ElementKind::Hwp,
        "qwp" => ElementKind::Qwp,
        "polarizer" => ElementKind::Polarizer,
        "semihwp" => ElementKind::SemicircleHwp,
        "dichroic" => ElementKind::Dichroic,
        "detector" => ElementKind::Detector,
        "calcite" => {
            let (sub, sub_col) = cur.take_word().ok_or_else(|| {
                ParseError::one(line_no, cur.column(), "'calcite' needs a mode", &["split", "merge"])
            })?;
            match sub {
                "split" => ElementKind::CalciteSplit,
                "merge" => ElementKind::CalciteMerge,
                other => {
                    return Err(ParseError::one(
                        line_no,
                        sub_col,
                        format!("unknown calcite mode '{other}'"),
                        &["split", "merge"],
                    ))
                }
            }
        }
        other => {
            return Err(ParseError::one(
                line_no,
                col,
                format!("unknown element '{other}'"),
                ELEMENT_KEYWORDS,
            ))
        }
    };

    let mut angle: Option<f64> = None;
    let mut path: Option<PathSelector> = None;
    let mut label: Option<String> = None;

    loop {
        if cur.at_end() {
            break;
        }
        if cur.peek() == Some('@') {
            let at_col = cur.column();
            cur.take_char('@');
            if angle.is_some() {
                return Err(ParseError::one(line_no, at_col, "duplicate angle", &[]));
            }
            let (value, _) = cur.take_number()?;
            angle = Some(value);
            continue;
        }
        if let Some((word, wcol)) = cur.take_word() {
            match word {
                "path" => {
                    if !cur.take_char('=') {
                        return Err(ParseError::one(line_no, cur.column(), "'path' needs '='", &["="]));
                    }
                    let (value, vcol) = cur.take_word().ok_or_else(|| {
                        ParseError::one(line_no, cur.column(), "missing path selector", &["U", "L"])
                    })?;
                    path = Some(match value {
                        "U" => PathSelector::Upper,
                        "L" => PathSelector::Lower,
                        other => {
                            return Err(ParseError::one(
                                line_no,
                                vcol,
                                format!("unknown path '{other}'"),
                                &["U", "L"],
                            ))
                        }
                    });
                }
                "label" => {
                    if !cur.take_char('=') {
                        return Err(ParseError::one(line_no, cur.column(), "'label' needs '='", &["="]));
                    }
                    let (value, _) = cur.take_word().ok_or_else(|| {
                        ParseError::one(line_no, cur.column(), "missing label identifier", &["identifier"])
                    })?;
                    label = Some(value.to_string());
                }
                other => {
                    return Err(ParseError::one(
                        line_no,
                        wcol,
                        format!("unexpected token '{other}'"),
                        &["@ angle", "path=", "label=", "# comment"],
                    ))
                }
            }
            continue;
        }
        return Err(ParseError::one(
            line_no,
            cur.column(),
            "unexpected character",
            &["@ angle", "path=", "label=", "# comment"],
        ));
    }

    // Per-element shape checks (angle presence, path selector rules).
    if kind.requires_angle() && angle.is_none() {
        return Err(ParseError::one(
            line_no,
            1,
            format!("'{}' requires an angle", kind.keyword()),
            &["@ angle"],
        ));
    }
    if !kind.requires_angle() && angle.is_some() {
        return Err(ParseError::one(
            line_no,
            1,
            format!("angle on angle-free element '{}'", kind.keyword()),
            &[],
        ));
    }
    let path = path.unwrap_or_default();
    if !kind.allows_path_selector() && path != PathSelector::Both {
        return Err(ParseError::one(
            line_no,
            1,
            format!("'{}' acts on the whole beam; it cannot take path=", kind.keyword()),
            &[],
        ));
    }
    if kind == ElementKind::SemicircleHwp && path == PathSelector::Both {
        return Err(ParseError::one(
            line_no,
            1,
            "semihwp acts on a single path; add path=U or path=L",
            &["path=U", "path=L"],
        ));
    }

    let mut el = OpticalElement::new(kind, angle).with_path(path);
    if let Some(l) = label {
        el = el.with_label(l);
    }
    Ok(el)
}

fn semantic(message: String) -> Diagnostic {
    Diagnostic {
        line: 0,
        column: 0,
        message,
        expected: vec![],
    }
}

/// Structural validation: calcite bookkeeping, detector rules, labels.
fn validate(circuit: &Circuit) -> Result<(), ParseError> {
    let mut diagnostics = Vec::new();

    let mut detector_labels: Vec<&str> = Vec::new();
    for el in &circuit.elements {
        if el.kind == ElementKind::Detector {
            if let Some(label) = el.label.as_deref() {
                if detector_labels.contains(&label) {
                    diagnostics.push(semantic(format!("duplicate detector label '{label}'")));
                }
                detector_labels.push(label);
            }
        }
    }

    // Every split must eventually be matched by a merge or by detectors
    // covering both paths, somewhere downstream (possibly in different
    // dichroic arms).
    if let Some(split_pos) = circuit
        .elements
        .iter()
        .position(|el| el.kind == ElementKind::CalciteSplit)
    {
        let downstream = &circuit.elements[split_pos + 1..];
        for path in [PathSelector::Upper, PathSelector::Lower] {
            let covered = downstream.iter().any(|el| match el.kind {
                ElementKind::CalciteMerge => true,
                ElementKind::Detector => el.path == path || el.path == PathSelector::Both,
                _ => false,
            });
            if !covered {
                diagnostics.push(semantic(format!("unterminated path {path}")));
            }
        }
    }

    // Dichroics fork the table into arms: everything before the first
    // dichroic is the source section; each later segment is an arm that
    // may host at most one detector.
    let mut segments: Vec<&[OpticalElement]> = Vec::new();
    let mut start = 0usize;
    for (i, el) in circuit.elements.iter().enumerate() {
        if el.kind == ElementKind::Dichroic {
            segments.push(&circuit.elements[start..i]);
            start = i + 1;
        }
    }
    segments.push(&circuit.elements[start..]);

    for seg in &segments {
        let mut open = false;
        let mut detectors = 0usize;
        for el in seg.iter() {
            match el.kind {
                ElementKind::CalciteSplit => {
                    if open {
                        diagnostics.push(semantic("calcite split while paths already open".into()));
                    }
                    open = true;
                }
                ElementKind::CalciteMerge => open = false,
                ElementKind::Detector => detectors += 1,
                _ => {}
            }
        }
        if detectors > 1 {
            diagnostics.push(semantic(format!(
                "arm has {detectors} detectors; at most one may terminate an arm"
            )));
        }
    }

    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(ParseError { diagnostics })
    }
}
