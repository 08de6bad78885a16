//! Byte-offset source positions for diagnostics.

use std::fmt;

/// Half-open byte range into the source text.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn point(at: usize) -> Span {
        Span { start: at, end: at }
    }

    /// Smallest span covering both operands.
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// 1-based line and column of a byte offset. Columns count bytes, which
/// matches how most editors interpret plain ASCII sources.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let mut line = 1;
    let mut line_start = 0;
    for (i, b) in src.bytes().enumerate() {
        if i >= offset {
            break;
        }
        if b == b'\n' {
            line += 1;
            line_start = i + 1;
        }
    }
    (line, offset - line_start + 1)
}

/// Renders a diagnostic as `path:line:col: message`.
pub fn render(path: &str, src: &str, span: Span, msg: &str) -> String {
    let (line, col) = line_col(src, span.start);
    format!("{path}:{line}:{col}: {msg}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_from_one() {
        let src = "ab\ncd\ne";
        assert_eq!(line_col(src, 0), (1, 1));
        assert_eq!(line_col(src, 1), (1, 2));
        assert_eq!(line_col(src, 3), (2, 1));
        assert_eq!(line_col(src, 6), (3, 1));
    }

    #[test]
    fn render_formats_position() {
        let src = "def x\ndef y";
        assert_eq!(
            render("a.2ltt", src, Span::new(6, 9), "oops"),
            "a.2ltt:2:1: oops"
        );
    }

    #[test]
    fn join_covers_both() {
        assert_eq!(Span::new(2, 4).join(Span::new(7, 9)), Span::new(2, 9));
    }
}
