//! Shared tokenizer for the line-oriented file formats (`.ld`, `.sca`, `.cp`).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Punct(char),
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '.')
}

pub(crate) struct Cursor {
    toks: Vec<(Tok, usize, usize)>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, FormatError> {
        let mut toks = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            let chars: Vec<char> = line.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                let col = i + 1;
                if c.is_whitespace() {
                    i += 1;
                } else if is_word_char(c) {
                    let start = i;
                    while i < chars.len() && is_word_char(chars[i]) {
                        i += 1;
                    }
                    toks.push((Tok::Word(chars[start..i].iter().collect()), ln + 1, col));
                } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                    toks.push((Tok::Arrow, ln + 1, col));
                    i += 2;
                } else if "{}()[],;:*=".contains(c) {
                    toks.push((Tok::Punct(c), ln + 1, col));
                    i += 1;
                } else {
                    return Err(FormatError {
                        line: ln + 1,
                        column: col,
                        message: format!("unexpected character `{c}`"),
                    });
                }
            }
        }
        let last = text.lines().count().max(1);
        toks.push((Tok::Eof, last, 1));
        Ok(Cursor { toks, at: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn line(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> FormatError {
        let (_, line, column) = self.toks[self.at];
        FormatError { line, column, message: message.into() }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn word(&mut self) -> Result<String, FormatError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            other => Err(self.error(format!("expected a name, found {}", other.describe()))),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<(), FormatError> {
        match self.peek() {
            Tok::Word(w) if w == kw => {
                self.bump();
                Ok(())
            }
            other => Err(self.error(format!("expected `{kw}`, found {}", other.describe()))),
        }
    }

    pub(crate) fn punct(&mut self, c: char) -> Result<(), FormatError> {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", self.peek().describe())))
        }
    }

    pub(crate) fn eat_punct(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn arrow(&mut self) -> Result<(), FormatError> {
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `->`, found {}", self.peek().describe())))
        }
    }

    /// `{a b c}`, possibly empty, names separated by spaces or commas.
    pub(crate) fn word_set(&mut self) -> Result<Vec<String>, FormatError> {
        self.punct('{')?;
        let mut out = Vec::new();
        loop {
            if self.eat_punct('}') {
                return Ok(out);
            }
            if self.eat_punct(',') {
                continue;
            }
            out.push(self.word()?);
        }
    }

    /// Words remaining on the given source line.
    pub(crate) fn words_on_line(&mut self, line: usize) -> Result<Vec<String>, FormatError> {
        let mut out = Vec::new();
        while !self.at_eof() && self.line() == line {
            out.push(self.word()?);
        }
        Ok(out)
    }

    /// Words up to (and consuming) the terminating `;`.
    pub(crate) fn words_until_semi(&mut self) -> Result<Vec<String>, FormatError> {
        let mut out = Vec::new();
        while !self.eat_punct(';') {
            out.push(self.word()?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_comments() {
        let mut c = Cursor::new("trans q0 -> q1' on {a, b}; # tail\n").unwrap();
        c.keyword("trans").unwrap();
        assert_eq!(c.word().unwrap(), "q0");
        c.arrow().unwrap();
        assert_eq!(c.word().unwrap(), "q1'");
        c.keyword("on").unwrap();
        assert_eq!(c.word_set().unwrap(), vec!["a", "b"]);
        c.punct(';').unwrap();
        assert!(c.at_eof());
    }

    #[test]
    fn reports_position() {
        let err = Cursor::new("ok\n  $").err().unwrap();
        assert_eq!((err.line, err.column), (2, 3));
    }
}
