//! Tokenizer for the Python subset: indentation tracking, implicit line
//! joining inside brackets, string prefixes and triple quotes.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
}

const OPS: [&str; 47] = [
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "<", ">", "=", "(", ")", "[", "]", "{", "}",
    ",", ":", ".", ";", "&", "|", "^", "~",
];

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    depth: usize,
    indents: Vec<usize>,
    out: Vec<Token>,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        depth: 0,
        indents: vec![0],
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

fn syntax(line: u32, message: impl Into<String>) -> FrontendError {
    FrontendError::Syntax {
        line,
        message: message.into(),
    }
}

impl Lexer {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn push(&mut self, tok: Tok) {
        self.out.push(Token { tok, line: self.line });
    }

    fn run(&mut self) -> Result<(), FrontendError> {
        let mut at_line_start = true;
        while self.pos < self.chars.len() {
            if at_line_start && self.depth == 0 {
                if self.indentation()? {
                    continue;
                }
                at_line_start = false;
            }
            let c = self.chars[self.pos];
            match c {
                '\n' => {
                    self.pos += 1;
                    if self.depth == 0 {
                        self.push(Tok::Newline);
                        at_line_start = true;
                    }
                    self.line += 1;
                }
                ' ' | '\t' | '\r' | '\x0c' => self.pos += 1,
                '#' => self.skip_comment(),
                '\\' if matches!(self.peek(1), Some('\n')) => {
                    self.pos += 2;
                    self.line += 1;
                }
                '\\' if self.peek(1) == Some('\r') && self.peek(2) == Some('\n') => {
                    self.pos += 3;
                    self.line += 1;
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.number()?
                }
                c if c == '"' || c == '\'' => self.string(String::new())?,
                c if c == '_' || c.is_alphabetic() => self.name_or_string()?,
                _ => self.op()?,
            }
        }
        if !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
            self.push(Tok::Newline);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent);
        }
        self.push(Tok::Eof);
        Ok(())
    }

    fn skip_comment(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos] != '\n' {
            self.pos += 1;
        }
    }

    /// Measures leading whitespace; returns `true` when the line is blank or
    /// a comment and has been consumed.
    fn indentation(&mut self) -> Result<bool, FrontendError> {
        let mut width = 0usize;
        while let Some(c) = self.peek(0) {
            match c {
                ' ' => width += 1,
                '\t' => width = (width / 8 + 1) * 8,
                '\x0c' | '\r' => {}
                _ => break,
            }
            self.pos += 1;
        }
        match self.peek(0) {
            None => return Ok(true),
            Some('\n') => {
                self.pos += 1;
                self.line += 1;
                return Ok(true);
            }
            Some('#') => {
                self.skip_comment();
                if self.peek(0) == Some('\n') {
                    self.pos += 1;
                    self.line += 1;
                }
                return Ok(true);
            }
            _ => {}
        }
        let current = *self.indents.last().expect("indent stack never empty");
        if width > current {
            self.indents.push(width);
            self.push(Tok::Indent);
        } else {
            while width < *self.indents.last().expect("indent stack never empty") {
                self.indents.pop();
                self.push(Tok::Dedent);
            }
            if width != *self.indents.last().expect("indent stack never empty") {
                return Err(syntax(self.line, "inconsistent dedent"));
            }
        }
        Ok(false)
    }

    fn number(&mut self) -> Result<(), FrontendError> {
        let start = self.pos;
        let radix_prefix = self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            let radix = match self.peek(1) {
                Some('x' | 'X') => 16,
                Some('o' | 'O') => 8,
                _ => 2,
            };
            self.pos += 2;
            let digits_start = self.pos;
            while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            let digits: String = self.chars[digits_start..self.pos].iter().filter(|&&c| c != '_').collect();
            let v = i64::from_str_radix(&digits, radix).map_err(|_| syntax(self.line, "invalid integer literal"))?;
            self.push(Tok::Int(v));
            return Ok(());
        }
        let mut is_float = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() || c == '_' {
                self.pos += 1;
            } else if c == '.' && !is_float {
                is_float = true;
                self.pos += 1;
            } else if (c == 'e' || c == 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('+' | '-')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                is_float = true;
                self.pos += 2;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().filter(|&&c| c != '_').collect();
        if matches!(self.peek(0), Some('j' | 'J')) {
            self.pos += 1;
            is_float = true;
        }
        if is_float {
            let v: f64 = text.parse().map_err(|_| syntax(self.line, "invalid float literal"))?;
            self.push(Tok::Float(v));
        } else {
            match text.parse::<i64>() {
                Ok(v) => self.push(Tok::Int(v)),
                // out-of-range integers keep their magnitude approximately
                Err(_) => self.push(Tok::Float(text.parse().unwrap_or(f64::MAX))),
            }
        }
        Ok(())
    }

    fn name_or_string(&mut self) -> Result<(), FrontendError> {
        let start = self.pos;
        while self.peek(0).is_some_and(|c| c == '_' || c.is_alphanumeric()) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        let is_prefix = word.len() <= 2 && word.chars().all(|c| "rRbBuUfF".contains(c));
        if is_prefix && matches!(self.peek(0), Some('"' | '\'')) {
            return self.string(word.to_ascii_lowercase());
        }
        self.push(Tok::Name(word));
        Ok(())
    }

    fn string(&mut self, prefix: String) -> Result<(), FrontendError> {
        let raw = prefix.contains('r');
        let quote = self.chars[self.pos];
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        let start_line = self.line;
        self.pos += if triple { 3 } else { 1 };
        let mut value = String::new();
        loop {
            let Some(c) = self.peek(0) else {
                return Err(syntax(start_line, "unterminated string literal"));
            };
            if c == quote {
                if !triple {
                    self.pos += 1;
                    break;
                }
                if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                    self.pos += 3;
                    break;
                }
            }
            if c == '\n' {
                if !triple {
                    return Err(syntax(start_line, "unterminated string literal"));
                }
                self.line += 1;
            }
            if c == '\\' {
                let Some(next) = self.peek(1) else {
                    return Err(syntax(start_line, "unterminated string literal"));
                };
                self.pos += 2;
                if next == '\n' {
                    self.line += 1;
                    if raw {
                        value.push('\\');
                        value.push('\n');
                    }
                    continue;
                }
                if raw {
                    value.push('\\');
                    value.push(next);
                    continue;
                }
                value.push(match next {
                    'n' => '\n',
                    't' => '\t',
                    'r' => '\r',
                    '0' => '\0',
                    other => other,
                });
                continue;
            }
            value.push(c);
            self.pos += 1;
        }
        self.push(Tok::Str(value));
        Ok(())
    }

    fn op(&mut self) -> Result<(), FrontendError> {
        for op in OPS {
            let n = op.chars().count();
            if self.pos + n <= self.chars.len() && self.chars[self.pos..self.pos + n].iter().copied().eq(op.chars()) {
                self.pos += n;
                match op {
                    "(" | "[" | "{" => self.depth += 1,
                    ")" | "]" | "}" => self.depth = self.depth.saturating_sub(1),
                    _ => {}
                }
                self.push(Tok::Op(op));
                return Ok(());
            }
        }
        Err(syntax(
            self.line,
            format!("unexpected character {:?}", self.chars[self.pos]),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_blocks() {
        let t = toks("for i in x:\n    a = 1\nb = 2\n");
        assert!(t.contains(&Tok::Indent));
        assert!(t.contains(&Tok::Dedent));
        assert_eq!(t.last(), Some(&Tok::Eof));
    }

    #[test]
    fn dedent_after_blank_line() {
        let t = toks("for i in x:\n    a = 1\n\n    # note\nb = 2\n");
        let b = t.iter().position(|t| *t == Tok::Name("b".into())).unwrap();
        assert_eq!(t[b - 1], Tok::Dedent);
    }

    #[test]
    fn brackets_join_lines() {
        let t = toks("f(1,\n  2)\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
        assert!(!t.contains(&Tok::Indent));
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(
            toks("0x10 1_000 2.5 1e-3 'a\\n' r'\\d' \"\"\"x\ny\"\"\""),
            vec![
                Tok::Int(16),
                Tok::Int(1000),
                Tok::Float(2.5),
                Tok::Float(0.001),
                Tok::Str("a\n".into()),
                Tok::Str("\\d".into()),
                Tok::Str("x\ny".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn line_numbers_follow_source() {
        let ts = tokenize("a\n\n# c\nb\n").unwrap();
        let b = ts.iter().find(|t| t.tok == Tok::Name("b".into())).unwrap();
        assert_eq!(b.line, 4);
    }

    #[test]
    fn errors() {
        assert!(tokenize("'abc").is_err());
        assert!(tokenize("a = $").is_err());
        assert!(tokenize("if x:\n    a\n  b\n").is_err());
    }
}
