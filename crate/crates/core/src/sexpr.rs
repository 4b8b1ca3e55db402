//! Reader for the small Lisp subset the corpus uses: integers, symbols,
//! lists, `'` quotes and the two comment forms.

use crate::error::IngestError;

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Int(i64, usize),
    Sym(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    pub fn line(&self) -> usize {
        match self {
            Sexp::Int(_, l) | Sexp::Sym(_, l) | Sexp::List(_, l) => *l,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            _ => None,
        }
    }
}

struct Reader<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    file: &'a str,
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | ';' | '\'' | '"')
}

impl<'a> Reader<'a> {
    fn err(&self, line: usize, msg: impl Into<String>) -> IngestError {
        IngestError::Syntax {
            file: self.file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), IngestError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(';') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('#') if self.chars.get(self.pos + 1) == Some(&'|') => {
                    let start = self.line;
                    self.pos += 2;
                    let mut depth = 1;
                    while depth > 0 {
                        match self.bump() {
                            None => return Err(self.err(start, "unterminated block comment")),
                            Some('|') if self.peek() == Some('#') => {
                                self.bump();
                                depth -= 1;
                            }
                            Some('#') if self.peek() == Some('|') => {
                                self.bump();
                                depth += 1;
                            }
                            _ => {}
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, IngestError> {
        self.skip_trivia()?;
        let line = self.line;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia()?;
                    match self.peek() {
                        None => return Err(self.err(line, "unbalanced parenthesis: missing ')'")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, line)));
                        }
                        Some('.') if self.chars.get(self.pos + 1).is_none_or(|c| is_delim(*c)) => {
                            return Err(self.err(self.line, "dotted pairs are not supported"));
                        }
                        _ => {
                            let item = self
                                .read()?
                                .ok_or_else(|| self.err(line, "unbalanced parenthesis"))?;
                            items.push(item);
                        }
                    }
                }
            }
            ')' => Err(self.err(line, "unbalanced parenthesis: unexpected ')'")),
            '\'' => {
                self.bump();
                let quoted = self
                    .read()?
                    .ok_or_else(|| self.err(line, "quote at end of input"))?;
                Ok(Some(Sexp::List(
                    vec![Sexp::Sym("quote".into(), line), quoted],
                    line,
                )))
            }
            '"' => Err(self.err(line, "string literals are not supported")),
            '`' | ',' => Err(self.err(line, "backquote syntax is not supported")),
            '#' => Err(self.err(line, "reader macros other than #|...|# are not supported")),
            '|' => Err(self.err(line, "|quoted| symbols are not supported")),
            _ => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if is_delim(c) {
                        break;
                    }
                    if matches!(c, '|' | '`' | ',') {
                        return Err(self.err(line, format!("bad character {c:?} in token")));
                    }
                    self.bump();
                }
                let tok: String = self.chars[start..self.pos].iter().collect();
                self.atom(tok, line).map(Some)
            }
        }
    }

    fn atom(&self, tok: String, line: usize) -> Result<Sexp, IngestError> {
        let digits = tok.strip_prefix(['+', '-']).unwrap_or(&tok);
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            return tok
                .parse::<i64>()
                .map(|i| Sexp::Int(i, line))
                .map_err(|_| self.err(line, format!("integer literal {tok} out of range")));
        }
        let numeric_start = digits.starts_with(|c: char| c.is_ascii_digit());
        if numeric_start && (tok.contains('/') || tok.contains('.')) {
            return Err(self.err(
                line,
                format!("rational or decimal literal {tok} is not supported"),
            ));
        }
        if tok.starts_with("#\\") {
            return Err(self.err(line, "character literals are not supported"));
        }
        Ok(Sexp::Sym(tok, line))
    }
}

/// Reads every top-level form of `src`.
pub fn read_all(src: &str, file: &str) -> Result<Vec<Sexp>, IngestError> {
    let mut r = Reader {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        file,
    };
    let mut out = Vec::new();
    while let Some(s) = r.read()? {
        out.push(s);
    }
    Ok(out)
}
