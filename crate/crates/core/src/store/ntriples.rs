//! Line-oriented N-Triples loading and dumping.

use super::{Graph, StoreError};
use crate::term::{escape_literal, Iri, Term, Triple};
use crate::vocab;

/// Parse a whole N-Triples document. Fails on the first malformed line.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, StoreError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| StoreError::Parse { line, message };
        let mut cur = Cursor { s: raw, pos: 0 };
        cur.skip_ws();
        if cur.done() || cur.peek() == Some('#') {
            continue;
        }
        let subject = cur.term().map_err(err)?;
        cur.skip_ws();
        let predicate = cur.term().map_err(err)?;
        cur.skip_ws();
        let object = cur.term().map_err(err)?;
        cur.skip_ws();
        if !cur.eat('.') {
            return Err(err("expected `.` after object".into()));
        }
        cur.skip_ws();
        if !(cur.done() || cur.peek() == Some('#')) {
            return Err(err(format!("trailing input at column {}", cur.pos + 1)));
        }
        let t = Triple::new(subject, predicate, object).map_err(|e| err(e.to_string()))?;
        out.push(t);
    }
    Ok(out)
}

/// Serialize triples as N-Triples, one per line, in the given order.
pub fn dump_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        for term in t.terms() {
            match term {
                Term::Iri(i) => out.push_str(&format!("<{}>", i.as_str())),
                Term::Blank(b) => out.push_str(&format!("_:{b}")),
                Term::Literal { lexical, datatype } => {
                    out.push_str(&format!("\"{}\"", escape_literal(lexical)));
                    if *datatype != vocab::xsd("string") {
                        out.push_str(&format!("^^<{}>", datatype.as_str()));
                    }
                }
                Term::Var(v) => out.push_str(v),
            }
            out.push(' ');
        }
        out.push_str(".\n");
    }
    out
}

impl Graph {
    /// Load an N-Triples document atomically: on any error nothing is asserted.
    /// Returns the number of well-formed lines, which may exceed the number of
    /// newly added triples when some were already present.
    pub fn load_ntriples(&mut self, text: &str) -> Result<usize, StoreError> {
        let triples = parse_ntriples(text)?;
        // Report namespace problems with their line numbers before touching the graph.
        let mut line_of = text
            .lines()
            .enumerate()
            .filter(|(_, l)| {
                let l = l.trim_start();
                !l.is_empty() && !l.starts_with('#')
            })
            .map(|(i, _)| i + 1);
        for t in &triples {
            let line = line_of.next().unwrap_or(0);
            if let Err(e) = self.check_triple(t) {
                return Err(StoreError::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let n = triples.len();
        self.assert_all(triples)?;
        Ok(n)
    }

    pub fn to_ntriples(&self) -> String {
        let all: Vec<Triple> = self.iter().collect();
        dump_ntriples(&all)
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn done(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => {
                if !self.rest().starts_with("_:") {
                    return Err(format!("bad blank node at column {}", self.pos + 1));
                }
                self.pos += 2;
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '-')
                {
                    self.bump();
                }
                if start == self.pos {
                    return Err(format!("empty blank node label at column {}", start + 1));
                }
                Ok(Term::blank(&self.s[start..self.pos]))
            }
            Some('"') => self.literal(),
            Some(c) => Err(format!("unexpected `{c}` at column {}", self.pos + 1)),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> Result<Iri, String> {
        let start = self.pos;
        self.bump();
        let end = self
            .rest()
            .find('>')
            .ok_or_else(|| format!("unterminated IRI at column {}", start + 1))?;
        let body = &self.rest()[..end];
        if body.is_empty() || body.contains([' ', '<', '"']) {
            return Err(format!("invalid IRI at column {}", start + 1));
        }
        let iri = Iri::new(body);
        self.pos += end + 1;
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Term, String> {
        let start = self.pos;
        self.bump();
        let mut lex = String::new();
        loop {
            match self.bump() {
                None => return Err(format!("unterminated literal at column {}", start + 1)),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => lex.push('\n'),
                    Some('r') => lex.push('\r'),
                    Some('t') => lex.push('\t'),
                    Some('"') => lex.push('"'),
                    Some('\\') => lex.push('\\'),
                    Some(u @ ('u' | 'U')) => {
                        let n = if u == 'u' { 4 } else { 8 };
                        let hex = self.rest().get(..n).ok_or("short unicode escape")?;
                        let cp = u32::from_str_radix(hex, 16).map_err(|_| "bad unicode escape")?;
                        lex.push(char::from_u32(cp).ok_or("invalid code point")?);
                        self.pos += n;
                    }
                    _ => return Err(format!("bad escape at column {}", self.pos)),
                },
                Some(c) => lex.push(c),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(format!("expected datatype IRI at column {}", self.pos + 1));
            }
            let dt = self.iri()?;
            Ok(Term::typed(lex, dt))
        } else if self.peek() == Some('@') {
            Err(format!("language tags are not supported (column {})", self.pos + 1))
        } else {
            Ok(Term::string(lex))
        }
    }
}
