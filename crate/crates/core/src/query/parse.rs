use super::{ConjunctiveQuery, Goal, QueryError};
use crate::namespace::Namespaces;
use crate::term::{Iri, Term, TriplePattern};
use crate::vocab;

/// Parse the REPL surface syntax.
///
/// ```text
/// query := ["?-"] goal ("," goal)* ["."]
/// goal  := ("rdf" | "rdf_reachable" | "rdf_assert") "(" term "," term "," term ")"
/// term  := Var | "_" | prefix ":" (name | "'" quoted "'") | "<" iri ">"
///        | "\"" string "\"" ["^^" iri-term] | integer | "_:" label
/// ```
pub fn parse_query(text: &str, ns: &Namespaces) -> Result<ConjunctiveQuery, QueryError> {
    let mut p = Parser {
        text,
        pos: 0,
        ns,
        anon: 0,
    };
    p.ws();
    if p.rest().starts_with("?-") {
        p.pos += 2;
    }
    let mut goals = vec![p.goal()?];
    loop {
        p.ws();
        match p.peek() {
            Some(',') => {
                p.pos += 1;
                goals.push(p.goal()?);
            }
            Some('.') => {
                p.pos += 1;
                p.ws();
                if p.pos < text.len() {
                    return Err(p.err("unexpected input after `.`"));
                }
                break;
            }
            None => break,
            Some(c) => return Err(p.err(format!("expected `,` or `.`, found `{c}`"))),
        }
    }
    Ok(ConjunctiveQuery { goals })
}

/// Parse a single ground term in the same syntax, e.g. a `--bind` value.
pub fn parse_term(text: &str, ns: &Namespaces) -> Result<Term, QueryError> {
    let mut p = Parser {
        text,
        pos: 0,
        ns,
        anon: 0,
    };
    p.ws();
    let start = p.pos;
    let t = p.term()?;
    p.ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected input after term"));
    }
    if matches!(t, Term::Var(_)) {
        return Err(p.err_at(start, "expected a ground term, found a variable"));
    }
    Ok(t)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    ns: &'a Namespaces,
    anon: usize,
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn ws(&mut self) {
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.text.len() - trimmed.len();
            if trimmed.starts_with('%') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    fn err_at(&self, position: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn err(&self, message: impl Into<String>) -> QueryError {
        self.err_at(self.pos, message)
    }

    fn expect(&mut self, c: char) -> Result<(), QueryError> {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> &'a str {
        let len = self
            .rest()
            .char_indices()
            .find(|(_, c)| !is_ident(*c))
            .map_or(self.rest().len(), |(i, _)| i);
        let s = &self.rest()[..len];
        self.pos += len;
        s
    }

    fn goal(&mut self) -> Result<Goal, QueryError> {
        self.ws();
        let start = self.pos;
        let name = self.ident();
        let make: fn(TriplePattern) -> Goal = match name {
            "rdf" => Goal::Rdf,
            "rdf_reachable" => Goal::RdfReachable,
            "rdf_assert" => Goal::RdfAssert,
            "" => return Err(self.err("expected a goal")),
            other => return Err(self.err_at(start, format!("unsupported goal `{other}`"))),
        };
        self.expect('(')?;
        let s = self.term()?;
        self.expect(',')?;
        let p = self.term()?;
        self.expect(',')?;
        let o = self.term()?;
        self.expect(')')?;
        Ok(make(TriplePattern::new(s, p, o)))
    }

    fn term(&mut self) -> Result<Term, QueryError> {
        self.ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(self.err("expected a term"));
        };
        if c == '<' {
            self.pos += 1;
            let end = self
                .rest()
                .find('>')
                .ok_or_else(|| self.err_at(start, "unterminated IRI"))?;
            let iri = &self.rest()[..end];
            if iri.is_empty() || iri.contains(char::is_whitespace) {
                return Err(self.err_at(start, "malformed IRI"));
            }
            self.pos += end + 1;
            return Ok(Term::iri(iri));
        }
        if c == '"' {
            let lexical = self.quoted('"')?;
            if self.rest().starts_with("^^") {
                self.pos += 2;
                let dt = match self.term()? {
                    Term::Iri(i) => i,
                    _ => return Err(self.err_at(start, "datatype must be an IRI")),
                };
                return Ok(Term::typed(lexical, dt));
            }
            return Ok(Term::string(lexical));
        }
        if c.is_ascii_digit() || (c == '-' && self.rest()[1..].starts_with(|d: char| d.is_ascii_digit())) {
            let len = 1 + self.rest()[1..]
                .find(|d: char| !d.is_ascii_digit())
                .unwrap_or(self.rest().len() - 1);
            let digits = &self.rest()[..len];
            self.pos += len;
            return Ok(Term::typed(digits, vocab::xsd("integer")));
        }
        if self.rest().starts_with("_:") {
            self.pos += 2;
            let label = self.ident();
            if label.is_empty() {
                return Err(self.err_at(start, "empty blank node label"));
            }
            return Ok(Term::blank(label));
        }
        if !is_ident(c) {
            return Err(self.err(format!("unexpected `{c}`")));
        }
        let word = self.ident();
        if word == "_" {
            self.anon += 1;
            return Ok(Term::var(format!("_G{}", self.anon)));
        }
        if self.peek() == Some(':') {
            self.pos += 1;
            let local = if self.peek() == Some('\'') {
                self.quoted('\'')?
            } else {
                let l = self.ident();
                if l.is_empty() {
                    return Err(self.err("expected a local name"));
                }
                l.to_string()
            };
            let uri = self
                .ns
                .uri(word)
                .ok_or_else(|| self.err_at(start, format!("unknown prefix `{word}`")))?;
            return Ok(Term::Iri(Iri::new(format!("{uri}{local}"))));
        }
        if word.starts_with(|c: char| c.is_uppercase() || c == '_') {
            return Ok(Term::var(word));
        }
        Err(self.err_at(start, format!("`{word}` is neither a variable nor a prefixed name")))
    }

    fn quoted(&mut self, q: char) -> Result<String, QueryError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c if c == q => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                c => out.push(c),
            }
        }
        Err(self.err_at(start, "unterminated quoted text"))
    }
}
