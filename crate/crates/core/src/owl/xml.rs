//! A small XML reader for the RDF/XML dialect: prolog, comments, a DOCTYPE
//! internal subset holding `<!ENTITY>` declarations, elements, attributes and
//! text. Produces an element tree with byte offsets for error reporting.

use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|c| match c {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// Concatenated text content of direct children.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|c| match c {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum XmlError {
    #[error("XML syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown entity reference `&{name};` at {line}:{column}")]
    UnknownEntity {
        name: String,
        line: usize,
        column: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Document {
    pub root: Element,
}

pub fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

pub fn parse(text: &str) -> Result<Document, XmlError> {
    let mut r = Reader {
        text,
        pos: 0,
        entities: HashMap::new(),
    };
    r.prolog()?;
    r.skip_misc()?;
    if !r.starts_with("<") {
        return Err(r.syntax("expected root element"));
    }
    let root = r.element()?;
    r.skip_misc()?;
    if r.pos < text.len() {
        return Err(r.syntax("content after root element"));
    }
    Ok(Document { root })
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
    entities: HashMap<String, String>,
}

impl<'a> Reader<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    fn syntax_at(&self, pos: usize, message: impl Into<String>) -> XmlError {
        let (line, column) = line_col(self.text, pos);
        XmlError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn syntax(&self, message: impl Into<String>) -> XmlError {
        self.syntax_at(self.pos, message)
    }

    fn expect(&mut self, s: &str) -> Result<(), XmlError> {
        if self.starts_with(s) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{s}`")))
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t', '\r', '\n']);
        self.pos = self.text.len() - trimmed.len();
    }

    fn skip_until(&mut self, end: &str, what: &str) -> Result<&'a str, XmlError> {
        match self.rest().find(end) {
            Some(i) => {
                let body = &self.rest()[..i];
                self.pos += i + end.len();
                Ok(body)
            }
            None => Err(self.syntax(format!("unterminated {what}"))),
        }
    }

    fn skip_misc(&mut self) -> Result<(), XmlError> {
        loop {
            self.skip_ws();
            if self.starts_with("<!--") {
                self.pos += 4;
                self.skip_until("-->", "comment")?;
            } else if self.starts_with("<?") {
                self.pos += 2;
                self.skip_until("?>", "processing instruction")?;
            } else {
                return Ok(());
            }
        }
    }

    fn prolog(&mut self) -> Result<(), XmlError> {
        self.skip_misc()?;
        if self.starts_with("<!DOCTYPE") {
            self.pos += "<!DOCTYPE".len();
            self.skip_ws();
            self.name()?;
            self.skip_ws();
            if self.starts_with("[") {
                self.pos += 1;
                loop {
                    self.skip_ws();
                    if self.starts_with("]") {
                        self.pos += 1;
                        break;
                    } else if self.starts_with("<!--") {
                        self.pos += 4;
                        self.skip_until("-->", "comment")?;
                    } else if self.starts_with("<!ENTITY") {
                        self.pos += "<!ENTITY".len();
                        self.skip_ws();
                        let name = self.name()?;
                        self.skip_ws();
                        let value = self.quoted()?;
                        let value = self.resolve(&value.0, value.1)?;
                        self.skip_ws();
                        self.expect(">")?;
                        self.entities.entry(name).or_insert(value);
                    } else {
                        return Err(self.syntax("only ENTITY declarations are supported in DOCTYPE"));
                    }
                }
                self.skip_ws();
            }
            self.expect(">")?;
        }
        Ok(())
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let start = self.pos;
        let len = self
            .rest()
            .char_indices()
            .take_while(|(i, c)| {
                c.is_alphanumeric()
                    || matches!(c, '_' | ':')
                    || (*i > 0 && matches!(c, '-' | '.'))
            })
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        if len == 0 || self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            return Err(self.syntax_at(start, "expected a name"));
        }
        self.pos += len;
        Ok(self.text[start..self.pos].to_string())
    }

    /// A quoted value and the offset of its first character.
    fn quoted(&mut self) -> Result<(String, usize), XmlError> {
        let q = match self.rest().chars().next() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.syntax("expected quoted value")),
        };
        self.pos += 1;
        let start = self.pos;
        let end = self
            .rest()
            .find(q)
            .ok_or_else(|| self.syntax_at(start - 1, "unterminated quoted value"))?;
        let v = self.rest()[..end].to_string();
        self.pos += end + 1;
        if v.contains('<') {
            return Err(self.syntax_at(start, "`<` in attribute value"));
        }
        Ok((v, start))
    }

    /// Expand entity and character references in `raw`, which began at `at`.
    fn resolve(&self, raw: &str, at: usize) -> Result<String, XmlError> {
        let mut out = String::with_capacity(raw.len());
        let mut rest = raw;
        let mut offset = at;
        while let Some(i) = rest.find('&') {
            out.push_str(&rest[..i]);
            let after = &rest[i + 1..];
            let end = after
                .find(';')
                .ok_or_else(|| self.syntax_at(offset + i, "unterminated entity reference"))?;
            let name = &after[..end];
            let replacement = match name {
                "lt" => "<".to_string(),
                "gt" => ">".to_string(),
                "amp" => "&".to_string(),
                "quot" => "\"".to_string(),
                "apos" => "'".to_string(),
                n if n.starts_with("#x") => char_ref(&n[2..], 16)
                    .ok_or_else(|| self.syntax_at(offset + i, "bad character reference"))?,
                n if n.starts_with('#') => char_ref(&n[1..], 10)
                    .ok_or_else(|| self.syntax_at(offset + i, "bad character reference"))?,
                n => match self.entities.get(n) {
                    Some(v) => v.clone(),
                    None => {
                        let (line, column) = line_col(self.text, offset + i);
                        return Err(XmlError::UnknownEntity {
                            name: n.to_string(),
                            line,
                            column,
                        });
                    }
                },
            };
            out.push_str(&replacement);
            let consumed = i + 1 + end + 1;
            rest = &rest[consumed..];
            offset += consumed;
        }
        out.push_str(rest);
        Ok(out)
    }

    fn element(&mut self) -> Result<Element, XmlError> {
        let pos = self.pos;
        self.expect("<")?;
        let name = self.name()?;
        let mut attrs = Vec::new();
        loop {
            let had_ws = {
                let before = self.pos;
                self.skip_ws();
                self.pos > before
            };
            if self.starts_with("/>") {
                self.pos += 2;
                return Ok(Element {
                    name,
                    attrs,
                    children: Vec::new(),
                    pos,
                });
            }
            if self.starts_with(">") {
                self.pos += 1;
                break;
            }
            if !had_ws {
                return Err(self.syntax("expected whitespace before attribute"));
            }
            let an = self.name()?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            let (raw, at) = self.quoted()?;
            let value = self.resolve(&raw, at)?;
            if attrs.iter().any(|(n, _)| *n == an) {
                return Err(self.syntax(format!("duplicate attribute `{an}`")));
            }
            attrs.push((an, value));
        }
        let mut children = Vec::new();
        loop {
            if self.starts_with("</") {
                let close_at = self.pos;
                self.pos += 2;
                let close = self.name()?;
                self.skip_ws();
                self.expect(">")?;
                if close != name {
                    return Err(self.syntax_at(
                        close_at,
                        format!("mismatched closing tag `{close}`, expected `{name}`"),
                    ));
                }
                return Ok(Element {
                    name,
                    attrs,
                    children,
                    pos,
                });
            } else if self.starts_with("<!--") {
                self.pos += 4;
                self.skip_until("-->", "comment")?;
            } else if self.starts_with("<![CDATA[") {
                self.pos += 9;
                let body = self.skip_until("]]>", "CDATA section")?;
                children.push(Node::Text(body.to_string()));
            } else if self.starts_with("<?") {
                self.pos += 2;
                self.skip_until("?>", "processing instruction")?;
            } else if self.starts_with("<") {
                children.push(Node::Element(self.element()?));
            } else if self.rest().is_empty() {
                return Err(self.syntax(format!("unexpected end of input inside `{name}`")));
            } else {
                let at = self.pos;
                let end = self.rest().find('<').unwrap_or(self.rest().len());
                let raw = &self.rest()[..end];
                self.pos += end;
                let text = self.resolve(raw, at)?;
                children.push(Node::Text(text));
            }
        }
    }
}

fn char_ref(digits: &str, radix: u32) -> Option<String> {
    u32::from_str_radix(digits, radix)
        .ok()
        .and_then(char::from_u32)
        .map(String::from)
}
