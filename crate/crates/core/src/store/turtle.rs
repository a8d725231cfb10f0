//! Line-oriented Turtle subset.
//!
//! ```text
//! line        := prefix-decl | triple | blank | comment
//! prefix-decl := "@prefix" PNAME ":" "<" IRI ">" "."
//! triple      := name name (name | literal) "."
//! literal     := '"' chars '"' ("^^" name)?
//! comment     := "#" to end of line
//! ```
//!
//! Every statement occupies exactly one line. Untyped literals are
//! `xsd:string`; typed literals must name an XSD datatype through a
//! declared prefix.

use std::fmt::Write as _;

use super::{is_name_char, Datatype, Literal, Name, NodeValue, ParseError, StoreError, Triple, TripleGraph, XSD_NS};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    PrefixKeyword,
    Iri(String),
    Name { prefix: String, local: String },
    Str(String),
    Caret,
    Dot,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::PrefixKeyword => "@prefix".into(),
            Token::Iri(i) => format!("<{i}>"),
            Token::Name { prefix, local } => format!("{prefix}:{local}"),
            Token::Str(s) => format!("\"{s}\""),
            Token::Caret => "^^".into(),
            Token::Dot => ".".into(),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Lexer {
    fn new(line_text: &str, line: usize) -> Self {
        Lexer { chars: line_text.chars().collect(), pos: 0, line }
    }

    fn syntax(&self, column: usize, token: impl Into<String>, expected: &str) -> ParseError {
        ParseError::Syntax { line: self.line, column, token: token.into(), expected: expected.into() }
    }

    /// Next token with its 1-based column, or `None` at end of line / comment.
    fn next(&mut self) -> Result<Option<(Token, usize)>, ParseError> {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok(None);
        };
        let start = self.pos;
        let column = start + 1;
        match c {
            '#' => {
                self.pos = self.chars.len();
                Ok(None)
            }
            '.' => {
                self.pos += 1;
                Ok(Some((Token::Dot, column)))
            }
            '@' => {
                let word: String = self.take_while(start + 1, |c| c.is_ascii_alphabetic());
                if word == "prefix" {
                    Ok(Some((Token::PrefixKeyword, column)))
                } else {
                    Err(self.syntax(column, format!("@{word}"), "@prefix"))
                }
            }
            '<' => {
                let end = self.chars[start..].iter().position(|&c| c == '>').map(|p| start + p);
                match end {
                    Some(end) => {
                        let iri: String = self.chars[start + 1..end].iter().collect();
                        self.pos = end + 1;
                        if iri.is_empty() || iri.contains(char::is_whitespace) || iri.contains('<') {
                            return Err(self.syntax(column, format!("<{iri}>"), "an IRI"));
                        }
                        Ok(Some((Token::Iri(iri), column)))
                    }
                    None => Err(self.syntax(column, self.rest(start), "'>' closing the IRI")),
                }
            }
            '"' => self.string(column).map(|s| Some((Token::Str(s), column))),
            '^' => {
                if self.chars.get(start + 1) == Some(&'^') {
                    self.pos += 2;
                    Ok(Some((Token::Caret, column)))
                } else {
                    Err(self.syntax(column, "^", "^^"))
                }
            }
            c if c == ':' || is_name_char(c) => {
                let prefix = self.take_while(start, is_name_char);
                if self.chars.get(self.pos) != Some(&':') {
                    return Err(self.syntax(column, prefix, "a prefixed name"));
                }
                self.pos += 1;
                let local = self.take_while(self.pos, is_name_char);
                if !super::is_valid_prefix(&prefix) {
                    return Err(self.syntax(column, format!("{prefix}:{local}"), "a valid prefix label"));
                }
                Ok(Some((Token::Name { prefix, local }, column)))
            }
            other => Err(self.syntax(column, other.to_string(), "a name, literal, IRI or '.'")),
        }
    }

    fn take_while(&mut self, from: usize, pred: impl Fn(char) -> bool) -> String {
        let mut end = from;
        while end < self.chars.len() && pred(self.chars[end]) {
            end += 1;
        }
        self.pos = end;
        self.chars[from..end].iter().collect()
    }

    fn rest(&self, from: usize) -> String {
        self.chars[from..].iter().collect()
    }

    fn string(&mut self, column: usize) -> Result<String, ParseError> {
        let mut out = String::new();
        let mut i = self.pos + 1;
        while let Some(&c) = self.chars.get(i) {
            match c {
                '"' => {
                    self.pos = i + 1;
                    return Ok(out);
                }
                '\\' => {
                    let escaped = match self.chars.get(i + 1) {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        other => {
                            let tok = other.map(|c| format!("\\{c}")).unwrap_or_else(|| "\\".into());
                            return Err(self.syntax(i + 1, tok, "a string escape (\\\" \\\\ \\n \\t \\r)"));
                        }
                    };
                    out.push(escaped);
                    i += 2;
                }
                c => {
                    out.push(c);
                    i += 1;
                }
            }
        }
        Err(self.syntax(column, self.rest(self.pos), "a closing '\"'"))
    }
}

struct LineParser<'g> {
    lexer: Lexer,
    graph: &'g TripleGraph,
}

impl LineParser<'_> {
    fn expect_next(&mut self, expected: &str) -> Result<(Token, usize), ParseError> {
        match self.lexer.next()? {
            Some(t) => Ok(t),
            None => Err(self.lexer.syntax(self.lexer.chars.len() + 1, "end of line", expected)),
        }
    }

    fn name(&self, token: Token, column: usize, expected: &str) -> Result<Name, ParseError> {
        match token {
            Token::Name { prefix, local } if !local.is_empty() => {
                if !self.graph.prefixes().contains_key(&prefix) {
                    return Err(ParseError::UndeclaredPrefix { line: self.lexer.line, column, prefix });
                }
                Ok(Name { prefix, local })
            }
            other => Err(self.lexer.syntax(column, other.describe(), expected)),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        let (tok, col) = self.expect_next("'.'")?;
        if tok != Token::Dot {
            return Err(self.lexer.syntax(col, tok.describe(), "'.'"));
        }
        if let Some((tok, col)) = self.lexer.next()? {
            return Err(self.lexer.syntax(col, tok.describe(), "end of line"));
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<(String, String), ParseError> {
        let (tok, col) = self.expect_next("a prefix label")?;
        let label = match tok {
            Token::Name { prefix, local } if local.is_empty() => prefix,
            other => return Err(self.lexer.syntax(col, other.describe(), "a prefix label ending in ':'")),
        };
        let (tok, col) = self.expect_next("an IRI")?;
        let Token::Iri(iri) = tok else {
            return Err(self.lexer.syntax(col, tok.describe(), "an IRI in <...>"));
        };
        self.end_of_statement()?;
        Ok((label, iri))
    }

    fn triple(&mut self, first: Token, first_col: usize) -> Result<Triple, ParseError> {
        let subject = self.name(first, first_col, "a subject name")?;
        let (tok, col) = self.expect_next("a predicate name")?;
        let predicate = self.name(tok, col, "a predicate name")?;
        let (tok, col) = self.expect_next("an object")?;
        let object = match tok {
            Token::Str(lexical) => NodeValue::Literal(self.literal_tail(lexical, col)?),
            other => NodeValue::Name(self.name(other, col, "an object name or literal")?),
        };
        self.end_of_statement()?;
        Ok(Triple { subject, predicate, object })
    }

    fn literal_tail(&mut self, lexical: String, literal_col: usize) -> Result<Literal, ParseError> {
        let save = self.lexer.pos;
        let datatype = match self.lexer.next()? {
            Some((Token::Caret, _)) => {
                let (tok, col) = self.expect_next("a datatype name")?;
                let dt_name = self.name(tok, col, "a datatype name")?;
                let in_xsd = self.graph.prefixes().get(&dt_name.prefix).map(String::as_str) == Some(XSD_NS);
                match Datatype::from_xsd_local(&dt_name.local).filter(|_| in_xsd) {
                    Some(dt) => dt,
                    None => return Err(self.lexer.syntax(col, dt_name.to_string(), "xsd:integer, xsd:string, xsd:boolean or xsd:anyURI")),
                }
            }
            _ => {
                self.lexer.pos = save;
                Datatype::String
            }
        };
        Literal::new(lexical.clone(), datatype).map_err(|e| ParseError::InvalidLiteral {
            line: self.lexer.line,
            column: literal_col,
            lexical,
            reason: match e {
                StoreError::InvalidLiteral { reason, .. } => reason,
                other => other.to_string(),
            },
        })
    }
}

/// Parses ontology text into a graph. Duplicate triples collapse.
pub fn parse(text: &str) -> Result<TripleGraph, StoreError> {
    let mut graph = TripleGraph::new();
    for (idx, line_text) in text.lines().enumerate() {
        let mut parser = LineParser { lexer: Lexer::new(line_text, idx + 1), graph: &graph };
        let Some((first, col)) = parser.lexer.next()? else {
            continue;
        };
        if first == Token::PrefixKeyword {
            let (label, iri) = parser.prefix_decl()?;
            graph.declare_prefix(label, iri)?;
        } else {
            let triple = parser.triple(first, col)?;
            graph.insert(triple)?;
        }
    }
    Ok(graph)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Canonical text: sorted prefix block, a blank line, then sorted triples.
pub fn serialize(graph: &TripleGraph) -> String {
    let mut out = String::new();
    for (label, iri) in graph.prefixes() {
        let _ = writeln!(out, "@prefix {label}: <{iri}> .");
    }
    if graph.is_empty() {
        return out;
    }
    out.push('\n');
    let xsd = graph.prefix_for(XSD_NS).unwrap_or("xsd");
    for t in graph.iter() {
        let _ = write!(out, "{} {} ", t.subject, t.predicate);
        match &t.object {
            NodeValue::Name(n) => {
                let _ = write!(out, "{n}");
            }
            NodeValue::Literal(l) if l.datatype() == Datatype::String => {
                let _ = write!(out, "\"{}\"", escape(l.lexical()));
            }
            NodeValue::Literal(l) => {
                let _ = write!(out, "\"{}\"^^{xsd}:{}", escape(l.lexical()), l.datatype().xsd_local());
            }
        }
        out.push_str(" .\n");
    }
    out
}
