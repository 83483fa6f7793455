//! Reader for mist-style `.spec` files and writers for verdict artifacts.
//!
//! Accepted grammar (sections in this order, `#` starts a line comment):
//!
//! ```text
//! vars    x y z
//! rules   x >= 1, y >= 2 -> x' = x - 1, z' = z + 1;
//!         -> y' = y + 1;
//! init    x = 1, y = 0
//! target  z >= 2
//!         x >= 1, y >= 1
//! ```
//!
//! Each `init` line is one initial marking (unlisted places hold 0 tokens)
//! and each `target` line is one conjunction of lower bounds; the target set
//! is the union of their upward closures. A line ending in `,` or `&`
//! continues on the next one. Transfer arcs and interval initial values are
//! not supported.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::certify::Run;
use crate::kernel::{Marking, PetriNet, Tokens, Transition};
use crate::regions::UpSet;
use crate::verdict::CexTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub net: PetriNet,
    pub target: UpSet,
    /// Position of each rule, indexed like the net's transitions.
    pub rule_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Ge,
    Arrow,
    Eq,
    Plus,
    Minus,
    Comma,
    Semi,
    Amp,
    Prime,
    Bang,
    LParen,
    RParen,
    Newline,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Prime => f.write_str("`'`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Newline => f.write_str("end of line"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn err(span: Span, message: impl Into<String>) -> ParseError {
    ParseError {
        line: span.line,
        col: span.col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let span = Span {
                line: li + 1,
                col: i + 1,
            };
            let c = chars[i];
            let two = |next: char| chars.get(i + 1) == Some(&next);
            let (tok, len) = match c {
                '#' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end = chars[i..]
                        .iter()
                        .position(|c| !(c.is_ascii_alphanumeric() || *c == '_'))
                        .map_or(chars.len(), |p| i + p);
                    (Tok::Ident(chars[i..end].iter().collect()), end - i)
                }
                c if c.is_ascii_digit() => {
                    let end = chars[i..]
                        .iter()
                        .position(|c| !c.is_ascii_digit())
                        .map_or(chars.len(), |p| i + p);
                    let digits: String = chars[i..end].iter().collect();
                    let n = digits
                        .parse()
                        .map_err(|_| err(span, format!("number `{digits}` is too large")))?;
                    (Tok::Num(n), end - i)
                }
                '>' if two('=') => (Tok::Ge, 2),
                '-' if two('>') => (Tok::Arrow, 2),
                '=' => (Tok::Eq, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                '&' => (Tok::Amp, 1),
                '\'' => (Tok::Prime, 1),
                '!' => (Tok::Bang, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                other => return Err(err(span, format!("unexpected character `{other}`"))),
            };
            out.push(Token { tok, span });
            i += len;
        }
        out.push(Token {
            tok: Tok::Newline,
            span: Span {
                line: li + 1,
                col: chars.len() + 1,
            },
        });
    }
    Ok(out)
}

const SECTIONS: [&str; 4] = ["vars", "rules", "init", "target"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or_else(
            || self.toks.last().map(|t| t.span).unwrap_or_default(),
            |t| t.span,
        )
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek() == Some(&Tok::Newline) {
            self.pos += 1;
        }
    }

    fn at_section(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if SECTIONS.contains(&s.as_str()))
    }

    fn at_end(&self) -> bool {
        self.peek().is_none()
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        let span = self.span();
        match self.bump() {
            Some(t) if t.tok == want => Ok(span),
            Some(t) => Err(err(span, format!("expected {want}, found {}", t.tok))),
            None => Err(err(span, format!("expected {want}, found end of input"))),
        }
    }

    fn keyword(&mut self, name: &str) -> Result<Span, ParseError> {
        self.skip_newlines();
        let span = self.span();
        match self.bump() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if s == name => Ok(span),
            Some(t) => Err(err(
                span,
                format!("expected section `{name}`, found {}", t.tok),
            )),
            None => Err(err(span, format!("missing section `{name}`"))),
        }
    }

    fn constant(&mut self) -> Result<Tokens, ParseError> {
        let span = self.span();
        match self.bump().map(|t| t.tok) {
            Some(Tok::Num(n)) => {
                Tokens::try_from(n).map_err(|_| err(span, format!("constant {n} is too large")))
            }
            Some(Tok::Minus) => Err(err(span, "negative constants are not allowed")),
            Some(t) => Err(err(span, format!("expected a constant, found {t}"))),
            None => Err(err(span, "expected a constant, found end of input")),
        }
    }

    fn var(&mut self) -> Result<(usize, Span), ParseError> {
        let span = self.span();
        match self.bump().map(|t| t.tok) {
            Some(Tok::Ident(s)) => match self.vars.get(&s) {
                Some(&i) => Ok((i, span)),
                None => Err(err(span, format!("undeclared variable `{s}`"))),
            },
            Some(t) => Err(err(span, format!("expected a variable, found {t}"))),
            None => Err(err(span, "expected a variable, found end of input")),
        }
    }

    fn vars_section(&mut self) -> Result<Vec<String>, ParseError> {
        let head = self.keyword("vars")?;
        let mut names = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_end() || self.at_section() {
                break;
            }
            let span = self.span();
            match self.bump().map(|t| t.tok) {
                Some(Tok::Ident(s)) => {
                    if self.vars.contains_key(&s) {
                        return Err(err(span, format!("variable `{s}` declared twice")));
                    }
                    self.vars.insert(s.clone(), names.len());
                    names.push(s);
                }
                Some(t) => return Err(err(span, format!("expected a variable name, found {t}"))),
                None => unreachable!(),
            }
        }
        if names.is_empty() {
            return Err(err(head, "section `vars` is empty"));
        }
        Ok(names)
    }

    /// `x >= k`
    fn bound(&mut self) -> Result<(usize, Tokens), ParseError> {
        let (x, _) = self.var()?;
        self.expect(Tok::Ge)?;
        Ok((x, self.constant()?))
    }

    fn rule(&mut self, index: usize) -> Result<(Transition, Span), ParseError> {
        let n = self.vars.len();
        let start = self.span();
        let mut guard: Vec<Option<Tokens>> = vec![None; n];
        if self.peek() != Some(&Tok::Arrow) {
            loop {
                self.skip_newlines();
                let (x, k) = self.bound()?;
                guard[x] = Some(guard[x].map_or(k, |g| g.max(k)));
                self.skip_newlines();
                match self.peek() {
                    Some(Tok::Comma | Tok::Amp) => {
                        self.pos += 1;
                    }
                    _ => break,
                }
            }
        }
        self.skip_newlines();
        self.expect(Tok::Arrow)?;
        let mut delta = vec![0i64; n];
        loop {
            self.skip_newlines();
            let (x, _) = self.var()?;
            self.expect(Tok::Prime)?;
            self.expect(Tok::Eq)?;
            let (y, yspan) = self.var()?;
            if x != y {
                return Err(err(
                    yspan,
                    "update must refer to the variable being assigned",
                ));
            }
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    delta[x] += i64::from(self.constant()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    delta[x] -= i64::from(self.constant()?);
                }
                _ => {}
            }
            self.skip_newlines();
            match self.peek() {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                _ => break,
            }
        }
        self.skip_newlines();
        self.expect(Tok::Semi)?;

        let mut g = vec![0; n];
        for x in 0..n {
            match guard[x] {
                Some(k) if i64::from(k) + delta[x] < 0 => {
                    let name = self.name(x);
                    return Err(err(
                        start,
                        format!(
                            "rule decrements `{name}` by {} but only guards `{name} >= {k}`",
                            -delta[x]
                        ),
                    ));
                }
                Some(k) => g[x] = k,
                None => {
                    g[x] = Tokens::try_from((-delta[x]).max(0))
                        .map_err(|_| err(start, "decrement is too large"))?;
                }
            }
        }
        let t = Transition::new(format!("t{index}"), g, delta)
            .map_err(|e| err(start, e.to_string()))?;
        Ok((t, start))
    }

    fn name(&self, x: usize) -> String {
        self.vars
            .iter()
            .find(|(_, &i)| i == x)
            .map(|(s, _)| s.clone())
            .unwrap_or_default()
    }

    fn rules_section(&mut self) -> Result<(Vec<Transition>, Vec<Span>), ParseError> {
        let head = self.keyword("rules")?;
        let mut rules = Vec::new();
        let mut spans = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_end() || self.at_section() {
                break;
            }
            let (t, span) = self.rule(rules.len())?;
            rules.push(t);
            spans.push(span);
        }
        if rules.is_empty() {
            return Err(err(head, "section `rules` is empty"));
        }
        Ok((rules, spans))
    }

    /// Parses `item (sep item)*` on one logical line.
    fn line_items<T>(
        &mut self,
        seps: &[Tok],
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut items = vec![item(self)?];
        loop {
            match self.peek() {
                Some(t) if seps.contains(t) => {
                    self.pos += 1;
                    self.skip_newlines();
                    items.push(item(self)?);
                }
                Some(Tok::Newline) | None => return Ok(items),
                Some(t) => {
                    let t = t.clone();
                    return Err(err(self.span(), format!("unexpected {t}")));
                }
            }
        }
    }

    fn init_section(&mut self) -> Result<Vec<Marking>, ParseError> {
        let head = self.keyword("init")?;
        let n = self.vars.len();
        let mut markings: Vec<Marking> = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_end() || self.at_section() {
                break;
            }
            let span = self.span();
            let items = self.line_items(&[Tok::Comma], |p| {
                let (x, _) = p.var()?;
                p.expect(Tok::Eq)?;
                Ok((x, p.constant()?))
            })?;
            let mut m = vec![0; n];
            let mut seen = vec![false; n];
            for (x, k) in items {
                if seen[x] {
                    return Err(err(span, format!("`{}` assigned twice", self.name(x))));
                }
                seen[x] = true;
                m[x] = k;
            }
            let m = Marking::new(m);
            if !markings.contains(&m) {
                markings.push(m);
            }
        }
        if markings.is_empty() {
            return Err(err(head, "section `init` is empty"));
        }
        Ok(markings)
    }

    fn target_section(&mut self) -> Result<UpSet, ParseError> {
        let head = self.keyword("target")?;
        let n = self.vars.len();
        let mut elems = Vec::new();
        loop {
            self.skip_newlines();
            if self.at_end() {
                break;
            }
            if self.at_section() {
                return Err(err(self.span(), "unexpected section after `target`"));
            }
            let items = self.line_items(&[Tok::Comma, Tok::Amp], Self::bound)?;
            let mut m = vec![0; n];
            for (x, k) in items {
                m[x] = m[x].max(k);
            }
            elems.push(Marking::new(m));
        }
        if elems.is_empty() {
            return Err(err(head, "section `target` is empty"));
        }
        Ok(UpSet::new(elems))
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: HashMap::new(),
    };
    let places = p.vars_section()?;
    let (transitions, rule_spans) = p.rules_section()?;
    let init_span = p.span();
    let initial = p.init_section()?;
    let target = p.target_section()?;
    let net =
        PetriNet::new(places, transitions, initial).map_err(|e| err(init_span, e.to_string()))?;
    Ok(SpecFile {
        net,
        target,
        rule_spans,
    })
}

fn conjunction(m: &Marking, names: &[String]) -> String {
    let parts: Vec<String> = m
        .counts()
        .iter()
        .zip(names)
        .filter(|(&c, _)| c > 0)
        .map(|(c, n)| format!("{n} >= {c}"))
        .collect();
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(" & ")
    }
}

fn named_marking(m: &Marking, names: &[String]) -> String {
    let parts: Vec<String> = m
        .counts()
        .iter()
        .zip(names)
        .map(|(c, n)| format!("{n}={c}"))
        .collect();
    format!("({})", parts.join(","))
}

/// `safe` followed by one `! (bounds)` line per basis element, sorted.
pub fn emit_certificate(basis: &UpSet, names: &[String]) -> String {
    let mut out = String::from("safe");
    for b in basis.sorted() {
        write!(out, "\n! ({})", conjunction(&b, names)).unwrap();
    }
    out
}

/// Reads the basis back from [`emit_certificate`] output.
pub fn parse_certificate(text: &str, names: &[String]) -> Result<UpSet, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: names
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect(),
    };
    p.keyword("safe")?;
    let mut basis = Vec::new();
    loop {
        p.skip_newlines();
        if p.at_end() {
            break;
        }
        p.expect(Tok::Bang)?;
        p.expect(Tok::LParen)?;
        let mut m = vec![0; names.len()];
        if matches!(p.peek(), Some(Tok::Ident(s)) if s == "true") {
            p.pos += 1;
        } else {
            loop {
                let (x, k) = p.bound()?;
                m[x] = m[x].max(k);
                if p.peek() != Some(&Tok::Amp) {
                    break;
                }
                p.pos += 1;
            }
        }
        p.expect(Tok::RParen)?;
        basis.push(Marking::new(m));
    }
    Ok(UpSet::new(basis))
}

/// `unsafe`, the initial marking, one `fire` line per step and the covered
/// target conjunct.
pub fn emit_trace(run: &Run, target: &UpSet, names: &[String]) -> String {
    let mut out = String::from("unsafe\n");
    out.push_str(&named_marking(&run.markings[0], names));
    for (t, m) in run.transitions.iter().zip(&run.markings[1..]) {
        write!(out, "\nfire {t} -> {}", named_marking(m, names)).unwrap();
    }
    write!(
        out,
        "\ncovers {}",
        conjunction(&target.basis()[run.covered], names)
    )
    .unwrap();
    out
}

/// Reads [`emit_trace`] output back as a concrete trace.
pub fn parse_trace(text: &str, names: &[String]) -> Result<CexTrace, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let at = |line: usize, message: &str| ParseError {
        line,
        col: 1,
        message: message.to_string(),
    };
    let marking = |line: usize, s: &str| -> Result<Marking, ParseError> {
        let inner = s
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| at(line, "expected a parenthesized marking"))?;
        let mut m = vec![0; names.len()];
        for part in inner.split(',') {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| at(line, "expected `name=count`"))?;
            let idx = names
                .iter()
                .position(|n| n == name.trim())
                .ok_or_else(|| at(line, &format!("unknown place `{}`", name.trim())))?;
            m[idx] = value
                .trim()
                .parse()
                .map_err(|_| at(line, "malformed token count"))?;
        }
        Ok(Marking::new(m))
    };
    match lines.next() {
        Some((_, "unsafe")) => {}
        Some((l, _)) => return Err(at(l, "expected `unsafe`")),
        None => return Err(at(1, "empty trace")),
    }
    let (l, first) = lines
        .next()
        .ok_or_else(|| at(2, "missing initial marking"))?;
    let mut cur = marking(l, first)?;
    let mut steps = Vec::new();
    for (l, line) in lines {
        if line.starts_with("covers") {
            break;
        }
        let rest = line
            .strip_prefix("fire ")
            .ok_or_else(|| at(l, "expected `fire` or `covers`"))?;
        let (t, m) = rest
            .split_once("->")
            .ok_or_else(|| at(l, "expected `->`"))?;
        let t = t
            .trim()
            .parse()
            .map_err(|_| at(l, "malformed rule index"))?;
        let next = marking(l, m.trim())?;
        steps.push((std::mem::replace(&mut cur, next), t));
    }
    Ok(CexTrace::new(steps, cur))
}

/// Writes a net and target in the accepted `.spec` grammar.
pub fn emit_spec(net: &PetriNet, target: &UpSet) -> String {
    let names = net.places();
    let mut out = String::from("vars\n   ");
    for n in names {
        write!(out, " {n}").unwrap();
    }
    out.push_str("\n\nrules\n");
    for t in net.transitions() {
        let guards: Vec<String> = t
            .guard()
            .iter()
            .zip(names)
            .filter(|(&g, _)| g > 0)
            .map(|(g, n)| format!("{n} >= {g}"))
            .collect();
        let updates: Vec<String> = t
            .delta()
            .iter()
            .zip(names)
            .filter(|(&d, _)| d != 0)
            .map(|(&d, n)| {
                if d > 0 {
                    format!("{n}' = {n} + {d}")
                } else {
                    format!("{n}' = {n} - {}", -d)
                }
            })
            .collect();
        let updates = if updates.is_empty() {
            format!("{0}' = {0}", names[0])
        } else {
            updates.join(", ")
        };
        writeln!(out, "    {} -> {updates};", guards.join(", ")).unwrap();
    }
    out.push_str("\ninit\n");
    for m in net.initial() {
        writeln!(out, "    {}", nonzero_entries(m, names, "=")).unwrap();
    }
    out.push_str("\ntarget\n");
    for u in target {
        writeln!(out, "    {}", nonzero_entries(u, names, ">=")).unwrap();
    }
    out
}

/// `name op count` for every nonzero place; the first place alone when the
/// marking is zero.
fn nonzero_entries(m: &Marking, names: &[String], op: &str) -> String {
    let parts: Vec<String> = m
        .counts()
        .iter()
        .zip(names)
        .filter(|(&c, _)| c > 0)
        .map(|(c, n)| format!("{n} {op} {c}"))
        .collect();
    if parts.is_empty() {
        format!("{} {op} 0", names[0])
    } else {
        parts.join(", ")
    }
}
