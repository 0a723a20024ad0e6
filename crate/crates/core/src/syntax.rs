//! Process expressions of basic CCS with recursion.
//!
//! ```text
//! expr   := choice
//! choice := prefix { "+" prefix }
//! prefix := { act "." } atom
//! atom   := "0" | VAR | "rec" VAR "." expr | "(" expr ")"
//! act    := "tau" | IDENT_LOWER
//! ```
//!
//! Lowercase identifiers are visible actions, uppercase identifiers are
//! recursion variables. `rec` and `tau` are reserved. Every expression handed
//! out by this module ([`parse`], [`substitute`], [`canonical`]) is in
//! canonical form: rec-binders carry a name determined by their binder depth,
//! so α-equivalent expressions are structurally equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{CcsError, Result};

fn valid_ident(s: &str, upper: bool) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if upper && c.is_ascii_uppercase() => {}
        Some(c) if !upper && c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A recursion variable, `[A-Z][a-zA-Z0-9_]*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn try_new(name: &str) -> Result<Self> {
        if valid_ident(name, true) {
            Ok(VarName(name.into()))
        } else {
            Err(CcsError::Identifier(name.to_string()))
        }
    }

    /// Panics if `name` is not an uppercase identifier.
    pub fn new(name: &str) -> Self {
        Self::try_new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An action: the internal action τ or a visible action name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    Visible(Arc<str>),
}

impl Action {
    pub fn try_visible(name: &str) -> Result<Self> {
        if name != "tau" && name != "rec" && valid_ident(name, false) {
            Ok(Action::Visible(name.into()))
        } else {
            Err(CcsError::Identifier(name.to_string()))
        }
    }

    /// Panics if `name` is not a lowercase, non-reserved identifier.
    pub fn visible(name: &str) -> Self {
        Self::try_visible(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::Visible(name) => f.write_str(name),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Nil,
    Var(VarName),
    Prefix(Action, Box<Expr>),
    Choice(Box<Expr>, Box<Expr>),
    Rec(VarName, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(VarName::new(name))
    }

    pub fn prefix(action: Action, body: Expr) -> Self {
        Expr::Prefix(action, Box::new(body))
    }

    pub fn tau(body: Expr) -> Self {
        Expr::prefix(Action::Tau, body)
    }

    pub fn act(name: &str, body: Expr) -> Self {
        Expr::prefix(Action::visible(name), body)
    }

    pub fn choice(left: Expr, right: Expr) -> Self {
        Expr::Choice(Box::new(left), Box::new(right))
    }

    /// Builds `rec binder. body` and returns it in canonical form.
    pub fn rec(binder: &str, body: Expr) -> Self {
        canonical(&Expr::Rec(VarName::new(binder), Box::new(body)))
    }

    /// `action^n`: `n` nested prefixes ending in `0`.
    pub fn power(action: &Action, n: usize) -> Self {
        (0..n).fold(Expr::Nil, |acc, _| Expr::prefix(action.clone(), acc))
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Nil | Expr::Var(_) => 1,
            Expr::Prefix(_, body) | Expr::Rec(_, body) => 1 + body.size(),
            Expr::Choice(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Nil | Expr::Var(_) => 1,
            Expr::Prefix(_, body) | Expr::Rec(_, body) => 1 + body.depth(),
            Expr::Choice(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", print(self))
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Zero,
    Tau,
    Rec,
    Lower(String),
    Upper(String),
    Dot,
    Plus,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Zero => f.write_str("`0`"),
            Token::Tau => f.write_str("`tau`"),
            Token::Rec => f.write_str("`rec`"),
            Token::Lower(s) | Token::Upper(s) => write!(f, "`{s}`"),
            Token::Dot => f.write_str("`.`"),
            Token::Plus => f.write_str("`+`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexed {
    token: Token,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let simple = match c {
            '0' => Some(Token::Zero),
            '.' => Some(Token::Dot),
            '+' => Some(Token::Plus),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(token) = simple {
            if c == '0' && chars.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric()) {
                return Err(CcsError::Syntax {
                    line,
                    column,
                    message: "numerals other than `0` are not expressions".into(),
                });
            }
            out.push(Lexed { token, line: start_line, column: start_col });
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            let token = match word.as_str() {
                "tau" => Token::Tau,
                "rec" => Token::Rec,
                _ if c.is_ascii_uppercase() => Token::Upper(word),
                _ => Token::Lower(word),
            };
            out.push(Lexed { token, line: start_line, column: start_col });
            continue;
        }
        return Err(CcsError::Syntax {
            line,
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Lexed { token: Token::Eof, line, column });
    Ok(out)
}

struct Parser {
    tokens: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].token.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> Result<T> {
        let at = &self.tokens[self.pos];
        Err(CcsError::Syntax { line: at.line, column: at.column, message })
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.prefix()?;
        while *self.peek() == Token::Plus {
            self.bump();
            let rhs = self.prefix()?;
            acc = Expr::choice(acc, rhs);
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let mut actions = Vec::new();
        loop {
            let action = match self.peek() {
                Token::Tau => Action::Tau,
                Token::Lower(name) => Action::Visible(name.as_str().into()),
                _ => break,
            };
            self.bump();
            self.expect(Token::Dot)?;
            actions.push(action);
        }
        let body = self.atom()?;
        Ok(actions.into_iter().rev().fold(body, |acc, a| Expr::prefix(a, acc)))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Token::Zero => {
                self.bump();
                Ok(Expr::Nil)
            }
            Token::Upper(name) => {
                self.bump();
                Ok(Expr::Var(VarName(name.as_str().into())))
            }
            Token::Rec => {
                self.bump();
                let binder = match self.bump() {
                    Token::Upper(name) => VarName(name.as_str().into()),
                    other => {
                        self.pos -= 1;
                        return self.error(format!("expected a recursion variable, found {other}"));
                    }
                };
                self.expect(Token::Dot)?;
                let body = self.expr()?;
                Ok(Expr::Rec(binder, Box::new(body)))
            }
            Token::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            other => self.error(format!("expected an expression, found {other}")),
        }
    }
}

/// Parses and canonicalizes a process expression.
pub fn parse(text: &str) -> Result<Expr> {
    let mut parser = Parser { tokens: lex(text)?, pos: 0 };
    let e = parser.expr()?;
    if *parser.peek() != Token::Eof {
        return parser.error(format!("unexpected {}", parser.peek()));
    }
    Ok(canonical(&e))
}

// ---------------------------------------------------------------------------
// Printing

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Ctx {
    /// Full expression position: a choice may appear unparenthesized.
    Expr,
    /// Right operand of `+` or body of a prefix: no bare choice.
    Operand,
}

fn write_expr(e: &Expr, ctx: Ctx, trailing: bool, out: &mut String) {
    match e {
        Expr::Nil => out.push('0'),
        Expr::Var(v) => out.push_str(v.as_str()),
        Expr::Prefix(a, body) => {
            out.push_str(&a.to_string());
            out.push('.');
            write_expr(body, Ctx::Operand, trailing, out);
        }
        Expr::Choice(l, r) => {
            let parens = ctx == Ctx::Operand;
            if parens {
                out.push('(');
            }
            write_expr(l, Ctx::Expr, true, out);
            out.push_str(" + ");
            write_expr(r, Ctx::Operand, trailing && !parens, out);
            if parens {
                out.push(')');
            }
        }
        Expr::Rec(x, body) => {
            // A rec body extends as far right as possible.
            if trailing {
                out.push('(');
            }
            out.push_str("rec ");
            out.push_str(x.as_str());
            out.push_str(". ");
            write_expr(body, Ctx::Expr, false, out);
            if trailing {
                out.push(')');
            }
        }
    }
}

/// Concrete syntax; `parse(&print(e)) == e` for canonical `e`.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, Ctx::Expr, false, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Variables

pub fn free_vars(e: &Expr) -> BTreeSet<VarName> {
    fn go(e: &Expr, bound: &mut Vec<VarName>, acc: &mut BTreeSet<VarName>) {
        match e {
            Expr::Nil => {}
            Expr::Var(v) => {
                if !bound.contains(v) {
                    acc.insert(v.clone());
                }
            }
            Expr::Prefix(_, body) => go(body, bound, acc),
            Expr::Choice(l, r) => {
                go(l, bound, acc);
                go(r, bound, acc);
            }
            Expr::Rec(x, body) => {
                bound.push(x.clone());
                go(body, bound, acc);
                bound.pop();
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(e, &mut Vec::new(), &mut acc);
    acc
}

pub fn is_free_in(v: &VarName, e: &Expr) -> bool {
    match e {
        Expr::Nil => false,
        Expr::Var(w) => w == v,
        Expr::Prefix(_, body) => is_free_in(v, body),
        Expr::Choice(l, r) => is_free_in(v, l) || is_free_in(v, r),
        Expr::Rec(x, body) => x != v && is_free_in(v, body),
    }
}

pub fn is_closed(e: &Expr) -> bool {
    free_vars(e).is_empty()
}

/// No free variables other than `v`.
pub fn is_x_closed(e: &Expr, v: &VarName) -> bool {
    free_vars(e).iter().all(|w| w == v)
}

/// `v` occurs free and unguarded (not under any action prefix) in `e`.
pub fn exposed(v: &VarName, e: &Expr) -> bool {
    match e {
        Expr::Var(w) => w == v,
        Expr::Rec(y, body) => y != v && exposed(v, body),
        Expr::Choice(l, r) => exposed(v, l) || exposed(v, r),
        Expr::Nil | Expr::Prefix(..) => false,
    }
}

// ---------------------------------------------------------------------------
// Canonical forms and substitution

const BINDER_NAMES: [&str; 6] = ["X", "Y", "Z", "W", "V", "U"];

fn binder_candidate(i: usize) -> String {
    match BINDER_NAMES.get(i) {
        Some(name) => (*name).to_string(),
        None => format!("X{i}"),
    }
}

/// Renames every rec-binder after its binder depth, skipping names that
/// occur free in `e`.
pub fn canonical(e: &Expr) -> Expr {
    let free = free_vars(e);
    let mut names: Vec<VarName> = Vec::new();
    let mut scope: Vec<(VarName, VarName)> = Vec::new();
    canon(e, &free, &mut names, &mut scope)
}

fn name_at_depth(depth: usize, free: &BTreeSet<VarName>, names: &mut Vec<VarName>) -> VarName {
    let mut k = 0;
    while names.len() <= depth {
        let candidate = VarName(binder_candidate(k).as_str().into());
        if !free.contains(&candidate) && !names.contains(&candidate) {
            names.push(candidate);
        }
        k += 1;
    }
    names[depth].clone()
}

fn canon(
    e: &Expr,
    free: &BTreeSet<VarName>,
    names: &mut Vec<VarName>,
    scope: &mut Vec<(VarName, VarName)>,
) -> Expr {
    match e {
        Expr::Nil => Expr::Nil,
        Expr::Var(v) => match scope.iter().rev().find(|(old, _)| old == v) {
            Some((_, new)) => Expr::Var(new.clone()),
            None => Expr::Var(v.clone()),
        },
        Expr::Prefix(a, body) => Expr::prefix(a.clone(), canon(body, free, names, scope)),
        Expr::Choice(l, r) => {
            Expr::choice(canon(l, free, names, scope), canon(r, free, names, scope))
        }
        Expr::Rec(x, body) => {
            let new = name_at_depth(scope.len(), free, names);
            scope.push((x.clone(), new.clone()));
            let body = canon(body, free, names, scope);
            scope.pop();
            Expr::Rec(new, Box::new(body))
        }
    }
}

pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    canonical(a) == canonical(b)
}

fn fresh_var(base: &VarName, avoid: &BTreeSet<VarName>) -> VarName {
    (1..)
        .map(|k| VarName(format!("{}_{k}", base.as_str()).as_str().into()))
        .find(|v| !avoid.contains(v))
        .expect("unbounded supply of names")
}

fn subst_raw(e: &Expr, map: &BTreeMap<VarName, Expr>) -> Expr {
    match e {
        Expr::Nil => Expr::Nil,
        Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Prefix(a, body) => Expr::prefix(a.clone(), subst_raw(body, map)),
        Expr::Choice(l, r) => Expr::choice(subst_raw(l, map), subst_raw(r, map)),
        Expr::Rec(y, body) => {
            let inner: BTreeMap<VarName, Expr> = map
                .iter()
                .filter(|(k, _)| *k != y && is_free_in(k, body))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() {
                return e.clone();
            }
            let mut avoid: BTreeSet<VarName> = BTreeSet::new();
            for value in inner.values() {
                avoid.extend(free_vars(value));
            }
            if avoid.contains(y) {
                avoid.extend(free_vars(body));
                avoid.extend(inner.keys().cloned());
                let renamed = fresh_var(y, &avoid);
                let mut inner = inner;
                inner.insert(y.clone(), Expr::Var(renamed.clone()));
                Expr::Rec(renamed, Box::new(subst_raw(body, &inner)))
            } else {
                Expr::Rec(y.clone(), Box::new(subst_raw(body, &inner)))
            }
        }
    }
}

/// Simultaneous capture-avoiding substitution of free occurrences. When a
/// variable is listed twice the first binding wins. The result is canonical.
pub fn substitute(e: &Expr, subs: &[(VarName, Expr)]) -> Expr {
    let mut map = BTreeMap::new();
    for (v, p) in subs {
        map.entry(v.clone()).or_insert_with(|| p.clone());
    }
    canonical(&subst_raw(e, &map))
}

pub fn substitute1(e: &Expr, v: &VarName, p: &Expr) -> Expr {
    substitute(e, &[(v.clone(), p.clone())])
}
