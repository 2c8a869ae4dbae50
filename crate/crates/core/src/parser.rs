//! Concrete syntax for multi-context systems (`.mcs` files) and for
//! observer/preference programs (`.lp` files), with positioned diagnostics
//! and a canonical serializer.
//!
//! A system file is a sequence of declarations:
//!
//! ```text
//! # comment
//! context patients kind facts { labresult(sue,xray). }
//! context store kind facts managed guarded_revise { p. exclude p q. }
//! context expert kind asp { give_weak | give_strong :- pneumonia. }
//! context model kind clausal { a | -b. }
//! bridge r1: expert::pneumonia <- patients::labresult(sue,xray), not store::q.
//! bridge r2: store::revise(q) <- .
//! ```
//!
//! Parsing recovers at declaration boundaries and reports every error it
//! finds; a system is only returned when there are none, and it then passes
//! validation with an empty report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{
    AspKb, AspRule, Atom, BeliefLiteral, BridgeRule, ClausalKb, Clause, Context, ContextId,
    FactsKb, KnowledgeBase, LogicKind, Manager, Mcs, OpCommand, OpKind, RuleHead, RuleId,
};

/// A position in the input text: 1-based line and column plus the token
/// length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Classification of a parse diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DanglingReference,
    DuplicateId,
    ModeMismatch,
}

impl ParseErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::DanglingReference => "dangling-reference",
            ParseErrorKind::DuplicateId => "duplicate-id",
            ParseErrorKind::ModeMismatch => "mode-mismatch",
        }
    }
}

/// One positioned diagnostic; the message names the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.kind.name(), self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    ColonColon,
    Arrow,
    Implies,
    Pipe,
    Minus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Implies => "`:-`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = SourceSpan {
            line,
            column: col,
            length: 1,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '{' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::LBrace,
                    span,
                });
            }
            '}' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::RBrace,
                    span,
                });
            }
            '(' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::LParen,
                    span,
                });
            }
            ')' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::RParen,
                    span,
                });
            }
            ',' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::Comma,
                    span,
                });
            }
            '.' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::Dot,
                    span,
                });
            }
            '|' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::Pipe,
                    span,
                });
            }
            '-' => {
                bump!();
                tokens.push(Token {
                    tok: Tok::Minus,
                    span,
                });
            }
            ':' => {
                bump!();
                match chars.peek() {
                    Some(':') => {
                        bump!();
                        tokens.push(Token {
                            tok: Tok::ColonColon,
                            span: SourceSpan { length: 2, ..span },
                        });
                    }
                    Some('-') => {
                        bump!();
                        tokens.push(Token {
                            tok: Tok::Implies,
                            span: SourceSpan { length: 2, ..span },
                        });
                    }
                    _ => tokens.push(Token {
                        tok: Tok::Colon,
                        span,
                    }),
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    tokens.push(Token {
                        tok: Tok::Arrow,
                        span: SourceSpan { length: 2, ..span },
                    });
                } else {
                    errors.push(ParseError {
                        span,
                        kind: ParseErrorKind::Syntax,
                        message: "stray `<`; expected `<-`".into(),
                    });
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let length = ident.chars().count();
                tokens.push(Token {
                    tok: Tok::Ident(ident),
                    span: SourceSpan { length, ..span },
                });
            }
            other => {
                bump!();
                errors.push(ParseError {
                    span,
                    kind: ParseErrorKind::Syntax,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    let eof_span = SourceSpan {
        line,
        column: col,
        length: 0,
    };
    tokens.push(Token {
        tok: Tok::Eof,
        span: eof_span,
    });
    (tokens, errors)
}

/// A structurally parsed context, before reference checking.
struct ContextDecl {
    context: Context,
    id_span: SourceSpan,
}

/// A structurally parsed bridge rule, before reference checking.
struct BridgeDecl {
    rule: BridgeRule,
    id_span: SourceSpan,
    head_ctx_span: SourceSpan,
    head_span: SourceSpan,
    body_ctx_spans: Vec<SourceSpan>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().tok, Tok::Eof)
    }

    fn error_at(&mut self, span: SourceSpan, kind: ParseErrorKind, message: String) {
        self.errors.push(ParseError {
            span,
            kind,
            message,
        });
    }

    fn syntax_error(&mut self, expected: &str) -> SourceSpan {
        let token = self.peek().clone();
        self.error_at(
            token.span,
            ParseErrorKind::Syntax,
            format!("expected {expected}, found {}", token.tok.describe()),
        );
        token.span
    }

    fn expect_ident(&mut self, what: &str) -> Option<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(_) => {
                let t = self.next();
                match t.tok {
                    Tok::Ident(s) => Some((s, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => {
                self.syntax_error(what);
                None
            }
        }
    }

    fn expect_tok(&mut self, tok: Tok, what: &str) -> Option<SourceSpan> {
        if self.peek().tok == tok {
            Some(self.next().span)
        } else {
            self.syntax_error(what);
            None
        }
    }

    /// Skips to the next top-level declaration keyword, balancing braces.
    fn recover_to_decl(&mut self) {
        let mut depth = 0usize;
        while !self.at_eof() {
            match &self.peek().tok {
                Tok::LBrace => {
                    depth += 1;
                    self.next();
                }
                Tok::RBrace => {
                    depth = depth.saturating_sub(1);
                    self.next();
                }
                Tok::Ident(s) if depth == 0 && (s == "context" || s == "bridge") => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    /// Skips past the end of a kb item (the next `.`), stopping before `}`.
    fn recover_item(&mut self) {
        while !self.at_eof() {
            match &self.peek().tok {
                Tok::Dot => {
                    self.next();
                    return;
                }
                Tok::RBrace => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    /// `atom ::= NAME ["(" NAME ("," NAME)* ")"]`
    fn parse_atom(&mut self) -> Option<(Atom, SourceSpan)> {
        let (name, span) = self.expect_ident("an atom name")?;
        let mut args: Vec<String> = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            loop {
                let (arg, _) = self.expect_ident("an argument name")?;
                args.push(arg);
                match &self.peek().tok {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::RParen => {
                        self.next();
                        break;
                    }
                    _ => {
                        self.syntax_error("`,` or `)` in the argument list");
                        return None;
                    }
                }
            }
        }
        let atom = if args.is_empty() {
            Atom::parse(&name)
        } else {
            let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
            Ok(Atom::with_args(&name, &refs))
        };
        match atom {
            Ok(atom) => Some((atom, span)),
            Err(msg) => {
                self.error_at(span, ParseErrorKind::Syntax, msg);
                None
            }
        }
    }

    /// `context ID kind (facts|clausal|asp) [managed ...] { items }`
    fn parse_context(&mut self) -> Option<ContextDecl> {
        self.next(); // the `context` keyword
        let (id, id_span) = self.expect_ident("a context id")?;
        match self.expect_ident("the `kind` keyword")? {
            (kw, _) if kw == "kind" => {}
            (_, span) => {
                self.error_at(
                    span,
                    ParseErrorKind::Syntax,
                    "expected the `kind` keyword".into(),
                );
                return None;
            }
        }
        let (kind_name, kind_span) = self.expect_ident("a context kind")?;
        let kind = match kind_name.as_str() {
            "facts" => LogicKind::Facts,
            "clausal" => LogicKind::Clausal,
            "asp" => LogicKind::Asp,
            other => {
                self.error_at(
                    kind_span,
                    ParseErrorKind::Syntax,
                    format!("unknown context kind `{other}`; expected facts, clausal or asp"),
                );
                return None;
            }
        };
        let mut manager: Option<Manager> = None;
        if let Tok::Ident(kw) = &self.peek().tok {
            if kw == "managed" {
                self.next();
                let (mgr_name, mgr_span) = self.expect_ident("a manager name")?;
                manager = Some(match mgr_name.as_str() {
                    "add" => Manager::Add,
                    "add_delete" => Manager::AddDelete,
                    "guarded_revise" => Manager::GuardedRevise {
                        exclusions: BTreeSet::new(),
                    },
                    other => {
                        self.error_at(
                            mgr_span,
                            ParseErrorKind::Syntax,
                            format!(
                                "unknown manager `{other}`; expected add, add_delete or guarded_revise"
                            ),
                        );
                        return None;
                    }
                });
                if matches!(manager, Some(Manager::GuardedRevise { .. }))
                    && kind != LogicKind::Facts
                {
                    self.error_at(
                        mgr_span,
                        ParseErrorKind::ModeMismatch,
                        "`guarded_revise` requires a facts context".into(),
                    );
                    return None;
                }
            }
        }
        self.expect_tok(Tok::LBrace, "`{`")?;

        let mut facts: BTreeSet<Atom> = BTreeSet::new();
        let mut clauses: Vec<Clause> = Vec::new();
        let mut asp_rules: Vec<AspRule> = Vec::new();
        let mut exclusions: BTreeSet<(Atom, Atom)> = BTreeSet::new();

        while self.peek().tok != Tok::RBrace && !self.at_eof() {
            let before = self.errors.len();
            let parsed = match kind {
                LogicKind::Facts => self.parse_facts_item(&manager, &mut facts, &mut exclusions),
                LogicKind::Clausal => self.parse_clause_item(&mut clauses),
                LogicKind::Asp => self.parse_asp_item(&mut asp_rules),
            };
            if parsed.is_none() {
                debug_assert!(self.errors.len() > before);
                self.recover_item();
            }
        }
        self.expect_tok(Tok::RBrace, "`}`")?;

        let kb = match kind {
            LogicKind::Facts => KnowledgeBase::Facts(FactsKb { facts }),
            LogicKind::Clausal => KnowledgeBase::Clausal(ClausalKb::new(clauses, [])),
            LogicKind::Asp => KnowledgeBase::Asp(AspKb::new(asp_rules)),
        };
        let manager = match manager {
            Some(Manager::GuardedRevise { .. }) => Some(Manager::GuardedRevise { exclusions }),
            other => other,
        };
        Some(ContextDecl {
            context: Context {
                id: ContextId::new(id),
                kb,
                manager,
            },
            id_span,
        })
    }

    /// `atom .` or `exclude NAME NAME .` (the latter under guarded_revise).
    fn parse_facts_item(
        &mut self,
        manager: &Option<Manager>,
        facts: &mut BTreeSet<Atom>,
        exclusions: &mut BTreeSet<(Atom, Atom)>,
    ) -> Option<()> {
        if let Tok::Ident(kw) = &self.peek().tok {
            if kw == "exclude" {
                let kw_span = self.next().span;
                if !matches!(manager, Some(Manager::GuardedRevise { .. })) {
                    self.error_at(
                        kw_span,
                        ParseErrorKind::ModeMismatch,
                        "`exclude` items are only valid under the guarded_revise manager".into(),
                    );
                    return None;
                }
                let (a, _) = self.parse_atom()?;
                let (b, _) = self.parse_atom()?;
                self.expect_tok(Tok::Dot, "`.`")?;
                exclusions.insert(if a <= b { (a, b) } else { (b, a) });
                return Some(());
            }
        }
        let (atom, _) = self.parse_atom()?;
        self.expect_tok(Tok::Dot, "`.`")?;
        facts.insert(atom);
        Some(())
    }

    /// `lit | lit | ... .` with `lit ::= ["-"] atom`.
    fn parse_clause_item(&mut self, clauses: &mut Vec<Clause>) -> Option<()> {
        let mut pos: Vec<Atom> = Vec::new();
        let mut neg: Vec<Atom> = Vec::new();
        loop {
            let negated = if self.peek().tok == Tok::Minus {
                self.next();
                true
            } else {
                false
            };
            let (atom, _) = self.parse_atom()?;
            if negated {
                neg.push(atom);
            } else {
                pos.push(atom);
            }
            match &self.peek().tok {
                Tok::Pipe => {
                    self.next();
                }
                Tok::Dot => {
                    self.next();
                    break;
                }
                _ => {
                    self.syntax_error("`|` or `.` in the clause");
                    return None;
                }
            }
        }
        clauses.push(Clause::new(pos, neg));
        Some(())
    }

    /// `h1 | h2 :- b1, not b2 .` — heads, body or both may be absent.
    fn parse_asp_item(&mut self, rules: &mut Vec<AspRule>) -> Option<()> {
        let mut heads: Vec<Atom> = Vec::new();
        if self.peek().tok != Tok::Implies {
            loop {
                let (atom, _) = self.parse_atom()?;
                heads.push(atom);
                match &self.peek().tok {
                    Tok::Pipe => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        let mut pos: Vec<Atom> = Vec::new();
        let mut neg: Vec<Atom> = Vec::new();
        match &self.peek().tok {
            Tok::Dot => {
                self.next();
            }
            Tok::Implies => {
                self.next();
                if self.peek().tok != Tok::Dot {
                    loop {
                        let negated = matches!(&self.peek().tok, Tok::Ident(s) if s == "not");
                        if negated {
                            self.next();
                        }
                        let (atom, _) = self.parse_atom()?;
                        if negated {
                            neg.push(atom);
                        } else {
                            pos.push(atom);
                        }
                        match &self.peek().tok {
                            Tok::Comma => {
                                self.next();
                            }
                            _ => break,
                        }
                    }
                }
                self.expect_tok(Tok::Dot, "`.`")?;
            }
            _ => {
                self.syntax_error("`:-` or `.` in the rule");
                return None;
            }
        }
        if heads.is_empty() && pos.is_empty() && neg.is_empty() {
            // `:- .` carries no information and is almost surely a typo.
            let span = self.peek().span;
            self.error_at(span, ParseErrorKind::Syntax, "empty rule".into());
            return None;
        }
        rules.push(AspRule::new(heads, pos, neg));
        Some(())
    }

    /// `bridge ID : ID :: head <- body? .`
    fn parse_bridge(&mut self) -> Option<BridgeDecl> {
        self.next(); // the `bridge` keyword
        let (id, id_span) = self.expect_ident("a rule id")?;
        self.expect_tok(Tok::Colon, "`:`")?;
        let (head_ctx, head_ctx_span) = self.expect_ident("a context id")?;
        self.expect_tok(Tok::ColonColon, "`::`")?;

        // `add(`, `del(` and `revise(` always read as op-commands.
        let head_span = self.peek().span;
        let head = match &self.peek().tok {
            Tok::Ident(name)
                if matches!(name.as_str(), "add" | "del" | "revise")
                    && self.tokens.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::LParen) =>
            {
                let op = match name.as_str() {
                    "add" => OpKind::Add,
                    "del" => OpKind::Del,
                    _ => OpKind::Revise,
                };
                self.next();
                self.next(); // `(`
                let (formula, _) = self.parse_atom()?;
                self.expect_tok(Tok::RParen, "`)`")?;
                RuleHead::Op(OpCommand::new(op, formula))
            }
            _ => RuleHead::Formula(self.parse_atom()?.0),
        };

        self.expect_tok(Tok::Arrow, "`<-`")?;
        let mut body: Vec<BeliefLiteral> = Vec::new();
        let mut body_ctx_spans: Vec<SourceSpan> = Vec::new();
        if self.peek().tok != Tok::Dot {
            loop {
                let negated = matches!(&self.peek().tok, Tok::Ident(s) if s == "not");
                if negated {
                    self.next();
                }
                let (ctx, ctx_span) = self.expect_ident("a context id")?;
                self.expect_tok(Tok::ColonColon, "`::`")?;
                let (atom, _) = self.parse_atom()?;
                body.push(BeliefLiteral {
                    context: ContextId::new(ctx),
                    atom,
                    negated,
                });
                body_ctx_spans.push(ctx_span);
                match &self.peek().tok {
                    Tok::Comma => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        self.expect_tok(Tok::Dot, "`.`")?;

        Some(BridgeDecl {
            rule: BridgeRule {
                id: RuleId::new(id),
                head_context: ContextId::new(head_ctx),
                head,
                body,
            },
            id_span,
            head_ctx_span,
            head_span,
            body_ctx_spans,
        })
    }
}

/// Parses a `.mcs` text. On success the system is valid (empty validation
/// report); on failure every independent diagnostic is returned.
pub fn parse_mcs(text: &str) -> Result<Mcs, Vec<ParseError>> {
    let (tokens, lex_errors) = lex(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
    };
    let mut contexts: Vec<ContextDecl> = Vec::new();
    let mut bridges: Vec<BridgeDecl> = Vec::new();

    while !parser.at_eof() {
        match &parser.peek().tok {
            Tok::Ident(kw) if kw == "context" => {
                if let Some(decl) = parser.parse_context() {
                    contexts.push(decl);
                } else {
                    parser.recover_to_decl();
                }
            }
            Tok::Ident(kw) if kw == "bridge" => {
                if let Some(decl) = parser.parse_bridge() {
                    bridges.push(decl);
                } else {
                    parser.recover_to_decl();
                }
            }
            _ => {
                parser.syntax_error("a `context` or `bridge` declaration");
                parser.recover_to_decl();
            }
        }
    }

    let mut errors = parser.errors;

    // Reference and mode checks over the structurally sound declarations.
    let mut managers: BTreeMap<ContextId, Option<Manager>> = BTreeMap::new();
    let mut seen_ctx: BTreeSet<ContextId> = BTreeSet::new();
    for decl in &contexts {
        if !seen_ctx.insert(decl.context.id.clone()) {
            errors.push(ParseError {
                span: decl.id_span,
                kind: ParseErrorKind::DuplicateId,
                message: format!("context id `{}` is already declared", decl.context.id),
            });
        }
        managers.insert(decl.context.id.clone(), decl.context.manager.clone());
    }
    let mut seen_rule: BTreeSet<RuleId> = BTreeSet::new();
    for decl in &bridges {
        if !seen_rule.insert(decl.rule.id.clone()) {
            errors.push(ParseError {
                span: decl.id_span,
                kind: ParseErrorKind::DuplicateId,
                message: format!("rule id `{}` is already declared", decl.rule.id),
            });
        }
        match managers.get(&decl.rule.head_context) {
            None => errors.push(ParseError {
                span: decl.head_ctx_span,
                kind: ParseErrorKind::DanglingReference,
                message: format!("unknown context `{}`", decl.rule.head_context),
            }),
            Some(manager) => match (&decl.rule.head, manager) {
                (RuleHead::Op(op), None) => errors.push(ParseError {
                    span: decl.head_span,
                    kind: ParseErrorKind::ModeMismatch,
                    message: format!(
                        "op-head `{op}` targets `{}`, which is not managed",
                        decl.rule.head_context
                    ),
                }),
                (RuleHead::Formula(a), Some(_)) => errors.push(ParseError {
                    span: decl.head_span,
                    kind: ParseErrorKind::ModeMismatch,
                    message: format!(
                        "plain head `{a}` targets `{}`, which is managed",
                        decl.rule.head_context
                    ),
                }),
                (RuleHead::Op(op), Some(manager)) if !manager.supports(op.op) => {
                    errors.push(ParseError {
                        span: decl.head_span,
                        kind: ParseErrorKind::ModeMismatch,
                        message: format!(
                            "op `{}` is not supported by the `{}` manager of `{}`",
                            op.op.name(),
                            manager.name(),
                            decl.rule.head_context
                        ),
                    })
                }
                _ => {}
            },
        }
        for (lit, span) in decl.rule.body.iter().zip(&decl.body_ctx_spans) {
            if !managers.contains_key(&lit.context) {
                errors.push(ParseError {
                    span: *span,
                    kind: ParseErrorKind::DanglingReference,
                    message: format!("unknown context `{}`", lit.context),
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Mcs::new(
        contexts.into_iter().map(|d| d.context).collect(),
        bridges.into_iter().map(|d| d.rule).collect(),
    ))
}

/// Parses an `.lp` file: a bare sequence of asp items.
pub fn parse_asp_program(text: &str) -> Result<AspKb, Vec<ParseError>> {
    let (tokens, lex_errors) = lex(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
    };
    let mut rules: Vec<AspRule> = Vec::new();
    while !parser.at_eof() {
        if parser.parse_asp_item(&mut rules).is_none() {
            parser.recover_item();
        }
    }
    if parser.errors.is_empty() {
        Ok(AspKb::new(rules))
    } else {
        Err(parser.errors)
    }
}

fn write_clause(out: &mut String, clause: &Clause) {
    let mut first = true;
    for a in &clause.pos {
        if !first {
            out.push_str(" | ");
        }
        first = false;
        out.push_str(a.text());
    }
    for a in &clause.neg {
        if !first {
            out.push_str(" | ");
        }
        first = false;
        out.push('-');
        out.push_str(a.text());
    }
    out.push('.');
}

fn write_asp_rule(out: &mut String, rule: &AspRule) {
    let mut first = true;
    for h in &rule.heads {
        if !first {
            out.push_str(" | ");
        }
        first = false;
        out.push_str(h.text());
    }
    if !rule.pos.is_empty() || !rule.neg.is_empty() {
        if !rule.heads.is_empty() {
            out.push(' ');
        }
        out.push_str(":- ");
        let mut first = true;
        for b in &rule.pos {
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str(b.text());
        }
        for b in &rule.neg {
            if !first {
                out.push_str(", ");
            }
            first = false;
            out.push_str("not ");
            out.push_str(b.text());
        }
    }
    out.push('.');
}

/// Serializes an answer-set program in `.lp` syntax, one rule per line.
pub fn serialize_asp_program(kb: &AspKb) -> String {
    let mut out = String::new();
    for rule in kb.rules() {
        write_asp_rule(&mut out, rule);
        out.push('\n');
    }
    out
}

/// Canonical text for a system; parsing it back yields a structurally
/// identical value.
pub fn serialize_mcs(m: &Mcs) -> String {
    let mut out = String::from("# multi-context system\n");
    for ctx in m.contexts() {
        out.push_str(&format!("context {} kind {}", ctx.id, ctx.kb.kind().name()));
        if let Some(manager) = &ctx.manager {
            out.push_str(&format!(" managed {}", manager.name()));
        }
        out.push_str(" {\n");
        match &ctx.kb {
            KnowledgeBase::Facts(kb) => {
                for fact in &kb.facts {
                    out.push_str(&format!("  {}.\n", fact.text()));
                }
            }
            KnowledgeBase::Clausal(kb) => {
                for clause in kb.clauses() {
                    out.push_str("  ");
                    write_clause(&mut out, clause);
                    out.push('\n');
                }
                // Signature atoms not covered by any clause round-trip as
                // tautologies, which construction folds back into the
                // signature.
                let mentioned: BTreeSet<&Atom> =
                    kb.clauses().iter().flat_map(|c| c.atoms()).collect();
                for atom in kb.signature() {
                    if !mentioned.contains(atom) {
                        out.push_str(&format!("  {a} | -{a}.\n", a = atom.text()));
                    }
                }
            }
            KnowledgeBase::Asp(kb) => {
                for rule in kb.rules() {
                    out.push_str("  ");
                    write_asp_rule(&mut out, rule);
                    out.push('\n');
                }
            }
        }
        if let Some(Manager::GuardedRevise { exclusions }) = &ctx.manager {
            for (a, b) in exclusions {
                out.push_str(&format!("  exclude {} {}.\n", a.text(), b.text()));
            }
        }
        out.push_str("}\n");
    }
    for rule in m.rules() {
        out.push_str(&format!(
            "bridge {}: {}::{} <-",
            rule.id, rule.head_context, rule.head
        ));
        for (i, lit) in rule.body.iter().enumerate() {
            out.push_str(if i > 0 { ", " } else { " " });
            out.push_str(&lit.to_string());
        }
        out.push_str(if rule.body.is_empty() { " .\n" } else { ".\n" });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn single_facts_context_parses() {
        let m = parse_mcs("context c1 kind facts { a. }").unwrap();
        assert_eq!(m.contexts().len(), 1);
        assert!(m.rules().is_empty());
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn dangling_body_reference_is_reported_at_the_context_token() {
        let err =
            parse_mcs("context c1 kind facts { }\nbridge r1: c1::a <- not c9::b.").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].kind, ParseErrorKind::DanglingReference);
        assert_eq!(
            err[0].span,
            SourceSpan {
                line: 2,
                column: 25,
                length: 2
            }
        );
        assert!(err[0].message.contains("c9"));
    }

    #[test]
    fn every_declaration_reports_its_own_errors() {
        let text = "context c1 kind facst { }\n\
                    bridge r1: c1::a <- .\n\
                    bridge r2 c1::b <- .";
        let err = parse_mcs(text).unwrap_err();
        // Bad kind in the first declaration, missing colon in the third,
        // and a dangling head reference in r1 since c1 never parsed.
        assert!(err.len() >= 2);
        assert!(err.iter().any(|e| e.span.line == 1));
        assert!(err.iter().any(|e| e.span.line == 3));
    }

    #[test]
    fn duplicate_ids_are_distinct_errors() {
        let text = "context c1 kind facts { }\ncontext c1 kind facts { }\n\
                    bridge r1: c1::a <- .\nbridge r1: c1::b <- .";
        let err = parse_mcs(text).unwrap_err();
        assert_eq!(err.len(), 2);
        assert!(err.iter().all(|e| e.kind == ParseErrorKind::DuplicateId));
    }

    #[test]
    fn op_heads_need_a_managed_target() {
        let err = parse_mcs("context c1 kind facts { }\nbridge r1: c1::add(a) <- .").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].kind, ParseErrorKind::ModeMismatch);
        assert_eq!(
            err[0].span,
            SourceSpan {
                line: 2,
                column: 16,
                length: 3
            }
        );
    }

    #[test]
    fn plain_heads_must_not_target_managed_contexts() {
        let err =
            parse_mcs("context c1 kind facts managed add { }\nbridge r1: c1::a <- .").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].kind, ParseErrorKind::ModeMismatch);
    }

    #[test]
    fn managed_context_with_op_rules_parses() {
        let text = "context c1 kind facts managed guarded_revise { p. exclude p q. }\n\
                    bridge r1: c1::revise(q) <- .";
        let m = parse_mcs(text).unwrap();
        assert!(validate(&m).is_empty());
        match &m.contexts()[0].manager {
            Some(Manager::GuardedRevise { exclusions }) => assert_eq!(exclusions.len(), 1),
            other => panic!("unexpected manager {other:?}"),
        }
    }

    #[test]
    fn exclude_items_need_guarded_revise() {
        let err = parse_mcs("context c1 kind facts { exclude a b. }").unwrap_err();
        assert_eq!(err[0].kind, ParseErrorKind::ModeMismatch);
    }

    #[test]
    fn clausal_and_asp_items_parse() {
        let text = "context m kind clausal { a | -b. }\n\
                    context p kind asp { h1 | h2 :- b1, not b2. :- h1, h2. f. }";
        let m = parse_mcs(text).unwrap();
        match &m.contexts()[0].kb {
            KnowledgeBase::Clausal(kb) => {
                assert_eq!(kb.clauses().len(), 1);
                assert_eq!(kb.signature().len(), 2);
            }
            other => panic!("unexpected kb {other:?}"),
        }
        match &m.contexts()[1].kb {
            KnowledgeBase::Asp(kb) => assert_eq!(kb.rules().len(), 3),
            other => panic!("unexpected kb {other:?}"),
        }
    }

    #[test]
    fn empty_system_serializes_to_the_header_comment() {
        let m = Mcs::new(vec![], vec![]);
        assert_eq!(serialize_mcs(&m), "# multi-context system\n");
    }

    #[test]
    fn serialization_round_trips() {
        let text = "context c1 kind facts { a. b(x,y). }\n\
                    context c2 kind clausal { a | -b. c | -c. }\n\
                    context c3 kind asp { h :- a, not b. :- bad. }\n\
                    context c4 kind facts managed guarded_revise { p. exclude p q. }\n\
                    bridge r1: c3::a <- c1::a, not c2::b.\n\
                    bridge r2: c4::revise(q) <- .\n";
        let m = parse_mcs(text).unwrap();
        let serialized = serialize_mcs(&m);
        let reparsed = parse_mcs(&serialized).unwrap();
        assert_eq!(m, reparsed);
        // And serialization itself is a fixpoint.
        assert_eq!(serialized, serialize_mcs(&reparsed));
    }

    #[test]
    fn asp_program_files_parse_and_round_trip() {
        let kb = parse_asp_program("# filter\n:- d2(r1).\n:- d2(r2).\n").unwrap();
        assert_eq!(kb.rules().len(), 2);
        let again = parse_asp_program(&serialize_asp_program(&kb)).unwrap();
        assert_eq!(kb, again);
    }

    #[test]
    fn error_spans_point_into_the_input() {
        let text = "context c1 kind facts {\n  a\n}";
        let err = parse_mcs(text).unwrap_err();
        assert_eq!(err[0].kind, ParseErrorKind::Syntax);
        assert_eq!(
            err[0].span,
            SourceSpan {
                line: 3,
                column: 1,
                length: 1
            }
        );
    }
}
