//! Data model for multi-context systems: atoms, bridge rules, knowledge
//! bases, contexts and belief states, plus structural validation.
//!
//! Everything here is immutable after construction and cheap to clone;
//! all collections are ordered so that output is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A ground atom, compared by its canonical text.
///
/// Canonical form is `name` or `name(arg,...,arg)` with all whitespace
/// stripped. Argument tokens are plain names; there are no variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    text: String,
}

impl Atom {
    /// An atom without arguments. Panics on malformed input; use
    /// [`Atom::parse`] for untrusted text.
    pub fn new(name: &str) -> Self {
        Self::parse(name).expect("malformed atom")
    }

    /// An atom `name(arg,...,arg)`.
    pub fn with_args<S: AsRef<str>>(name: &str, args: &[S]) -> Self {
        let mut text = String::from(name);
        if !args.is_empty() {
            text.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    text.push(',');
                }
                text.push_str(a.as_ref());
            }
            text.push(')');
        }
        Self::parse(&text).expect("malformed atom")
    }

    /// Parses `name` or `name(arg,...,arg)`, stripping whitespace.
    pub fn parse(text: &str) -> Result<Self, String> {
        let canonical: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bytes = canonical.as_bytes();
        if canonical.is_empty() {
            return Err("empty atom".into());
        }
        let name_ok = |s: &str| {
            !s.is_empty()
                && s.chars()
                    .next()
                    .is_some_and(|c| c.is_alphabetic() || c == '_')
                && s.chars().all(|c| c.is_alphanumeric() || c == '_')
        };
        match canonical.find('(') {
            None => {
                if !name_ok(&canonical) {
                    return Err(format!("malformed atom name `{canonical}`"));
                }
            }
            Some(open) => {
                if bytes[canonical.len() - 1] != b')' {
                    return Err(format!("atom `{canonical}` misses a closing parenthesis"));
                }
                let name = &canonical[..open];
                let args = &canonical[open + 1..canonical.len() - 1];
                if !name_ok(name) {
                    return Err(format!("malformed atom name `{name}`"));
                }
                if args.is_empty() {
                    return Err(format!("atom `{canonical}` has an empty argument list"));
                }
                for arg in args.split(',') {
                    if !name_ok(arg) {
                        return Err(format!("malformed atom argument `{arg}`"));
                    }
                }
            }
        }
        Ok(Self { text: canonical })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// The predicate name, i.e. the text up to the first parenthesis.
    pub fn predicate(&self) -> &str {
        match self.text.find('(') {
            Some(i) => &self.text[..i],
            None => &self.text,
        }
    }

    pub fn args(&self) -> Vec<&str> {
        match self.text.find('(') {
            Some(i) => self.text[i + 1..self.text.len() - 1].split(',').collect(),
            None => Vec::new(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(
    /// Identifier of a context.
    ContextId
);
id_type!(
    /// Identifier of a bridge rule, unique within an MCS.
    RuleId
);

/// One body literal of a bridge rule: a belief read at some context,
/// possibly under default negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BeliefLiteral {
    pub context: ContextId,
    pub atom: Atom,
    pub negated: bool,
}

impl BeliefLiteral {
    pub fn pos(context: impl Into<String>, atom: Atom) -> Self {
        Self {
            context: ContextId::new(context),
            atom,
            negated: false,
        }
    }

    pub fn neg(context: impl Into<String>, atom: Atom) -> Self {
        Self {
            context: ContextId::new(context),
            atom,
            negated: true,
        }
    }
}

impl fmt::Display for BeliefLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not {}::{}", self.context, self.atom)
        } else {
            write!(f, "{}::{}", self.context, self.atom)
        }
    }
}

/// Knowledge-base operations a bridge rule may request at a managed context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpKind {
    Add,
    Del,
    Revise,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Del => "del",
            OpKind::Revise => "revise",
        }
    }
}

/// An op-command head `add(s)`, `del(s)` or `revise(s)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpCommand {
    pub op: OpKind,
    pub formula: Atom,
}

impl OpCommand {
    pub fn new(op: OpKind, formula: Atom) -> Self {
        Self { op, formula }
    }
}

impl fmt::Display for OpCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.op.name(), self.formula)
    }
}

/// Head of a bridge rule: a plain formula in unmanaged mode, an op-command
/// in managed mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleHead {
    Formula(Atom),
    Op(OpCommand),
}

impl RuleHead {
    pub fn as_formula(&self) -> Option<&Atom> {
        match self {
            RuleHead::Formula(a) => Some(a),
            RuleHead::Op(_) => None,
        }
    }

    pub fn as_op(&self) -> Option<&OpCommand> {
        match self {
            RuleHead::Formula(_) => None,
            RuleHead::Op(op) => Some(op),
        }
    }

    /// The formula carried by the head, regardless of mode.
    pub fn formula(&self) -> &Atom {
        match self {
            RuleHead::Formula(a) => a,
            RuleHead::Op(op) => &op.formula,
        }
    }
}

impl fmt::Display for RuleHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleHead::Formula(a) => a.fmt(f),
            RuleHead::Op(op) => op.fmt(f),
        }
    }
}

/// A bridge rule `(k : s) <- l_1, ..., l_m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BridgeRule {
    pub id: RuleId,
    pub head_context: ContextId,
    pub head: RuleHead,
    pub body: Vec<BeliefLiteral>,
}

impl BridgeRule {
    pub fn new(
        id: impl Into<String>,
        head_context: impl Into<String>,
        head: RuleHead,
        body: Vec<BeliefLiteral>,
    ) -> Self {
        Self {
            id: RuleId::new(id),
            head_context: ContextId::new(head_context),
            head,
            body,
        }
    }

    /// The same rule with its body emptied, under a fresh id.
    pub fn unconditional(&self, fresh_id: RuleId) -> Self {
        Self {
            id: fresh_id,
            head_context: self.head_context.clone(),
            head: self.head.clone(),
            body: Vec::new(),
        }
    }
}

/// A fact base: any finite atom set is wellformed.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct FactsKb {
    pub facts: BTreeSet<Atom>,
}

impl FactsKb {
    pub fn new(facts: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            facts: facts.into_iter().collect(),
        }
    }
}

/// A clause: disjunction of positive and negated atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clause {
    pub pos: BTreeSet<Atom>,
    pub neg: BTreeSet<Atom>,
}

impl Clause {
    pub fn new(pos: impl IntoIterator<Item = Atom>, neg: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        }
    }

    /// A tautology mentions some atom both positively and negatively.
    pub fn is_tautology(&self) -> bool {
        self.pos.intersection(&self.neg).next().is_some()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.pos.iter().chain(self.neg.iter())
    }
}

/// A clausal knowledge base over an explicit signature.
///
/// Tautological clauses are normalized away at construction: they carry no
/// information beyond their atoms, which are kept in the signature. The
/// serializer relies on this to round-trip signature-only atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClausalKb {
    clauses: BTreeSet<Clause>,
    signature: BTreeSet<Atom>,
}

impl ClausalKb {
    pub fn new(
        clauses: impl IntoIterator<Item = Clause>,
        signature: impl IntoIterator<Item = Atom>,
    ) -> Self {
        let mut kept = BTreeSet::new();
        let mut sig: BTreeSet<Atom> = signature.into_iter().collect();
        for clause in clauses {
            sig.extend(clause.atoms().cloned());
            if !clause.is_tautology() {
                kept.insert(clause);
            }
        }
        Self {
            clauses: kept,
            signature: sig,
        }
    }

    pub fn clauses(&self) -> &BTreeSet<Clause> {
        &self.clauses
    }

    pub fn signature(&self) -> &BTreeSet<Atom> {
        &self.signature
    }

    fn absorb(&mut self, atoms: impl IntoIterator<Item = Atom>) {
        self.signature.extend(atoms);
    }
}

/// One rule of an answer-set program: `h_1 | ... | h_k :- pos, not neg`.
/// `k = 0` is a constraint.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct AspRule {
    pub heads: BTreeSet<Atom>,
    pub pos: BTreeSet<Atom>,
    pub neg: BTreeSet<Atom>,
}

impl AspRule {
    pub fn new(
        heads: impl IntoIterator<Item = Atom>,
        pos: impl IntoIterator<Item = Atom>,
        neg: impl IntoIterator<Item = Atom>,
    ) -> Self {
        Self {
            heads: heads.into_iter().collect(),
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        }
    }

    pub fn fact(atom: Atom) -> Self {
        Self::new([atom], [], [])
    }

    pub fn is_constraint(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.heads
            .iter()
            .chain(self.pos.iter())
            .chain(self.neg.iter())
    }
}

/// A ground answer-set program; duplicate rules collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct AspKb {
    rules: BTreeSet<AspRule>,
}

impl AspKb {
    pub fn new(rules: impl IntoIterator<Item = AspRule>) -> Self {
        Self {
            rules: rules.into_iter().collect(),
        }
    }

    pub fn rules(&self) -> &BTreeSet<AspRule> {
        &self.rules
    }

    pub fn insert(&mut self, rule: AspRule) {
        self.rules.insert(rule);
    }

    /// Every atom occurring in the program.
    pub fn atom_universe(&self) -> BTreeSet<Atom> {
        self.rules.iter().flat_map(|r| r.atoms().cloned()).collect()
    }

    /// The union of two programs.
    pub fn union(&self, other: &AspKb) -> AspKb {
        AspKb {
            rules: self.rules.union(&other.rules).cloned().collect(),
        }
    }
}

/// The semantics a context runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LogicKind {
    Facts,
    Clausal,
    Asp,
}

impl LogicKind {
    pub fn name(self) -> &'static str {
        match self {
            LogicKind::Facts => "facts",
            LogicKind::Clausal => "clausal",
            LogicKind::Asp => "asp",
        }
    }
}

/// A knowledge base together with the logic it is wellformed for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum KnowledgeBase {
    Facts(FactsKb),
    Clausal(ClausalKb),
    Asp(AspKb),
}

impl KnowledgeBase {
    pub fn kind(&self) -> LogicKind {
        match self {
            KnowledgeBase::Facts(_) => LogicKind::Facts,
            KnowledgeBase::Clausal(_) => LogicKind::Clausal,
            KnowledgeBase::Asp(_) => LogicKind::Asp,
        }
    }

    /// Wellformedness of the base for its logic. Facts and asp bases are
    /// always wellformed; a clausal base needs all clause atoms inside its
    /// signature.
    pub fn wellformed(&self) -> bool {
        match self {
            KnowledgeBase::Facts(_) | KnowledgeBase::Asp(_) => true,
            KnowledgeBase::Clausal(kb) => kb
                .clauses
                .iter()
                .all(|c| c.atoms().all(|a| kb.signature.contains(a))),
        }
    }

    /// `kb ∪ H`: bridge-head formulas enter as facts / unit clauses.
    pub fn extend(&self, heads: &BTreeSet<Atom>) -> KnowledgeBase {
        match self {
            KnowledgeBase::Facts(kb) => {
                let mut facts = kb.facts.clone();
                facts.extend(heads.iter().cloned());
                KnowledgeBase::Facts(FactsKb { facts })
            }
            KnowledgeBase::Clausal(kb) => {
                let mut clauses = kb.clauses.clone();
                for h in heads {
                    clauses.insert(Clause::new([h.clone()], []));
                }
                let mut signature = kb.signature.clone();
                signature.extend(heads.iter().cloned());
                KnowledgeBase::Clausal(ClausalKb { clauses, signature })
            }
            KnowledgeBase::Asp(kb) => {
                let mut rules = kb.rules.clone();
                for h in heads {
                    rules.insert(AspRule::fact(h.clone()));
                }
                KnowledgeBase::Asp(AspKb { rules })
            }
        }
    }

    /// Removes the fact representation of `atom` (used by the add_delete
    /// manager): the atom itself, the fact rule `atom.`, or its unit clause.
    pub fn remove_fact(&self, atom: &Atom) -> KnowledgeBase {
        match self {
            KnowledgeBase::Facts(kb) => {
                let mut facts = kb.facts.clone();
                facts.remove(atom);
                KnowledgeBase::Facts(FactsKb { facts })
            }
            KnowledgeBase::Clausal(kb) => {
                let mut clauses = kb.clauses.clone();
                clauses.remove(&Clause::new([atom.clone()], []));
                KnowledgeBase::Clausal(ClausalKb {
                    clauses,
                    signature: kb.signature.clone(),
                })
            }
            KnowledgeBase::Asp(kb) => {
                let mut rules = kb.rules.clone();
                rules.remove(&AspRule::fact(atom.clone()));
                KnowledgeBase::Asp(AspKb { rules })
            }
        }
    }
}

/// A knowledge-base manager of a managed context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Manager {
    /// Applies `add` commands by inserting the formula.
    Add,
    /// Applies `add` and `del`; deletions run first, additions win on conflict.
    AddDelete,
    /// Facts-only revision: `add`/`revise` insert the formula and evict any
    /// fact declared as excluded against it.
    GuardedRevise { exclusions: BTreeSet<(Atom, Atom)> },
}

impl Manager {
    pub fn name(&self) -> &'static str {
        match self {
            Manager::Add => "add",
            Manager::AddDelete => "add_delete",
            Manager::GuardedRevise { .. } => "guarded_revise",
        }
    }

    pub fn supports(&self, op: OpKind) -> bool {
        match self {
            Manager::Add => op == OpKind::Add,
            Manager::AddDelete => matches!(op, OpKind::Add | OpKind::Del),
            Manager::GuardedRevise { .. } => matches!(op, OpKind::Add | OpKind::Revise),
        }
    }
}

/// One context: an identified knowledge base, optionally managed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Context {
    pub id: ContextId,
    pub kb: KnowledgeBase,
    pub manager: Option<Manager>,
}

impl Context {
    pub fn new(id: impl Into<String>, kb: KnowledgeBase) -> Self {
        Self {
            id: ContextId::new(id),
            kb,
            manager: None,
        }
    }

    pub fn managed(id: impl Into<String>, kb: KnowledgeBase, manager: Manager) -> Self {
        Self {
            id: ContextId::new(id),
            kb,
            manager: Some(manager),
        }
    }
}

/// A finite belief set: the atoms a context holds true.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct BeliefSet {
    pub atoms: BTreeSet<Atom>,
}

impl BeliefSet {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }
}

impl fmt::Display for BeliefSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            a.fmt(f)?;
        }
        write!(f, "}}")
    }
}

/// One belief set per context, in context order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct BeliefState {
    pub sets: Vec<BeliefSet>,
}

impl BeliefState {
    pub fn new(sets: Vec<BeliefSet>) -> Self {
        Self { sets }
    }
}

impl fmt::Display for BeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sets.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            s.fmt(f)?;
        }
        write!(f, ")")
    }
}

/// A multi-context system: ordered contexts plus a global indexed rule set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mcs {
    contexts: Vec<Context>,
    rules: Vec<BridgeRule>,
    index: BTreeMap<ContextId, usize>,
}

impl Mcs {
    /// Builds a system. Clausal signatures absorb all incoming bridge-head
    /// formulas so bridge additions never fall outside the model universe.
    /// Construction does not reject invalid systems; run [`validate`] for a
    /// report.
    pub fn new(contexts: Vec<Context>, rules: Vec<BridgeRule>) -> Self {
        let mut contexts = contexts;
        for ctx in contexts.iter_mut() {
            if let KnowledgeBase::Clausal(kb) = &mut ctx.kb {
                kb.absorb(
                    rules
                        .iter()
                        .filter(|r| r.head_context == ctx.id)
                        .map(|r| r.head.formula().clone()),
                );
            }
        }
        let index = contexts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();
        Self {
            contexts,
            rules,
            index,
        }
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn rules(&self) -> &[BridgeRule] {
        &self.rules
    }

    pub fn context_index(&self, id: &ContextId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn context(&self, id: &ContextId) -> Option<&Context> {
        self.context_index(id).map(|i| &self.contexts[i])
    }

    pub fn rule(&self, id: &RuleId) -> Option<&BridgeRule> {
        self.rules.iter().find(|r| &r.id == id)
    }

    pub fn rule_ids(&self) -> BTreeSet<RuleId> {
        self.rules.iter().map(|r| r.id.clone()).collect()
    }

    /// Rules whose head targets the given context (`br_i`).
    pub fn rules_into<'a>(&'a self, id: &'a ContextId) -> impl Iterator<Item = &'a BridgeRule> {
        self.rules.iter().filter(move |r| &r.head_context == id)
    }

    /// Whether any context carries a manager.
    pub fn is_managed(&self) -> bool {
        self.contexts.iter().any(|c| c.manager.is_some())
    }

    /// A rule id derived from `base` that clashes with nothing in `taken`.
    pub(crate) fn fresh_rule_id(base: &RuleId, taken: &BTreeSet<RuleId>) -> RuleId {
        let candidate = RuleId::new(format!("{}_u", base.as_str()));
        if !taken.contains(&candidate) {
            return candidate;
        }
        for n in 2.. {
            let candidate = RuleId::new(format!("{}_u{}", base.as_str(), n));
            if !taken.contains(&candidate) {
                return candidate;
            }
        }
        unreachable!()
    }
}

/// Kinds of structural violations reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateContextId,
    DuplicateRuleId,
    DanglingReference,
    ModeMismatch,
    HeadIncompatible,
    UnsupportedOp,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::DuplicateContextId => "duplicate-context-id",
            ViolationKind::DuplicateRuleId => "duplicate-rule-id",
            ViolationKind::DanglingReference => "dangling-reference",
            ViolationKind::ModeMismatch => "mode-mismatch",
            ViolationKind::HeadIncompatible => "head-incompatible",
            ViolationKind::UnsupportedOp => "unsupported-op",
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

/// Everything [`validate`] found; empty iff the system is a valid MCS.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }
}

/// Checks every referential and compatibility invariant of the system.
///
/// Violations are report entries, not failures. Head compatibility is probed
/// with the empty set, every singleton and the full head set per context;
/// for the shipped logics wellformedness is monotone in added heads, so this
/// is exhaustive for them.
pub fn validate(m: &Mcs) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen_ctx: BTreeSet<&ContextId> = BTreeSet::new();
    for ctx in m.contexts() {
        if !seen_ctx.insert(&ctx.id) {
            report.push(
                ViolationKind::DuplicateContextId,
                format!("context id `{}` declared more than once", ctx.id),
            );
        }
        if !ctx.kb.wellformed() {
            report.push(
                ViolationKind::HeadIncompatible,
                format!("knowledge base of context `{}` is not wellformed", ctx.id),
            );
        }
        if let Some(Manager::GuardedRevise { .. }) = &ctx.manager {
            if ctx.kb.kind() != LogicKind::Facts {
                report.push(
                    ViolationKind::ModeMismatch,
                    format!(
                        "context `{}` uses the guarded_revise manager on a {} base; it requires facts",
                        ctx.id,
                        ctx.kb.kind().name()
                    ),
                );
            }
        }
    }

    let mut seen_rule: BTreeSet<&RuleId> = BTreeSet::new();
    for rule in m.rules() {
        if !seen_rule.insert(&rule.id) {
            report.push(
                ViolationKind::DuplicateRuleId,
                format!("rule id `{}` declared more than once", rule.id),
            );
        }
        let target = match m.context(&rule.head_context) {
            Some(c) => Some(c),
            None => {
                report.push(
                    ViolationKind::DanglingReference,
                    format!(
                        "rule `{}` targets unknown context `{}`",
                        rule.id, rule.head_context
                    ),
                );
                None
            }
        };
        if let Some(target) = target {
            match (&rule.head, &target.manager) {
                (RuleHead::Op(op), None) => report.push(
                    ViolationKind::ModeMismatch,
                    format!(
                        "rule `{}` has op-head `{}` but context `{}` is not managed",
                        rule.id, op, target.id
                    ),
                ),
                (RuleHead::Formula(a), Some(_)) => report.push(
                    ViolationKind::ModeMismatch,
                    format!(
                        "rule `{}` has plain head `{}` but context `{}` is managed",
                        rule.id, a, target.id
                    ),
                ),
                (RuleHead::Op(op), Some(manager)) => {
                    if !manager.supports(op.op) {
                        report.push(
                            ViolationKind::UnsupportedOp,
                            format!(
                                "rule `{}`: op `{}` is not supported by the `{}` manager of context `{}`",
                                rule.id,
                                op.op.name(),
                                manager.name(),
                                target.id
                            ),
                        );
                    }
                }
                (RuleHead::Formula(_), None) => {}
            }
        }
        for lit in &rule.body {
            if m.context(&lit.context).is_none() {
                report.push(
                    ViolationKind::DanglingReference,
                    format!(
                        "rule `{}` reads belief at unknown context `{}`",
                        rule.id, lit.context
                    ),
                );
            }
        }
    }

    // Head compatibility: kb ∪ H must stay wellformed for every subset H of
    // incoming head formulas.
    for ctx in m.contexts() {
        let heads: BTreeSet<Atom> = m
            .rules_into(&ctx.id)
            .map(|r| r.head.formula().clone())
            .collect();
        let mut probes: Vec<BTreeSet<Atom>> = vec![BTreeSet::new()];
        for h in &heads {
            probes.push([h.clone()].into_iter().collect());
        }
        probes.push(heads.clone());
        for probe in probes {
            if !ctx.kb.extend(&probe).wellformed() {
                let subset = probe
                    .iter()
                    .map(|a| a.text().to_owned())
                    .collect::<Vec<_>>()
                    .join(",");
                report.push(
                    ViolationKind::HeadIncompatible,
                    format!(
                        "context `{}`: kb extended with {{{subset}}} is not wellformed",
                        ctx.id
                    ),
                );
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    #[test]
    fn atom_canonical_form_strips_whitespace() {
        assert_eq!(
            atom("labresult( sue , xray )").text(),
            "labresult(sue,xray)"
        );
        assert_eq!(atom("a"), atom(" a "));
        assert_eq!(atom("p(a,b)").predicate(), "p");
        assert_eq!(atom("p(a,b)").args(), vec!["a", "b"]);
        assert_eq!(atom("p").args(), Vec::<&str>::new());
    }

    #[test]
    fn atom_rejects_malformed_text() {
        assert!(Atom::parse("").is_err());
        assert!(Atom::parse("p(").is_err());
        assert!(Atom::parse("p()").is_err());
        assert!(Atom::parse("p(a,)").is_err());
        assert!(Atom::parse("1p").is_err());
        assert!(Atom::parse("p-q").is_err());
    }

    #[test]
    fn clausal_kb_normalizes_tautologies_into_signature() {
        let kb = ClausalKb::new(
            [
                Clause::new([atom("a")], [atom("a")]),
                Clause::new([atom("b")], []),
            ],
            [],
        );
        assert_eq!(kb.clauses().len(), 1);
        assert!(kb.signature().contains(&atom("a")));
        assert!(kb.signature().contains(&atom("b")));
    }

    #[test]
    fn validate_accepts_single_facts_context() {
        let m = Mcs::new(
            vec![Context::new(
                "c1",
                KnowledgeBase::Facts(FactsKb::new([atom("a")])),
            )],
            vec![],
        );
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn validate_reports_dangling_body_reference() {
        let m = Mcs::new(
            vec![Context::new("c1", KnowledgeBase::Facts(FactsKb::default()))],
            vec![BridgeRule::new(
                "r1",
                "c1",
                RuleHead::Formula(atom("a")),
                vec![BeliefLiteral::neg("c9", atom("b"))],
            )],
        );
        let report = validate(&m);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::DanglingReference);
    }

    #[test]
    fn validate_reports_duplicates_and_mode_mismatch() {
        let m = Mcs::new(
            vec![
                Context::new("c1", KnowledgeBase::Facts(FactsKb::default())),
                Context::new("c1", KnowledgeBase::Facts(FactsKb::default())),
            ],
            vec![
                BridgeRule::new("r1", "c1", RuleHead::Formula(atom("a")), vec![]),
                BridgeRule::new(
                    "r1",
                    "c1",
                    RuleHead::Op(OpCommand::new(OpKind::Add, atom("a"))),
                    vec![],
                ),
            ],
        );
        let report = validate(&m);
        let kinds: Vec<_> = report.violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::DuplicateContextId));
        assert!(kinds.contains(&ViolationKind::DuplicateRuleId));
        assert!(kinds.contains(&ViolationKind::ModeMismatch));
    }

    #[test]
    fn clausal_signature_absorbs_bridge_heads() {
        let m = Mcs::new(
            vec![
                Context::new("c1", KnowledgeBase::Clausal(ClausalKb::default())),
                Context::new("c2", KnowledgeBase::Facts(FactsKb::new([atom("x")]))),
            ],
            vec![BridgeRule::new(
                "r1",
                "c1",
                RuleHead::Formula(atom("a")),
                vec![BeliefLiteral::pos("c2", atom("x"))],
            )],
        );
        match &m.contexts()[0].kb {
            KnowledgeBase::Clausal(kb) => assert!(kb.signature().contains(&atom("a"))),
            _ => unreachable!(),
        }
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn fresh_rule_ids_avoid_collisions() {
        let taken: BTreeSet<RuleId> =
            [RuleId::new("r1"), RuleId::new("r1_u"), RuleId::new("r1_u2")]
                .into_iter()
                .collect();
        assert_eq!(
            Mcs::fresh_rule_id(&RuleId::new("r1"), &taken).as_str(),
            "r1_u3"
        );
        assert_eq!(
            Mcs::fresh_rule_id(&RuleId::new("r2"), &taken).as_str(),
            "r2_u"
        );
    }
}
