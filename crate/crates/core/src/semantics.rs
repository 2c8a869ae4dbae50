//! Equilibrium semantics: bridge-rule applicability, the `app` operator,
//! equilibrium checking and enumeration, consistency, and the rule-set
//! modification operator `M[R1 ∪ heads(R2)]`.
//!
//! Enumeration follows a guess-and-check scheme: per context, guess a subset
//! of the incoming head formulas, take every acceptable belief set of the
//! extended base, and keep exactly the states that regenerate their guess.
//! All outputs are deduplicated and canonically ordered.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use crate::error::EngineError;
use crate::logics;
use crate::managed;
use crate::model::{
    Atom, BeliefSet, BeliefState, BridgeRule, Context, ContextId, Mcs, OpCommand, RuleHead, RuleId,
};

/// Knobs for the search-based operations.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Ceiling on guessed candidate combinations; exceeding it is an error,
    /// never silent truncation.
    pub cap: u64,
    /// Worker threads for independent candidate checks. Output is identical
    /// for any value.
    pub jobs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            cap: 1 << 20,
            jobs: 1,
        }
    }
}

impl EvalOptions {
    pub fn with_cap(cap: u64) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }
}

type AccMemo<K> = Mutex<BTreeMap<(usize, K), Arc<Vec<BeliefSet>>>>;

/// Memo for acceptable-belief-set computations, shared across the many
/// modified systems a diagnosis search evaluates. Keyed by context position
/// and the added head formulas (or op-commands); rule surgery never touches
/// contexts, so entries stay valid.
#[derive(Default)]
pub(crate) struct AccCache {
    extended: AccMemo<BTreeSet<Atom>>,
    managed: AccMemo<BTreeSet<OpCommand>>,
}

impl AccCache {
    /// ACC of `kb_i ∪ heads`.
    pub(crate) fn acc_extended(
        &self,
        ctx_index: usize,
        ctx: &Context,
        heads: &BTreeSet<Atom>,
        opts: &EvalOptions,
    ) -> Result<Arc<Vec<BeliefSet>>, EngineError> {
        let key = (ctx_index, heads.clone());
        if let Some(hit) = self.extended.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let computed = Arc::new(
            logics::acc(&ctx.kb.extend(heads), opts)?
                .into_iter()
                .collect::<Vec<_>>(),
        );
        self.extended
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&computed));
        Ok(computed)
    }

    /// Union of ACC over every base the manager produces from `ops` (the
    /// managed equilibrium condition is existential over that set).
    pub(crate) fn acc_managed(
        &self,
        ctx_index: usize,
        ctx: &Context,
        ops: &BTreeSet<OpCommand>,
        opts: &EvalOptions,
    ) -> Result<Arc<Vec<BeliefSet>>, EngineError> {
        let key = (ctx_index, ops.clone());
        if let Some(hit) = self.managed.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let manager = ctx
            .manager
            .as_ref()
            .ok_or_else(|| EngineError::Defect("managed acc on an unmanaged context".into()))?;
        let mut union: BTreeSet<BeliefSet> = BTreeSet::new();
        for kb in crate::managed::mng_apply(manager, ops, &ctx.kb)? {
            union.extend(logics::acc(&kb, opts)?);
        }
        let computed = Arc::new(union.into_iter().collect::<Vec<_>>());
        self.managed
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&computed));
        Ok(computed)
    }
}

fn context_index(m: &Mcs, id: &ContextId) -> Result<usize, EngineError> {
    m.context_index(id)
        .ok_or_else(|| EngineError::Defect(format!("unresolved context reference `{id}`")))
}

/// Whether the rule body holds with respect to `state`: every positive
/// literal's atom present in its context's belief set, every negated one
/// absent. An empty body is vacuously applicable.
pub fn rule_applicable(
    m: &Mcs,
    rule: &BridgeRule,
    state: &BeliefState,
) -> Result<bool, EngineError> {
    for lit in &rule.body {
        let idx = context_index(m, &lit.context)?;
        let holds = state.sets[idx].contains(&lit.atom);
        if holds == lit.negated {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Head formulas of all applicable plain-headed bridge rules into `ctx`
/// (duplicates collapse). Op-heads contribute through the managed
/// evaluation instead.
pub fn app_heads(
    m: &Mcs,
    ctx: &ContextId,
    state: &BeliefState,
) -> Result<BTreeSet<Atom>, EngineError> {
    context_index(m, ctx)?;
    let mut heads = BTreeSet::new();
    for rule in m.rules_into(ctx) {
        if let RuleHead::Formula(atom) = &rule.head {
            if rule_applicable(m, rule, state)? {
                heads.insert(atom.clone());
            }
        }
    }
    Ok(heads)
}

fn ensure_unmanaged(m: &Mcs) -> Result<(), EngineError> {
    if m.is_managed() || m.rules().iter().any(|r| r.head.as_op().is_some()) {
        return Err(EngineError::Defect(
            "operation requires an unmanaged system; use the managed evaluation".into(),
        ));
    }
    Ok(())
}

/// Whether `state` reproduces itself: for every context i,
/// `S_i ∈ ACC_i(kb_i ∪ app_i(S))`.
pub fn is_equilibrium(
    m: &Mcs,
    state: &BeliefState,
    opts: &EvalOptions,
) -> Result<bool, EngineError> {
    ensure_unmanaged(m)?;
    if state.sets.len() != m.contexts().len() {
        return Err(EngineError::Defect(format!(
            "belief state has {} sets for {} contexts",
            state.sets.len(),
            m.contexts().len()
        )));
    }
    for (i, ctx) in m.contexts().iter().enumerate() {
        let heads = app_heads(m, &ctx.id, state)?;
        let accepted = logics::acc(&ctx.kb.extend(&heads), opts)?;
        if !accepted.contains(&state.sets[i]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All subset masks of an `n`-element sorted list, in ascending cardinality
/// then lexicographic order of the selected element tuple.
pub(crate) fn subset_masks(n: usize) -> Vec<u64> {
    assert!(n < 64, "subset space must fit the search cap");
    let mut out = Vec::with_capacity(1 << n);
    fn extend(out: &mut Vec<u64>, mask: u64, next: usize, remaining: usize, n: usize) {
        if remaining == 0 {
            out.push(mask);
            return;
        }
        for i in next..=(n - remaining) {
            extend(out, mask | (1 << i), i + 1, remaining - 1, n);
        }
    }
    for k in 0..=n {
        extend(&mut out, 0, 0, k, n);
    }
    out
}

pub(crate) fn checked_combination_count(
    what: &str,
    radices: &[u128],
    cap: u64,
) -> Result<u128, EngineError> {
    let mut total: u128 = 1;
    for r in radices {
        total = total.saturating_mul(*r);
        if total > cap as u128 {
            return Err(EngineError::CapExceeded {
                what: what.into(),
                required: total,
                cap,
            });
        }
    }
    Ok(total)
}

/// The selection a context receives from its incoming rules: head formulas
/// when unmanaged, op-commands when managed.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Selection {
    Heads(BTreeSet<Atom>),
    Ops(BTreeSet<OpCommand>),
}

/// A bridge rule with its positions resolved, for fast body evaluation.
struct ResolvedRule {
    head: RuleHead,
    body: Vec<(usize, Atom, bool)>,
}

/// Static shape of one guess-and-check run.
struct SearchPlan {
    managed: Vec<bool>,
    /// Sorted distinct head formulas per unmanaged context.
    head_items: Vec<Vec<Atom>>,
    /// Sorted distinct op-commands per managed context.
    op_items: Vec<Vec<OpCommand>>,
    rules_into: Vec<Vec<ResolvedRule>>,
    /// Whether the context's selection must be guessed: some rule into it
    /// reads a context at or after its own position.
    guessed: Vec<bool>,
    /// Subset masks per guessed context (ascending cardinality, then
    /// lexicographic); empty for computed contexts.
    masks: Vec<Vec<u64>>,
    /// Guessed contexts to re-verify once everything up to a given depth is
    /// fixed (their selection and every context they read).
    check_at: Vec<Vec<usize>>,
}

impl SearchPlan {
    fn build(m: &Mcs, opts: &EvalOptions) -> Result<Self, EngineError> {
        let n = m.contexts().len();
        let managed: Vec<bool> = m.contexts().iter().map(|c| c.manager.is_some()).collect();

        let mut rules_into: Vec<Vec<ResolvedRule>> = (0..n).map(|_| Vec::new()).collect();
        for rule in m.rules() {
            let target = context_index(m, &rule.head_context)?;
            let body = rule
                .body
                .iter()
                .map(|lit| {
                    Ok((
                        context_index(m, &lit.context)?,
                        lit.atom.clone(),
                        lit.negated,
                    ))
                })
                .collect::<Result<Vec<_>, EngineError>>()?;
            rules_into[target].push(ResolvedRule {
                head: rule.head.clone(),
                body,
            });
        }

        let mut head_items: Vec<Vec<Atom>> = vec![Vec::new(); n];
        let mut op_items: Vec<Vec<OpCommand>> = vec![Vec::new(); n];
        for i in 0..n {
            if managed[i] {
                let set: BTreeSet<OpCommand> = rules_into[i]
                    .iter()
                    .filter_map(|r| r.head.as_op().cloned())
                    .collect();
                op_items[i] = set.into_iter().collect();
            } else {
                let set: BTreeSet<Atom> = rules_into[i]
                    .iter()
                    .filter_map(|r| r.head.as_formula().cloned())
                    .collect();
                head_items[i] = set.into_iter().collect();
            }
        }

        // A context whose incoming rules only read strictly earlier contexts
        // has its selection determined by the prefix; everything else is
        // guessed and re-checked once its reads are fixed.
        let reads: Vec<BTreeSet<usize>> = (0..n)
            .map(|i| {
                rules_into[i]
                    .iter()
                    .flat_map(|r| r.body.iter().map(|(j, _, _)| *j))
                    .collect()
            })
            .collect();
        let guessed: Vec<bool> = (0..n).map(|i| !reads[i].iter().all(|&j| j < i)).collect();

        let radices: Vec<u128> = (0..n)
            .filter(|&i| guessed[i])
            .map(|i| {
                let len = if managed[i] {
                    op_items[i].len()
                } else {
                    head_items[i].len()
                };
                1u128 << len
            })
            .collect();
        checked_combination_count("guessed selection subsets", &radices, opts.cap)?;

        let masks: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                if !guessed[i] {
                    return Vec::new();
                }
                let len = if managed[i] {
                    op_items[i].len()
                } else {
                    head_items[i].len()
                };
                subset_masks(len)
            })
            .collect();

        let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); n];
        for k in 0..n {
            if guessed[k] {
                let ready = reads[k].iter().copied().max().unwrap_or(0).max(k);
                check_at[ready].push(k);
            }
        }

        Ok(Self {
            managed,
            head_items,
            op_items,
            rules_into,
            guessed,
            masks,
            check_at,
        })
    }

    fn decode(&self, ctx: usize, mask: u64) -> Selection {
        if self.managed[ctx] {
            Selection::Ops(
                self.op_items[ctx]
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, o)| o.clone())
                    .collect(),
            )
        } else {
            Selection::Heads(
                self.head_items[ctx]
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, a)| a.clone())
                    .collect(),
            )
        }
    }

    /// The selection the fixed belief sets induce at `ctx`.
    fn induced(&self, ctx: usize, sets: &[BeliefSet]) -> Selection {
        let applicable = self.rules_into[ctx].iter().filter(|r| {
            r.body
                .iter()
                .all(|(j, atom, negated)| sets[*j].contains(atom) != *negated)
        });
        if self.managed[ctx] {
            Selection::Ops(applicable.filter_map(|r| r.head.as_op().cloned()).collect())
        } else {
            Selection::Heads(
                applicable
                    .filter_map(|r| r.head.as_formula().cloned())
                    .collect(),
            )
        }
    }
}

struct Dfs<'a> {
    m: &'a Mcs,
    plan: &'a SearchPlan,
    opts: &'a EvalOptions,
    cache: &'a AccCache,
    limit: Option<usize>,
    /// At the split context, only this slice of its masks is explored
    /// (worker-thread partitioning).
    split: Option<(usize, &'a [u64])>,
    found: BTreeSet<BeliefState>,
}

impl Dfs<'_> {
    fn acc(&self, ctx: usize, selection: &Selection) -> Result<Arc<Vec<BeliefSet>>, EngineError> {
        let context = &self.m.contexts()[ctx];
        match selection {
            Selection::Heads(heads) => self.cache.acc_extended(ctx, context, heads, self.opts),
            Selection::Ops(ops) => self.cache.acc_managed(ctx, context, ops, self.opts),
        }
    }

    /// Explores context `depth` with everything before it fixed. Returns
    /// true when the search should stop (limit reached).
    fn descend(
        &mut self,
        depth: usize,
        sets: &mut Vec<BeliefSet>,
        selections: &mut Vec<Selection>,
    ) -> Result<bool, EngineError> {
        let n = self.m.contexts().len();
        if depth == n {
            self.found.insert(BeliefState::new(sets.clone()));
            return Ok(self.limit.is_some_and(|l| self.found.len() >= l));
        }

        let alternatives: Vec<Selection> = if self.plan.guessed[depth] {
            let masks: &[u64] = match self.split {
                Some((ctx, slice)) if ctx == depth => slice,
                _ => &self.plan.masks[depth],
            };
            masks
                .iter()
                .map(|&mask| self.plan.decode(depth, mask))
                .collect()
        } else {
            vec![self.plan.induced(depth, sets)]
        };

        for selection in alternatives {
            let acc = self.acc(depth, &selection)?;
            selections[depth] = selection;
            for belief_set in acc.iter() {
                sets[depth] = belief_set.clone();
                // Re-verify every guess whose reads are now fixed.
                let consistent = self.plan.check_at[depth]
                    .iter()
                    .all(|&k| self.plan.induced(k, sets) == selections[k]);
                if !consistent {
                    continue;
                }
                if self.descend(depth + 1, sets, selections)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Guess-and-check search over selection subsets, for plain and managed
/// systems alike. Contexts that only read strictly earlier contexts take
/// their induced selection directly; a guess differing from the induced one
/// could never be accepted.
pub(crate) fn run_search(
    m: &Mcs,
    opts: &EvalOptions,
    cache: &AccCache,
    limit: Option<usize>,
) -> Result<Vec<BeliefState>, EngineError> {
    let plan = SearchPlan::build(m, opts)?;
    let n = m.contexts().len();

    let run_one = |split: Option<(usize, &[u64])>| -> Result<BTreeSet<BeliefState>, EngineError> {
        let mut dfs = Dfs {
            m,
            plan: &plan,
            opts,
            cache,
            limit,
            split,
            found: BTreeSet::new(),
        };
        let mut sets = vec![BeliefSet::default(); n];
        let mut selections = vec![Selection::Heads(BTreeSet::new()); n];
        dfs.descend(0, &mut sets, &mut selections)?;
        Ok(dfs.found)
    };

    // Parallel workers partition the subsets of the widest guessed context.
    let split_ctx = (0..n)
        .filter(|&i| plan.guessed[i])
        .max_by_key(|&i| plan.masks[i].len());
    let jobs = opts.jobs.max(1);
    match split_ctx {
        Some(ctx) if jobs > 1 && limit.is_none() && plan.masks[ctx].len() >= 2 * jobs => {
            let chunk = plan.masks[ctx].len().div_ceil(jobs);
            let results: Vec<Result<BTreeSet<BeliefState>, EngineError>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = plan.masks[ctx]
                        .chunks(chunk)
                        .map(|slice| scope.spawn(move || run_one(Some((ctx, slice)))))
                        .collect();
                    handles.into_iter().map(|h| h.join().unwrap()).collect()
                });
            let mut found = BTreeSet::new();
            for r in results {
                found.extend(r?);
            }
            Ok(found.into_iter().collect())
        }
        _ => Ok(run_one(None)?.into_iter().collect()),
    }
}

pub(crate) fn search_equilibria(
    m: &Mcs,
    opts: &EvalOptions,
    cache: &AccCache,
    limit: Option<usize>,
) -> Result<Vec<BeliefState>, EngineError> {
    ensure_unmanaged(m)?;
    run_search(m, opts, cache, limit)
}

/// Sound and complete list of equilibria, canonically ordered.
pub fn enumerate_equilibria(m: &Mcs, opts: &EvalOptions) -> Result<Vec<BeliefState>, EngineError> {
    search_equilibria(m, opts, &AccCache::default(), None)
}

/// Whether some equilibrium exists, managed systems included. Shared by the
/// consistency checks of the diagnosis machinery.
pub(crate) fn exists_equilibrium(
    m: &Mcs,
    opts: &EvalOptions,
    cache: &AccCache,
) -> Result<bool, EngineError> {
    let found = if m.is_managed() {
        managed::search_equilibria_managed(m, opts, cache, Some(1))?
    } else {
        search_equilibria(m, opts, cache, Some(1))?
    };
    Ok(!found.is_empty())
}

/// Whether no belief state of the system is an equilibrium. Dispatches to
/// the managed evaluation when any context carries a manager.
pub fn is_inconsistent(m: &Mcs, opts: &EvalOptions) -> Result<bool, EngineError> {
    Ok(!exists_equilibrium(m, opts, &AccCache::default())?)
}

/// `M[R1 ∪ heads(R2)]`: keep the rules of `keep` as they are, add an
/// unconditional variant (fresh id, empty body) for every rule of `uncond`.
/// Contexts are untouched.
pub fn modify(
    m: &Mcs,
    keep: &BTreeSet<RuleId>,
    uncond: &BTreeSet<RuleId>,
) -> Result<Mcs, EngineError> {
    let ids = m.rule_ids();
    for id in keep.union(uncond) {
        if !ids.contains(id) {
            return Err(EngineError::UnknownRuleId(id.as_str().to_owned()));
        }
    }
    let mut rules: Vec<BridgeRule> = m
        .rules()
        .iter()
        .filter(|r| keep.contains(&r.id))
        .cloned()
        .collect();
    let mut taken = ids;
    for rule in m.rules().iter().filter(|r| uncond.contains(&r.id)) {
        let fresh = Mcs::fresh_rule_id(&rule.id, &taken);
        taken.insert(fresh.clone());
        rules.push(rule.unconditional(fresh));
    }
    Ok(Mcs::new(m.contexts().to_vec(), rules))
}
