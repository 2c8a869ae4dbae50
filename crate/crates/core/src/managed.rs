//! Managed systems: op-command bridge heads, built-in knowledge-base
//! managers, managed equilibria, total coherence, and the dependency graph
//! with its cycle classification.

use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::model::{
    Atom, BeliefState, Context, ContextId, KnowledgeBase, Manager, Mcs, OpCommand, OpKind, RuleHead,
};
use crate::semantics::{
    checked_combination_count, rule_applicable, subset_masks, AccCache, EvalOptions,
};

/// Applies a set of op-commands to a knowledge base through a manager.
///
/// Built-in behaviour: `add` inserts formulas; `add_delete` deletes first
/// and then adds, so additions win on conflict; `guarded_revise` (facts
/// bases only) inserts each `add`/`revise` formula and evicts every fact
/// declared as excluded against it, processing commands in canonical order.
/// All built-ins return exactly one base.
pub fn mng_apply(
    manager: &Manager,
    ops: &BTreeSet<OpCommand>,
    kb: &KnowledgeBase,
) -> Result<Vec<KnowledgeBase>, EngineError> {
    for op in ops {
        if !manager.supports(op.op) {
            return Err(EngineError::UnsupportedOp {
                op: op.op.name().into(),
                manager: manager.name().into(),
            });
        }
    }
    match manager {
        Manager::Add => {
            let adds: BTreeSet<Atom> = ops.iter().map(|o| o.formula.clone()).collect();
            Ok(vec![kb.extend(&adds)])
        }
        Manager::AddDelete => {
            let mut out = kb.clone();
            for op in ops.iter().filter(|o| o.op == OpKind::Del) {
                out = out.remove_fact(&op.formula);
            }
            let adds: BTreeSet<Atom> = ops
                .iter()
                .filter(|o| o.op == OpKind::Add)
                .map(|o| o.formula.clone())
                .collect();
            Ok(vec![out.extend(&adds)])
        }
        Manager::GuardedRevise { exclusions } => {
            let KnowledgeBase::Facts(base) = kb else {
                return Err(EngineError::Defect(
                    "guarded_revise manager on a non-facts base".into(),
                ));
            };
            let excluded = |a: &Atom, b: &Atom| {
                exclusions.contains(&(a.clone(), b.clone()))
                    || exclusions.contains(&(b.clone(), a.clone()))
            };
            let mut facts = base.facts.clone();
            for op in ops {
                facts.retain(|t| !excluded(&op.formula, t));
                facts.insert(op.formula.clone());
            }
            Ok(vec![KnowledgeBase::Facts(crate::model::FactsKb { facts })])
        }
    }
}

/// Op-commands of all applicable op-headed rules into `ctx`.
pub fn applicable_ops(
    m: &Mcs,
    ctx: &ContextId,
    state: &BeliefState,
) -> Result<BTreeSet<OpCommand>, EngineError> {
    let mut ops = BTreeSet::new();
    for rule in m.rules_into(ctx) {
        if let RuleHead::Op(op) = &rule.head {
            if rule_applicable(m, rule, state)? {
                ops.insert(op.clone());
            }
        }
    }
    Ok(ops)
}

/// The knowledge bases a context may end up with under a given selection of
/// incoming items.
fn candidate_bases(
    ctx: &Context,
    ops: &BTreeSet<OpCommand>,
    heads: &BTreeSet<Atom>,
) -> Result<Vec<KnowledgeBase>, EngineError> {
    match &ctx.manager {
        Some(manager) => mng_apply(manager, ops, &ctx.kb),
        None => Ok(vec![ctx.kb.extend(heads)]),
    }
}

pub(crate) fn search_equilibria_managed(
    m: &Mcs,
    opts: &EvalOptions,
    cache: &AccCache,
    limit: Option<usize>,
) -> Result<Vec<BeliefState>, EngineError> {
    crate::semantics::run_search(m, opts, cache, limit)
}

/// All managed equilibria: states where every context accepts its belief
/// set for some base its manager produces from the applicable op-commands.
/// Unmanaged contexts take the plain `kb ∪ app` route.
pub fn enumerate_equilibria_managed(
    m: &Mcs,
    opts: &EvalOptions,
) -> Result<Vec<BeliefState>, EngineError> {
    search_equilibria_managed(m, opts, &AccCache::default(), None)
}

/// Direct managed-equilibrium check for one state.
pub fn is_equilibrium_managed(
    m: &Mcs,
    state: &BeliefState,
    opts: &EvalOptions,
) -> Result<bool, EngineError> {
    if state.sets.len() != m.contexts().len() {
        return Err(EngineError::Defect(format!(
            "belief state has {} sets for {} contexts",
            state.sets.len(),
            m.contexts().len()
        )));
    }
    for (i, ctx) in m.contexts().iter().enumerate() {
        let ops = applicable_ops(m, &ctx.id, state)?;
        let heads = crate::semantics::app_heads(m, &ctx.id, state)?;
        let mut accepted = false;
        for kb in candidate_bases(ctx, &ops, &heads)? {
            if crate::logics::acc(&kb, opts)?.contains(&state.sets[i]) {
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the context produces at least one acceptable belief set for
/// every subset of the op-commands (or head formulas) that target it.
pub fn totally_coherent(
    m: &Mcs,
    ctx_id: &ContextId,
    opts: &EvalOptions,
) -> Result<bool, EngineError> {
    let idx = m
        .context_index(ctx_id)
        .ok_or_else(|| EngineError::UnknownContextId(ctx_id.as_str().to_owned()))?;
    let ctx = &m.contexts()[idx];
    let cache = AccCache::default();
    if ctx.manager.is_some() {
        let items: Vec<OpCommand> = m
            .rules_into(ctx_id)
            .filter_map(|r| r.head.as_op().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        checked_combination_count(
            "total-coherence op subsets",
            &[1u128 << items.len()],
            opts.cap,
        )?;
        for mask in subset_masks(items.len()) {
            let ops: BTreeSet<OpCommand> = items
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, o)| o.clone())
                .collect();
            if cache.acc_managed(idx, ctx, &ops, opts)?.is_empty() {
                return Ok(false);
            }
        }
    } else {
        let items: Vec<Atom> = m
            .rules_into(ctx_id)
            .filter_map(|r| r.head.as_formula().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        checked_combination_count(
            "total-coherence head subsets",
            &[1u128 << items.len()],
            opts.cap,
        )?;
        for mask in subset_masks(items.len()) {
            let heads: BTreeSet<Atom> = items
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, h)| h.clone())
                .collect();
            if cache.acc_extended(idx, ctx, &heads, opts)?.is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One information-flow edge: some rule into `to` reads a belief at `from`;
/// negative when that literal sits under default negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepEdge {
    pub from: ContextId,
    pub to: ContextId,
    pub negative: bool,
}

/// The context dependency graph, edges deduplicated per (from, to, polarity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<ContextId>,
    pub edges: Vec<DepEdge>,
}

/// Reads the graph off the rule bodies. Deterministic order: nodes in
/// declaration order, edges sorted.
pub fn dependency_graph(m: &Mcs) -> DependencyGraph {
    let nodes: Vec<ContextId> = m.contexts().iter().map(|c| c.id.clone()).collect();
    let mut edges: BTreeSet<DepEdge> = BTreeSet::new();
    for rule in m.rules() {
        if m.context(&rule.head_context).is_none() {
            continue;
        }
        for lit in &rule.body {
            if m.context(&lit.context).is_none() {
                continue;
            }
            edges.insert(DepEdge {
                from: lit.context.clone(),
                to: rule.head_context.clone(),
                negative: lit.negated,
            });
        }
    }
    DependencyGraph {
        nodes,
        edges: edges.into_iter().collect(),
    }
}

/// Cycle classification of a dependency graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleClass {
    Acyclic,
    CyclicEvenOnly,
    CyclicWithOdd,
}

impl CycleClass {
    pub fn name(self) -> &'static str {
        match self {
            CycleClass::Acyclic => "acyclic",
            CycleClass::CyclicEvenOnly => "cyclic_even_only",
            CycleClass::CyclicWithOdd => "cyclic_with_odd",
        }
    }
}

/// Classifies the graph: acyclic, or cyclic with some directed cycle whose
/// negative-edge count is odd, or cyclic with even cycles only.
///
/// Odd detection runs on a parity-doubled graph: an odd simple cycle exists
/// iff some node reaches its own flipped copy, since any closed walk
/// decomposes into simple cycles and parities add modulo two.
pub fn classify_cycles(g: &DependencyGraph) -> CycleClass {
    let index: std::collections::BTreeMap<&ContextId, usize> =
        g.nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let n = g.nodes.len();
    let mut succ: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for e in &g.edges {
        let (Some(&f), Some(&t)) = (index.get(&e.from), index.get(&e.to)) else {
            continue;
        };
        succ[f].push((t, e.negative));
    }

    if !has_cycle(n, &succ) {
        return CycleClass::Acyclic;
    }
    for start in 0..n {
        // BFS over (node, parity) pairs from (start, even).
        let mut seen = vec![[false; 2]; n];
        let mut queue = std::collections::VecDeque::from([(start, 0usize)]);
        seen[start][0] = true;
        while let Some((node, parity)) = queue.pop_front() {
            for &(next, negative) in &succ[node] {
                let next_parity = parity ^ usize::from(negative);
                if next == start && next_parity == 1 {
                    return CycleClass::CyclicWithOdd;
                }
                if !seen[next][next_parity] {
                    seen[next][next_parity] = true;
                    queue.push_back((next, next_parity));
                }
            }
        }
    }
    CycleClass::CyclicEvenOnly
}

fn has_cycle(n: usize, succ: &[Vec<(usize, bool)>]) -> bool {
    // Iterative DFS with three colors.
    let mut color = vec![0u8; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < succ[node].len() {
                let (child, _) = succ[node][*next];
                *next += 1;
                match color[child] {
                    0 => {
                        color[child] = 1;
                        stack.push((child, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
            }
        }
    }
    false
}
