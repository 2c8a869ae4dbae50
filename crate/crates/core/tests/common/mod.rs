//! Shared fixtures, random-instance generators and independent oracles for
//! the integration suites.
//!
//! Each integration test target compiles this module separately and uses a
//! different slice of it.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::Rng;

use mcs_core::{
    is_equilibrium, parse_mcs, AspKb, AspRule, Atom, BeliefLiteral, BeliefSet, BeliefState,
    BridgeRule, Context, ContextId, EvalOptions, FactsKb, KnowledgeBase, Manager, Mcs, OpCommand,
    OpKind, RuleHead, RuleId,
};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> Mcs {
    let text = std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("reading fixture {name}: {e}"));
    parse_mcs(&text).unwrap_or_else(|errs| panic!("parsing fixture {name}: {errs:?}"))
}

pub fn atom(s: &str) -> Atom {
    Atom::parse(s).unwrap()
}

pub fn rule_ids(names: &[&str]) -> BTreeSet<RuleId> {
    names.iter().map(|n| RuleId::new(*n)).collect()
}

/// All `.mcs` fixtures shipped with the repository.
pub const FIXTURES: [&str; 5] = [
    "hospital.mcs",
    "hospital_no_allergy.mcs",
    "odd_loop.mcs",
    "even_loop.mcs",
    "managed_revise.mcs",
];

// ---------------------------------------------------------------------------
// Brute-force equilibrium oracle
// ---------------------------------------------------------------------------

fn kb_atoms(kb: &KnowledgeBase) -> BTreeSet<Atom> {
    match kb {
        KnowledgeBase::Facts(kb) => kb.facts.clone(),
        KnowledgeBase::Clausal(kb) => kb.signature().clone(),
        KnowledgeBase::Asp(kb) => kb.atom_universe(),
    }
}

/// The relevant atom universe of a context: its base atoms, every bridge
/// head targeting it, and every bridge body atom read at it.
pub fn context_universe(m: &Mcs, ctx: &ContextId) -> Vec<Atom> {
    let mut universe = kb_atoms(&m.context(ctx).unwrap().kb);
    for rule in m.rules() {
        if &rule.head_context == ctx {
            universe.insert(rule.head.formula().clone());
        }
        for lit in &rule.body {
            if &lit.context == ctx {
                universe.insert(lit.atom.clone());
            }
        }
    }
    universe.into_iter().collect()
}

/// Every belief state over the per-context universes that passes the direct
/// equilibrium check. Independent of the guess-and-check enumeration.
pub fn brute_force_equilibria(m: &Mcs, opts: &EvalOptions) -> Vec<BeliefState> {
    let universes: Vec<Vec<Atom>> = m
        .contexts()
        .iter()
        .map(|c| context_universe(m, &c.id))
        .collect();
    let mut out = Vec::new();
    let mut masks = vec![0u64; universes.len()];
    loop {
        let state = BeliefState::new(
            universes
                .iter()
                .zip(&masks)
                .map(|(u, mask)| {
                    BeliefSet::new(
                        u.iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, a)| a.clone()),
                    )
                })
                .collect(),
        );
        if is_equilibrium(m, &state, opts).unwrap() {
            out.push(state);
        }
        let mut pos = universes.len();
        loop {
            if pos == 0 {
                out.sort();
                out.dedup();
                return out;
            }
            pos -= 1;
            masks[pos] += 1;
            if masks[pos] < (1 << universes[pos].len()) {
                break;
            }
            masks[pos] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Independent naive answer-set interpreter
// ---------------------------------------------------------------------------

/// A program rule in plain form, shared by the engine-facing and the naive
/// representation of a random program.
#[derive(Clone)]
pub struct PlainRule {
    pub heads: Vec<String>,
    pub pos: Vec<String>,
    pub neg: Vec<String>,
}

pub fn to_asp_kb(rules: &[PlainRule]) -> AspKb {
    AspKb::new(rules.iter().map(|r| {
        AspRule::new(
            r.heads.iter().map(|a| atom(a)),
            r.pos.iter().map(|a| atom(a)),
            r.neg.iter().map(|a| atom(a)),
        )
    }))
}

/// Enumerates every interpretation over the program's atoms and applies the
/// reduct definition directly. Deliberately separate from the engine code.
pub fn naive_answer_sets(rules: &[PlainRule]) -> BTreeSet<BTreeSet<String>> {
    let mut universe: Vec<String> = Vec::new();
    for r in rules {
        for a in r.heads.iter().chain(&r.pos).chain(&r.neg) {
            if !universe.contains(a) {
                universe.push(a.clone());
            }
        }
    }
    universe.sort();

    let interp_of = |mask: u32| -> BTreeSet<String> {
        universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    };
    let is_model = |reduced: &[(Vec<String>, Vec<String>)], interp: &BTreeSet<String>| {
        reduced.iter().all(|(heads, pos)| {
            !pos.iter().all(|a| interp.contains(a)) || heads.iter().any(|h| interp.contains(h))
        })
    };

    let n = universe.len() as u32;
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let interp = interp_of(mask);
        let reduced: Vec<(Vec<String>, Vec<String>)> = rules
            .iter()
            .filter(|r| !r.neg.iter().any(|a| interp.contains(a)))
            .map(|r| (r.heads.clone(), r.pos.clone()))
            .collect();
        if !is_model(&reduced, &interp) {
            continue;
        }
        let mut minimal = true;
        for sub in 0u32..(1 << n) {
            if sub != mask && sub & mask == sub && is_model(&reduced, &interp_of(sub)) {
                minimal = false;
                break;
            }
        }
        if minimal {
            out.insert(interp);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

pub fn random_plain_program(rng: &mut StdRng) -> Vec<PlainRule> {
    let atoms = ["a", "b", "c", "d"];
    let n_atoms = rng.random_range(1..=4);
    let n_rules = rng.random_range(1..=6);
    let pick = |rng: &mut StdRng, max: usize| -> Vec<String> {
        let count = rng.random_range(0..=max);
        (0..count)
            .map(|_| atoms[rng.random_range(0..n_atoms)].to_string())
            .collect()
    };
    (0..n_rules)
        .map(|_| {
            let constraint = rng.random_bool(0.15);
            let heads = if constraint {
                Vec::new()
            } else {
                let count = rng.random_range(1..=2);
                (0..count)
                    .map(|_| atoms[rng.random_range(0..n_atoms)].to_string())
                    .collect()
            };
            let pos = pick(rng, 2);
            let mut neg = pick(rng, 2);
            if constraint && pos.is_empty() && neg.is_empty() {
                neg.push(atoms[rng.random_range(0..n_atoms)].to_string());
            }
            PlainRule { heads, pos, neg }
        })
        .collect()
}

/// A random unmanaged system: up to 3 contexts (facts or asp logics), up to
/// `max_rules` bridge rules, at most 4 relevant atoms per context.
pub fn random_unmanaged(rng: &mut StdRng, max_rules: usize) -> Mcs {
    let n_ctx = rng.random_range(1..=3);
    let pool = ["a1", "a2", "a3", "a4"];
    let pools: Vec<Vec<&str>> = (0..n_ctx)
        .map(|_| pool[..rng.random_range(2..=4)].to_vec())
        .collect();

    let contexts: Vec<Context> = (0..n_ctx)
        .map(|i| {
            let id = format!("c{}", i + 1);
            let pool = &pools[i];
            if rng.random_bool(0.5) {
                let count = rng.random_range(0..=2usize);
                let facts: BTreeSet<Atom> = (0..count)
                    .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                    .collect();
                Context::new(id, KnowledgeBase::Facts(FactsKb { facts }))
            } else {
                let n_rules = rng.random_range(0..=2usize);
                let rules: Vec<AspRule> = (0..n_rules)
                    .map(|_| {
                        let constraint = rng.random_bool(0.15);
                        let heads: Vec<Atom> = if constraint {
                            Vec::new()
                        } else {
                            (0..rng.random_range(1..=2usize))
                                .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                                .collect()
                        };
                        let pos: Vec<Atom> = (0..rng.random_range(0..=2usize))
                            .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                            .collect();
                        let mut neg: Vec<Atom> = (0..rng.random_range(0..=1usize))
                            .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                            .collect();
                        if constraint && pos.is_empty() && neg.is_empty() {
                            neg.push(atom(pool[rng.random_range(0..pool.len())]));
                        }
                        AspRule::new(heads, pos, neg)
                    })
                    .collect();
                Context::new(id, KnowledgeBase::Asp(AspKb::new(rules)))
            }
        })
        .collect();

    let n_rules = rng.random_range(0..=max_rules);
    let rules: Vec<BridgeRule> = (0..n_rules)
        .map(|k| {
            let target = rng.random_range(0..n_ctx);
            let head = atom(pools[target][rng.random_range(0..pools[target].len())]);
            let n_body = rng.random_range(0..=2usize);
            let body: Vec<BeliefLiteral> = (0..n_body)
                .map(|_| {
                    let src = rng.random_range(0..n_ctx);
                    BeliefLiteral {
                        context: ContextId::new(format!("c{}", src + 1)),
                        atom: atom(pools[src][rng.random_range(0..pools[src].len())]),
                        negated: rng.random_bool(0.4),
                    }
                })
                .collect();
            BridgeRule::new(
                format!("r{}", k + 1),
                format!("c{}", target + 1),
                RuleHead::Formula(head),
                body,
            )
        })
        .collect();

    Mcs::new(contexts, rules)
}

/// A random managed system: every context carries a manager, every bridge
/// head is an op-command the target manager supports.
pub fn random_managed(rng: &mut StdRng) -> Mcs {
    let n_ctx = rng.random_range(2..=3);
    let pool = ["p", "q", "s", "t"];
    let pools: Vec<Vec<&str>> = (0..n_ctx)
        .map(|_| pool[..rng.random_range(2..=4)].to_vec())
        .collect();

    let contexts: Vec<Context> = (0..n_ctx)
        .map(|i| {
            let id = format!("c{}", i + 1);
            let pool = &pools[i];
            fn facts_base(rng: &mut StdRng, pool: &[&str]) -> KnowledgeBase {
                let count = rng.random_range(0..=2usize);
                let facts: BTreeSet<Atom> = (0..count)
                    .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                    .collect();
                KnowledgeBase::Facts(FactsKb { facts })
            }
            match rng.random_range(0..4) {
                0 => Context::managed(id, facts_base(rng, pool), Manager::Add),
                1 => Context::managed(id, facts_base(rng, pool), Manager::AddDelete),
                2 => {
                    let a = atom(pool[rng.random_range(0..pool.len())]);
                    let b = atom(pool[rng.random_range(0..pool.len())]);
                    let exclusions = if a == b {
                        BTreeSet::new()
                    } else {
                        [(a.clone().min(b.clone()), a.max(b))].into_iter().collect()
                    };
                    let kb = facts_base(rng, pool);
                    Context::managed(id, kb, Manager::GuardedRevise { exclusions })
                }
                _ => {
                    let n_rules = rng.random_range(0..=2usize);
                    let rules: Vec<AspRule> = (0..n_rules)
                        .map(|_| {
                            let heads: Vec<Atom> = (0..rng.random_range(1..=2usize))
                                .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                                .collect();
                            let pos: Vec<Atom> = (0..rng.random_range(0..=1usize))
                                .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                                .collect();
                            let neg: Vec<Atom> = (0..rng.random_range(0..=1usize))
                                .map(|_| atom(pool[rng.random_range(0..pool.len())]))
                                .collect();
                            AspRule::new(heads, pos, neg)
                        })
                        .collect();
                    Context::managed(id, KnowledgeBase::Asp(AspKb::new(rules)), Manager::Add)
                }
            }
        })
        .collect();

    let n_rules = rng.random_range(0..=5);
    let rules: Vec<BridgeRule> = (0..n_rules)
        .map(|k| {
            let target = rng.random_range(0..n_ctx);
            let formula = atom(pools[target][rng.random_range(0..pools[target].len())]);
            let manager = contexts[target].manager.as_ref().unwrap();
            let supported: Vec<OpKind> = [OpKind::Add, OpKind::Del, OpKind::Revise]
                .into_iter()
                .filter(|op| manager.supports(*op))
                .collect();
            let op = supported[rng.random_range(0..supported.len())];
            let n_body = rng.random_range(0..=2usize);
            let body: Vec<BeliefLiteral> = (0..n_body)
                .map(|_| {
                    let src = rng.random_range(0..n_ctx);
                    BeliefLiteral {
                        context: ContextId::new(format!("c{}", src + 1)),
                        atom: atom(pools[src][rng.random_range(0..pools[src].len())]),
                        negated: rng.random_bool(0.4),
                    }
                })
                .collect();
            BridgeRule::new(
                format!("r{}", k + 1),
                format!("c{}", target + 1),
                RuleHead::Op(OpCommand::new(op, formula)),
                body,
            )
        })
        .collect();

    Mcs::new(contexts, rules)
}

/// A random constraint-style observer: positive-body constraints over the
/// d1/d2 encoding of the system's rules.
pub fn random_constraint_observer(rng: &mut StdRng, m: &Mcs) -> AspKb {
    let ids: Vec<RuleId> = m.rule_ids().into_iter().collect();
    if ids.is_empty() {
        return AspKb::default();
    }
    let n_constraints = rng.random_range(0..=2usize);
    AspKb::new((0..n_constraints).map(|_| {
        let n_body = rng.random_range(1..=2usize);
        let pos: Vec<Atom> = (0..n_body)
            .map(|_| {
                let id = &ids[rng.random_range(0..ids.len())];
                let pred = if rng.random_bool(0.5) { "d1" } else { "d2" };
                Atom::with_args(pred, &[id.as_str()])
            })
            .collect();
        AspRule::new([], pos, [])
    }))
}
