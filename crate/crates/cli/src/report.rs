//! Report payloads and their text rendering. JSON output is canonical:
//! identical invocations produce identical bytes.

use serde::Serialize;

use mcs_core::{BeliefState, CycleClass, DepEdge, Diagnosis, Explanation, Mcs};

#[derive(Serialize)]
pub struct ContextBeliefs {
    pub context: String,
    pub beliefs: Vec<String>,
}

#[derive(Serialize)]
pub struct DiagnosisJson {
    pub d1: Vec<String>,
    pub d2: Vec<String>,
}

#[derive(Serialize)]
pub struct ExplanationJson {
    pub e1: Vec<String>,
    pub e2: Vec<String>,
}

#[derive(Serialize)]
pub struct FaultyJson {
    pub from_diagnoses: Vec<String>,
    pub from_explanations: Vec<String>,
}

#[derive(Serialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub negative: bool,
}

#[derive(Serialize)]
pub struct CoherenceJson {
    pub context: String,
    pub coherent: bool,
}

/// One report covers every subcommand; absent sections are omitted from the
/// JSON so each command emits exactly its schema.
#[derive(Serialize)]
pub struct Report {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<Vec<Vec<ContextBeliefs>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnoses: Option<Vec<DiagnosisJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explanations: Option<Vec<ExplanationJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub faulty: Option<FaultyJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub totally_coherent: Option<Vec<CoherenceJson>>,
}

impl Report {
    pub fn new(status: impl Into<String>) -> Self {
        Self {
            status: status.into(),
            equilibria: None,
            diagnoses: None,
            explanations: None,
            faulty: None,
            nodes: None,
            edges: None,
            classification: None,
            totally_coherent: None,
        }
    }
}

pub fn belief_states(m: &Mcs, states: &[BeliefState]) -> Vec<Vec<ContextBeliefs>> {
    states
        .iter()
        .map(|s| {
            m.contexts()
                .iter()
                .zip(&s.sets)
                .map(|(ctx, set)| ContextBeliefs {
                    context: ctx.id.as_str().to_owned(),
                    beliefs: set.atoms.iter().map(|a| a.text().to_owned()).collect(),
                })
                .collect()
        })
        .collect()
}

pub fn diagnoses(list: &[Diagnosis]) -> Vec<DiagnosisJson> {
    list.iter()
        .map(|d| DiagnosisJson {
            d1: d.d1.iter().map(|r| r.as_str().to_owned()).collect(),
            d2: d.d2.iter().map(|r| r.as_str().to_owned()).collect(),
        })
        .collect()
}

pub fn explanations(list: &[Explanation]) -> Vec<ExplanationJson> {
    list.iter()
        .map(|e| ExplanationJson {
            e1: e.e1.iter().map(|r| r.as_str().to_owned()).collect(),
            e2: e.e2.iter().map(|r| r.as_str().to_owned()).collect(),
        })
        .collect()
}

pub fn edges(list: &[DepEdge]) -> Vec<EdgeJson> {
    list.iter()
        .map(|e| EdgeJson {
            from: e.from.as_str().to_owned(),
            to: e.to.as_str().to_owned(),
            negative: e.negative,
        })
        .collect()
}

pub fn classification(class: CycleClass) -> String {
    class.name().to_owned()
}

fn id_list(ids: &[String]) -> String {
    format!("{{{}}}", ids.join(","))
}

/// Stable line format for `--format text`.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("status: {}\n", report.status));
    if let Some(states) = &report.equilibria {
        out.push_str(&format!("equilibria: {}\n", states.len()));
        for state in states {
            let parts: Vec<String> = state
                .iter()
                .map(|c| format!("{}:{{{}}}", c.context, c.beliefs.join(",")))
                .collect();
            out.push_str(&format!("  {}\n", parts.join(" ")));
        }
    }
    if let Some(list) = &report.diagnoses {
        out.push_str(&format!("diagnoses: {}\n", list.len()));
        for d in list {
            out.push_str(&format!("  d1={} d2={}\n", id_list(&d.d1), id_list(&d.d2)));
        }
    }
    if let Some(list) = &report.explanations {
        out.push_str(&format!("explanations: {}\n", list.len()));
        for e in list {
            out.push_str(&format!("  e1={} e2={}\n", id_list(&e.e1), id_list(&e.e2)));
        }
    }
    if let Some(f) = &report.faulty {
        out.push_str(&format!(
            "faulty: from_diagnoses={} from_explanations={}\n",
            id_list(&f.from_diagnoses),
            id_list(&f.from_explanations)
        ));
    }
    if let Some(nodes) = &report.nodes {
        out.push_str(&format!("contexts: {}\n", nodes.join(", ")));
    }
    if let Some(edges) = &report.edges {
        for e in edges {
            let polarity = if e.negative { " [not]" } else { "" };
            out.push_str(&format!("  {} -> {}{}\n", e.from, e.to, polarity));
        }
    }
    if let Some(class) = &report.classification {
        out.push_str(&format!("classification: {}\n", class));
    }
    if let Some(coherence) = &report.totally_coherent {
        for c in coherence {
            out.push_str(&format!("totally_coherent {}: {}\n", c.context, c.coherent));
        }
    }
    out
}

/// DOT rendering of the dependency graph; negative edges are dashed.
pub fn render_dot(nodes: &[String], edges: &[EdgeJson]) -> String {
    let mut out = String::from("digraph mcs {\n");
    for node in nodes {
        out.push_str(&format!("  \"{node}\";\n"));
    }
    for e in edges {
        let attrs = if e.negative { " [style=dashed]" } else { "" };
        out.push_str(&format!("  \"{}\" -> \"{}\"{};\n", e.from, e.to, attrs));
    }
    out.push_str("}\n");
    out
}
