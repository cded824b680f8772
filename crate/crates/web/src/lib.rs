//! Browser bindings. Each export takes a system document (the same JSON the
//! command line reads) and returns a JSON string; failures come back as
//! `{"error": "..."}`. Indices in the returned bodies are 0-based, labels
//! are 1-based.

use inputsel_core::controllability::{
    is_structurally_controllable, is_switched_structurally_controllable,
};
use inputsel_core::graph::{strongly_connected_components, StateDigraph};
use inputsel_core::ilp::Problem;
use inputsel_core::model::{union_system, SparsityPattern};
use inputsel_core::selection::{solve_exact, solve_exact_switched};
use inputsel_core::tu::{build_switched_incidence, classify, incidence_of, is_sssi};
use inputsel_core::{
    parse_switched_system, parse_system, StructuredSystem, SwitchedStructuredSystem,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Fixed documents are read as one-mode switched systems so that the page
/// has a single shape to draw.
fn load(doc: &str) -> Result<(SwitchedStructuredSystem, bool), String> {
    let raw: Value = serde_json::from_str(doc).map_err(|e| e.to_string())?;
    if raw.get("modes").is_some() {
        let (sw, _) = parse_switched_system(doc).map_err(|e| e.to_string())?;
        Ok((sw, true))
    } else {
        let sys = parse_system(doc).map_err(|e| e.to_string())?;
        Ok((SwitchedStructuredSystem::from_fixed(&sys).0, false))
    }
}

/// Zero input columns are already stripped, so positions match the graph.
fn first_mode(sw: &SwitchedStructuredSystem) -> Result<StructuredSystem, String> {
    let md = &sw.modes()[0];
    StructuredSystem::new(md.a.clone(), md.b.clone(), md.costs.clone()).map_err(|e| e.to_string())
}

fn input_labels(sw: &SwitchedStructuredSystem) -> Vec<String> {
    let multi = sw.p() > 1;
    sw.modes()
        .iter()
        .enumerate()
        .flat_map(|(k, md)| {
            md.original_columns.iter().map(move |c| {
                if multi {
                    format!("u{c}_m{}", k + 1)
                } else {
                    format!("u{c}")
                }
            })
        })
        .collect()
}

fn edges(p: &SparsityPattern) -> Vec<[usize; 2]> {
    p.entries().map(|(i, j)| [j, i]).collect()
}

/// Nodes and edges for drawing: `a` edges run state to state, `b` edges
/// from a flat input to a state.
pub fn graph(sw: &SwitchedStructuredSystem) -> Value {
    let offsets = sw.mode_offsets();
    let modes: Vec<Value> = sw
        .modes()
        .iter()
        .zip(&offsets)
        .map(|(md, off)| {
            let b: Vec<[usize; 2]> = md.b.entries().map(|(i, j)| [off + j, i]).collect();
            json!({ "a": edges(&md.a), "b": b })
        })
        .collect();
    let union = union_system(sw);
    let scc = strongly_connected_components(&StateDigraph::from_pattern(&union.a_union));
    let sources: Vec<&Vec<usize>> = scc
        .source_components()
        .into_iter()
        .map(|c| &scc.components[c])
        .collect();
    json!({
        "n": sw.n(),
        "inputs": input_labels(sw),
        "modes": modes,
        "sources": sources,
    })
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// `inputs` is a comma-separated list of 1-based flat input positions; an
/// empty string selects nothing and `"all"` selects everything.
pub fn check_value(doc: &str, inputs: &str) -> Result<Value, String> {
    let (sw, switched) = load(doc)?;
    let total = sw.total_inputs();
    let mask = if inputs.trim() == "all" {
        vec![true; total]
    } else {
        let mut mask = vec![false; total];
        for t in inputs.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let j: usize = t.parse().map_err(|_| format!("bad input {t:?}"))?;
            if j == 0 || j > total {
                return Err(format!("input {j} out of range 1..={total}"));
            }
            mask[j - 1] = true;
        }
        mask
    };
    let cert = if switched {
        is_switched_structurally_controllable(&sw, &mask)
    } else {
        is_structurally_controllable(&first_mode(&sw)?, &mask)
    };
    Ok(json!({
        "switched": switched,
        "selected": mask,
        "certificate": cert,
        "graph": graph(&sw),
    }))
}

pub fn classify_value(doc: &str) -> Result<Value, String> {
    let (sw, switched) = load(doc)?;
    let w = build_switched_incidence(&sw);
    let mut out = json!({
        "w": w.entries,
        "classes": classify(&w),
        "graph": graph(&sw),
    });
    if switched {
        let per_mode: Vec<bool> = sw
            .modes()
            .iter()
            .map(|md| {
                StructuredSystem::new(md.a.clone(), md.b.clone(), md.costs.clone())
                    .map(|s| is_sssi(&incidence_of(&s)))
                    .unwrap_or(false)
            })
            .collect();
        out["per_mode_sssi"] = json!(per_mode);
        out["joint_sssi"] = json!(is_sssi(&w));
    }
    Ok(out)
}

fn problem_of(name: &str) -> Result<Problem, String> {
    Ok(match name {
        "p1" => Problem::P1,
        "p2" => Problem::P2,
        "p3" => Problem::P3,
        "p4" => Problem::P4,
        "p5" => Problem::P5,
        "p4fix" => Problem::P4fix,
        "p5fix" => Problem::P5fix,
        other => return Err(format!("unknown problem {other:?}")),
    })
}

pub fn solve_value(doc: &str, problem: &str, k: Option<u32>) -> Result<Value, String> {
    let problem = problem_of(problem)?;
    let k = k.map(|k| k as usize);
    let (res, sw) = if problem.is_switched() {
        let (sw, _) = load(doc)?;
        (solve_exact_switched(&sw, problem, k), sw)
    } else {
        let (sw, _) = load(doc)?;
        let sys = first_mode(&sw)?;
        (solve_exact(&sys, problem, k), sw)
    };
    let res = res.map_err(|e| e.to_string())?;
    let offsets = if matches!(problem, Problem::P4fix | Problem::P5fix) {
        vec![0; sw.p()]
    } else {
        sw.mode_offsets()
    };
    let flat: Vec<usize> = res
        .selected
        .iter()
        .map(|mi| offsets[mi.mode] + mi.input)
        .collect();
    Ok(json!({
        "result": res,
        "flat_selected": flat,
        "graph": graph(&sw),
    }))
}

#[wasm_bindgen]
pub fn check(doc: &str, inputs: &str) -> String {
    respond(check_value(doc, inputs))
}

#[wasm_bindgen(js_name = classify)]
pub fn classify_incidence(doc: &str) -> String {
    respond(classify_value(doc))
}

#[wasm_bindgen]
pub fn solve(doc: &str, problem: &str, k: Option<u32>) -> String {
    respond(solve_value(doc, problem, k))
}
