//! 1-based names for states and inputs, and their use in report bodies.

use inputsel_core::controllability::ControllabilityCertificate;
use inputsel_core::graph::RightVertex;
use inputsel_core::model::{ModeInput, StructuredSystem, SwitchedStructuredSystem};
use inputsel_core::rational::{format_rational, Rational};
use serde_json::{json, Value};

pub struct Labels {
    /// Flat input order (mode-major for switched systems).
    pub inputs: Vec<String>,
    pub n: usize,
    /// Mode suffixes are added only when there is more than one mode.
    multi_mode: bool,
}

impl Labels {
    pub fn fixed(sys: &StructuredSystem) -> Self {
        Self {
            inputs: (1..=sys.m()).map(|j| format!("u{j}")).collect(),
            n: sys.n(),
            multi_mode: false,
        }
    }

    pub fn switched(sw: &SwitchedStructuredSystem) -> Self {
        let multi_mode = sw.p() > 1;
        let inputs = sw
            .modes()
            .iter()
            .enumerate()
            .flat_map(|(k, md)| {
                md.original_columns.iter().map(move |&c| {
                    if multi_mode {
                        format!("u{c}_m{}", k + 1)
                    } else {
                        format!("u{c}")
                    }
                })
            })
            .collect();
        Self {
            inputs,
            n: sw.n(),
            multi_mode,
        }
    }

    /// Labels for the columns of the shared `B` (mode 1 numbering).
    pub fn shared(sw: &SwitchedStructuredSystem) -> Self {
        Self {
            inputs: sw.modes()[0]
                .original_columns
                .iter()
                .map(|c| format!("u{c}"))
                .collect(),
            n: sw.n(),
            multi_mode: false,
        }
    }

    pub fn state(&self, i: usize) -> String {
        format!("x{}", i + 1)
    }

    pub fn states(&self, xs: &[usize]) -> Vec<String> {
        xs.iter().map(|&i| self.state(i)).collect()
    }

    pub fn right(&self, v: RightVertex) -> String {
        match v {
            RightVertex::Input(j) => self.inputs[j].clone(),
            RightVertex::State { mode, state } if self.multi_mode => {
                format!("x{}_m{}", state + 1, mode + 1)
            }
            RightVertex::State { state, .. } => self.state(state),
        }
    }

    pub fn selected(&self, mask: &[bool]) -> Vec<String> {
        mask.iter()
            .zip(&self.inputs)
            .filter(|(s, _)| **s)
            .map(|(_, l)| l.clone())
            .collect()
    }

    /// Labels of a selection given as flat positions into `offsets`.
    pub fn of_selection(&self, sel: &[ModeInput], offsets: &[usize]) -> Vec<String> {
        sel.iter()
            .map(|mi| self.inputs[offsets[mi.mode] + mi.input].clone())
            .collect()
    }

    pub fn certificate(&self, cert: &ControllabilityCertificate, mask: &[bool]) -> Value {
        let sources: Vec<Value> = cert
            .sources
            .iter()
            .map(|s| {
                json!({
                    "states": self.states(&s.states),
                    "actuated_by": s.input.map(|j| self.inputs[j].clone()),
                })
            })
            .collect();
        let failing = cert.failing_source.map(|c| {
            let s = cert
                .sources
                .iter()
                .find(|s| s.component == c)
                .expect("failing source listed");
            self.states(&s.states)
        });
        let pairs: Vec<[String; 2]> = cert
            .matching
            .iter()
            .map(|p| [self.state(p.state), self.right(p.partner)])
            .collect();
        let deficient = cert.deficient.as_ref().map(|h| {
            json!({
                "states": self.states(&h.left),
                "neighbours": h.neighbours.len(),
            })
        });
        json!({
            "controllable": cert.controllable,
            "selected": self.selected(mask),
            "reachability": {
                "all_reachable": cert.all_reachable,
                "unreachable": self.states(&cert.unreachable_states),
                "source_components": sources,
                "failing_source": failing,
            },
            "matching": {
                "saturating": cert.saturating,
                "pairs": pairs,
                "hall_violator": deficient,
            },
        })
    }
}

pub fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}
