mod common;

use common::*;
use graphrag_core::agent::{Agent, AgentConfig, PipelineTrace};
use graphrag_core::llm::MockLlm;

fn run(name: &str) -> PipelineTrace {
    let case = regression_case(name);
    let agent = Agent::new(MockLlm::new(case.script), AgentConfig::default());
    agent.run(case.question, &case.corpus, &case.kg).unwrap()
}

fn check_links_recorded(trace: &PipelineTrace, kg_len: usize) {
    assert_eq!(trace.steps.len(), 2);
    let s2 = &trace.steps[1];
    assert_eq!(s2.proximal_triples.len(), 5);
    assert_eq!(s2.links.len(), 5);
    for link in &s2.links {
        let l = link.linked.as_ref().expect("every proximal triple links somewhere");
        assert!(l.index < kg_len);
        assert!(l.score > 0.0);
    }
    assert_eq!(s2.alignments.len(), s2.flattened.len());
    assert!(!s2.flattened.is_empty());
    assert!(trace.answer.is_some() && trace.error.is_none());
}

#[test]
fn geoduck_links_drift_to_other_topics() {
    let trace = run("geoduck");
    check_links_recorded(&trace, 6);
    let s2 = &trace.steps[1];
    assert!(s2.proximal_triples.iter().all(|x| x.subject() == "Pacific Geoducks"));
    // the linked store triples are about oysters, seaweeds, hermit crabs… not geoducks
    let linked: Vec<String> = s2
        .links
        .iter()
        .map(|l| l.linked.as_ref().unwrap().triple.to_string())
        .collect();
    assert!(linked.iter().any(|x| x.contains("Pacific oyster")), "{linked:?}");
    // and the trace serializes them for inspection
    assert!(trace.to_json().contains("Pacific oyster"));
}

#[test]
fn hottub_links_drift_to_other_topics() {
    let trace = run("hottub");
    check_links_recorded(&trace, 7);
    let json = trace.to_json();
    assert!(json.contains("high limit switch"));
    assert!(trace.steps[1]
        .links
        .iter()
        .all(|l| !l.linked.as_ref().unwrap().triple.to_string().contains("limit switch")));
}
