#![allow(dead_code)]

use subjaug::augment::{ParaphraseRecord, Stage, StyleTag};
use subjaug::corpus::{Label, LabeledSentence};
use subjaug::gateway::{Gateway, GatewayConfig, MockFallback, MockResponder};

/// (generated text, style, corrected text) for the three mislabeled
/// generations rewritten during self-correction.
pub const CORRECTION_EXAMPLES: [(&str, StyleTag, &str); 3] = [
    (
        "The plight of Serbia’s LGBTQ+ community remains largely unaddressed, leaving them in a void of neglect.",
        StyleTag::Exaggerated,
        "Serbia’s LGBTQ+ community is shockingly ignored, casting them into an abyss of utter neglect!",
    ),
    (
        "A promising turnaround is on the horizon, with expectations for change as early as next month.",
        StyleTag::Propaganda,
        "A glorious transformation awaits us, with change destined to arrive as soon as next month!",
    ),
    (
        "He expressed that a new variant emerging this fall would not come as a shock to him.",
        StyleTag::Propaganda,
        "The emergence of a new variant this fall is inevitable and will not surprise the vigilant.",
    ),
];

pub fn correction_records() -> Vec<ParaphraseRecord> {
    CORRECTION_EXAMPLES
        .iter()
        .enumerate()
        .map(|(i, (text, style, _))| ParaphraseRecord {
            synthetic_id: format!("src{i}.g0"),
            source_id: format!("src{i}"),
            text: text.to_string(),
            label: Label::Subj,
            style: Some(*style),
            stage: Stage::Generated,
            changed_by_correction: false,
        })
        .collect()
}

pub fn scripted_correction_gateway(max_in_flight: usize) -> Gateway {
    let responder = CORRECTION_EXAMPLES
        .iter()
        .fold(MockResponder::new(MockFallback::EchoSentence), |r, (gen, _, fixed)| r.rule(*gen, *fixed));
    mock_gateway(responder, max_in_flight)
}

pub fn mock_gateway(responder: MockResponder, max_in_flight: usize) -> Gateway {
    let config = GatewayConfig {
        max_in_flight,
        ..GatewayConfig::default()
    };
    Gateway::mock(config, responder).unwrap()
}

/// `n_obj` OBJ rows then `n_subj` SUBJ rows, interleaved deterministically.
pub fn synthetic_corpus(n_obj: usize, n_subj: usize) -> Vec<LabeledSentence> {
    let mut rows = Vec::with_capacity(n_obj + n_subj);
    let (mut o, mut s) = (0, 0);
    while o < n_obj || s < n_subj {
        if o < n_obj && (s >= n_subj || o * n_subj <= s * n_obj) {
            rows.push(LabeledSentence::new(
                format!("obj{o:04}"),
                format!("The committee reported {o} new filings on day {}.", o % 31 + 1),
                Label::Obj,
            ));
            o += 1;
        } else {
            rows.push(LabeledSentence::new(
                format!("subj{s:04}"),
                format!("This outrageous decision number {s} is a disgrace to everyone!"),
                Label::Subj,
            ));
            s += 1;
        }
    }
    rows
}
