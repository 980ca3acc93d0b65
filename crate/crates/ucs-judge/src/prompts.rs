//! Prompt templates for both task families and the rendering helpers
//! that fill their slots.
//!
//! The concept-generation, question-generation, and question-application
//! templates are the fixed wording the pipeline was built around; the
//! joint-scoring, joint-generation, zero-shot, and aggregator templates
//! are authored here (see README, "Prompt inventory").

use crate::dataset::PromptFamily;

/// Fixed prompt text for one task family.
pub struct FamilyPrompts {
    pub concept_system: &'static str,
    pub concept_task: &'static str,
    pub question_system: &'static str,
    /// Slot: `{concept}`.
    pub question_task: &'static str,
    pub application_system: &'static str,
    /// Slots: `{context}`, `{answer_segment}`, `{concept}`, `{questions}`,
    /// `{questions_format_example}`.
    pub application_task: &'static str,
    /// Joint variant of `application_task` without the single-concept
    /// header; `{questions}` carries all concept sections.
    pub joint_application_task: &'static str,
    /// Question asked by the zero-shot judge and the aggregator.
    pub final_question: &'static str,
}

const EVIDENCE_SUPPORT: FamilyPrompts = FamilyPrompts {
    concept_system: "You are an evidence-grounding evaluator. Your goal is to identify key verification concepts for checking whether answers are supported by evidence.",
    concept_task: "Generate 3\u{2013}5 distinct verification concepts that are essential for evaluating whether an answer is supported by evidence passages.\n\nGuidelines:\n- Concepts should cover different aspects of evidence grounding (e.g., factual accuracy, completeness, specificity, consistency, source attribution).\n- Each concept should be general enough to apply across different topics and domains.\n- Concepts should target different failure modes where answers might not be properly supported.\n- Keep concepts concise (2\u{2013}5 words each).\n\nReturn exactly this format:\n\n<concepts>\n<concept1>[Concept name]</concept1>\n<concept2>[Concept name]</concept2>\n...\n</concepts>",
    question_system: "You are an evidence-grounding evaluator. Your goal is to generate reusable verification questions for checking whether an answer is supported by retrieved evidence passages.",
    question_task: "**Verification Concept:** {concept}\n\nGenerate 4\u{2013}6 clear, diverse, and reusable evaluation questions for verifying whether an answer is supported by evidence with respect to the concept '{concept}'. These questions will later be scored on a **0\u{2013}10 scale indicating degree of evidence support**.\n\nGuidelines:\n- Focus on whether an **answer is supported by evidence passages**.\n- Questions must be reusable across different topics and documents.\n- Cover different **evidence-grounding failure modes** (e.g., unsupported claims, contradictions, overgeneralization, specificity mismatch).\n- Each question should be written to support **graded (partial-to-full) scoring**, not just yes/no judgments.\n- Each question should target a distinct verification angle.\n- Wording should be concise and evaluative (e.g., \"To what extent is the claim supported by the evidence\u{2026}\", \"How well do the passages justify\u{2026}\").\n\nReturn exactly this format:\n\n<questions>\n<question1>Question: [Universal evaluation question]</question1>\n...\n</questions>",
    application_system: "You are an evidence-grounding evaluator. Your task is to determine whether an answer is supported by the provided evidence passages.",
    application_task: "**Evidence Passages:**\n{context}\n\n**Answer:** {answer_segment}\n**Verification Concept:** {concept}\n\n**Evaluation Questions:**\n{questions}\n\nFor each question, assign a score from **0\u{2013}10** indicating how well the evidence supports the answer with respect to that question.\n\nBase all judgments strictly on the provided evidence passages. Do not assume any external knowledge.\n\nReturn exactly this format:\n\n<evaluation>\n{questions_format_example}\n</evaluation>",
    joint_application_task: "**Evidence Passages:**\n{context}\n\n**Answer:** {answer_segment}\n\n**Evaluation Questions:**\n{questions}\n\nFor each question, assign a score from **0\u{2013}10** indicating how well the evidence supports the answer with respect to that question.\n\nBase all judgments strictly on the provided evidence passages. Do not assume any external knowledge.\n\nReturn exactly this format:\n\n<evaluation>\n{questions_format_example}\n</evaluation>",
    final_question: "Is the answer fully supported by the evidence passages?",
};

const SUMMARY_FAITHFULNESS: FamilyPrompts = FamilyPrompts {
    concept_system: "You are an expert factual faithfulness evaluator. Your goal is to identify key faithfulness concepts for checking whether summaries are factually faithful to their source documents.",
    concept_task: "Generate 3\u{2013}5 distinct faithfulness concepts that are essential for evaluating whether a summary is factually faithful to its source document.\n\nGuidelines:\n- Concepts should cover different aspects of factual faithfulness (e.g., factual accuracy, contradiction detection, unsupported claims, misrepresentation, distorted certainty).\n- Each concept should be general enough to apply across different topics and domains.\n- Concepts should target different failure modes where summaries might not be properly supported by source documents.\n- Keep concepts concise (2\u{2013}5 words each).\n\nReturn exactly this format:\n\n<concepts>\n<concept1>[Concept name]</concept1>\n<concept2>[Concept name]</concept2>\n...\n</concepts>",
    question_system: "You are an expert factual faithfulness evaluator. Your role is to construct high-quality, reusable evaluation questions that test whether summaries are factually faithful to their source documents.",
    question_task: "**Faithfulness Concept:** {concept}\n\nGenerate exactly 6 clear, diverse, and reusable evaluation questions for the faithfulness concept '{concept}'. Each question must require direct comparison between a summary and its source document to assess factual support, contradiction, or distortion under this concept.\n\nAnnotation Guidance to Apply While Writing Questions:\n- The question must be answerable ONLY by checking the source document.\n- The question should detect one of the following: unsupported claims, contradiction, misrepresentation, distorted certainty, or incorrect attribution.\n- The question must not depend on surface form (grammar, fluency, style, or verbosity).\n\nGuidelines:\n- Every question must explicitly or implicitly require verification against the source document.\n- Do NOT ask about readability, grammar, fluency, writing quality, or length.\n- Questions must be context-independent and reusable across domains.\n- All questions must stay strictly within the given faithfulness concept, but vary the factual scenario or common error pattern being tested.\n- Avoid redundancy: each question should target a distinct factual failure mode.\n- Wording must be concise, unambiguous, and evaluative (e.g., \"Does the summary\u{2026}\" or \"To what extent does the summary\u{2026}\").\n\nReturn exactly this format:\n\n<questions>\n<question1>\nQuestion: [Universal evaluation question]\n</question1>\n\n<question2>\nQuestion: [Universal evaluation question]\n</question2>\n\n<question3>\nQuestion: [Universal evaluation question]\n</question3>\n\n<question4>\nQuestion: [Universal evaluation question]\n</question4>\n\n<question5>\nQuestion: [Universal evaluation question]\n</question5>\n\n<question6>\nQuestion: [Universal evaluation question]\n</question6>\n</questions>",
    application_system: "You are an expert factual faithfulness evaluator. Your task is to score a summary against its source document using predefined faithfulness evaluation questions.",
    application_task: "**Source Document:**\n{context}\n\n**Summary:** {answer_segment}\n\n**Faithfulness Concept:** {concept}\n\n**Evaluation Questions:**\n{questions}\n\nFor each question, evaluate whether the summary is factually faithful to the source document under that question.\n\nWhile scoring, explicitly consider whether the summary:\n- Contains information not stated in or directly inferable from the source\n- Contradicts the source\n- Introduces unsupported details\n- Misrepresents entities, quantities, relationships, or certainty\n- Overgeneralizes, narrows, or distorts scope\n\nAssign a score from 0\u{2013}10 for each question:\n- 0 = Completely unfaithful (clear contradiction, fabrication, or unsupported claim)\n- 10 = Completely faithful (fully supported, correctly represented, no distortion)\n\nRules:\n- Base every score strictly on evidence from the source document.\n- Ignore grammar, fluency, style, and summary length.\n- Penalize both direct hallucinations and subtle distortions of meaning or certainty.\n\nProvide a brief, evidence-based justification for each score.\n\nReturn exactly this format:\n\n<evaluation>\n{questions_format_example}\n</evaluation>",
    joint_application_task: "**Source Document:**\n{context}\n\n**Summary:** {answer_segment}\n\n**Evaluation Questions:**\n{questions}\n\nFor each question, evaluate whether the summary is factually faithful to the source document under that question.\n\nWhile scoring, explicitly consider whether the summary:\n- Contains information not stated in or directly inferable from the source\n- Contradicts the source\n- Introduces unsupported details\n- Misrepresents entities, quantities, relationships, or certainty\n- Overgeneralizes, narrows, or distorts scope\n\nAssign a score from 0\u{2013}10 for each question:\n- 0 = Completely unfaithful (clear contradiction, fabrication, or unsupported claim)\n- 10 = Completely faithful (fully supported, correctly represented, no distortion)\n\nRules:\n- Base every score strictly on evidence from the source document.\n- Ignore grammar, fluency, style, and summary length.\n- Penalize both direct hallucinations and subtle distortions of meaning or certainty.\n\nProvide a brief, evidence-based justification for each score.\n\nReturn exactly this format:\n\n<evaluation>\n{questions_format_example}\n</evaluation>",
    final_question: "Is the summary factually faithful to the source document?",
};

pub fn family_prompts(family: PromptFamily) -> &'static FamilyPrompts {
    match family {
        PromptFamily::EvidenceSupport => &EVIDENCE_SUPPORT,
        PromptFamily::SummaryFaithfulness => &SUMMARY_FAITHFULNESS,
    }
}

/// Appended on the single repair retry after a parse failure.
pub const REPAIR_INSTRUCTION: &str =
    "\n\nYour previous reply could not be parsed. Return ONLY the tagged block in exactly the requested format, with no text before or after it.";

/// `(system, user)` pair for concept generation.
pub fn concept_generation(family: PromptFamily) -> (String, String) {
    let p = family_prompts(family);
    (p.concept_system.to_string(), p.concept_task.to_string())
}

/// `(system, user)` pair for per-concept question generation.
pub fn question_generation(family: PromptFamily, concept_name: &str) -> (String, String) {
    let p = family_prompts(family);
    (
        p.question_system.to_string(),
        p.question_task.replace("{concept}", concept_name),
    )
}

/// `(system, user)` pair for joint question generation: one call that
/// produces `per_concept` questions for every listed concept, in order,
/// in a single tagged block.
pub fn joint_question_generation(
    family: PromptFamily,
    concept_names: &[String],
    per_concept: usize,
) -> (String, String) {
    let p = family_prompts(family);
    let concept_list = concept_names
        .iter()
        .enumerate()
        .map(|(i, name)| format!("{}. {name}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    let total = concept_names.len() * per_concept;
    let user = format!(
        "**Concepts:**\n{concept_list}\n\nFor EACH concept above, in the order listed, generate exactly {per_concept} clear, diverse, and reusable evaluation questions, following the same guidance you would apply per concept. Produce {total} questions in total: questions 1\u{2013}{per_concept} for concept 1, questions {}\u{2013}{} for concept 2, and so on.\n\nReturn exactly this format:\n\n<questions>\n<question1>Question: [Universal evaluation question]</question1>\n...\n<question{total}>Question: [Universal evaluation question]</question{total}>\n</questions>",
        per_concept + 1,
        2 * per_concept,
    );
    (p.question_system.to_string(), user)
}

/// Numbered question list for a prompt, starting at `start` (1-based).
pub fn render_numbered_questions(questions: &[String], start: usize) -> String {
    questions
        .iter()
        .enumerate()
        .map(|(i, q)| format!("{}. {q}", start + i))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The `{questions_format_example}` block: one scored entry per
/// question index in `start..start + count`.
pub fn score_format_example(count: usize, start: usize) -> String {
    (start..start + count)
        .map(|i| {
            format!("<question{i}>\nScore: [0-10]\nJustification: [brief evidence-based justification]\n</question{i}>")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// `(system, user)` pair scoring one concept's questions against a
/// sample.
pub fn question_application(
    family: PromptFamily,
    context: &str,
    answer_segment: &str,
    concept_name: &str,
    questions: &[String],
) -> (String, String) {
    let p = family_prompts(family);
    let user = p
        .application_task
        .replace("{context}", context)
        .replace("{answer_segment}", answer_segment)
        .replace("{concept}", concept_name)
        .replace("{questions}", &render_numbered_questions(questions, 1))
        .replace(
            "{questions_format_example}",
            &score_format_example(questions.len(), 1),
        );
    (p.application_system.to_string(), user)
}

/// `(system, user)` pair scoring every criterion in one call. Sections
/// are `(concept name, questions)` in canonical order; question
/// numbering is global so `<questionN>` entries align with the
/// canonical criterion order.
pub fn joint_application(
    family: PromptFamily,
    context: &str,
    answer_segment: &str,
    sections: &[(String, Vec<String>)],
) -> (String, String) {
    let p = family_prompts(family);
    let concept_label = match family {
        PromptFamily::EvidenceSupport => "Verification Concept",
        PromptFamily::SummaryFaithfulness => "Faithfulness Concept",
    };
    let mut blocks = Vec::new();
    let mut index = 1usize;
    let mut total = 0usize;
    for (name, questions) in sections {
        blocks.push(format!(
            "**{concept_label}:** {name}\n{}",
            render_numbered_questions(questions, index)
        ));
        index += questions.len();
        total += questions.len();
    }
    let user = p
        .joint_application_task
        .replace("{context}", context)
        .replace("{answer_segment}", answer_segment)
        .replace("{questions}", &blocks.join("\n\n"))
        .replace("{questions_format_example}", &score_format_example(total, 1));
    (p.application_system.to_string(), user)
}

/// `(system, user)` pair for the zero-shot judge: every sample role is
/// rendered, followed by the family's direct question and a binary
/// tagged answer format.
pub fn zero_shot(family: PromptFamily, fields: &[(String, String)]) -> (String, String) {
    let p = family_prompts(family);
    let rendered = fields
        .iter()
        .map(|(role, text)| format!("**{}:** {text}", capitalize(role)))
        .collect::<Vec<_>>()
        .join("\n\n");
    let user = format!(
        "{rendered}\n\n{}\n\nReturn exactly this format:\n\n<judgment>yes</judgment> or <judgment>no</judgment>",
        p.final_question
    );
    (p.application_system.to_string(), user)
}

/// `(system, user)` pair for the LLM aggregator: the sample text
/// (optional), every criterion question with its score, and a request
/// for a final binary judgment.
pub fn aggregator(
    family: PromptFamily,
    fields: Option<&[(String, String)]>,
    entries: &[(String, f64)],
) -> (String, String) {
    let p = family_prompts(family);
    let mut parts = Vec::new();
    if let Some(fields) = fields {
        let rendered = fields
            .iter()
            .map(|(role, text)| format!("**{}:** {text}", capitalize(role)))
            .collect::<Vec<_>>()
            .join("\n\n");
        parts.push(rendered);
    }
    let responses = entries
        .iter()
        .enumerate()
        .map(|(i, (question, score))| format!("{}. {question}\nScore: {score}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    parts.push(format!("**Criterion Responses:**\n{responses}"));
    parts.push(format!(
        "The scores above rate each criterion from 0 (worst) to 10 (best). Based on these criterion responses, {}\n\nReturn exactly this format:\n\n<judgment>yes</judgment> or <judgment>no</judgment>",
        lowercase_first(p.final_question)
    ));
    (p.application_system.to_string(), parts.join("\n\n"))
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}
