"""Prompt templates for every LLM-backed stage.

Templates are kept verbatim; rendering functions live next to the stage
that uses them.
"""

from __future__ import annotations

SELECTION_SYSTEM = (
    "You are a query router. Given a question, decide which backend to use "
    "(SEARCH, SQL, SPARQL, or CYPHER) and which knowledge base to query. Some "
    "queries are ambiguous and may match multiple knowledge bases, return up to "
    "<k> routing decisions, most likely first; return fewer if you are confident."
)

SELECTION_RESPONSE_FORMAT = (
    'Respond with JSON: {"decisions": [{"route_type": "...", "kb_id": "..."}, ...]}'
)

CORRECTIVE_INSTRUCTION = (
    "Your previous response was not valid JSON in the required shape. "
    "Respond with only the JSON object."
)

FORMULATION_SYSTEM = {
    "SQL": "You are a text-to-SQL translator. Output only the SQL query.",
    "SPARQL": "You are a text-to-SPARQL translator. Output only the SPARQL query.",
    "CYPHER": "You are a text-to-Cypher translator. Output only the Cypher query.",
}

FORMULATION_USER = "{context}\n\nQuestion: {question}\n\nGenerate the {language} query."

SEARCH_REWRITE_SYSTEM = "\n\n".join(
    [
        "You are a search query optimizer for a dense retriever. Given the user query "
        "and a description of the target corpus, write a hypothetical passage that would "
        "be relevant evidence for the query, written in the register, style, and "
        "approximate length of documents in that corpus. The passage will be embedded "
        "and matched against real corpus documents, so favor concrete, in-domain content "
        "over generic phrasing.",
        "Begin your output with the user query verbatim on its own line, just the query "
        "text, not the 'Question:' label that precedes it, then on the next line write "
        "the hypothetical passage. This keeps the literal query terms in the embedding "
        "alongside the semantic expansion.",
        "If the query is a short topic stub or short keyword-style query (just a handful "
        "of words, often lowercase and without punctuation), do NOT write a passage, "
        "output the verbatim query and nothing else. The bare term already gives a strong "
        "dense-retrieval signal, and a hallucinated passage tends to lock onto one "
        "specific aspect that may not match the gold document.",
        "Output only the verbatim query followed by the passage (or for a stub query, "
        "only the verbatim query), no preamble, no quotes, no labels.",
    ]
)

EVIDENCE_SYSTEM = (
    "You are a result selector. Pick the candidate whose result best answers the question."
)

EVIDENCE_HEADER = (
    "Candidates (each prefixed with its integer index in brackets, e.g. [0], [1], [2]):"
)

EVIDENCE_RESPONSE_FORMAT = 'Respond with JSON: {"selected": <integer index>}'

JUDGE_SYSTEM = "\n\n".join(
    [
        "You are a strict but fair evaluator. You will see a user question and two sides: "
        "a PREDICTED side (the model's chosen KB) and a GOLD side (the labeled KB, known to "
        "be correct). Each side carries its KB schema/context, the query that was run, and "
        "the resulting answer.",
        "Decide whether the predicted side correctly answers the user question. There are "
        "two independent ways the prediction can be correct: (1) ANSWER MATCH, the "
        "predicted answer is equivalent in meaning to the gold answer, allowing reordering, "
        "alias differences, formatting differences, or extra surrounding context; (2) "
        "FAITHFUL IMPLEMENTATION ON A DIFFERENT KB, the predicted query faithfully realizes "
        "what the user asked, interpreted against the predicted KB schema and data, and the "
        "predicted answer is what that query correctly produces. The values may differ "
        "entirely from gold because the predicted KB legitimately holds different content. "
        "This case applies whenever more than one knowledge base could reasonably answer "
        "the same kind of question.",
        "If the gold answer is empty or otherwise degenerate (the gold query may itself be "
        "buggy or stale), the gold reference is uninformative, judge by FAITHFUL "
        "IMPLEMENTATION alone in that case. Reject when the predicted answer is off-topic "
        "or when the predicted query plainly fails to capture what the question is asking. "
        "If both pred and gold answers are empty, ALWAYS count it as an ANSWER MATCH (this "
        "overrides any reasoning about whether the question should have a real-world "
        "answer). If only the predicted answer is empty, reject. Use the schemas and "
        "queries on both sides to interpret unfamiliar values.",
    ]
)

JUDGE_RESPONSE_FORMAT = (
    'Respond with JSON: {"correct": true|false, "reason": "<one-line reason>"}'
)
