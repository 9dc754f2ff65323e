"""Prompt templates for curation, annotation and judging.

Templates use ``{name}`` placeholders filled by :func:`fill`; everything else
is emitted byte-for-byte.  Keep these stable: regenerating a dataset or a
judge run with a drifted template silently changes scores.
"""

from __future__ import annotations

__all__ = [
    "fill",
    "CONTEXT_EXTENSION_PROMPT",
    "MUSIQUE_ATTRIBUTION_PROMPT",
    "DECOMPOSITION_PROMPT",
    "UNIT_MATCHING_PROMPT",
    "JUDGE_PROMPT",
    "TRAINING_PROMPT",
]


def fill(template: str, **fields: str) -> str:
    """Substitute ``{name}`` placeholders; template braces stay literal."""
    out = template
    for name, value in fields.items():
        token = "{" + name + "}"
        if token not in out:
            raise KeyError(f"template has no placeholder {token}")
        out = out.replace(token, str(value))
    return out


CONTEXT_EXTENSION_PROMPT = """\
Seamlessly extend this passage by around {num_words} words:

{passage}

Instructions:
1. In your output, you must include ALL the sentences in the original passage.
2. Instead of repeating the sentence word-to-word, just insert the corresponding tag instead. For example, the output can be "This is a new sentence. <s0> This is another new sentence. <s1> And yet another one."
3. The original sentences should be scattered throughout the output, they should not appear in one place.
4. VERY IMPORTANT: The information in the original sentences (in the <si> tags) should not be repeated in the scattered sentences, they should appear only once. In other words, you should NOT be able to infer the information in the original sentences by reading the rest of the document.
5. Ensure that ALL tags <s0>, <s1>, ..., <sn> are present in the output, corresponding to the original sentences.
6. Your output should JUST be the extended passage, with no additional text or formatting.
7. Again, ensure that you DO NOT GENERATE any sentences that contain the information in the original sentences! Simply use the tags <s0>, <s1>, ..., <sn> to refer to the original sentences.
"""


MUSIQUE_ATTRIBUTION_PROMPT = """\
You are an expert at extracting sentence attributions from a context based on a question and answer.
You are given the following:

Context:
{context}

Question:
{question}

Answer:
{answer}

Your task is to extract the EXACT sentences from the context that are used for producing the answer to the question. Each sentence is separated by a newline in the context.

You should return the sentences separated by newlines, with no additional text or formatting, in the order they appear in the context.

To derive the answer from the question, you will need at least one sentence from each paragraph in the context.

Do not include any sentences that are not necessary for answering the question.

VERY IMPORTANT: You should include at least one sentence from each paragraph in the context.
"""


DECOMPOSITION_PROMPT = """\
You will be given a set of input references, a question, an accumulated_text, and a latest_text_chunk.
You need to break down the latest_text_chunk for a given question into information units. Give only those information units that are attributable to the documents.

Instruction on what good information units are:
1. Give information units that are relevant to the answer.
2. Information units should be meaningful.
3. All information units should be necessary for the answer to derived from the question and documents.
4. The list of information units should be complete, the answer should be derivable solely from the listed information units.
5. Each information unit should be attributable to a SINGLE sentence in the references. It should be worded in a form such that it can be easily searched in the references.
6. Some extra information may need to be added to the information units so that they can be easily attributed to the references. For example, references may contain the sentences "The Great Gatsby is a famous 1925 novel written by F. Scott Fitzgerald" and "The Great Gatsby was narrated by Nick Carraway.", but the question and answer may not have the name of the novel (example: "Who wrote the famous 1925 novel narrated by Nick Carraway? F. Scott Fitzgerald."). In this case, the information units should contain the name of the novel too ("The Great Gatsby") so that it can be attributed easily to the references.
7. The decomposition may be trivial, that is, the latest_text_chunk may already be a well-defined information unit.

Instruction on what bad information units are:
1. Information units that convey duplicate information.
2. Information units that are non statements.
3. Information units that are not meaningful to the question.
4. Information units that are not attributable to the references.
5. Information units that are not atomic, i.e, combine information from multiple sentences in the references.

References:
{references}

Question:
{question}

accumulated_text:
{accumulated_text}

latest_text_chunk:
{latest_text_chunk}
"""


# Attribution matching works from the ground-truth citations alone, never the
# full documents, and asks for exactly one verbatim citation per unit.
UNIT_MATCHING_PROMPT = """\
You will be given a set of input references and a list of query units. For each unit, your job is to find the sentence in the references that supports the unit most closely and output it verbatim.

Follow these rules:
1. Each output citation should be only a SINGLE SENTENCE from the references and should match EXACTLY.
2. DO NOT output multiple sentences for a unit.
3. Output exactly one citation per unit, in the same order as the units.

References:
{references}

Query units:
{units}
"""


JUDGE_PROMPT = """\
You are an expert judge. Given a question, a part of the answer, and a list of citations, determine whether the citations SUPPORT the answer.
Output consists of two parts, collective support score and individual support score.

Collective support score is defined as follows for the entire citation list:
1. If the citations FULLY support the answer part, then 2.
2. If the citations only PARTIALLY support the answer part, then 1.
3. If the citations do NOT support the answer part at all, then 0.

Individual support score is defined as follows for each citation:
If the citation supports (fully or partially) the answer part, then 1.
If the citation does NOT support the answer part at all, then 0.

Examples:

Question: What is the capital of the largest country in the world (by area)?

Answer part: The capital of the largest country, Russia, is Moscow.

Citation list:
["Moscow is the capital of Russia.", "Russia is the largest country in the world by area."]

Output: "collective_support_score": 2, "individual_support_scores": [1, 1]

Explanation: The citation list fully supports the answer part because together they confirm that Moscow is the capital of Russia and that Russia is the largest country by area. Individually, both citations support the answer part.

If citation list is:
["Moscow is the capital of Russia."]

Output: "collective_support_score": 1, "individual_support_scores": [1]

Explanation: The citation list partially supports the answer part because while it confirms that Moscow is the capital of Russia, it does not provide information about Russia being the largest country by area. Individually, the single citation supports the answer part.

If citations are:
["The capital of France is Paris.", "The largest country by area is Russia.", "Moscow is the capital of Russia."]

Output:
{
    "collective_support_score": 2,
    "individual_support_scores": [0, 1, 1]
}

Explanation: The citation list fully supports the answer part because two of the citations confirm that Moscow is the capital of Russia and that Russia is the largest country by area. Individually, the first citation does not support the answer part, while the other two do.

Now evaluate the following:

Question: {question}

Answer part: {answer_part}

Citation list (this is what you are evaluating):
{citation_list}

Instructions:
1. Ensure that you do not use any information or knowledge outside of the snippet when evaluating.
2. If the citation list is empty, collective_support_score should be 2 if there is no factual information in the answer part, else 0. individual_support_scores should be an empty list.
3. Your output should be in the following JSON format without any additional text, no backticks or code blocks.
{ "collective_support_score": 0, 1, or 2,  "individual_support_scores": [list of 0s and 1s corresponding to each citation]}
"""


TRAINING_PROMPT = """\
You need to produce attributions to ground an answer to a question based on relevant documents. The inputs are:

## Question ##

{question}

## Relevant documents ##

{documents}

## Answer generated till now ##

{answer_till_now}

## Answer part ##

{answer_part}

You need to ground the answer part to the relevant documents by first decomposing the answer part into reasoning, constituent units and citations.
"""
