"""Mock-policy hill-climb over completions on a bundled synthetic task.

The probe tracks how the fraction of verbatim-valid citations evolves when a
reward-greedy process edits a completion: random mutations of the citation
fields (single-character edits, snapping to a document sentence, snapping to
a ground-truth string) are accepted only when the weighted total reward
strictly increases.

The synthetic task is built so the ground-truth citations are close
paraphrases that do NOT occur verbatim in the document.  With the validity
weight on, the climb is pulled toward verbatim document windows and the
valid fraction goes to 1; with it off, only the accuracy pull remains and
citations converge to the non-verbatim ground truth, so the valid fraction
stays low.  Seeded and fully deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .rewards import RewardConfig, compute_rewards
from .tagfmt import Decomposition, serialize
from .textkit import split_sentences

__all__ = ["ProbeConfig", "ProbeStep", "ProbeTask", "synthetic_task", "run_probe"]

_VOCAB = (
    "committee budget harbor granite window lantern meadow quarry violet summit "
    "copper fable ginger hollow island jasper kettle ledger marble needle orchid "
    "pepper quartz ribbon saddle timber velvet walnut cedar ember"
).split()

# Replacement words for the ground-truth paraphrases; disjoint from _VOCAB so
# a paraphrase can never be a verbatim document substring.
_PARAPHRASE_VOCAB = "zephyr fjord sphinx nymph glyph crypt obelisk".split()

_ALPHABET = "abcdefghijklmnopqrstuvwxyz "


@dataclass(frozen=True)
class ProbeConfig:
    seed: int = 0
    steps: int = 2000
    alpha: float = 0.75
    weight_format: float = 1.0
    weight_validity: float = 1.0
    weight_accuracy: float = 1.0
    similarity_mode: str = "fast"


@dataclass(frozen=True)
class ProbeStep:
    step: int
    accepted: bool
    format: float
    validity: float
    accuracy: float
    total: float
    valid_fraction_exact: float

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "accepted": self.accepted,
            "format": self.format,
            "validity": self.validity,
            "accuracy": self.accuracy,
            "total": self.total,
            "valid_fraction_exact": self.valid_fraction_exact,
        }


@dataclass(frozen=True)
class ProbeTask:
    document: str
    gt_citations: tuple[str, ...]
    start: Decomposition
    doc_sentences: tuple[str, ...]


def synthetic_task(seed: int = 0) -> ProbeTask:
    """Deterministic document, paraphrased ground truth and a noisy start."""
    rng = random.Random(seed)
    sentences = []
    for _ in range(12):
        words = [rng.choice(_VOCAB) for _ in range(rng.randint(6, 9))]
        words[0] = words[0].capitalize()
        sentences.append(" ".join(words) + ".")
    document = " ".join(sentences)

    anchor_idxs = rng.sample(range(len(sentences)), 4)
    gt_citations = []
    for idx in anchor_idxs:
        words = sentences[idx][:-1].split()
        for pos in rng.sample(range(1, len(words)), 2):
            words[pos] = rng.choice(_PARAPHRASE_VOCAB)
        gt_citations.append(" ".join(words) + ".")

    def corrupt(text: str) -> str:
        chars = list(text)
        for pos in rng.sample(range(len(chars) - 1), 4):
            chars[pos] = rng.choice(_ALPHABET)
        return "".join(chars)

    start = Decomposition(
        reasoning="decompose the answer and cite the supporting sentences",
        pairs=(
            ("first claim of the answer", corrupt(gt_citations[0])),
            ("second claim of the answer", corrupt(gt_citations[1])),
        ),
    )
    return ProbeTask(
        document=document,
        gt_citations=tuple(gt_citations),
        start=start,
        doc_sentences=tuple(s.text for s in split_sentences(document)),
    )


def _mutate(d: Decomposition, task: ProbeTask, rng: random.Random) -> Decomposition:
    citations = list(d.citations)
    slot = rng.randrange(len(citations))
    roll = rng.random()
    if roll < 0.4:
        c = citations[slot]
        if c:
            pos = rng.randrange(len(c))
            op = rng.random()
            if op < 0.5:
                c = c[:pos] + rng.choice(_ALPHABET) + c[pos + 1 :]
            elif op < 0.75:
                c = c[:pos] + rng.choice(_ALPHABET) + c[pos:]
            else:
                c = c[:pos] + c[pos + 1 :]
        citations[slot] = c
    elif roll < 0.7:
        citations[slot] = rng.choice(task.doc_sentences)
    else:
        citations[slot] = rng.choice(task.gt_citations)
    return Decomposition(d.reasoning, tuple(zip(d.units, citations)))


def run_probe(cfg: ProbeConfig = ProbeConfig()) -> list[ProbeStep]:
    """Hill-climb for ``cfg.steps`` steps; returns the per-step trace.

    Step 0 records the starting state; mutations are accepted only on a
    strict total-reward increase.
    """
    task = synthetic_task(cfg.seed)
    reward_cfg = RewardConfig(
        alpha=cfg.alpha,
        weight_format=cfg.weight_format,
        weight_validity=cfg.weight_validity,
        weight_accuracy=cfg.weight_accuracy,
        similarity_mode=cfg.similarity_mode,
    )
    rng = random.Random(cfg.seed + 1)
    current = task.start
    breakdown = compute_rewards(
        serialize(current), task.document, list(task.gt_citations), reward_cfg
    )
    trace = [
        ProbeStep(
            step=0,
            accepted=True,
            format=breakdown.format,
            validity=breakdown.validity,
            accuracy=breakdown.accuracy,
            total=breakdown.total,
            valid_fraction_exact=breakdown.valid_fraction_exact,
        )
    ]
    for step in range(1, cfg.steps + 1):
        candidate = _mutate(current, task, rng)
        cand_breakdown = compute_rewards(
            serialize(candidate), task.document, list(task.gt_citations), reward_cfg
        )
        accepted = cand_breakdown.total > breakdown.total
        if accepted:
            current, breakdown = candidate, cand_breakdown
        trace.append(
            ProbeStep(
                step=step,
                accepted=accepted,
                format=breakdown.format,
                validity=breakdown.validity,
                accuracy=breakdown.accuracy,
                total=breakdown.total,
                valid_fraction_exact=breakdown.valid_fraction_exact,
            )
        )
    return trace
