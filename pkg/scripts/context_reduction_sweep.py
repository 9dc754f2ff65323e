#!/usr/bin/env python3
"""Sweep BM25 context-reduction caps over a synthetic long document and report
how much of the citation-bearing content survives at each cap.

    python3 scripts/context_reduction_sweep.py --caps 2000 5000 10000 15000
"""

import argparse
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from groundcite.textkit import normalize, reduce_context, split_sentences  # noqa: E402

VOCAB = (
    "archive bridge canyon dynamo estuary foundry glacier harbor isotope "
    "jetty lagoon meridian nebula obelisk prairie quarry reservoir summit "
    "terrace uplands"
).split()


def build_document(rng, n_sentences=400, n_relevant=25):
    relevant_idx = set(rng.sample(range(n_sentences), n_relevant))
    sentences, citations = [], []
    for i in range(n_sentences):
        words = [rng.choice(VOCAB) for _ in range(rng.randint(8, 14))]
        if i in relevant_idx:
            words.insert(rng.randrange(len(words)), "beacon")
            words.insert(rng.randrange(len(words)), "signal")
        sentence = " ".join(words).capitalize() + "."
        sentences.append(sentence)
        if i in relevant_idx:
            citations.append(sentence)
    return " ".join(sentences), citations


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--caps", type=int, nargs="+",
                        default=[2000, 5000, 10000, 15000])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--query", default="beacon signal")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    document, citations = build_document(rng)
    total_sentences = len(split_sentences(document))
    print(
        f"document: {len(document)} chars, {total_sentences} sentences, "
        f"{len(citations)} citation-bearing"
    )
    print(f"{'cap':>7} {'chars':>7} {'sentences':>10} {'citations kept':>15}")
    for cap in args.caps:
        reduced = reduce_context(document, args.query, cap)
        norm = normalize(reduced)
        kept = sum(1 for c in citations if normalize(c) in norm)
        n_sentences = len(reduced.split("\n")) if reduced else 0
        print(f"{cap:>7} {len(reduced):>7} {n_sentences:>10} "
              f"{kept:>10}/{len(citations)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
