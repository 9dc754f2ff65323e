#!/usr/bin/env python3
"""Run the reward hill-climb with and without the validity reward and report
how the fraction of verbatim-valid citations evolves.

Writes one trace JSONL per configuration and prints a compact summary table.

    python3 scripts/run_probe.py --steps 2000 --seed 0 --out-dir probe_traces
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from groundcite.probe import ProbeConfig, run_probe  # noqa: E402
from groundcite.window import warmup  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="probe_traces")
    args = parser.parse_args()

    warmup()
    os.makedirs(args.out_dir, exist_ok=True)
    summary = []
    for label, weight in (("with_validity", 1.0), ("without_validity", 0.0)):
        cfg = ProbeConfig(seed=args.seed, steps=args.steps, weight_validity=weight)
        trace = run_probe(cfg)
        path = os.path.join(args.out_dir, f"{label}_seed{args.seed}.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            for step in trace:
                fh.write(json.dumps(step.as_dict()) + "\n")
        final = trace[-1]
        accepted = sum(1 for s in trace[1:] if s.accepted)
        summary.append((label, final.valid_fraction_exact, final.total, accepted, path))

    print(f"{'configuration':<20} {'valid_frac':>10} {'total':>8} {'accepted':>9}  trace")
    for label, frac, total, accepted, path in summary:
        print(f"{label:<20} {frac:>10.3f} {total:>8.4f} {accepted:>9}  {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
