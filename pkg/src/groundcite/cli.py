"""Command-line entry points.

Subcommands: score, eval-exact, eval-judge, curate, reduce, probe, serve.
Exit codes: 0 full success, 1 partial failures (rejects or per-sample errors
written to a sidecar), 2 fatal.
"""

from __future__ import annotations

import argparse
import sys

from .curation import CurationConfig, run_assemble_stage, run_decompose_stage, \
    run_extend_stage, run_match_stage
from .judge import JudgeConfig, aggregate_judge, judge_batch, normalize_citations
from .llmclient import ClientConfig
from .metrics import aggregate_report, exact_match_prf
from .probe import ProbeConfig, run_probe
from .records import SCHEMA_VERSION, breakdown_row, instance_from_row, read_jsonl, \
    write_jsonl
from .rewards import RewardConfig, compute_rewards_batch
from .textkit import Bm25Params, reduce_context


def _reward_config(args) -> RewardConfig:
    return RewardConfig(
        alpha=args.alpha,
        weight_format=args.weight_format,
        weight_validity=args.weight_validity,
        weight_accuracy=args.weight_accuracy,
        similarity_mode=args.similarity_mode,
        dedup_citations=getattr(args, "dedup_citations", False),
    )


def _add_reward_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.75,
                        help="recall weight of the accuracy reward (0.5 = classic F1)")
    parser.add_argument("--weight-format", type=float, default=1.0)
    parser.add_argument("--weight-validity", type=float, default=1.0)
    parser.add_argument("--weight-accuracy", type=float, default=1.0)
    parser.add_argument("--similarity-mode", choices=("exact", "fast"), default="exact")


def _client_config(args) -> ClientConfig:
    return ClientConfig(
        endpoint=args.endpoint,
        timeout=args.timeout,
        max_retries=args.retries,
        max_concurrency=args.concurrency,
        cache_dir=args.cache_dir,
    )


def _add_client_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--endpoint", default="http://localhost:8080/v1/chat/completions")
    parser.add_argument("--model", default="gpt-4.1")
    parser.add_argument("--timeout", type=float, default=120.0)
    parser.add_argument("--retries", type=int, default=3)
    parser.add_argument("--concurrency", type=int, default=8)
    parser.add_argument("--cache-dir", default=None)


def cmd_score(args) -> int:
    from .window import warmup

    warmup()
    rows = read_jsonl(args.input)
    cfg = _reward_config(args)
    samples = []
    for row in rows:
        samples.append((row.get("output", ""), row.get("document", ""),
                        list(row.get("gt_citations") or [])))
    breakdowns = compute_rewards_batch(samples, cfg, max_workers=args.workers)
    out_rows = [
        breakdown_row(b, sample_id=row.get("id"))
        for row, b in zip(rows, breakdowns)
    ]
    write_jsonl(args.output, out_rows)
    print(f"scored {len(out_rows)} samples -> {args.output}")
    return 0


def _print_report(rows: list[dict]) -> None:
    header = f"{'dataset':<20} {'n':>6} {'P':>8} {'R':>8} {'F1':>8}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row['dataset']:<20} {row['n']:>6} "
            f"{row['precision']:>8.3f} {row['recall']:>8.3f} {row['f1']:>8.3f}"
        )


def cmd_eval_exact(args) -> int:
    predictions = read_jsonl(args.predictions)
    references = read_jsonl(args.references)
    refs_by_id = {row.get("id"): row for row in references}
    scores, labels = [], []
    for row in predictions:
        ref = refs_by_id.get(row.get("id"))
        if ref is None:
            raise ValueError(f"no reference row for prediction id {row.get('id')!r}")
        scores.append(
            exact_match_prf(
                list(row.get("citations") or []), list(ref.get("citations") or [])
            )
        )
        labels.append(row.get("dataset") or ref.get("dataset") or "default")
    report = aggregate_report(scores, labels, micro_overall=args.micro_overall)
    _print_report(report)
    if args.report:
        write_jsonl(args.report, [{"schema_version": SCHEMA_VERSION, **row} for row in report])
        print(f"report -> {args.report}")
    return 0


def cmd_eval_judge(args) -> int:
    from .judge import JudgeScores

    if not args.from_scores and not (args.input and args.scores):
        raise ValueError("eval-judge needs --input and --scores, or --from-scores")
    if args.from_scores:
        # Offline re-aggregation of a previously persisted per-sample file.
        score_rows = read_jsonl(args.from_scores)
        failures = sum(1 for row in score_rows if row.get("error"))
        per_label: dict[str, list] = {}
        for row in score_rows:
            if row.get("error"):
                continue
            per_label.setdefault(row.get("dataset", "default"), []).append(
                JudgeScores(
                    collective_support=row["collective_support_score"],
                    individual_support=tuple(row["individual_support_scores"]),
                )
            )
    else:
        rows = read_jsonl(args.input)
        judge_cfg = JudgeConfig(
            model=args.model,
            parse_retries=args.parse_retries,
            client=_client_config(args),
        )
        batch = []
        kept_citations = {}
        for row in rows:
            instance = instance_from_row(row)
            document = "\n\n".join(t for _, t in instance.documents)
            if not document:
                document = str(row.get("document", ""))
            citations = normalize_citations(list(row.get("citations") or []), document)
            kept_citations[row.get("id")] = citations
            batch.append((instance, citations, row.get("id")))
        results = judge_batch(batch, judge_cfg)

        score_rows, failures = [], 0
        per_label = {}
        label_by_id = {row.get("id"): row.get("dataset") or "default" for row in rows}
        for sample_id, scores, error in results:
            row = {
                "schema_version": SCHEMA_VERSION,
                "id": sample_id,
                "dataset": label_by_id.get(sample_id, "default"),
                "citations": kept_citations.get(sample_id, []),
                "error": error,
            }
            if scores is not None:
                row.update(scores.as_dict())
                per_label.setdefault(row["dataset"], []).append(scores)
            else:
                failures += 1
            score_rows.append(row)
        write_jsonl(args.scores, score_rows)

    report_rows = []
    for label, judged in sorted(per_label.items()):
        agg = aggregate_judge(judged)
        report_rows.append(
            {
                "schema_version": SCHEMA_VERSION,
                "dataset": label,
                "n": agg.n_samples,
                "is_mean": agg.is_mean,
                "cs_mean": agg.cs_mean,
            }
        )
    all_scores = [s for judged in per_label.values() for s in judged]
    if all_scores:
        agg = aggregate_judge(all_scores, n_parse_failures=failures)
        report_rows.append(
            {
                "schema_version": SCHEMA_VERSION,
                "dataset": "Overall",
                "n": agg.n_samples,
                "is_mean": agg.is_mean,
                "cs_mean": agg.cs_mean,
            }
        )
    for row in report_rows:
        print(
            f"{row['dataset']:<20} n={row['n']:<5} IS={row['is_mean']:.3f} "
            f"CS={row['cs_mean']:.3f}"
        )
    if args.report:
        write_jsonl(args.report, report_rows)
    if not args.from_scores:
        print(f"per-sample scores -> {args.scores} ({failures} failures)")
    return 1 if failures else 0


def cmd_curate(args) -> int:
    rows = read_jsonl(args.input)
    cfg = CurationConfig(
        model=args.model,
        client=_client_config(args),
        target_words=args.target_words,
        extension_retries=args.extension_retries,
    )
    if args.stage == "extend":
        accepted, rejects = run_extend_stage(rows, cfg)
    elif args.stage == "decompose":
        accepted, rejects = run_decompose_stage(rows, cfg)
    elif args.stage == "match":
        accepted, rejects = run_match_stage(rows, cfg)
    else:
        accepted, rejects = run_assemble_stage(rows)
    write_jsonl(args.output, accepted)
    if rejects:
        write_jsonl(args.rejects, rejects)
        print(
            f"stage {args.stage}: {len(accepted)} accepted, "
            f"{len(rejects)} rejected -> {args.rejects}"
        )
        return 1
    print(f"stage {args.stage}: {len(accepted)} accepted -> {args.output}")
    return 0


def cmd_reduce(args) -> int:
    rows = read_jsonl(args.input)
    params = Bm25Params(k1=args.k1, b=args.b)
    out_rows = []
    for row in rows:
        query = str(row.get(args.query_field, ""))
        out = dict(row)
        out["schema_version"] = SCHEMA_VERSION
        if isinstance(row.get("documents"), list):
            out["documents"] = [
                {"id": d.get("id", i), "text": reduce_context(d["text"], query, args.char_cap, params)}
                for i, d in enumerate(row["documents"])
            ]
        else:
            out["document"] = reduce_context(
                str(row.get("document", "")), query, args.char_cap, params
            )
        out_rows.append(out)
    write_jsonl(args.output, out_rows)
    print(f"reduced {len(out_rows)} samples at cap {args.char_cap} -> {args.output}")
    return 0


def cmd_probe(args) -> int:
    from .window import warmup

    warmup()
    cfg = ProbeConfig(
        seed=args.seed,
        steps=args.steps,
        alpha=args.alpha,
        weight_format=args.weight_format,
        weight_validity=args.weight_validity,
        weight_accuracy=args.weight_accuracy,
        similarity_mode=args.similarity_mode,
    )
    trace = run_probe(cfg)
    write_jsonl(
        args.trace,
        [{"schema_version": SCHEMA_VERSION, **step.as_dict()} for step in trace],
    )
    final = trace[-1]
    print(
        f"probe: {args.steps} steps, validity weight {args.weight_validity}; "
        f"final valid_fraction_exact={final.valid_fraction_exact:.3f} "
        f"total={final.total:.4f} -> {args.trace}"
    )
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    cfg = ServiceConfig(reward=_reward_config(args), max_batch=args.max_batch,
                        max_workers=args.workers)
    serve(args.host, args.port, cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groundcite",
        description="Rewards, evaluation and curation for post-hoc citation attribution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score completions from a JSONL file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--dedup-citations", action="store_true")
    _add_reward_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval-exact", help="exact-match precision/recall/F1 report")
    p.add_argument("--predictions", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--micro-overall", action="store_true")
    p.set_defaults(func=cmd_eval_exact)

    p = sub.add_parser("eval-judge", help="LLM-as-judge CS/IS evaluation")
    p.add_argument("--input", default=None)
    p.add_argument("--scores", default=None, help="per-sample scores JSONL")
    p.add_argument("--report", default=None)
    p.add_argument("--parse-retries", type=int, default=1)
    p.add_argument("--from-scores", default=None,
                   help="re-aggregate a persisted per-sample scores file offline")
    _add_client_flags(p)
    p.set_defaults(func=cmd_eval_judge)

    p = sub.add_parser("curate", help="run one curation stage")
    p.add_argument("--stage", required=True,
                   choices=("extend", "decompose", "match", "assemble"))
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--rejects", default="rejects.jsonl")
    p.add_argument("--target-words", type=int, default=500)
    p.add_argument("--extension-retries", type=int, default=2)
    _add_client_flags(p)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("reduce", help="BM25 context reduction")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--query-field", default="question")
    p.add_argument("--char-cap", type=int, required=True)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("probe", help="reward hill-climb on the synthetic task")
    p.add_argument("--trace", required=True, help="output trace JSONL")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=2000)
    _add_reward_flags(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("serve", help="run the reward-scoring HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8191)
    p.add_argument("--max-batch", type=int, default=1000)
    p.add_argument("--workers", type=int, default=None)
    _add_reward_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
