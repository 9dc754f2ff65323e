from groundcite.probe import ProbeConfig, run_probe, synthetic_task


def test_synthetic_task_shape():
    task = synthetic_task(0)
    assert len(task.gt_citations) == 4
    assert len(task.start.pairs) == 2
    # The ground truth is paraphrased, never verbatim.
    for gt in task.gt_citations:
        assert gt not in task.document
    for sentence in task.doc_sentences:
        assert sentence in task.document


def test_synthetic_task_deterministic():
    assert synthetic_task(3) == synthetic_task(3)
    assert synthetic_task(3) != synthetic_task(4)


def test_probe_trace_is_deterministic():
    cfg = ProbeConfig(seed=1, steps=60)
    assert run_probe(cfg) == run_probe(cfg)


def test_probe_logs_every_step():
    trace = run_probe(ProbeConfig(seed=0, steps=40))
    assert len(trace) == 41
    assert [s.step for s in trace] == list(range(41))
    for step in trace:
        assert 0.0 <= step.valid_fraction_exact <= 1.0
        assert step.total >= 0.0


def test_probe_totals_never_decrease():
    trace = run_probe(ProbeConfig(seed=2, steps=150))
    totals = [s.total for s in trace]
    assert all(b >= a for a, b in zip(totals, totals[1:]))


def test_probe_validity_weight_drives_valid_fraction():
    on = run_probe(ProbeConfig(seed=0, steps=400, weight_validity=1.0))
    off = run_probe(ProbeConfig(seed=0, steps=400, weight_validity=0.0))
    assert on[-1].valid_fraction_exact >= 0.95
    assert max(s.valid_fraction_exact for s in off) < 0.95
