"""Serializer, parser and format reward for the tagged completion string.

A well-formed completion is one think block followed by one or more
unit/citation pairs:

    <think> ... </think> <unit> ... </unit> <citation> ... </citation> ...

The parser is whitespace-tolerant between tags and always reports the longest
contiguous substring that would parse on its own (surrounding whitespace is
counted as part of a valid span, so trailing newlines from samplers are not
penalized).  The serializer pads each field with a single space on both sides
and the parser strips exactly one back off, which makes the two exact
inverses for arbitrary field contents.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "RESERVED_TAGS",
    "Decomposition",
    "ParseOutcome",
    "serialize",
    "parse",
    "format_reward",
    "format_reward_binary",
]

RESERVED_TAGS = (
    "<think>",
    "</think>",
    "<unit>",
    "</unit>",
    "<citation>",
    "</citation>",
)


@dataclass(frozen=True)
class Decomposition:
    """A reasoning trace plus ordered (unit, citation) pairs."""

    reasoning: str
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "pairs", tuple((str(u), str(c)) for u, c in self.pairs)
        )

    @property
    def units(self) -> list[str]:
        return [u for u, _ in self.pairs]

    @property
    def citations(self) -> list[str]:
        return [c for _, c in self.pairs]


@dataclass(frozen=True)
class ParseOutcome:
    """Result of parsing a completion.

    ``decomposition`` is set only when the entire input (modulo surrounding
    whitespace) parses.  ``valid_span`` is the longest grammar-valid
    substring as [start, end) offsets, (0, 0) when none exists.
    """

    decomposition: Decomposition | None
    valid_span: tuple[int, int]
    diagnostics: list[tuple[int, str]] = field(default_factory=list)


def _check_fields(d: Decomposition) -> None:
    if not d.pairs:
        raise ValueError("a decomposition needs at least one (unit, citation) pair")
    for name, value in [("reasoning", d.reasoning)] + [
        (f"pair {i}", s) for i, (u, c) in enumerate(d.pairs) for s in (u, c)
    ]:
        for tag in RESERVED_TAGS:
            if tag in value:
                raise ValueError(f"reserved tag literal {tag!r} inside {name}")


def serialize(d: Decomposition) -> str:
    """Render a decomposition in the tagged completion format."""
    _check_fields(d)
    parts = [f"<think> {d.reasoning} </think>"]
    for unit, citation in d.pairs:
        parts.append(f"<unit> {unit} </unit> <citation> {citation} </citation>")
    return " ".join(parts)


def _unpad(raw: str) -> str:
    # Inverse of the serializer's single-space padding.
    if raw.startswith(" "):
        raw = raw[1:]
    if raw.endswith(" "):
        raw = raw[:-1]
    return raw


def _next_reserved(o: str, pos: int) -> tuple[int, str | None]:
    best_at, best_tag = -1, None
    for tag in RESERVED_TAGS:
        at = o.find(tag, pos)
        if at != -1 and (best_at == -1 or at < best_at):
            best_at, best_tag = at, tag
    return best_at, best_tag


def _parse_block(o: str, start: int):
    """Greedily parse one think block plus as many pairs as possible.

    Returns ((raw_reasoning, raw_pairs, end), None) or (None, diagnostic).
    """
    pos = start + len("<think>")
    at, tag = _next_reserved(o, pos)
    if tag != "</think>":
        return None, (start, "unterminated <think> block")
    raw_reasoning = o[pos:at]
    pos = at + len("</think>")
    raw_pairs: list[tuple[str, str]] = []
    end = -1
    while True:
        q = pos
        while q < len(o) and o[q].isspace():
            q += 1
        if not o.startswith("<unit>", q):
            break
        q += len("<unit>")
        at, tag = _next_reserved(o, q)
        if tag != "</unit>":
            break
        raw_unit = o[q:at]
        q = at + len("</unit>")
        while q < len(o) and o[q].isspace():
            q += 1
        if not o.startswith("<citation>", q):
            break
        q += len("<citation>")
        at, tag = _next_reserved(o, q)
        if tag != "</citation>":
            break
        raw_pairs.append((raw_unit, o[q:at]))
        pos = at + len("</citation>")
        end = pos
    if not raw_pairs:
        return None, (start, "no <unit>/<citation> pair after the <think> block")
    return (raw_reasoning, raw_pairs, end), None


def parse(o: str) -> ParseOutcome:
    """Parse a completion, reporting the longest grammar-valid substring.

    The full decomposition is returned only when the valid span covers the
    whole input; otherwise failures surface through ``diagnostics``.  Ties
    between equal-length spans go to the smallest start offset.
    """
    diagnostics: list[tuple[int, str]] = []
    candidates = []
    at = o.find("<think>")
    if at == -1:
        return ParseOutcome(None, (0, 0), [(0, "no <think> block found")])
    while at != -1:
        block, diag = _parse_block(o, at)
        if block is None:
            diagnostics.append(diag)
        else:
            raw_reasoning, raw_pairs, end = block
            s = at
            while s > 0 and o[s - 1].isspace():
                s -= 1
            e = end
            while e < len(o) and o[e].isspace():
                e += 1
            candidates.append((s, e, raw_reasoning, raw_pairs))
        at = o.find("<think>", at + 1)
    if not candidates:
        return ParseOutcome(None, (0, 0), diagnostics)
    s, e, raw_reasoning, raw_pairs = max(
        candidates, key=lambda c: (c[1] - c[0], -c[0])
    )
    if s == 0 and e == len(o):
        d = Decomposition(
            reasoning=_unpad(raw_reasoning),
            pairs=tuple((_unpad(u), _unpad(c)) for u, c in raw_pairs),
        )
        return ParseOutcome(d, (s, e), [])
    diagnostics.append((s, "valid block does not span the entire input"))
    return ParseOutcome(None, (s, e), diagnostics)


def format_reward(o: str) -> float:
    """Length of the longest grammar-valid substring over the total length."""
    if not o:
        return 0.0
    start, end = parse(o).valid_span
    return (end - start) / len(o)


def format_reward_binary(o: str) -> float:
    """The unshaped variant: 1 when the whole string parses, else 0."""
    return 1.0 if parse(o).decomposition is not None else 0.0
