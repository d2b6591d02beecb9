"""Index reports: per-label multiplicities, diagnostics and verdicts."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .charring import CharacterElement, GroupDesc, WindowedCharacter
from .index import (
    BlockResult,
    IndeterminateRankError,
    RankPolicy,
    analyze_model,
    character_window,
    label_offset,
    multiplicities,
    plane_blocks,
)
from .models import IsotypicBlockOperator, jsonable

SCHEMA_VERSION = "eqindex.report/1"


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": jsonable(self.detail)}


def _index_dict(index):
    if index is None:
        return None
    if isinstance(index, (CharacterElement, WindowedCharacter)):
        kind = "windowed_character" if isinstance(index, WindowedCharacter) else "character"
        return {"kind": kind, **index.to_dict()}
    return {"kind": "integer", "value": int(index)}


def _index_text(index) -> str:
    if index is None:
        return "indeterminate"
    return str(index)


@dataclass
class IndexReport:
    """Result of an index computation or a verification suite."""

    name: str
    model: dict = field(default_factory=dict)
    policy: RankPolicy = field(default_factory=RankPolicy)
    labels: list[dict] = field(default_factory=list)
    index: object = None
    diagnostics: dict = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    seed: int | None = None
    indeterminate: bool = False

    @property
    def passed(self) -> bool:
        return not self.indeterminate and all(v.passed for v in self.verdicts)

    def verdict(self, name: str, passed: bool, **detail) -> Verdict:
        v = Verdict(name, bool(passed), detail)
        self.verdicts.append(v)
        return v

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "model": jsonable(self.model),
            "policy": self.policy.to_dict(),
            "seed": self.seed,
            "index": _index_dict(self.index),
            "indeterminate": self.indeterminate,
            "labels": jsonable(self.labels),
            "diagnostics": jsonable(self.diagnostics),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [f"report: {self.name}"]
        kind = self.model.get("kind")
        if kind:
            lines.append(f"model: {kind}")
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        if self.labels:
            lines.append(f"{'label':>8} {'ker':>5} {'coker':>6} {'index':>6} {'gap ratio':>12}  status")
            for row in self.labels:
                gap = row.get("gap_ratio", math.inf)
                status = "ok" if row.get("confident", True) else "INDETERMINATE"
                label = "-" if row.get("label") is None else row["label"]
                lines.append(
                    f"{label!s:>8} {row.get('m_plus', '-')!s:>5} {row.get('m_minus', '-')!s:>6} "
                    f"{row.get('index', '-')!s:>6} {gap:>12.4g}  {status}"
                )
        if self.index is not None or self.indeterminate:
            lines.append(f"index: {_index_text(self.index)}")
        for key in sorted(self.diagnostics):
            lines.append(f"{key}: {jsonable(self.diagnostics[key])}")
        for v in self.verdicts:
            lines.append(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}")
        if self.indeterminate:
            lines.append("result: INDETERMINATE")
        elif self.verdicts:
            lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def label_rows(results: list[BlockResult], equivariant: bool) -> list[dict]:
    """Per-label multiplicities ``m+`` (kernel) and ``m-`` (cokernel).

    A label's row is confident only if every block touching it is.
    """
    plus, minus = multiplicities(results)
    if not equivariant:
        return [
            {
                "label": None,
                "m_plus": plus.get(0, 0),
                "m_minus": minus.get(0, 0),
                "index": plus.get(0, 0) - minus.get(0, 0),
                "gap_ratio": min((r.gap_ratio for r in results), default=math.inf),
                "confident": all(r.confident for r in results),
            }
        ]
    rows = []
    for k in sorted(set(plus) | set(minus)):
        touching = [r for r in results if r.domain_label == k or r.codomain_label == k]
        rows.append(
            {
                "label": k,
                "m_plus": plus.get(k, 0),
                "m_minus": minus.get(k, 0),
                "index": plus.get(k, 0) - minus.get(k, 0),
                "gap_ratio": min((r.gap_ratio for r in touching), default=math.inf),
                "confident": all(r.confident for r in touching),
            }
        )
    return rows


def model_report(model: IsotypicBlockOperator, policy: RankPolicy | None = None, name: str = "index") -> IndexReport:
    """Index report of one model; indeterminate labels are flagged, never coerced."""
    policy = policy or RankPolicy()
    results = analyze_model(model, policy)
    rows = label_rows(results, model.equivariant)
    rep = IndexReport(name, dict(model.metadata), policy, rows)
    rep.diagnostics["shape"] = list(model.shape)
    rep.diagnostics["min_gap_ratio"] = min((r.gap_ratio for r in results), default=math.inf)
    rep.indeterminate = not all(r.confident for r in results)
    if rep.indeterminate:
        return rep
    if not model.equivariant:
        rep.index = rows[0]["index"]
        return rep
    entries = {row["label"]: row["index"] for row in rows}
    if model.window is None:
        rep.index = CharacterElement.from_dict(model.group, entries)
    else:
        lo, hi = character_window(model.window, model.label_offset)
        rep.index = WindowedCharacter.from_dict(model.group, lo, hi, {k: v for k, v in entries.items() if lo <= k <= hi})
    return rep


def plane_report(
    window: tuple[int, int],
    n_r: int = 400,
    R: float = 8.0,
    f_choice: str = "one",
    lift: str = "spinor",
    policy: RankPolicy | None = None,
) -> IndexReport:
    """Windowed index report of the deformed plane operator."""
    policy = policy or RankPolicy()
    lo, hi = int(window[0]), int(window[1])
    results = plane_blocks((lo, hi), n_r, R, f_choice, lift, policy)
    offset = label_offset(lift)
    meta = {"kind": "plane_weight", "n_r": n_r, "R": R, "f_choice": f_choice, "lift": lift, "label_offset": offset}
    rep = IndexReport("deformed_plane_index", meta, policy, label_rows(results, True))
    rep.diagnostics["window"] = [lo, hi]
    rep.diagnostics["min_gap_ratio"] = min(r.gap_ratio for r in results)
    rep.indeterminate = not all(r.confident for r in results)
    if not rep.indeterminate:
        w = character_window((lo, hi), offset)
        entries = {row["label"]: row["index"] for row in rep.labels if w[0] <= row["label"] <= w[1]}
        rep.index = WindowedCharacter.from_dict(GroupDesc.circle(), w[0], w[1], entries)
    return rep


def require(report: IndexReport) -> IndexReport:
    if report.indeterminate:
        raise IndeterminateRankError(f"{report.name}: indeterminate rank decision")
    return report
