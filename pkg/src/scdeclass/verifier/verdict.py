"""Verdicts, counterexamples and their structured/human renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..semantics import Value, format_transcript, format_value

SECURE = "SECURE"
SECURE_SAMPLED = "SECURE-SAMPLED"
INSECURE = "INSECURE"
FAULT = "FAULT"

STORE_LEAK = "store-leak"
TRANSCRIPT_LEAK = "transcript-leak"
MANIFEST_VIOLATION = "manifest-violation"
ADEQUACY_VIOLATION = "adequacy-violation"

_RANK = {SECURE: 0, SECURE_SAMPLED: 1, INSECURE: 2, FAULT: 3}
EXIT_CODES = {SECURE: 0, SECURE_SAMPLED: 0, INSECURE: 1, FAULT: 2}


def _enc_state(s: Mapping[str, Value]) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in s.items()}


def _dec_state(s: Mapping[str, Any]) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in s.items()}


@dataclass
class Counterexample:
    """Two initial states whose runs violate ``clause``.

    ``r_low``/``s_low`` are the final low projections of the runs named by
    ``program``; ``extra`` carries clause-specific projections (declassifier
    outputs, reified low variables).
    """

    clause: str
    r_state: dict
    s_state: dict
    r_transcript: tuple
    s_transcript: tuple
    r_low: dict
    s_low: dict
    program: str = "subject"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "clause": self.clause,
            "program": self.program,
            "R": _enc_state(self.r_state),
            "S": _enc_state(self.s_state),
            "R_transcript": format_transcript(self.r_transcript),
            "S_transcript": format_transcript(self.s_transcript),
            "R_low": _enc_state(self.r_low),
            "S_low": _enc_state(self.s_low),
            "extra": {k: _enc_state(v) for k, v in self.extra.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Counterexample":
        return cls(
            clause=d["clause"],
            r_state=_dec_state(d["R"]),
            s_state=_dec_state(d["S"]),
            r_transcript=tuple(int(c) for c in d["R_transcript"]),
            s_transcript=tuple(int(c) for c in d["S_transcript"]),
            r_low=_dec_state(d["R_low"]),
            s_low=_dec_state(d["S_low"]),
            program=d.get("program", "subject"),
            extra={k: _dec_state(v) for k, v in d.get("extra", {}).items()},
        )


@dataclass
class FaultWitness:
    program: str
    state: dict
    kind: str
    message: str

    def to_dict(self) -> dict:
        return {"program": self.program, "state": _enc_state(self.state), "kind": self.kind, "message": self.message}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FaultWitness":
        return cls(d["program"], _dec_state(d["state"]), d["kind"], d["message"])


@dataclass
class Verdict:
    prop: str
    status: str
    mode: str = "exhaustive"
    pairs: int = 0
    runs: int = 0
    runtime: float = 0.0
    samples: int | None = None
    seed: int | None = None
    counterexample: Counterexample | None = None
    fault: FaultWitness | None = None
    components: dict[str, "Verdict"] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def secure(self) -> bool:
        return self.status in (SECURE, SECURE_SAMPLED)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        return {
            "prop": self.prop,
            "status": self.status,
            "mode": self.mode,
            "pairs": self.pairs,
            "runs": self.runs,
            "runtime": self.runtime,
            "samples": self.samples,
            "seed": self.seed,
            "counterexample": self.counterexample.to_dict() if self.counterexample else None,
            "fault": self.fault.to_dict() if self.fault else None,
            "components": {k: v.to_dict() for k, v in self.components.items()},
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Verdict":
        return cls(
            prop=d["prop"],
            status=d["status"],
            mode=d.get("mode", "exhaustive"),
            pairs=d.get("pairs", 0),
            runs=d.get("runs", 0),
            runtime=d.get("runtime", 0.0),
            samples=d.get("samples"),
            seed=d.get("seed"),
            counterexample=Counterexample.from_dict(d["counterexample"]) if d.get("counterexample") else None,
            fault=FaultWitness.from_dict(d["fault"]) if d.get("fault") else None,
            components={k: cls.from_dict(v) for k, v in d.get("components", {}).items()},
            notes=list(d.get("notes", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Verdict":
        return cls.from_dict(json.loads(text))


def worst(*statuses: str) -> str:
    return max(statuses, key=_RANK.__getitem__)


def headline(v: Verdict) -> str:
    if v.status == SECURE:
        return f"SECURE ({v.mode}, {v.pairs} pairs)"
    if v.status == SECURE_SAMPLED:
        return f"SECURE-SAMPLED ({v.samples} samples, seed {v.seed}, {v.pairs} pairs)"
    if v.status == INSECURE:
        clause = v.counterexample.clause if v.counterexample else "component failed"
        return f"INSECURE ({clause})"
    kind = v.fault.kind if v.fault else "error"
    return f"FAULT ({kind})"


def _fmt_state(s: Mapping[str, Value]) -> str:
    return ", ".join(f"{k}={format_value(v)}" for k, v in s.items()) or "(empty)"


def render(v: Verdict, indent: str = "") -> str:
    """Human-readable multi-line report; the first line is the bare headline."""
    if indent:
        lines = [f"{indent}{v.prop}: {headline(v)}"]
    else:
        lines = [headline(v), f"  property: {v.prop}"]
    sub = indent + "  "
    if v.counterexample:
        cx = v.counterexample
        lines.append(f"{sub}counterexample ({cx.program}):")
        lines.append(f"{sub}  R: {_fmt_state(cx.r_state)}")
        lines.append(f"{sub}  S: {_fmt_state(cx.s_state)}")
        lines.append(f"{sub}  transcript R: {format_transcript(cx.r_transcript) or '(empty)'}")
        lines.append(f"{sub}  transcript S: {format_transcript(cx.s_transcript) or '(empty)'}")
        lines.append(f"{sub}  final low R: {_fmt_state(cx.r_low)}")
        lines.append(f"{sub}  final low S: {_fmt_state(cx.s_low)}")
        for name, proj in cx.extra.items():
            lines.append(f"{sub}  {name}: {_fmt_state(proj)}")
    if v.fault:
        f = v.fault
        lines.append(f"{sub}fault in {f.program}: {f.message}")
        lines.append(f"{sub}  state: {_fmt_state(f.state)}")
    for note in v.notes:
        lines.append(f"{sub}note: {note}")
    for comp in v.components.values():
        lines.append(render(comp, sub))
    lines.append(f"{sub}runs: {v.runs}, runtime: {v.runtime:.3f}s")
    return "\n".join(lines)
