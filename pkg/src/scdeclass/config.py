"""Job configuration files: which programs, which policy, which domains."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from .lang.ast import Program
from .lang.parser import parse_program
from .lang.policy import Policy, make_policy
from .verifier.domains import DomainSpec, domain_spec_from_dict, domain_spec_to_dict

PROPS = ("pc", "declass", "manifest", "manifest-form", "adequacy")
FORMATS = ("human", "structured")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class JobConfig:
    """Everything needed to run one check.

    Program paths are kept as written and resolved against ``base_dir``
    (the directory of the config file), which is not serialized.
    """

    program: str
    declassifier: str | None = None
    split: str | None = None
    low: tuple[str, ...] = ()
    high: tuple[str, ...] = ()
    domain: DomainSpec = field(default_factory=lambda: DomainSpec({}))
    prop: str | None = None
    format: str = "human"
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.prop is not None and self.prop not in PROPS:
            raise ConfigError(f"unknown property {self.prop!r}; expected one of {', '.join(PROPS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        object.__setattr__(self, "low", tuple(self.low))
        object.__setattr__(self, "high", tuple(self.high))

    def to_dict(self) -> dict:
        out: dict = {"program": self.program}
        if self.declassifier is not None:
            out["declassifier"] = self.declassifier
        if self.split is not None:
            out["split"] = self.split
        out["low"] = list(self.low)
        out["high"] = list(self.high)
        out["domain"] = domain_spec_to_dict(self.domain)
        if self.prop is not None:
            out["prop"] = self.prop
        out["format"] = self.format
        return out

    @classmethod
    def from_dict(cls, d: Mapping, base_dir: Path | None = None) -> "JobConfig":
        unknown = set(d) - {"program", "declassifier", "split", "low", "high", "domain", "prop", "format"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "program" not in d:
            raise ConfigError("config needs a 'program' entry")
        try:
            domain = domain_spec_from_dict(d.get("domain", {}))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad domain: {e}") from e
        return cls(
            program=d["program"],
            declassifier=d.get("declassifier"),
            split=d.get("split"),
            low=tuple(d.get("low", ())),
            high=tuple(d.get("high", ())),
            domain=domain,
            prop=d.get("prop"),
            format=d.get("format", "human"),
            base_dir=base_dir,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str, base_dir: Path | None = None) -> "JobConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data, base_dir)

    @classmethod
    def load(cls, path: str | Path) -> "JobConfig":
        path = Path(path)
        return cls.from_json(path.read_text(), base_dir=path.parent)

    def resolve_path(self, p: str) -> Path:
        q = Path(p)
        if not q.is_absolute() and self.base_dir is not None:
            q = self.base_dir / q
        return q

    def policy(self, declassifier: Program | None = None) -> Policy:
        return make_policy(self.low, self.high, declassifier)

    def with_overrides(self, **kw) -> "JobConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def split_source(text: str, marker: str) -> tuple[str, str]:
    """Cut ``text`` at the first line containing ``marker``.

    The second part is padded with blank lines so parse errors keep the
    line numbers of the original file.
    """
    lines = text.splitlines(keepends=True)
    for n, line in enumerate(lines):
        if marker in line:
            return "".join(lines[:n]), "\n" * (n + 1) + "".join(lines[n + 1:])
    raise ConfigError(f"split marker {marker!r} not found")


def load_program(path: str | Path, *, allow_reserved: bool = False) -> Program:
    path = Path(path)
    return parse_program(path.read_text(), name=path.stem, allow_reserved=allow_reserved)


def load_split(path: str | Path, marker: str, *, allow_reserved: bool = False) -> tuple[Program, Program]:
    path = Path(path)
    d_text, q_text = split_source(path.read_text(), marker)
    d = parse_program(d_text, name=f"{path.stem}.declassifier", allow_reserved=allow_reserved)
    q = parse_program(q_text, name=f"{path.stem}.remainder", allow_reserved=allow_reserved)
    return d, q
