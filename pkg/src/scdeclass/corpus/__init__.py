"""The bundled example programs with their policies and recommended domains."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..config import JobConfig, load_program, load_split
from ..lang.ast import Program
from ..lang.policy import Policy
from ..verifier.domains import DomainSpec

# the eight programs reproduced from the source listings, in listing order
CORE_PROGRAMS = (
    "modexp1",
    "modexp2",
    "hamming_if",
    "modexp2_instrumented",
    "modexp_manifest",
    "allzeros_nonmanifest",
    "allzeros_manifest",
    "slidingwindow2",
)
EXTRA_PROGRAMS = ("hamming_ternary",)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    source: str
    program: Program
    config: JobConfig
    declassifier: Program | None = None
    parts: tuple[Program, Program] | None = None  # (D, Q) for manifest-form programs

    @property
    def policy(self) -> Policy:
        return self.config.policy(self.declassifier)

    @property
    def domain(self) -> DomainSpec:
        return self.config.domain


def corpus_dir() -> Path:
    return Path(str(resources.files(__package__)))


def load_entry(name: str) -> CorpusEntry:
    base = corpus_dir()
    cfg_path = base / f"{name}.json"
    if not cfg_path.exists():
        raise KeyError(f"no corpus program named {name!r}")
    cfg = JobConfig.load(cfg_path)
    path = cfg.resolve_path(cfg.program)
    decl = load_program(cfg.resolve_path(cfg.declassifier)) if cfg.declassifier else None
    parts = load_split(path, cfg.split) if cfg.split else None
    return CorpusEntry(name, path, path.read_text(), load_program(path), cfg, decl, parts)


def load_corpus() -> dict[str, CorpusEntry]:
    """All bundled programs by name: the eight listing programs, then the extras."""
    return {n: load_entry(n) for n in CORE_PROGRAMS + EXTRA_PROGRAMS}
