from dataclasses import replace

import pytest

from scdeclass.corpus import EXTRA_PROGRAMS, CORE_PROGRAMS, corpus_dir, load_corpus, load_entry
from scdeclass.lang import parse_program, validate_policy

CORPUS = load_corpus()


def test_names():
    assert CORE_PROGRAMS == (
        "modexp1",
        "modexp2",
        "hamming_if",
        "modexp2_instrumented",
        "modexp_manifest",
        "allzeros_nonmanifest",
        "allzeros_manifest",
        "slidingwindow2",
    )
    assert set(CORPUS) == set(CORE_PROGRAMS) | set(EXTRA_PROGRAMS)
    assert {p.stem for p in corpus_dir().glob("*.sc")} == set(CORPUS)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_entry_is_consistent(name):
    e = load_entry(name)
    assert e.program.name == name
    assert e.source.startswith("//")
    if e.parts is None:
        validate_policy(e.program, replace(e.policy, declassifier=None))
    e.domain.check_covers(set(), e.policy)


@pytest.mark.parametrize("name", ["modexp_manifest", "slidingwindow2"])
def test_corrections_are_documented(name):
    header = load_entry(name).source.split("\n\n")[0]
    assert "Corrections" in header


@pytest.mark.parametrize("name", ["modexp_manifest", "slidingwindow2"])
def test_manifest_form_parts(name):
    e = load_entry(name)
    d, q = e.parts
    assert d.name.endswith(".declassifier") and q.name.endswith(".remainder")
    assert not (set(d.var_order) & {"j"})


def test_default_declassifier():
    assert load_entry("modexp1").declassifier.name == "hamming_ternary"
    assert load_entry("modexp2").declassifier.name == "hamming_ternary"


def test_sources_reparse():
    for e in CORPUS.values():
        assert parse_program(e.source, e.name) == e.program
