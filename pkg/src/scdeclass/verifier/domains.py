"""Finite input domains and the enumeration of initial-state pairs."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Union

from ..lang.policy import Policy
from ..semantics import DEFAULT_BUDGET, Value

EXHAUSTIVE = "exhaustive"
RANDOM = "random"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: Value

    def refs(self) -> set[str]:
        return set()

    def values(self, env: Mapping[str, Value]) -> list[Value]:
        return [self.value]


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    def refs(self) -> set[str]:
        return set()

    def values(self, env: Mapping[str, Value]) -> list[Value]:
        return list(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Bits:
    """All bit arrays of a given length, optionally padded with fixed zeros.

    ``length`` is an integer or the name of an integer variable assigned
    earlier in the enumeration (typically a low constant such as ``m``).
    """

    length: Union[int, str]
    pad_left: int = 0
    pad_right: int = 0

    def refs(self) -> set[str]:
        return {self.length} if isinstance(self.length, str) else set()

    def resolve(self, env: Mapping[str, Value]) -> int:
        if isinstance(self.length, int):
            n = self.length
        else:
            try:
                n = env[self.length]
            except KeyError:
                raise DomainError(f"bit-array length refers to unassigned variable {self.length!r}") from None
            if not isinstance(n, int):
                raise DomainError(f"bit-array length {self.length!r} is not an integer")
        if n < 0:
            raise DomainError(f"negative bit-array length {n}")
        return n

    def values(self, env: Mapping[str, Value]) -> list[Value]:
        n = self.resolve(env)
        left, right = (0,) * self.pad_left, (0,) * self.pad_right
        return [left + bits + right for bits in itertools.product((0, 1), repeat=n)]

    def sample(self, env: Mapping[str, Value], rng: random.Random) -> Value:
        n = self.resolve(env)
        bits = tuple(rng.getrandbits(1) for _ in range(n))
        return (0,) * self.pad_left + bits + (0,) * self.pad_right


@dataclass(frozen=True)
class Values:
    options: tuple

    def __post_init__(self) -> None:
        if not self.options:
            raise DomainError("empty value list")

    def refs(self) -> set[str]:
        return set()

    def values(self, env: Mapping[str, Value]) -> list[Value]:
        return list(self.options)


Domain = Union[Const, Interval, Bits, Values]


def _sample(dom: Domain, env: Mapping[str, Value], rng: random.Random) -> Value:
    if isinstance(dom, Bits):
        return dom.sample(env, rng)
    if isinstance(dom, Interval):
        return rng.randint(dom.lo, dom.hi)
    return rng.choice(dom.values(env))


@dataclass(frozen=True)
class DomainSpec:
    vars: Mapping[str, Domain]
    mode: str = EXHAUSTIVE
    samples: int = 1000
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    pair_cap: int = 10_000_000

    def __post_init__(self) -> None:
        if self.mode not in (EXHAUSTIVE, RANDOM):
            raise DomainError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "vars", dict(self.vars))

    def restrict(self, names: Iterable[str]) -> "DomainSpec":
        """Keep ``names`` and whatever their domains refer to."""
        keep = set(names) & set(self.vars)
        todo = list(keep)
        while todo:
            for r in self.vars[todo.pop()].refs():
                if r in self.vars and r not in keep:
                    keep.add(r)
                    todo.append(r)
        return replace(self, vars={k: v for k, v in self.vars.items() if k in keep})

    def check_covers(self, needed: Iterable[str], pol: Policy | None = None) -> None:
        missing = sorted(set(needed) - set(self.vars))
        if missing:
            raise DomainError(f"no domain given for input variables: {', '.join(missing)}")
        if pol is not None:
            stray = sorted(set(self.vars) - pol.low - pol.high)
            if stray:
                raise DomainError(f"domain variables not classified low or high: {', '.join(stray)}")


def _order(names: Iterable[str], dom: DomainSpec) -> list[str]:
    """Dependency order: a variable comes after every variable its domain refers to."""
    names = list(names)
    done: list[str] = []
    placed: set[str] = set()
    pending = sorted(names)
    while pending:
        progress = False
        for n in list(pending):
            if dom.vars[n].refs() <= placed | (set(dom.vars) - set(names)):
                done.append(n)
                placed.add(n)
                pending.remove(n)
                progress = True
        if not progress:
            raise DomainError(f"cyclic domain references among {', '.join(pending)}")
    return done


def assignments(names: Iterable[str], dom: DomainSpec, env: Mapping[str, Value] | None = None) -> Iterator[dict]:
    """Every assignment to ``names`` (in dependency order), extending ``env``."""
    order = _order(names, dom)
    base = dict(env or {})

    def go(k: int, acc: dict) -> Iterator[dict]:
        if k == len(order):
            yield dict(acc)
            return
        name = order[k]
        for v in dom.vars[name].values(acc):
            acc[name] = v
            yield from go(k + 1, acc)
        del acc[name]

    yield from go(0, base)


def sample_assignment(names: Iterable[str], dom: DomainSpec, rng: random.Random, env: Mapping[str, Value] | None = None) -> dict:
    acc = dict(env or {})
    for name in _order(names, dom):
        acc[name] = _sample(dom.vars[name], acc, rng)
    return acc


def count_assignments(names: Iterable[str], dom: DomainSpec, env: Mapping[str, Value] | None = None) -> int:
    names = list(names)
    if all(not dom.vars[n].refs() & set(names) for n in names):
        total = 1
        for n in names:
            total *= len(dom.vars[n].values(env or {}))
        return total
    return sum(1 for _ in assignments(names, dom, env))


def split_vars(pol: Policy, dom: DomainSpec) -> tuple[list[str], list[str]]:
    low = [v for v in dom.vars if v in pol.low]
    high = [v for v in dom.vars if v not in pol.low]
    for v in low:
        if dom.vars[v].refs() - set(low):
            raise DomainError(f"low variable {v!r} has a domain depending on high variables")
    return low, high


@dataclass
class StateSpace:
    """Initial states plus the ordered pairs to check, as indices into ``states``."""

    states: list[dict]
    groups: list[list[int]] = field(default_factory=list)
    sampled_pairs: list[tuple[int, int]] | None = None

    def pairs(self) -> Iterator[tuple[int, int]]:
        if self.sampled_pairs is not None:
            yield from self.sampled_pairs
            return
        for g in self.groups:
            for a in g:
                for b in g:
                    yield a, b

    def pair_count(self) -> int:
        if self.sampled_pairs is not None:
            return len(self.sampled_pairs)
        return sum(len(g) ** 2 for g in self.groups)

    def reversed(self) -> "StateSpace":
        if self.sampled_pairs is not None:
            return StateSpace(self.states, self.groups, list(reversed(self.sampled_pairs)))
        return StateSpace(self.states, [list(reversed(g)) for g in reversed(self.groups)])


def exhaustive_pair_count(pol: Policy, dom: DomainSpec) -> int:
    low, high = split_vars(pol, dom)
    return sum(count_assignments(high, dom, lo) ** 2 for lo in assignments(low, dom))


def low_equal_space(pol: Policy, dom: DomainSpec) -> StateSpace:
    """States grouped by low assignment; random mode samples pairs instead."""
    low, high = split_vars(pol, dom)
    if dom.mode == EXHAUSTIVE:
        total = exhaustive_pair_count(pol, dom)
        if total > dom.pair_cap:
            raise DomainError(
                f"{total} pairs exceed the pair cap of {dom.pair_cap}; use random mode"
            )
        states: list[dict] = []
        groups: list[list[int]] = []
        for lo in assignments(low, dom):
            g = []
            for s in assignments(high, dom, lo):
                g.append(len(states))
                states.append(s)
            groups.append(g)
        return StateSpace(states, groups)

    rng = random.Random(dom.seed)
    lows = list(assignments(low, dom))
    index: dict[tuple, int] = {}
    states = []
    pairs: list[tuple[int, int]] = []

    def intern(s: dict) -> int:
        key = tuple(sorted(s.items()))
        if key not in index:
            index[key] = len(states)
            states.append(s)
        return index[key]

    for _ in range(dom.samples):
        lo = rng.choice(lows)
        a = intern(sample_assignment(high, dom, rng, lo))
        b = intern(sample_assignment(high, dom, rng, lo))
        pairs.append((a, b))
    return StateSpace(states, sampled_pairs=pairs)


def all_states(dom: DomainSpec) -> list[dict]:
    """Every state of the domain (exhaustive) or ``samples`` seeded random states."""
    names = list(dom.vars)
    if dom.mode == EXHAUSTIVE:
        states = []
        for s in assignments(names, dom):
            states.append(s)
            if len(states) > dom.pair_cap:
                raise DomainError(f"more than {dom.pair_cap} states; use random mode")
        return states
    rng = random.Random(dom.seed)
    seen: dict[tuple, dict] = {}
    for _ in range(dom.samples):
        s = sample_assignment(names, dom, rng)
        seen.setdefault(tuple(sorted(s.items())), s)
    return list(seen.values())


def pairs(pol: Policy, dom: DomainSpec) -> Iterator[tuple[dict, dict]]:
    """Stream of ordered ``(R, S)`` pairs of initial states with equal low parts.

    Exhaustive mode yields every low assignment crossed with every ordered
    pair of high assignments; random mode yields ``dom.samples`` seeded pairs.
    """
    space = low_equal_space(pol, dom)
    for a, b in space.pairs():
        yield dict(space.states[a]), dict(space.states[b])


# -- (de)serialization -------------------------------------------------------


def domain_to_dict(d: Domain) -> dict:
    if isinstance(d, Const):
        return {"const": list(d.value) if isinstance(d.value, tuple) else d.value}
    if isinstance(d, Interval):
        return {"range": [d.lo, d.hi]}
    if isinstance(d, Bits):
        out: dict = {"bits": d.length}
        if d.pad_left:
            out["pad_left"] = d.pad_left
        if d.pad_right:
            out["pad_right"] = d.pad_right
        return out
    if isinstance(d, Values):
        return {"values": [list(v) if isinstance(v, tuple) else v for v in d.options]}
    raise TypeError(d)


def _value(v) -> Value:
    if isinstance(v, list):
        return tuple(int(x) for x in v)
    if isinstance(v, bool) or not isinstance(v, int):
        raise DomainError(f"not an integer or integer list: {v!r}")
    return v


def domain_from_dict(d: Mapping) -> Domain:
    if not isinstance(d, Mapping) or len({"const", "range", "bits", "values"} & set(d)) != 1:
        raise DomainError(f"domain must have exactly one of const/range/bits/values: {d!r}")
    if "const" in d:
        return Const(_value(d["const"]))
    if "range" in d:
        lo, hi = d["range"]
        return Interval(int(lo), int(hi))
    if "bits" in d:
        length = d["bits"]
        if not isinstance(length, (int, str)) or isinstance(length, bool):
            raise DomainError(f"bit-array length must be an integer or variable name: {length!r}")
        return Bits(length, int(d.get("pad_left", 0)), int(d.get("pad_right", 0)))
    return Values(tuple(_value(v) for v in d["values"]))


def parse_domain(text: str) -> Domain:
    """Short command-line form.

    ``5`` constant, ``0..3`` interval, ``1,0,1`` constant array,
    ``bits:m`` / ``bits:4`` bit arrays (``bits:m+1l`` pads one zero on the
    left, ``+1r`` on the right), ``values:1|5|7`` explicit list.
    """
    text = text.strip()
    try:
        if text.startswith("bits:"):
            spec = text[5:]
            pad_left = pad_right = 0
            parts = spec.split("+")
            length: Union[int, str] = int(parts[0]) if parts[0].lstrip("-").isdigit() else parts[0]
            for extra in parts[1:]:
                if extra.endswith("l"):
                    pad_left += int(extra[:-1])
                elif extra.endswith("r"):
                    pad_right += int(extra[:-1])
                else:
                    raise DomainError(f"bad padding {extra!r}")
            return Bits(length, pad_left, pad_right)
        if text.startswith("values:"):
            return Values(tuple(parse_value(v) for v in text[7:].split("|")))
        if ".." in text:
            lo, hi = text.split("..")
            return Interval(int(lo), int(hi))
        return Const(parse_value(text))
    except ValueError as e:
        if isinstance(e, DomainError):
            raise
        raise DomainError(f"cannot parse domain {text!r}") from e


def parse_value(text: str) -> Value:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
        return tuple(int(x) for x in text.split(",") if x.strip())
    if "," in text:
        return tuple(int(x) for x in text.split(",") if x.strip())
    return int(text)


def domain_spec_to_dict(dom: DomainSpec) -> dict:
    return {
        "vars": {k: domain_to_dict(v) for k, v in dom.vars.items()},
        "mode": dom.mode,
        "samples": dom.samples,
        "seed": dom.seed,
        "budget": dom.budget,
        "pair_cap": dom.pair_cap,
    }


def domain_spec_from_dict(d: Mapping) -> DomainSpec:
    return DomainSpec(
        vars={k: domain_from_dict(v) for k, v in d.get("vars", {}).items()},
        mode=d.get("mode", EXHAUSTIVE),
        samples=int(d.get("samples", 1000)),
        seed=int(d.get("seed", 0)),
        budget=int(d.get("budget", DEFAULT_BUDGET)),
        pair_cap=int(d.get("pair_cap", 10_000_000)),
    )
