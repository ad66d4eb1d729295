"""Propositional knowledge representation: atoms, weighted Horn rules, fact graphs.

Atoms are plain string identifiers. A rule ``p1 & p2 -> q :: W`` carries a
total weight W that is split uniformly across its premises; the per-premise
weights act as cost multipliers during explanation search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

# Total rule weight used when a rule line carries no explicit ":: W" suffix.
# Backchaining through a single rule then costs slightly more than assuming
# its conclusion outright, so chaining pays off only through shared structure.
DEFAULT_RULE_WEIGHT = 1.2

_RESERVED_TOKENS = ("&", "->", "::", "#")


class KBError(ValueError):
    """Malformed atom, rule, or knowledge-base input."""


def check_atom_id(atom: str) -> str:
    """Validate an atom identifier and return it unchanged."""
    if not atom:
        raise KBError("atom id is empty")
    if any(ch.isspace() for ch in atom):
        raise KBError(f"atom id contains whitespace: {atom!r}")
    for tok in _RESERVED_TOKENS:
        if tok in atom:
            raise KBError(f"atom id contains reserved token {tok!r}: {atom!r}")
    return atom


@dataclass(frozen=True)
class Rule:
    """A weighted Horn rule ``premises -> conclusion``.

    ``premise_weights[i]`` is the positive cost multiplier applied when the
    conclusion's charge is passed down to ``premises[i]``. Premise order is
    significant only for weight indexing; rule identity uses set semantics
    (see :meth:`key`).
    """

    premises: tuple[str, ...]
    conclusion: str
    premise_weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.premises:
            raise KBError("rule has no premises")
        if len(self.premise_weights) != len(self.premises):
            raise KBError(
                f"rule {self.conclusion!r}: {len(self.premises)} premises but "
                f"{len(self.premise_weights)} weights"
            )
        for atom in (*self.premises, self.conclusion):
            check_atom_id(atom)
        if self.conclusion in self.premises:
            raise KBError(f"rule conclusion {self.conclusion!r} appears among its premises")
        if any(w <= 0 for w in self.premise_weights):
            raise KBError(f"rule {self.conclusion!r} has a non-positive premise weight")

    @property
    def total_weight(self) -> float:
        return sum(self.premise_weights)

    def key(self) -> tuple[frozenset[str], str]:
        """Identity key: premise set plus conclusion."""
        return frozenset(self.premises), self.conclusion

    def sort_key(self) -> tuple:
        return (self.conclusion, self.premises, self.premise_weights)


def parse_rule(line: str) -> Rule:
    """Parse one rule line such as ``q2 & q4 & q5 -> q1 :: 1.2``.

    The optional ``:: W`` suffix sets the total weight W, split uniformly
    across the premises; without it the total defaults to
    ``DEFAULT_RULE_WEIGHT``.
    """
    text = line.strip()
    weight = DEFAULT_RULE_WEIGHT
    if "::" in text:
        body, _, wtext = text.partition("::")
        try:
            weight = float(wtext.strip())
        except ValueError:
            raise KBError(f"bad weight in rule line: {line!r}") from None
        if weight <= 0:
            raise KBError(f"non-positive weight in rule line: {line!r}")
        text = body.strip()
    if "->" not in text:
        raise KBError(f"missing '->' in rule line: {line!r}")
    lhs, _, rhs = text.partition("->")
    conclusion = rhs.strip()
    if not conclusion:
        raise KBError(f"empty conclusion in rule line: {line!r}")
    premises = [p.strip() for p in lhs.split("&")]
    if not lhs.strip() or any(not p for p in premises):
        raise KBError(f"empty premise in rule line: {line!r}")
    theta = weight / len(premises)
    return Rule(tuple(premises), conclusion, (theta,) * len(premises))


def render_rule(rule: Rule) -> str:
    """Canonical text form; ``parse_rule(render_rule(r))`` returns ``r`` for
    rules with uniform premise weights."""
    lhs = " & ".join(rule.premises)
    return f"{lhs} -> {rule.conclusion} :: {rule.total_weight!r}"


@dataclass(frozen=True)
class KnowledgeBase:
    """A fact set plus a rule set. Immutable; rules are kept sorted."""

    facts: frozenset[str] = frozenset()
    rules: tuple[Rule, ...] = ()

    def with_fact(self, atom: str) -> "KnowledgeBase":
        return KnowledgeBase(self.facts | {atom}, self.rules)


def make_knowledge_base(facts: Iterable[str], rules: Iterable[Rule]) -> KnowledgeBase:
    """Build a KnowledgeBase, deduplicating rules by premise set + conclusion.

    Duplicates are logged and dropped; the survivor is the first occurrence.
    """
    unique: dict[tuple, Rule] = {}
    dropped = 0
    for rule in rules:
        k = rule.key()
        if k in unique:
            dropped += 1
            continue
        unique[k] = rule
    if dropped:
        logger.warning("dropped %d duplicate rule(s)", dropped)
    ordered = tuple(sorted(unique.values(), key=Rule.sort_key))
    return KnowledgeBase(frozenset(check_atom_id(f) for f in facts), ordered)


@dataclass(frozen=True)
class FactGraph:
    """Undirected graph over atoms: each rule links every premise to its
    conclusion. Adjacency lists are sorted; the graph is symmetric with no
    self-loops."""

    nodes: frozenset[str]
    adjacency: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def neighbors(self, atom: str) -> tuple[str, ...]:
        return self.adjacency.get(atom, ())


def build_fact_graph(rules: Iterable[Rule], atoms: Iterable[str]) -> FactGraph:
    """Build the fact graph for a rule set over a fixed atom universe.

    Atoms referenced by no rule become isolated nodes. Rules referring to
    atoms outside the universe are rejected.
    """
    universe = {check_atom_id(a) for a in atoms}
    neigh: dict[str, set[str]] = {a: set() for a in universe}
    for rule in rules:
        for atom in (*rule.premises, rule.conclusion):
            if atom not in universe:
                raise KBError(f"rule references unknown atom {atom!r}")
        for p in rule.premises:
            neigh[p].add(rule.conclusion)
            neigh[rule.conclusion].add(p)
    adjacency = {a: tuple(sorted(ns)) for a, ns in neigh.items()}
    return FactGraph(frozenset(universe), adjacency)


def load_facts_file(path: str | Path) -> list[str]:
    """Read one atom id per line; '#' lines are comments. Preserves order,
    drops duplicates (logged)."""
    seen: dict[str, None] = {}
    dropped = 0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            check_atom_id(line)
        except KBError as exc:
            raise KBError(f"{path}:{lineno}: {exc}") from None
        if line in seen:
            dropped += 1
            continue
        seen[line] = None
    if dropped:
        logger.warning("%s: dropped %d duplicate fact(s)", path, dropped)
    return list(seen)


def load_rules_file(path: str | Path) -> list[Rule]:
    """Read one rule per line; '#' lines are comments. Parse errors name the
    offending line."""
    rules = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rules.append(parse_rule(line))
        except KBError as exc:
            raise KBError(f"{path}:{lineno}: {exc}") from None
    return rules
