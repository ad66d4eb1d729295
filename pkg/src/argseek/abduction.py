"""Minimum-cost abductive explanation engine.

An explanation labels every atom it needs either ASSUME or with a rule whose
conclusion it is. Needs start at the observations and propagate through the
premises of used rules. Charges flow downward: an observation is worth
``obs_cost``; a rule passes ``charge(conclusion) * premise_weight`` down to
each premise; an atom required from several places pays only its minimum
charge, once. The cost of an explanation is the sum of charges over the
ASSUME-labeled atoms, and ``explain`` minimizes it by branch and bound.

``brute_force_explain`` is a deliberately separate exhaustive implementation
kept as an oracle for the search; the two must agree exactly on any instance
small enough for enumeration.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .kb import KnowledgeBase, Rule, render_rule

logger = logging.getLogger(__name__)

# Relative window within which two labeling costs count as a tie; ties are
# broken by (fewer assumptions, lexicographically smallest assumption set).
_TIE_REL = 1e-9


class AbductionError(RuntimeError):
    """Raised when an explanation instance exceeds configured resource caps."""


@dataclass(frozen=True)
class AbductionConfig:
    """Cost-model and search-bound settings.

    obs_cost: charge carried by each observed atom before any rule applies.
    max_depth: cap on rule-chaining depth below any observation; bounds the
        search on recursive rule sets.
    max_universe: cap on the number of distinct atoms an instance may touch.
    """

    obs_cost: float = 10.0
    max_depth: int = 6
    max_universe: int = 64

    def __post_init__(self) -> None:
        if self.obs_cost <= 0:
            raise ValueError("obs_cost must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass(frozen=True)
class ProofStructure:
    """A complete labeling with its propagated charges.

    ``labels[atom]`` is None for ASSUME or the Rule justifying the atom.
    ``total_cost`` is the sum of charges over ASSUME-labeled atoms.
    """

    labels: Mapping[str, Rule | None]
    charges: Mapping[str, float]
    total_cost: float

    @property
    def assumptions(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, r in self.labels.items() if r is None))

    @property
    def used_rules(self) -> tuple[Rule, ...]:
        seen = {r.key(): r for r in self.labels.values() if r is not None}
        return tuple(sorted(seen.values(), key=Rule.sort_key))

    def listing(self) -> str:
        """Tab-separated export: atom, label, charge (one line per atom)."""
        lines = []
        for atom in sorted(self.labels):
            rule = self.labels[atom]
            label = "ASSUME" if rule is None else render_rule(rule)
            lines.append(f"{atom}\t{label}\t{self.charges[atom]!r}")
        return "\n".join(lines)


@dataclass(frozen=True)
class RationalityResult:
    """Joint-explanation savings for a claim against a fact set."""

    e_alpha: float
    e_k: float
    e_joint: float
    r: float
    r_norm: float


@dataclass(frozen=True)
class Argument:
    """A claim with the support extracted from its optimal joint proof."""

    claim: str
    support_facts: frozenset[str]
    support_rules: tuple[Rule, ...]
    assumptions: frozenset[str]
    rationality_raw: float
    rationality_norm: float


def _tie_eps(cost: float) -> float:
    return _TIE_REL * max(1.0, abs(cost))


def _labeling_rank(labels: Mapping[str, Rule | None]) -> tuple:
    asm = tuple(sorted(a for a, r in labels.items() if r is None))
    return (len(asm), asm)


def _reachable_universe(
    observations: Sequence[str], rules: Sequence[Rule], max_depth: int
) -> tuple[dict[str, int], dict[str, list[Rule]]]:
    """Atoms reachable by backchaining within max_depth, with min distances,
    plus the usable rules grouped by conclusion."""
    by_conclusion: dict[str, list[Rule]] = {}
    for rule in sorted(rules, key=Rule.sort_key):
        by_conclusion.setdefault(rule.conclusion, []).append(rule)

    dist = {atom: 0 for atom in observations}
    frontier = sorted(dist)
    depth = 0
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for atom in frontier:
            for rule in by_conclusion.get(atom, ()):
                for p in rule.premises:
                    if p not in dist:
                        dist[p] = depth
                        nxt.append(p)
        frontier = sorted(nxt)

    usable: dict[str, list[Rule]] = {}
    for atom in dist:
        kept = [
            r
            for r in by_conclusion.get(atom, ())
            if all(p in dist for p in r.premises)
        ]
        if kept:
            usable[atom] = kept
    return dist, usable


def _charge_floors(
    universe: Iterable[str],
    observations: frozenset[str],
    by_conclusion: Mapping[str, list[Rule]],
    config: AbductionConfig,
) -> dict[str, float]:
    """Lower bound on the charge any atom can carry in a valid labeling:
    the cheapest weight product over need-paths of length <= max_depth."""
    floor = {a: (config.obs_cost if a in observations else math.inf) for a in universe}
    for _ in range(config.max_depth):
        changed = False
        for atom, rules in by_conclusion.items():
            base = floor[atom]
            if base == math.inf:
                continue
            for rule in rules:
                for p, theta in zip(rule.premises, rule.premise_weights):
                    cand = base * theta
                    if cand < floor[p]:
                        floor[p] = cand
                        changed = True
        if not changed:
            break
    return floor


def _components(
    universe: Iterable[str], by_conclusion: Mapping[str, list[Rule]]
) -> list[list[str]]:
    """Connected components of the universe under rule co-occurrence."""
    parent = {a: a for a in universe}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for rules in by_conclusion.values():
        for rule in rules:
            for p in rule.premises:
                union(rule.conclusion, p)
    groups: dict[str, list[str]] = {}
    for a in parent:
        groups.setdefault(find(a), []).append(a)
    comps = [sorted(g) for g in groups.values()]
    comps.sort(key=lambda g: g[0])
    return comps


def _final_charges(
    labels: dict[str, Rule | None],
    contribs: Mapping[str, list[tuple[str, float]]],
    observations: frozenset[str],
    obs_cost: float,
) -> tuple[dict[str, float], float]:
    """Exact charge propagation over a complete labeling (topological pass)."""
    indeg = {a: len(contribs.get(a, ())) for a in labels}
    ready = sorted(a for a, d in indeg.items() if d == 0)
    charges: dict[str, float] = {}
    order: list[str] = []
    while ready:
        atom = ready.pop()
        order.append(atom)
        c = obs_cost if atom in observations else math.inf
        for parent, theta in contribs.get(atom, ()):
            c = min(c, charges[parent] * theta)
        charges[atom] = c
        rule = labels[atom]
        if rule is not None:
            for p in rule.premises:
                indeg[p] -= 1
                if indeg[p] == 0:
                    ready.append(p)
        ready.sort()
    total = 0.0
    for atom in sorted(labels):
        if labels[atom] is None:
            total += charges[atom]
    return charges, total


class _BranchAndBound:
    """Labeling search over one connected component.

    Branches over the justification of one pending atom at a time, ASSUME
    first. The lower bound is the sum of charge floors over atoms already
    assumed; charges are finalized only on complete labelings because a later
    rule choice can still lower the charge of an atom assumed earlier.
    """

    def __init__(
        self,
        observations: frozenset[str],
        by_conclusion: Mapping[str, list[Rule]],
        floors: Mapping[str, float],
        config: AbductionConfig,
    ):
        self.obs = observations
        self.by_conclusion = by_conclusion
        self.floors = floors
        self.config = config

        self.labels: dict[str, Rule | None] = {}
        self.pending: set[str] = set(observations)
        self.contribs: dict[str, list[tuple[str, float]]] = {}
        self.children: dict[str, tuple[str, ...]] = {}
        self.depth: dict[str, int] = {a: 0 for a in observations}
        self.lb = 0.0

        # All-assume labeling is always valid; seed the incumbent with it.
        self.best_labels = {a: None for a in observations}
        self.best_contribs: dict[str, list[tuple[str, float]]] = {}
        self.best_cost = config.obs_cost * len(observations)
        self.best_rank = _labeling_rank(self.best_labels)
        self.prune_cost = self.best_cost

    def solve(self, cost_hint: float | None = None) -> tuple[dict, dict, float]:
        if cost_hint is not None and cost_hint < self.prune_cost:
            self.prune_cost = cost_hint
        self._dfs()
        charges, total = _final_charges(
            self.best_labels, self.best_contribs, self.obs, self.config.obs_cost
        )
        return self.best_labels, charges, total

    # -- search -----------------------------------------------------------

    def _dfs(self) -> None:
        if self.lb > self.prune_cost + _tie_eps(self.prune_cost):
            return
        if not self.pending:
            self._complete()
            return
        atom = min(self.pending)
        self._try_assume(atom)
        for rule in self.by_conclusion.get(atom, ()):
            self._try_rule(atom, rule)

    def _complete(self) -> None:
        charges, total = _final_charges(
            self.labels, self.contribs, self.obs, self.config.obs_cost
        )
        eps = _tie_eps(min(total, self.best_cost))
        if total < self.best_cost - eps:
            better = True
        elif total <= self.best_cost + eps:
            better = _labeling_rank(self.labels) < self.best_rank
        else:
            better = False
        if better:
            self.best_labels = dict(self.labels)
            self.best_contribs = {a: list(v) for a, v in self.contribs.items()}
            self.best_cost = total
            self.best_rank = _labeling_rank(self.labels)
            if total < self.prune_cost:
                self.prune_cost = total

    def _try_assume(self, atom: str) -> None:
        self.labels[atom] = None
        self.pending.discard(atom)
        self.lb += self.floors[atom]
        self._dfs()
        self.lb -= self.floors[atom]
        self.pending.add(atom)
        del self.labels[atom]

    def _try_rule(self, atom: str, rule: Rule) -> None:
        # Using this rule must not close a cycle of justifications.
        for p in rule.premises:
            if self._reaches(p, atom):
                return
        undo_depth: list[tuple[str, int | None]] = []
        new_pending: list[str] = []
        applied: list[str] = []
        ok = True
        for p, theta in zip(rule.premises, rule.premise_weights):
            self.contribs.setdefault(p, []).append((atom, theta))
            applied.append(p)
            if p not in self.labels and p not in self.pending:
                self.pending.add(p)
                new_pending.append(p)
            if not self._raise_depth(p, self.depth[atom] + 1, undo_depth):
                ok = False
                break
        if ok:
            self.labels[atom] = rule
            self.pending.discard(atom)
            self.children[atom] = rule.premises
            self._dfs()
            del self.children[atom]
            self.pending.add(atom)
            del self.labels[atom]
        # Rollback in reverse order of application.
        for a, old in reversed(undo_depth):
            if old is None:
                del self.depth[a]
            else:
                self.depth[a] = old
        for p in new_pending:
            self.pending.discard(p)
        for p in reversed(applied):
            lst = self.contribs[p]
            lst.pop()
            if not lst:
                del self.contribs[p]

    def _reaches(self, src: str, target: str) -> bool:
        if src == target:
            return True
        stack = [src]
        seen = {src}
        while stack:
            for nxt in self.children.get(stack.pop(), ()):
                if nxt == target:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def _raise_depth(self, atom: str, new_depth: int, undo: list) -> bool:
        """Propagate a longest-path increase; False if max_depth is exceeded."""
        cur = self.depth.get(atom)
        if cur is not None and cur >= new_depth:
            return True
        undo.append((atom, cur))
        self.depth[atom] = new_depth
        if new_depth > self.config.max_depth:
            return False
        for child in self.children.get(atom, ()):
            if not self._raise_depth(child, new_depth + 1, undo):
                return False
        return True


def explain(
    observations: Iterable[str],
    rules: Iterable[Rule],
    config: AbductionConfig | None = None,
    cost_hint: float | None = None,
) -> ProofStructure:
    """Minimum-cost explanation of the observation set.

    ``cost_hint``, when given, must be the cost of some valid labeling; it
    seeds the incumbent and only affects search speed, never the result.
    """
    config = config or AbductionConfig()
    obs = frozenset(observations)
    if not obs:
        return ProofStructure({}, {}, 0.0)
    rule_list = list(rules)
    dist, by_conclusion = _reachable_universe(sorted(obs), rule_list, config.max_depth)
    if len(dist) > config.max_universe:
        raise AbductionError(
            f"instance touches {len(dist)} atoms, above the cap of "
            f"{config.max_universe}"
        )
    floors = _charge_floors(dist, obs, by_conclusion, config)

    labels: dict[str, Rule | None] = {}
    charges: dict[str, float] = {}
    total = 0.0
    for comp in _components(dist, by_conclusion):
        comp_obs = obs.intersection(comp)
        if not comp_obs:
            continue
        comp_set = set(comp)
        comp_rules = {a: rs for a, rs in by_conclusion.items() if a in comp_set}
        search = _BranchAndBound(comp_obs, comp_rules, floors, config)
        hint = cost_hint if len(comp_obs) == len(obs) else None
        comp_labels, comp_charges, comp_total = search.solve(hint)
        labels.update(comp_labels)
        charges.update(comp_charges)
        total += comp_total
    return ProofStructure(labels, charges, total)


def brute_force_explain(
    observations: Iterable[str],
    rules: Iterable[Rule],
    config: AbductionConfig | None = None,
    universe_cap: int = 14,
) -> ProofStructure:
    """Exhaustive oracle: enumerate every labeling, keep the cheapest.

    Written independently of :func:`explain` (full enumeration, relaxation
    fixpoints instead of incremental bookkeeping) so that agreement between
    the two is meaningful evidence of correctness. Refuses instances whose
    reachable universe exceeds ``universe_cap`` atoms.
    """
    config = config or AbductionConfig()
    obs = frozenset(observations)
    if not obs:
        return ProofStructure({}, {}, 0.0)

    # Reachable atoms by iterated premise expansion, depth-limited.
    reachable = set(obs)
    frontier = set(obs)
    all_rules = sorted(rules, key=Rule.sort_key)
    for _ in range(config.max_depth):
        nxt = set()
        for rule in all_rules:
            if rule.conclusion in frontier:
                nxt.update(p for p in rule.premises if p not in reachable)
        if not nxt:
            break
        reachable |= nxt
        frontier = nxt
    if len(reachable) > universe_cap:
        raise AbductionError(
            f"oracle refuses {len(reachable)}-atom universe (cap {universe_cap})"
        )

    atoms = sorted(reachable)
    options: list[list[Rule | None]] = []
    for atom in atoms:
        opts: list[Rule | None] = [None]
        opts.extend(
            r
            for r in all_rules
            if r.conclusion == atom and all(p in reachable for p in r.premises)
        )
        options.append(opts)

    best: tuple[float, tuple, dict, dict] | None = None
    for assignment in itertools.product(*options):
        choice = dict(zip(atoms, assignment))
        needed = _bf_needed(obs, choice)
        labels = {a: choice[a] for a in needed}
        depths = _bf_depths(labels, obs)
        if depths is None or max(depths.values()) > config.max_depth:
            continue
        charges = _bf_charges(labels, obs, config.obs_cost)
        total = 0.0
        for atom in sorted(labels):
            if labels[atom] is None:
                total += charges[atom]
        rank = _labeling_rank(labels)
        if best is None:
            best = (total, rank, labels, charges)
            continue
        eps = _tie_eps(min(total, best[0]))
        if total < best[0] - eps or (total <= best[0] + eps and rank < best[1]):
            best = (total, rank, labels, charges)
    assert best is not None  # the all-assume assignment is always valid
    return ProofStructure(best[2], best[3], best[0])


def _bf_needed(obs: frozenset[str], choice: Mapping[str, Rule | None]) -> set[str]:
    needed = set(obs)
    stack = list(obs)
    while stack:
        rule = choice[stack.pop()]
        if rule is not None:
            for p in rule.premises:
                if p not in needed:
                    needed.add(p)
                    stack.append(p)
    return needed


def _bf_depths(
    labels: Mapping[str, Rule | None], obs: frozenset[str]
) -> dict[str, int] | None:
    """Longest need-path from any observation; None when justifications cycle."""
    depth = {a: (0 if a in obs else -1) for a in labels}
    for round_no in range(len(labels) + 1):
        changed = False
        for atom, rule in labels.items():
            if rule is None or depth[atom] < 0:
                continue
            for p in rule.premises:
                if depth[atom] + 1 > depth[p]:
                    depth[p] = depth[atom] + 1
                    changed = True
        if not changed:
            return depth
    return None  # still relaxing after |labels| rounds: cycle


def _bf_charges(
    labels: Mapping[str, Rule | None], obs: frozenset[str], obs_cost: float
) -> dict[str, float]:
    charge = {a: math.inf for a in labels}
    for a in obs:
        charge[a] = obs_cost
    changed = True
    while changed:
        changed = False
        for atom, rule in labels.items():
            if rule is None or charge[atom] == math.inf:
                continue
            for p, theta in zip(rule.premises, rule.premise_weights):
                cand = charge[atom] * theta
                if cand < charge[p]:
                    charge[p] = cand
                    changed = True
    return charge


def rationality(
    kq: KnowledgeBase,
    claim: str,
    config: AbductionConfig | None = None,
) -> RationalityResult:
    """Savings from explaining the claim jointly with the collected facts.

    Returns the three explanation costs, the raw saving r, and its
    normalized form r_norm = r / (e_alpha + e_k), zero when that sum is zero.
    """
    config = config or AbductionConfig()
    e_alpha = explain({claim}, kq.rules, config).total_cost
    e_k = explain(kq.facts, kq.rules, config).total_cost
    e_joint = explain(set(kq.facts) | {claim}, kq.rules, config).total_cost
    return _rationality_from_costs(e_alpha, e_k, e_joint)


def _rationality_from_costs(
    e_alpha: float, e_k: float, e_joint: float
) -> RationalityResult:
    r = e_alpha + e_k - e_joint
    denom = e_alpha + e_k
    r_norm = r / denom if denom > 0 else 0.0
    if r < -1e-9:
        logger.warning(
            "negative rationality %r (e_alpha=%r e_k=%r e_joint=%r)",
            r,
            e_alpha,
            e_k,
            e_joint,
        )
    return RationalityResult(e_alpha, e_k, e_joint, r, r_norm)


def construct_argument(
    kq: KnowledgeBase,
    claim: str,
    config: AbductionConfig | None = None,
) -> Argument:
    """Extract the claim's argument from the optimal joint proof.

    The support is the connected component of the joint proof containing the
    claim, where a used rule connects its conclusion with each premise.
    Assumptions are the component's ASSUME-labeled atoms that are neither
    collected facts nor the claim itself.
    """
    config = config or AbductionConfig()
    joint = explain(set(kq.facts) | {claim}, kq.rules, config)
    rat = rationality(kq, claim, config)

    adj: dict[str, set[str]] = {a: set() for a in joint.labels}
    for atom, rule in joint.labels.items():
        if rule is None:
            continue
        for p in rule.premises:
            adj[atom].add(p)
            adj[p].add(atom)
    component = {claim}
    stack = [claim]
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt not in component:
                component.add(nxt)
                stack.append(nxt)

    support_facts = frozenset(component & kq.facts)
    support_rules = tuple(
        sorted(
            {
                r.key(): r
                for a, r in joint.labels.items()
                if r is not None and a in component
            }.values(),
            key=Rule.sort_key,
        )
    )
    assumptions = frozenset(
        a
        for a in component
        if joint.labels.get(a) is None and a not in kq.facts and a != claim
    )
    return Argument(
        claim=claim,
        support_facts=support_facts,
        support_rules=support_rules,
        assumptions=assumptions,
        rationality_raw=rat.r,
        rationality_norm=rat.r_norm,
    )


class ExplainCache:
    """Memoizes explanation costs for a fixed rule set and config.

    Dialogue episodes recompute rationality on slowly growing fact sets, so
    keying on the frozen observation set gives high hit rates. Also seeds
    each joint query with the one-more-assumption bound from the previous
    fact set when available.
    """

    def __init__(self, rules: Sequence[Rule], config: AbductionConfig):
        self.rules = tuple(rules)
        self.config = config
        self._memo: dict[frozenset[str], ProofStructure] = {}

    def explain(self, observations: Iterable[str]) -> ProofStructure:
        key = frozenset(observations)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        hint = None
        # Any superset labeling of (key minus one atom) extends by one
        # assumption, so a cached subset cost + obs_cost is a sound hint.
        for atom in key:
            sub = self._memo.get(key - {atom})
            if sub is not None:
                cand = sub.total_cost + self.config.obs_cost
                if hint is None or cand < hint:
                    hint = cand
        proof = explain(key, self.rules, self.config, cost_hint=hint)
        self._memo[key] = proof
        return proof

    def rationality(self, facts: Iterable[str], claim: str) -> RationalityResult:
        fact_set = frozenset(facts)
        e_alpha = self.explain({claim}).total_cost
        e_k = self.explain(fact_set).total_cost
        e_joint = self.explain(fact_set | {claim}).total_cost
        return _rationality_from_costs(e_alpha, e_k, e_joint)
