"""Dataset loading, saving, and synthetic generation.

A dataset is a directory: ``facts.txt`` (one atom per line), ``rules.txt``,
``ka/NNNN.txt`` (one answerer knowledge set per file), ``questions.tsv``
(surface text per atom), and ``manifest.txt`` with ``key = value`` lines
tying them together with the episode constants.

The synthetic generator reproduces corpus *shape*, not content. It builds a
claim with a small derivation backbone whose rule weights make explanation
costs drop sharply once two independent backbone facts are known, then pads
the graph with inert distractor rules (premise weight above 1, so using
them never lowers any explanation cost). Distractors attach near the claim
and chain among themselves, which is what separates the questioning
strategies: breadth-first wastes early asks on claim-adjacent distractors,
depth-first wanders down distractor chains and collects redundant
same-branch facts, while an informed policy asks backbone facts only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .abduction import AbductionConfig
from .env import Scenario, make_scenario
from .kb import Rule, load_facts_file, load_rules_file, parse_rule, render_rule

logger = logging.getLogger(__name__)

# Per-premise weight for distractor rules. Any value above 1 keeps them
# inert: backchaining through them always costs more than assuming, and
# their premise contributions can never undercut an existing charge.
_DISTRACTOR_THETA = 1.2


@dataclass(frozen=True)
class GenParams:
    """Shape parameters for synthetic generation.

    The backbone is a ``backbone_branching``-ary tree of ``backbone_depth``
    rule levels under the claim; ``backbone_weights[i]`` is the total rule
    weight at level i. Remaining atoms and rules become distractors, of
    which ``claim_adjacent`` rules take the claim itself as a premise.
    """

    n_facts: int = 122
    n_rules: int = 72
    max_premises: int = 3
    ka_count: int = 550
    ka_size: int = 20
    train_count: int = 500
    seed: int = 0
    backbone_branching: int = 2
    backbone_depth: int = 3
    backbone_weights: tuple[float, ...] = (0.8, 0.9, 0.9)
    claim_adjacent: int = 3

    def __post_init__(self) -> None:
        if self.ka_count < 1:
            raise ValueError("ka_count must be >= 1")
        if not 0 < self.ka_size <= self.n_facts - 1:
            raise ValueError("need 0 < ka_size <= n_facts - 1")
        if not 0 < self.train_count < self.ka_count:
            raise ValueError("need 0 < train_count < ka_count")
        if self.max_premises < 2:
            raise ValueError("max_premises must be >= 2")
        if len(self.backbone_weights) != self.backbone_depth:
            raise ValueError("backbone_weights must have one entry per level")
        if self.n_facts <= self.backbone_atoms():
            raise ValueError("n_facts too small for the backbone tree")
        if self.n_rules <= self.backbone_rules():
            raise ValueError("n_rules too small for the backbone tree")
        spare = (self.n_facts - self.backbone_atoms()) - (
            self.n_rules - self.backbone_rules()
        )
        if spare < 0:
            raise ValueError("more distractor rules than atoms to conclude")

    def backbone_atoms(self) -> int:
        b = self.backbone_branching
        return sum(b**i for i in range(self.backbone_depth + 1))

    def backbone_rules(self) -> int:
        b = self.backbone_branching
        return sum(b**i for i in range(self.backbone_depth))


@dataclass
class Dataset:
    """A fully loaded corpus plus the episode constants from its manifest."""

    universe: tuple[str, ...]
    rules: tuple[Rule, ...]
    claim: str
    kas: tuple[frozenset[str], ...]
    train_count: int
    theta_r: float
    t_limit: int
    r_goal: float
    r_time: float
    config: AbductionConfig
    questions: dict[str, tuple[str, str]] = field(default_factory=dict)

    @property
    def scenario(self) -> Scenario:
        return make_scenario(
            claim=self.claim,
            atom_universe=self.universe,
            rules=self.rules,
            theta_r=self.theta_r,
            t_limit=self.t_limit,
            r_goal=self.r_goal,
            r_time=self.r_time,
            config=self.config,
        )

    @property
    def train_kas(self) -> tuple[frozenset[str], ...]:
        return self.kas[: self.train_count]

    @property
    def test_kas(self) -> tuple[frozenset[str], ...]:
        return self.kas[self.train_count :]


def _parse_manifest(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Load and validate a dataset directory from its manifest."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    entries = _parse_manifest(manifest_path)

    required = ["facts_file", "rules_file", "ka_dir", "claim", "train_count"]
    missing = [k for k in required if k not in entries]
    if missing:
        raise ValueError(f"{manifest_path}: missing manifest keys {missing}")

    universe = load_facts_file(base / entries["facts_file"])
    rules = load_rules_file(base / entries["rules_file"])
    claim = entries["claim"]
    if claim not in universe:
        raise ValueError(f"claim {claim!r} is not in the facts file")

    ka_dir = base / entries["ka_dir"]
    if not ka_dir.is_dir():
        raise FileNotFoundError(f"K_A directory not found: {ka_dir}")
    atom_set = set(universe)
    kas = []
    for ka_file in sorted(ka_dir.glob("*.txt")):
        atoms = load_facts_file(ka_file)
        bad = [a for a in atoms if a not in atom_set]
        if bad:
            raise ValueError(f"{ka_file}: atoms outside the universe: {bad[:5]}")
        if claim in atoms:
            raise ValueError(f"{ka_file}: answerer set contains the claim")
        kas.append(frozenset(atoms))
    if not kas:
        raise ValueError(f"{ka_dir}: no K_A files found")

    train_count = int(entries["train_count"])
    if not 0 < train_count < len(kas):
        raise ValueError(
            f"train_count {train_count} does not split {len(kas)} K_A files"
        )

    config = AbductionConfig(
        obs_cost=float(entries.get("obs_cost", 10.0)),
        max_depth=int(entries.get("max_depth", 6)),
        max_universe=int(entries.get("max_universe", 64)),
    )
    questions: dict[str, tuple[str, str]] = {}
    q_file = base / entries.get("questions_file", "questions.tsv")
    if q_file.is_file():
        for lineno, raw in enumerate(
            q_file.read_text(encoding="utf-8").splitlines(), 1
        ):
            if not raw.strip():
                continue
            parts = raw.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{q_file}:{lineno}: expected 3 tab-separated fields")
            questions[parts[0]] = (parts[1], parts[2])

    return Dataset(
        universe=universe,
        rules=rules,
        claim=claim,
        kas=tuple(kas),
        train_count=train_count,
        theta_r=float(entries.get("theta_R", 0.7)),
        t_limit=int(entries.get("t_limit", 10)),
        r_goal=float(entries.get("r_goal", 100.0)),
        r_time=float(entries.get("r_time", -1.0)),
        config=config,
        questions=questions,
    )


def save_dataset(dataset: Dataset, directory: str | Path) -> Path:
    """Write a dataset directory; returns the manifest path."""
    base = Path(directory)
    base.mkdir(parents=True, exist_ok=True)
    (base / "facts.txt").write_text(
        "".join(f"{a}\n" for a in dataset.universe), encoding="utf-8"
    )
    (base / "rules.txt").write_text(
        "".join(f"{render_rule(r)}\n" for r in dataset.rules), encoding="utf-8"
    )
    ka_dir = base / "ka"
    ka_dir.mkdir(exist_ok=True)
    width = max(4, len(str(len(dataset.kas) - 1)))
    for i, ka in enumerate(dataset.kas):
        (ka_dir / f"{i:0{width}d}.txt").write_text(
            "".join(f"{a}\n" for a in sorted(ka)), encoding="utf-8"
        )
    if dataset.questions:
        lines = [
            f"{atom}\t{q}\t{a}\n"
            for atom, (q, a) in sorted(dataset.questions.items())
        ]
        (base / "questions.tsv").write_text("".join(lines), encoding="utf-8")
    manifest = base / "manifest.txt"
    manifest.write_text(
        "facts_file = facts.txt\n"
        "rules_file = rules.txt\n"
        "ka_dir = ka\n"
        f"claim = {dataset.claim}\n"
        f"theta_R = {dataset.theta_r!r}\n"
        f"t_limit = {dataset.t_limit}\n"
        f"r_goal = {dataset.r_goal!r}\n"
        f"r_time = {dataset.r_time!r}\n"
        f"train_count = {dataset.train_count}\n"
        f"obs_cost = {dataset.config.obs_cost!r}\n"
        f"max_depth = {dataset.config.max_depth}\n"
        f"max_universe = {dataset.config.max_universe}\n",
        encoding="utf-8",
    )
    return manifest


def _question_text(atom: str, claim: str) -> tuple[str, str]:
    if atom == claim:
        return (f"Does the case establish {atom}?", f"{atom} is the claim at issue.")
    return (f"Is {atom} known to hold?", f"{atom} holds.")


def build_synthetic(
    params: GenParams,
    theta_r: float = 0.7,
    t_limit: int = 10,
    r_goal: float = 100.0,
    r_time: float = -1.0,
) -> Dataset:
    """Construct a synthetic dataset in memory, determined by params.seed."""
    rng = np.random.default_rng(params.seed)
    width = max(3, len(str(params.n_facts - 1)))
    atoms = [f"q{i:0{width}d}" for i in range(params.n_facts)]
    claim = atoms[0]

    # Backbone tree: level l holds branching**l atoms; each non-frontier
    # atom is concluded by one rule from its children on the next level.
    b = params.backbone_branching
    levels: list[list[str]] = []
    cursor = 0
    for l in range(params.backbone_depth + 1):
        levels.append(atoms[cursor : cursor + b**l])
        cursor += b**l
    rules: list[Rule] = []
    for l in range(params.backbone_depth):
        weight = params.backbone_weights[l]
        for i, parent in enumerate(levels[l]):
            children = levels[l + 1][i * b : (i + 1) * b]
            rules.append(
                parse_rule(f"{' & '.join(children)} -> {parent} :: {weight!r}")
            )
    backbone = atoms[:cursor]

    # Distractors: the first chunk gets one concluding rule each, the rest
    # only ever appear as premises. Premise weight above 1 keeps every
    # distractor rule irrelevant to explanation costs.
    distractors = atoms[cursor:]
    n_d_rules = params.n_rules - params.backbone_rules()
    concluded = distractors[:n_d_rules]
    leaf_pool = list(distractors[n_d_rules:])
    existing: list[str] = []
    for i, conclusion in enumerate(concluded):
        if i < params.claim_adjacent:
            anchor = claim
        elif i < params.claim_adjacent + len(backbone) - 1:
            anchor = backbone[1 + (i - params.claim_adjacent)]
        else:
            anchor = existing[int(rng.integers(len(existing)))]
        n_prem = int(rng.integers(2, params.max_premises + 1))
        premises = [anchor]
        while len(premises) < n_prem:
            if leaf_pool:
                premises.append(leaf_pool.pop(0))
            else:
                pick = existing[int(rng.integers(len(existing)))]
                if pick not in premises:
                    premises.append(pick)
                elif len(existing) <= len(premises):
                    break
        total = _DISTRACTOR_THETA * len(premises)
        rules.append(
            parse_rule(f"{' & '.join(premises)} -> {conclusion} :: {total!r}")
        )
        existing.append(conclusion)
        existing.extend(p for p in premises if p != anchor and p not in existing)

    candidates = atoms[1:]
    kas = tuple(
        frozenset(
            np.asarray(candidates)[
                rng.choice(len(candidates), size=params.ka_size, replace=False)
            ].tolist()
        )
        for _ in range(params.ka_count)
    )
    questions = {a: _question_text(a, claim) for a in atoms}
    config = AbductionConfig(
        obs_cost=10.0, max_depth=max(6, params.backbone_depth + 1),
        max_universe=params.n_facts + 1,
    )
    return Dataset(
        universe=tuple(atoms),
        rules=tuple(rules),
        claim=claim,
        kas=kas,
        train_count=params.train_count,
        theta_r=theta_r,
        t_limit=t_limit,
        r_goal=r_goal,
        r_time=r_time,
        config=config,
        questions=questions,
    )


def generate_synthetic(
    params: GenParams,
    directory: str | Path,
    theta_r: float = 0.7,
    t_limit: int = 10,
    r_goal: float = 100.0,
    r_time: float = -1.0,
) -> Path:
    """Generate a synthetic dataset on disk; returns the manifest path."""
    dataset = build_synthetic(params, theta_r, t_limit, r_goal, r_time)
    return save_dataset(dataset, directory)


def build_toy(seed: int = 0, ka_count: int = 110, train_count: int = 60) -> Dataset:
    """Tiny fixed-shape domain for fast end-to-end learning checks.

    Ten atoms; the claim follows from three designated facts that appear in
    every answerer set, padded with three of six distractor atoms. An
    episode succeeds only by collecting exactly the three designated facts,
    so the optimal policy is three asks and collected distractors are fatal.
    """
    rng = np.random.default_rng(seed)
    claim = "c"
    good = ("d1", "d2", "d3")
    junk = tuple(f"x{i}" for i in range(1, 7))
    atoms = (claim,) + good + junk
    rules = (parse_rule("d1 & d2 & d3 -> c"),)
    kas = tuple(
        frozenset(good)
        | frozenset(
            np.asarray(junk)[rng.choice(len(junk), size=3, replace=False)].tolist()
        )
        for _ in range(ka_count)
    )
    questions = {a: _question_text(a, claim) for a in atoms}
    return Dataset(
        universe=atoms,
        rules=rules,
        claim=claim,
        kas=kas,
        train_count=train_count,
        theta_r=0.65,
        t_limit=4,
        r_goal=100.0,
        r_time=-1.0,
        config=AbductionConfig(),
        questions=questions,
    )
