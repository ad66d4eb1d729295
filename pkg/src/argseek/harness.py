"""Evaluation harness: seeded episode rollouts, metrics, sweeps, transcripts.

Every episode draws its RNG from (seed, episode index), never from a shared
stream, so trajectories are prefix-consistent across time limits: a success
at limit T replays identically and stays a success at T + 1. That makes
completed-vs-limit curves exactly nondecreasing rather than just in
expectation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .abduction import ExplainCache
from .agents.ddqn import greedy_action
from .agents.heuristics import (
    STRATEGY_KINDS,
    bfs_next,
    dfs_next,
    new_traversal,
    random_next,
)
from .agents.qnet import QNetworkParams
from .env import EnvState, Scenario, featurize, legal_actions, reset, step
from .kb import KnowledgeBase, build_fact_graph

UNKNOWN_ANSWER = "I do not know."

# A policy maps (state, legal actions, rng) to an action index; fresh per
# episode so traversal cursors never leak across episodes.
Policy = Callable[[EnvState, frozenset[int], np.random.Generator], int]
PolicyFactory = Callable[[], Policy]


@dataclass(frozen=True)
class Metrics:
    """Aggregate episode outcomes for one strategy."""

    avg_score: float
    completed: int
    avg_steps: float
    stderr_score: float
    episodes_evaluated: int

    def __post_init__(self) -> None:
        if not 0 <= self.completed <= self.episodes_evaluated:
            raise ValueError("completed out of range")


@dataclass(frozen=True)
class StepRecord:
    step: int
    asked: str
    answered: str | None
    r_raw: float
    r_norm: float
    reward: float


@dataclass(frozen=True)
class EpisodeLog:
    records: tuple[StepRecord, ...]
    success: bool


def policy_factory(
    kind: str,
    scenario: Scenario,
    model: QNetworkParams | None = None,
) -> PolicyFactory:
    """Build a per-episode policy constructor for a strategy name."""
    if kind == "ddqn":
        if model is None:
            raise ValueError("ddqn strategy needs a trained model")

        def make_greedy() -> Policy:
            def act(state: EnvState, legal: frozenset[int], rng: np.random.Generator) -> int:
                return greedy_action(model, featurize(state), legal)

            return act

        return make_greedy
    if kind not in STRATEGY_KINDS:
        raise ValueError(f"unknown strategy {kind!r}")
    if kind == "random":

        def make_random() -> Policy:
            def act(state: EnvState, legal: frozenset[int], rng: np.random.Generator) -> int:
                return random_next(legal, rng)

            return act

        return make_random

    graph = build_fact_graph(scenario.rules, scenario.atom_universe)
    next_fn = dfs_next if kind == "dfs" else bfs_next

    def make_traversal() -> Policy:
        walk = new_traversal(kind, scenario.candidate_facts)

        def act(state: EnvState, legal: frozenset[int], rng: np.random.Generator) -> int:
            return next_fn(walk, graph, scenario.claim, legal, rng)

        return act

    return make_traversal


def run_episode(
    scenario: Scenario,
    ka: frozenset[str] | KnowledgeBase,
    policy: Policy,
    rng: np.random.Generator,
    cache: ExplainCache | None = None,
    keep_log: bool = False,
) -> tuple[float, int, bool, EpisodeLog | None]:
    """Roll out one dialogue; returns (cumulative reward, steps, success, log)."""
    if not isinstance(ka, KnowledgeBase):
        ka = KnowledgeBase(facts=frozenset(ka))
    if cache is None:
        cache = ExplainCache(scenario.rules, scenario.config)
    state = reset(scenario, ka)
    total = 0.0
    records: list[StepRecord] = []
    success = False
    while True:
        legal = legal_actions(state)
        if not legal:
            break
        action = policy(state, legal, rng)
        result = step(state, action, scenario, ka, cache=cache)
        total += result.reward
        if keep_log:
            records.append(
                StepRecord(
                    step=result.state.step,
                    asked=scenario.candidate_facts[action],
                    answered=result.info.answered,
                    r_raw=result.info.r_raw,
                    r_norm=result.info.r_norm,
                    reward=result.reward,
                )
            )
        state = result.state
        if result.done:
            success = state.rationality >= scenario.theta_r
            break
    log = EpisodeLog(records=tuple(records), success=success) if keep_log else None
    return total, state.step, success, log


def _episode_rng(seed: int, episode: int) -> np.random.Generator:
    return np.random.default_rng([seed, episode])


def evaluate(
    kind: str,
    test_kas: Sequence[frozenset[str]],
    scenario: Scenario,
    seeds: Sequence[int],
    models: Mapping[int, QNetworkParams] | None = None,
    t_limit: int | None = None,
) -> Metrics:
    """Run one episode per (seed, test K_A) and aggregate outcomes.

    Learned strategies read their per-seed model from ``models``; baseline
    seeds vary only the episode RNG. avg_score satisfies
    (r_goal * completed + r_time * total_steps) / episodes exactly.
    """
    if not test_kas:
        raise ValueError("empty test list")
    if not seeds:
        raise ValueError("need at least one seed")
    if t_limit is not None:
        scenario = dataclasses.replace(scenario, t_limit=t_limit)
    cache = ExplainCache(scenario.rules, scenario.config)

    completed = 0
    total_steps = 0
    seed_means: list[float] = []
    for seed in seeds:
        if kind == "ddqn":
            if models is None or seed not in models:
                raise ValueError(f"no model supplied for seed {seed}")
            factory = policy_factory(kind, scenario, models[seed])
        else:
            factory = policy_factory(kind, scenario)
        seed_total = 0.0
        for i, ka in enumerate(test_kas):
            reward, steps, success, _ = run_episode(
                scenario, ka, factory(), _episode_rng(seed, i), cache=cache
            )
            seed_total += reward
            total_steps += steps
            completed += int(success)
        seed_means.append(seed_total / len(test_kas))

    episodes = len(seeds) * len(test_kas)
    avg_score = (scenario.r_goal * completed + scenario.r_time * total_steps) / episodes
    if len(seeds) > 1:
        stderr = float(np.std(seed_means, ddof=1) / np.sqrt(len(seeds)))
    else:
        stderr = 0.0
    return Metrics(
        avg_score=avg_score,
        completed=completed,
        avg_steps=total_steps / episodes,
        stderr_score=stderr,
        episodes_evaluated=episodes,
    )


def sweep_tlimit(
    kind: str,
    test_kas: Sequence[frozenset[str]],
    scenario: Scenario,
    seeds: Sequence[int],
    max_tlimit: int,
    models: Mapping[int, QNetworkParams] | None = None,
) -> list[tuple[int, Metrics]]:
    """Evaluate at every time limit 1..max_tlimit."""
    if max_tlimit < 1:
        raise ValueError("max_tlimit must be >= 1")
    return [
        (t, evaluate(kind, test_kas, scenario, seeds, models=models, t_limit=t))
        for t in range(1, max_tlimit + 1)
    ]


def render_transcript(
    log: EpisodeLog, questions: Mapping[str, tuple[str, str]]
) -> str:
    """Readable dialogue table; one row per step, rationality after each."""
    lines = ["step\tspeaker\tquestion\tanswer\trationality"]
    for rec in log.records:
        question = questions.get(rec.asked, (rec.asked, ""))[0]
        if rec.answered is None:
            answer = UNKNOWN_ANSWER
        else:
            answer = questions.get(rec.answered, (None, rec.answered))[1]
        lines.append(f"{rec.step}\tQ\t{question}\t{answer}\t{rec.r_norm!r}")
    outcome = "success" if log.success else "failure"
    lines.append(f"# outcome: {outcome}")
    return "\n".join(lines) + "\n"


def metrics_csv(rows: Sequence[tuple[str, Metrics]]) -> str:
    """CSV for eval output; repr floats keep output byte-reproducible."""
    lines = ["strategy,avg_score,stderr,completed,avg_steps"]
    for name, m in rows:
        lines.append(
            f"{name},{m.avg_score!r},{m.stderr_score!r},{m.completed},{m.avg_steps!r}"
        )
    return "\n".join(lines) + "\n"


def sweep_csv(rows: Sequence[tuple[str, Sequence[tuple[int, Metrics]]]]) -> str:
    lines = ["t_limit,strategy,completed"]
    for name, table in rows:
        for t, m in table:
            lines.append(f"{t},{name},{m.completed}")
    return "\n".join(lines) + "\n"
