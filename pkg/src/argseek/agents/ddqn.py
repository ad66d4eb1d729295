"""Double deep Q-network questioner.

The online network picks the bootstrap action, the periodically synced
target network scores it. Exploration is epsilon-greedy with a linear
anneal over a fixed count of initial actions. Illegal (already asked)
actions are masked out of both the greedy policy and the bootstrap argmax.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..env import DialogueEnv, Scenario, Transition
from ..kb import KnowledgeBase
from .qnet import (
    AdamState,
    QNetworkParams,
    adam_update,
    copy_params,
    init_qnet,
    mlp_forward,
    mlp_gradients,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparams:
    """Training configuration; defaults are conventional small-scale values."""

    gamma: float = 0.95
    eps_start: float = 0.1
    eps_end: float = 0.01
    eps_anneal_actions: int = 2000
    episodes: int = 1000
    learning_rate: float = 1e-3
    batch_size: int = 32
    replay_capacity: int = 10000
    target_sync_every: int = 100
    hidden_dims: tuple[int, ...] = (50, 50)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must hold at least one batch")
        if self.target_sync_every < 1:
            raise ValueError("target_sync_every must be >= 1")


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform batch sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ValueError("not enough transitions buffered")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]

    def __len__(self) -> int:
        return len(self._items)


def epsilon_at(hp: Hyperparams, action_count: int) -> float:
    """Exploration rate after the given number of global actions."""
    if action_count >= hp.eps_anneal_actions or hp.eps_anneal_actions == 0:
        return hp.eps_end
    frac = action_count / hp.eps_anneal_actions
    return hp.eps_start + (hp.eps_end - hp.eps_start) * frac


def masked_argmax(q: np.ndarray, legal: frozenset[int]) -> int:
    """Highest-Q legal action; ties resolve to the lowest index."""
    if not legal:
        raise ValueError("no legal actions to choose from")
    return min(legal, key=lambda i: (-q[i], i))


def greedy_action(
    params: QNetworkParams, features: np.ndarray, legal: frozenset[int]
) -> int:
    return masked_argmax(mlp_forward(params, features), legal)


def ddqn_target(
    transition: Transition,
    theta: QNetworkParams,
    theta_minus: QNetworkParams,
    gamma: float,
) -> float:
    """Bootstrap value: online net selects the action, target net scores it."""
    if transition.done:
        return transition.r
    if not transition.legal_next:
        raise ValueError("non-terminal transition with no legal next actions")
    a_star = masked_argmax(mlp_forward(theta, transition.s_next), transition.legal_next)
    q_minus = mlp_forward(theta_minus, transition.s_next)
    return transition.r + gamma * float(q_minus[a_star])


def train_ddqn(
    scenario: Scenario,
    ka_pool: Sequence[KnowledgeBase],
    hp: Hyperparams,
    env: DialogueEnv | None = None,
) -> tuple[QNetworkParams, np.ndarray]:
    """Train a questioner on episodes with answerers drawn from the pool.

    Returns the final online network and the per-episode cumulative reward
    curve. Passing a prebuilt ``env`` lets callers share its explanation
    cache across strategies and seeds.
    """
    if not ka_pool:
        raise ValueError("training pool of answerer knowledge bases is empty")
    rng = np.random.default_rng(hp.seed)
    dims = (scenario.feature_dim, *hp.hidden_dims, scenario.n_actions)
    params = init_qnet(dims, rng)
    target = copy_params(params)
    buffer = ReplayBuffer(hp.replay_capacity)
    adam = AdamState()
    curve = np.zeros(hp.episodes, dtype=np.float64)
    if env is None:
        env = DialogueEnv(scenario, ka_pool[0])

    action_count = 0
    update_count = 0
    for ep in range(hp.episodes):
        ka = ka_pool[int(rng.integers(len(ka_pool)))]
        env.reset(ka)
        total = 0.0
        while not env.done:
            legal = env.legal_actions()
            if not legal:
                break
            features = env.featurize()
            if rng.random() < epsilon_at(hp, action_count):
                action = sorted(legal)[int(rng.integers(len(legal)))]
            else:
                action = greedy_action(params, features, legal)
            action_count += 1
            result = env.step(action)
            total += result.reward
            buffer.push(
                Transition(
                    s=features,
                    a=action,
                    r=result.reward,
                    s_next=env.featurize(),
                    done=result.done,
                    legal_next=env.legal_actions(),
                )
            )
            if len(buffer) >= hp.batch_size:
                batch = buffer.sample(hp.batch_size, rng)
                x = np.stack([t.s for t in batch])
                actions = np.array([t.a for t in batch])
                targets = np.array(
                    [ddqn_target(t, params, target, hp.gamma) for t in batch]
                )
                _, w_grads, b_grads = mlp_gradients(params, x, actions, targets)
                adam_update(params, w_grads, b_grads, adam, hp.learning_rate)
                update_count += 1
                if update_count % hp.target_sync_every == 0:
                    target = copy_params(params)
        curve[ep] = total
        if (ep + 1) % 100 == 0:
            recent = curve[max(0, ep - 99) : ep + 1]
            logger.info(
                "episode %d/%d: mean reward over last 100 = %.2f",
                ep + 1,
                hp.episodes,
                float(recent.mean()),
            )
    return params, curve
