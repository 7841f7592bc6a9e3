"""REINFORCE training loop with an NAdam optimizer written from scratch.

One episode = one rollout of the stochastic policy on the configured model,
terminated when the cart leaves +-0.2 m, the pole leaves +-0.2 rad, or the
step horizon is reached. After every episode the policy takes one NAdam
step on the gradient of

    loss = - sum_t logp_t * G_t,      G_t = sum_{k>=0} gamma^k r_{t+k},

computed by reverse-mode accumulation through the network. Training stops
when the moving average of episode reward over `success_window` episodes
reaches `success_threshold`.

NAdam update (t is the 1-based step count, psi the momentum schedule):

    psi(t)   = beta1 * (1 - 0.5 * 0.96^(t/250))
    m        = beta1 * m + (1 - beta1) * g
    v        = beta2 * v + (1 - beta2) * g^2
    m_hat    = psi(t+1) * m / (1 - prod_{i<=t+1} psi(i))
               + (1 - psi(t)) * g / (1 - prod_{i<=t} psi(i))
    v_hat    = v / (1 - beta2^t)
    theta    = theta - lr * m_hat / (sqrt(v_hat) + eps)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .integrator import DEFAULT_STEP, make_rhs, semi_euler_step
from .params import PhysicalParams
from .policy import (MlpPolicy, _LN_2PI, SIGMA_FLOOR, action_voltage,
                     init_policy, sample_action)

CART_BOUND = 0.2    # m
ANGLE_BOUND = 0.2   # rad


@dataclass
class TrainerConfig:
    gamma: float = 0.99
    lr: float = 3e-3
    max_episodes: int = 2000
    horizon_steps: int = 2000           # 20 s at h = 0.01
    success_threshold: float = 1950.0
    success_window: int = 50
    ic_halfwidth: float = 0.08
    model: str = "lab"
    seed: int = 0
    standardize_returns: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.success_threshold > self.horizon_steps:
            raise ValueError("success_threshold cannot exceed horizon_steps")
        if self.model not in ("lab", "lti"):
            raise ValueError(f"training model must be lab or lti, got {self.model!r}")


@dataclass
class EpisodeRecord:
    """Per-step data of one rollout; states/actions are kept for backprop."""

    logps: np.ndarray       # (T,)
    rewards: np.ndarray     # (T,) of 0/1
    length: int
    states: np.ndarray      # (T, 4) pre-step states
    actions: np.ndarray     # (T,) unclipped normalised actions


@dataclass
class LogRow:
    episode: int
    steps: int
    reward: float
    moving_avg: float
    loss: float


@dataclass
class TrainResult:
    policy: MlpPolicy
    log: list
    succeeded: bool
    episodes: int


def reward(z_next) -> int:
    """1 while the cart is within 0.2 m and the pole within 0.2 rad
    (closed intervals; velocities are unconstrained), else 0."""
    return 1 if (abs(z_next[0]) <= CART_BOUND and abs(z_next[2]) <= ANGLE_BOUND) else 0


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    """G_t by backward recursion."""
    out = np.empty(len(rewards))
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


def policy_loss(episode: EpisodeRecord, gamma: float) -> float:
    """Scalar REINFORCE loss of a recorded episode."""
    returns = discounted_returns(episode.rewards, gamma)
    return float(-np.dot(episode.logps, returns))


# --- analytic gradients ----------------------------------------------------

def _params_of(policy: MlpPolicy) -> list:
    return [policy.W1, policy.b1, policy.W2, policy.b2,
            policy.W_m, np.float64(policy.b_m), policy.W_s, np.float64(policy.b_s)]


def _write_params(policy: MlpPolicy, arrs) -> None:
    policy.W1, policy.b1, policy.W2, policy.b2 = arrs[0], arrs[1], arrs[2], arrs[3]
    policy.W_m, policy.b_m = arrs[4], float(arrs[5])
    policy.W_s, policy.b_s = arrs[6], float(arrs[7])


def loss_and_gradients(policy: MlpPolicy, states, actions, returns):
    """Loss and its gradient in the parameter order of `_params_of`.

    Recomputes the forward pass over the whole episode as a batch; the ReLU
    subgradient at exactly zero is taken as zero, matching the gate used in
    the per-step forward.
    """
    Z = np.asarray(states)
    a = np.asarray(actions)
    G = np.asarray(returns)

    A1 = Z @ policy.W1.T + policy.b1
    H1 = np.maximum(A1, 0.0)
    A2 = H1 @ policy.W2.T + policy.b2
    H2 = np.maximum(A2, 0.0)
    mu = H2 @ policy.W_m + policy.b_m
    raw = H2 @ policy.W_s + policy.b_s
    sigma = np.logaddexp(0.0, raw) + SIGMA_FLOOR

    d = a - mu
    logp = -0.5 * _LN_2PI - np.log(sigma) - d * d / (2.0 * sigma * sigma)
    loss = float(-np.dot(G, logp))

    # d loss / d mu and d loss / d raw_sigma, per step
    dmu = -G * d / (sigma * sigma)
    dsigma = -G * (d * d / (sigma ** 3) - 1.0 / sigma)
    draw = dsigma / (1.0 + np.exp(-raw))        # softplus slope

    dH2 = np.outer(dmu, policy.W_m) + np.outer(draw, policy.W_s)
    dA2 = dH2 * (A2 > 0.0)
    dH1 = dA2 @ policy.W2
    dA1 = dH1 * (A1 > 0.0)

    grads = [
        dA1.T @ Z, dA1.sum(axis=0),
        dA2.T @ H1, dA2.sum(axis=0),
        dmu @ H2, np.float64(dmu.sum()),
        draw @ H2, np.float64(draw.sum()),
    ]
    return loss, grads


# --- NAdam ------------------------------------------------------------------

@dataclass
class NAdamState:
    m: list
    v: list
    t: int = 0
    mu_product: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, **kw) -> "NAdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params], **kw)


def _psi(beta1: float, t: int) -> float:
    return beta1 * (1.0 - 0.5 * 0.96 ** (t / 250.0))


def nadam_step(params, grads, state: NAdamState, lr: float) -> list:
    """One NAdam update; mutates `state`, returns the new parameter arrays."""
    for p, g in zip(params, grads):
        if np.shape(p) != np.shape(g):
            raise ValueError(f"gradient shape {np.shape(g)} does not match "
                             f"parameter shape {np.shape(p)}")
    state.t += 1
    t = state.t
    mu_t = _psi(state.beta1, t)
    mu_next = _psi(state.beta1, t + 1)
    state.mu_product *= mu_t
    mu_product_next = state.mu_product * mu_next
    bc2 = 1.0 - state.beta2 ** t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g
        m_hat = (mu_next * state.m[i] / (1.0 - mu_product_next)
                 + (1.0 - mu_t) * g / (1.0 - state.mu_product))
        v_hat = state.v[i] / bc2
        out.append(p - lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


# --- training loop ----------------------------------------------------------

def rollout(policy: MlpPolicy, rhs, z0, horizon_steps: int, rng,
            h: float = DEFAULT_STEP) -> EpisodeRecord:
    """One stochastic episode; ends on the first zero reward or at horizon."""
    states, actions, logps, rewards = [], [], [], []
    z = np.asarray(z0, dtype=float)
    for _ in range(horizon_steps):
        a, logp = sample_action(policy, z, rng)
        v = action_voltage(a)
        z_next = semi_euler_step(rhs, z, v, h)
        r = reward(z_next)
        states.append(z)
        actions.append(a)
        logps.append(logp)
        rewards.append(r)
        z = z_next
        if r == 0:
            break
    return EpisodeRecord(np.array(logps), np.array(rewards), len(rewards),
                         np.array(states), np.array(actions))


def train(cfg: TrainerConfig, policy: Optional[MlpPolicy] = None) -> TrainResult:
    """Run REINFORCE until the moving-average stopping rule fires or
    `max_episodes` is exhausted. Single-threaded and deterministic under a
    fixed seed."""
    rng = np.random.default_rng(cfg.seed)
    if policy is None:
        policy = init_policy(rng)
    rhs = make_rhs(cfg.model, PhysicalParams())
    opt = NAdamState.for_params(_params_of(policy))

    log: list[LogRow] = []
    window: list[float] = []
    succeeded = False
    for ep in range(cfg.max_episodes):
        z0 = rng.uniform(-cfg.ic_halfwidth, cfg.ic_halfwidth, 4)
        episode = rollout(policy, rhs, z0, cfg.horizon_steps, rng)
        returns = discounted_returns(episode.rewards, cfg.gamma)
        if cfg.standardize_returns:
            returns = (returns - returns.mean()) / (returns.std() + 1e-8)
        loss, grads = loss_and_gradients(policy, episode.states,
                                         episode.actions, returns)
        if not math.isfinite(loss) or any(not np.all(np.isfinite(g)) for g in grads):
            raise RuntimeError(f"non-finite loss or gradient at episode {ep}")
        _write_params(policy, nadam_step(_params_of(policy), grads, opt, cfg.lr))

        ep_reward = float(episode.rewards.sum())
        window.append(ep_reward)
        if len(window) > cfg.success_window:
            window.pop(0)
        moving_avg = sum(window) / len(window)
        log.append(LogRow(ep, episode.length, ep_reward, moving_avg, loss))
        if len(window) == cfg.success_window and moving_avg >= cfg.success_threshold:
            succeeded = True
            break
    return TrainResult(policy, log, succeeded, len(log))
