"""Empirical region-of-attraction estimation for the trained controllers.

An initial condition counts as successfully controlled when, over a 40 s
closed-loop run, the cart never leaves +-0.2 m and the pendulum angle stays
within 0.05 rad of upright at every step of the final second. Failures are
data, not errors, and carry a reason.

Three controller/model pairings are compared, keyed as in the study:
(a) lti_ctrl_on_lti, (b) lti_ctrl_on_lab, (c) lab_ctrl_on_lab. All pairings
are evaluated on identical initial-condition sets (common random numbers).
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional

import numpy as np

from .integrator import make_rhs, semi_euler_step, zero_controller
from .params import PhysicalParams
from .policy import MlpPolicy, deterministic_voltage

DEFAULT_BOX = ((-0.2, 0.2), (-10.0, 10.0), (-0.2, 0.2), (-10.0, 10.0))

PAIRINGS = ("lti_ctrl_on_lti", "lti_ctrl_on_lab", "lab_ctrl_on_lab")
PAIRING_LETTERS = {"a": "lti_ctrl_on_lti", "b": "lti_ctrl_on_lab",
                   "c": "lab_ctrl_on_lab"}
LETTER_OF = {v: k for k, v in PAIRING_LETTERS.items()}

FAILURE_REASONS = ("none", "cart_bound", "angle_final", "diverged")


@dataclass
class RoaConfig:
    box: tuple = DEFAULT_BOX
    sim_time: float = 40.0
    h: float = 0.01
    angle_tol: float = 0.05
    final_window: float = 1.0
    cart_bound: float = 0.2
    n_samples: int = 2000
    seed: int = 0
    pairing: str = "lab_ctrl_on_lab"

    def __post_init__(self):
        for lo, hi in self.box:
            if lo >= hi:
                raise ValueError(f"box bounds out of order: ({lo}, {hi})")
        for name in ("sim_time", "h", "angle_tol", "final_window", "cart_bound"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.pairing not in PAIRINGS:
            raise ValueError(f"unknown pairing {self.pairing!r}")


@dataclass
class RoaSample:
    ic: np.ndarray
    success: bool
    failure_reason: str = "none"

    def __post_init__(self):
        if self.success != (self.failure_reason == "none"):
            raise ValueError("success flag inconsistent with failure_reason")


@dataclass
class RefinementConfig:
    """Neighbourhood resampling around previously successful ICs. Radii are
    fractions of the per-dimension box half-width."""

    radii: tuple = (0.01, 0.02, 0.05, 0.1)
    per_center: int = 10
    max_total: int = 80_000

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii schedule must be strictly increasing")


def resolve_pairing(pairing: str, lti_policy: Optional[MlpPolicy],
                    lab_policy: Optional[MlpPolicy]):
    """(model, policy) for a pairing name; raises if the policy is missing."""
    model = "lti" if pairing == "lti_ctrl_on_lti" else "lab"
    policy = lab_policy if pairing == "lab_ctrl_on_lab" else lti_policy
    if policy is None:
        raise ValueError(f"pairing {pairing} needs a "
                         f"{'lab' if pairing == 'lab_ctrl_on_lab' else 'lti'}-trained policy")
    return model, policy


def classify_with(model: str, controller, ic, cfg: RoaConfig,
                  params: Optional[PhysicalParams] = None,
                  keep_trajectory: bool = False):
    """Classify one IC under an explicit controller.

    Exits early on a cart-bound violation or divergence; the final-window
    angle criterion can only be decided by running to the end. With
    `keep_trajectory` the full horizon is always simulated and the states
    are returned alongside the sample, for re-classification tests.
    """
    rhs = make_rhs(model, params if params is not None else PhysicalParams())
    controller = controller if controller is not None else zero_controller
    h = cfg.h
    n = int(round(cfg.sim_time / h))
    k_final = n - int(round(cfg.final_window / h))
    z = np.asarray(ic, dtype=float)
    states = [z] if keep_trajectory else None
    reason = "none"
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n + 1):
            if reason == "none":
                if abs(z[0]) > cfg.cart_bound:
                    reason = "cart_bound"
                elif k >= k_final and abs(z[2]) > cfg.angle_tol:
                    reason = "angle_final"
                if reason != "none" and not keep_trajectory:
                    break
            if k == n:
                break
            u = controller(z)
            z = semi_euler_step(rhs, z, u, h)
            if not np.all(np.isfinite(z)):
                reason = "diverged"
                break
            if keep_trajectory:
                states.append(z)
    sample = RoaSample(np.asarray(ic, dtype=float), reason == "none", reason)
    if keep_trajectory:
        return sample, np.array(states)
    return sample


def classify_trajectory(ic, states, cfg: RoaConfig) -> RoaSample:
    """Re-classify a cached full-horizon trajectory under (possibly relaxed)
    criteria, without re-simulating. The reason is the first violation in
    time, as in a live run."""
    ic = np.asarray(ic, dtype=float)
    n = int(round(cfg.sim_time / cfg.h))
    k_final = n - int(round(cfg.final_window / cfg.h))
    if not np.all(np.isfinite(states)):
        return RoaSample(ic, False, "diverged")
    cart_bad = np.abs(states[:, 0]) > cfg.cart_bound
    angle_bad = np.zeros(len(states), dtype=bool)
    angle_bad[k_final:] = np.abs(states[k_final:, 2]) > cfg.angle_tol
    idx_c = int(np.argmax(cart_bad)) if cart_bad.any() else n + 1
    idx_a = int(np.argmax(angle_bad)) if angle_bad.any() else n + 1
    if idx_c <= idx_a and idx_c <= n:
        return RoaSample(ic, False, "cart_bound")
    if idx_a <= n:
        return RoaSample(ic, False, "angle_final")
    return RoaSample(ic, True, "none")


def classify_ic(ic, pairing: str, cfg: RoaConfig,
                lti_policy: Optional[MlpPolicy] = None,
                lab_policy: Optional[MlpPolicy] = None,
                params: Optional[PhysicalParams] = None) -> RoaSample:
    """Classify one IC under a named pairing's deterministic controller."""
    model, policy = resolve_pairing(pairing, lti_policy, lab_policy)
    return classify_with(model, lambda z: deterministic_voltage(policy, z),
                         ic, cfg, params)


def draw_ics(cfg: RoaConfig) -> np.ndarray:
    """n_samples ICs, uniform and independent per dimension, seeded."""
    rng = np.random.default_rng(cfg.seed)
    lows = np.array([lo for lo, _ in cfg.box])
    highs = np.array([hi for _, hi in cfg.box])
    return rng.uniform(lows, highs, (cfg.n_samples, 4))


def worker_count(requested: Optional[int] = None) -> int:
    """Worker cap: explicit argument, else CARTPOLE_THREADS, else cpu count."""
    cap = os.environ.get("CARTPOLE_THREADS")
    if requested is None:
        requested = int(cap) if cap else (os.cpu_count() or 1)
    elif cap:
        requested = min(requested, int(cap))
    return max(1, requested)


_WORKER_CTX = {}


def _pool_init(model, policy, cfg, params):
    _WORKER_CTX["rhs_args"] = (model, policy, cfg, params)


def _pool_classify(ic):
    model, policy, cfg, params = _WORKER_CTX["rhs_args"]
    return classify_with(model, lambda z: deterministic_voltage(policy, z),
                         ic, cfg, params)


def classify_batch(ics, pairing: str, cfg: RoaConfig,
                   lti_policy: Optional[MlpPolicy] = None,
                   lab_policy: Optional[MlpPolicy] = None,
                   params: Optional[PhysicalParams] = None,
                   workers: Optional[int] = None) -> list:
    """Classify many ICs; results are merged in IC order, so totals do not
    depend on the worker count."""
    model, policy = resolve_pairing(pairing, lti_policy, lab_policy)
    nw = worker_count(workers)
    if nw <= 1 or len(ics) < 2 * nw:
        ctrl = lambda z: deterministic_voltage(policy, z)
        return [classify_with(model, ctrl, ic, cfg, params) for ic in ics]
    with Pool(nw, initializer=_pool_init,
              initargs=(model, policy, cfg, params)) as pool:
        return pool.map(_pool_classify, list(ics), chunksize=32)


def uniform_phase(cfg: RoaConfig, lti_policy=None, lab_policy=None,
                  params=None, workers=None) -> list:
    """Seeded uniform sampling phase for cfg.pairing. The IC set depends
    only on (seed, n_samples, box), so every pairing sees the same ICs."""
    return classify_batch(draw_ics(cfg), cfg.pairing, cfg,
                          lti_policy, lab_policy, params, workers)


def refinement_ics(centers, radius_fraction: float, per_center: int,
                   box, rng) -> np.ndarray:
    """Uniform draws in the box-clipped neighbourhood of each center."""
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    half = radius_fraction * (highs - lows) / 2.0
    out = []
    for c in centers:
        lo = np.maximum(lows, c - half)
        hi = np.minimum(highs, c + half)
        out.append(rng.uniform(lo, hi, (per_center, 4)))
    return np.concatenate(out) if out else np.empty((0, 4))


def refine(samples: list, rcfg: RefinementConfig, cfg: RoaConfig,
           lti_policy=None, lab_policy=None, params=None,
           workers=None) -> list:
    """Grow the sample pool around previous successes, one radius at a time,
    re-seeding centers from the growing pool, until max_total is reached."""
    samples = list(samples)
    if not any(s.success for s in samples):
        warnings.warn("no successful ICs to refine around; pool unchanged")
        return samples
    rng = np.random.default_rng((cfg.seed, 1))  # distinct stream from draw_ics
    for radius in rcfg.radii:
        centers = [s.ic for s in samples if s.success]
        budget = rcfg.max_total - len(samples)
        if budget <= 0:
            break
        ics = refinement_ics(centers, radius, rcfg.per_center, cfg.box, rng)
        ics = ics[:budget]
        samples.extend(classify_batch(ics, cfg.pairing, cfg,
                                      lti_policy, lab_policy, params, workers))
    return samples


@dataclass
class RoaSummary:
    counts: dict
    fractions: dict
    total: int
    order: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        letters = [LETTER_OF[p] for p in self.order]
        return "ORDER: " + " > ".join(letters)


def roa_report(samples_by_pairing: dict) -> RoaSummary:
    """Counts, fractions and the observed ordering across pairings.

    All pairings must have been evaluated on the same IC multiset.
    """
    pairings = list(samples_by_pairing)
    stacks = {p: np.array([s.ic for s in ss]) if ss else np.empty((0, 4))
              for p, ss in samples_by_pairing.items()}
    first = stacks[pairings[0]]
    for p in pairings[1:]:
        if stacks[p].shape != first.shape or not np.array_equal(stacks[p], first):
            raise ValueError("pairings were evaluated on different IC sets")
    total = len(first)
    counts = {p: sum(1 for s in ss if s.success)
              for p, ss in samples_by_pairing.items()}
    fractions = {p: (counts[p] / total if total else None) for p in pairings}
    order = sorted(pairings, key=lambda p: (-(fractions[p] or 0.0), p))
    return RoaSummary(counts, fractions, total, order)
