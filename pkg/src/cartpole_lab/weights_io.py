"""Policy weight persistence.

The on-disk format is a JSON document with the fields

    arch        [4, 36, 10, 2]
    scale       10.0 (volts per unit of normalised mean)
    seed        RNG seed the weights were initialised with
    trained_on  "lab" or "lti"
    W1, b1, W2, b2, W_m, b_m, W_s, b_s
                row-major weight matrices / bias vectors as nested lists

Floats are serialised with shortest round-tripping repr, so a write/read
cycle is value-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .policy import ARCH, MlpPolicy, V_SCALE

_LAYER_SHAPES = {
    "W1": (36, 4), "b1": (36,), "W2": (10, 36), "b2": (10,),
    "W_m": (10,), "W_s": (10,),
}


def save_policy(path, policy: MlpPolicy, seed: int, trained_on: str) -> None:
    if trained_on not in ("lab", "lti"):
        raise ValueError(f"trained_on must be lab or lti, got {trained_on!r}")
    doc = {
        "arch": list(ARCH),
        "scale": V_SCALE,
        "seed": int(seed),
        "trained_on": trained_on,
        "W1": policy.W1.tolist(), "b1": policy.b1.tolist(),
        "W2": policy.W2.tolist(), "b2": policy.b2.tolist(),
        "W_m": policy.W_m.tolist(), "b_m": float(policy.b_m),
        "W_s": policy.W_s.tolist(), "b_s": float(policy.b_s),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_policy(path) -> tuple[MlpPolicy, dict]:
    """Read a weights file; returns the policy and its metadata fields."""
    doc = json.loads(Path(path).read_text())
    if tuple(doc.get("arch", ())) != ARCH:
        raise ValueError(f"{path}: arch {doc.get('arch')} does not match {list(ARCH)}")
    if doc.get("trained_on") not in ("lab", "lti"):
        raise ValueError(f"{path}: bad trained_on field {doc.get('trained_on')!r}")
    arrays = {}
    for key, shape in _LAYER_SHAPES.items():
        arr = np.array(doc[key], dtype=float)
        if arr.shape != shape:
            raise ValueError(f"{path}: {key} has shape {arr.shape}, expected {shape}")
        arrays[key] = arr
    policy = MlpPolicy(W1=arrays["W1"], b1=arrays["b1"],
                       W2=arrays["W2"], b2=arrays["b2"],
                       W_m=arrays["W_m"], b_m=float(doc["b_m"]),
                       W_s=arrays["W_s"], b_s=float(doc["b_s"]))
    meta = {"arch": tuple(doc["arch"]), "scale": float(doc["scale"]),
            "seed": int(doc["seed"]), "trained_on": doc["trained_on"]}
    return policy, meta
