"""Canonical CSV emission. Floats carry 17 significant digits so that
parsing the printed value recovers the exact double."""
from __future__ import annotations

from pathlib import Path

from .params import PARAM_NAMES


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(path, traj) -> None:
    """One row per control step: the pre-step state and the voltage held
    over [t, t+h). Header: t,x,xdot,alpha,alphadot,u."""
    lines = ["t,x,xdot,alpha,alphadot,u"]
    states = traj.states.real if hasattr(traj.states, "real") else traj.states
    for k in range(len(traj.voltages)):
        z = states[k]
        lines.append(",".join([fmt(traj.times[k]), fmt(z[0]), fmt(z[1]),
                               fmt(z[2]), fmt(z[3]), fmt(traj.voltages[k].real
                                                         if hasattr(traj.voltages[k], "real")
                                                         else traj.voltages[k])]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_sensitivity_csv(path, record) -> None:
    """Header: t,s_x,s_xdot,s_alpha,s_alphadot; a comment line pins the
    parameter ordering convention."""
    lines = [
        f"# parameter {record.spec.param_name} "
        f"(index {record.spec.param_index} in table order "
        f"{','.join(PARAM_NAMES)}), method {record.spec.method}, h {fmt(record.spec.h)}",
        "t,s_x,s_xdot,s_alpha,s_alphadot",
    ]
    for n in range(record.s.shape[1]):
        lines.append(",".join([fmt(record.times[n])] +
                              [fmt(record.s[j, n]) for j in range(4)]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_roa_csv(path, samples, pairing: str) -> None:
    lines = ["x0,xdot0,alpha0,alphadot0,success,reason,pairing"]
    for s in samples:
        lines.append(",".join([fmt(s.ic[0]), fmt(s.ic[1]), fmt(s.ic[2]),
                               fmt(s.ic[3]), "1" if s.success else "0",
                               s.failure_reason, pairing]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_training_log_csv(path, log) -> None:
    lines = ["episode,steps,reward,moving_avg,loss"]
    for row in log:
        lines.append(",".join([str(row.episode), str(row.steps),
                               fmt(row.reward), fmt(row.moving_avg),
                               fmt(row.loss)]))
    Path(path).write_text("\n".join(lines) + "\n")
