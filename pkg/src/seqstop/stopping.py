"""Threshold decisions and the stop-or-continue analysis.

The exact Bellman solver runs backward induction on a finite discrete world:
the value at the final stage is the acting loss, and at earlier stages the
value is the cheaper of acting now or paying the incremental test cost and
continuing.  Ties resolve to stopping.  ``retrospective_total_cost`` is the
observational proxy used on real data: stagewise decision loss plus
cumulative test cost, whose minimum is an upper bound on the exact value
because each "always stop at stage t" rule is one admissible policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import CostSchedule, LossSpec, StoppingReport
from .synth import SyntheticWorld, PROB_TOL, history_tuples, stage_joints

__all__ = [
    "bayes_threshold",
    "acting_loss",
    "BellmanSolution",
    "bellman_solve",
    "exhaustive_policy_cost",
    "retrospective_total_cost",
    "sensitivity_sweep",
]


def bayes_threshold(loss: LossSpec) -> float:
    """Risk level where treating and not treating have equal expected loss."""
    return loss.threshold


def acting_loss(x, loss: LossSpec):
    """Expected loss of the threshold-optimal action at risk x.

    Not treating costs c_fn * x; treating costs c_fp * (1 - x); the optimal
    action switches at the threshold, with the tie (x equal to the
    threshold) resolved to not treating.  Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("acting_loss: risk must lie in [0, 1]")
    c = loss.threshold
    out = np.where(arr <= c, loss.c_fn * arr, loss.c_fp * (1.0 - arr))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass(frozen=True)
class BellmanSolution:
    """Backward-induction values and the stop/continue rule per history."""

    stage_labels: tuple[str, ...]
    values: tuple[dict, ...]       # per decision stage: history -> value
    stop_rule: tuple[dict, ...]    # per decision stage: history -> True means stop
    total_cost: float

    def __post_init__(self):
        if len(self.values) != len(self.stop_rule) or not self.values:
            raise ValueError("BellmanSolution: values and stop_rule must align")


def _world_transitions(world: SyntheticWorld):
    """Per decision stage: history probs, posteriors, child conditional probs."""
    joints = stage_joints(world)
    probs = [j.sum(axis=0) for j in joints]
    posts = []
    for joint, prob in zip(joints, probs):
        with np.errstate(invalid="ignore", divide="ignore"):
            posts.append(np.where(prob > 0, joint[1] / prob, np.nan))
    return probs, posts


def bellman_solve(
    world: SyntheticWorld, loss: LossSpec, costs: CostSchedule
) -> BellmanSolution:
    """Exact stop-or-continue value by backward induction over a discrete world.

    ``costs.cumulative`` must cover decision stages 0..T (length T+1); the
    incremental cost of moving from stage t to t+1 is the schedule difference.
    Ties between acting and continuing resolve to stopping.
    """
    T = world.horizon
    if costs.horizon != T + 1:
        raise ValueError(f"bellman_solve: cost schedule must have length {T + 1} "
                         f"(decision stages 0..{T}), got {costs.horizon}")
    probs, posts = _world_transitions(world)
    for t, prob in enumerate(probs):
        # guards against worlds built with inconsistent tables
        if abs(prob.sum() - 1.0) > PROB_TOL * max(1, prob.size):
            raise ValueError("bellman_solve: inconsistent world (stage "
                             f"{t} history probabilities sum to {prob.sum()!r})")
    inc = costs.increments
    values: list[np.ndarray] = [None] * (T + 1)
    stop: list[np.ndarray] = [None] * (T + 1)
    values[T] = np.where(probs[T] > 0, acting_loss(np.nan_to_num(posts[T]), loss), np.nan)
    stop[T] = np.ones(probs[T].shape, dtype=bool)
    for t in range(T - 1, -1, -1):
        a = world.alphabets[t]
        act = np.where(probs[t] > 0, acting_loss(np.nan_to_num(posts[t]), loss), np.nan)
        child_prob = probs[t + 1].reshape(-1, a)
        child_val = values[t + 1].reshape(-1, a)
        cont = np.full(probs[t].shape, np.nan)
        for i in range(child_prob.shape[0]):
            if probs[t][i] <= 0:
                continue
            w = child_prob[i] / probs[t][i]
            live = child_prob[i] > 0
            cont[i] = inc[t] + float(np.sum(w[live] * child_val[i][live]))
        values[t] = np.where(act <= cont, act, cont)
        stop[t] = act <= cont
    value_maps = []
    stop_maps = []
    for t in range(T + 1):
        hist = history_tuples(world, t)
        live = probs[t] > 0
        value_maps.append({h: float(v) for h, v, ok in zip(hist, values[t], live) if ok})
        stop_maps.append({h: bool(s) for h, s, ok in zip(hist, stop[t], live) if ok})
    labels = tuple(f"F{t}" for t in range(T + 1))
    return BellmanSolution(
        stage_labels=labels,
        values=tuple(value_maps),
        stop_rule=tuple(stop_maps),
        total_cost=float(values[0][0]),
    )


def exhaustive_policy_cost(
    world: SyntheticWorld, loss: LossSpec, costs: CostSchedule
) -> float:
    """Minimum expected total cost over every stop/continue assignment.

    Brute force over all 2^K policies (K = non-terminal histories), used as
    the independent oracle for ``bellman_solve`` on small worlds.
    """
    T = world.horizon
    if costs.horizon != T + 1:
        raise ValueError("exhaustive_policy_cost: cost schedule must cover stages 0..T")
    probs, posts = _world_transitions(world)
    inc = costs.increments
    act = [np.where(probs[t] > 0, acting_loss(np.nan_to_num(posts[t]), loss), np.nan)
           for t in range(T + 1)]
    nonterminal = [(t, i) for t in range(T) for i in range(probs[t].shape[0])
                   if probs[t][i] > 0]
    best = np.inf
    for bits in product((True, False), repeat=len(nonterminal)):
        decision = {key: b for key, b in zip(nonterminal, bits)}

        def policy_cost(t: int, i: int) -> float:
            if t == T or decision[(t, i)]:
                return float(act[t][i])
            a = world.alphabets[t]
            total = inc[t]
            for s in range(a):
                child = i * a + s
                pc = probs[t + 1][child]
                if pc > 0:
                    total += pc / probs[t][i] * policy_cost(t + 1, child)
            return total

        best = min(best, policy_cost(0, 0))
    return float(best)


def retrospective_total_cost(
    stage_losses, costs: CostSchedule, stage_labels=None
) -> StoppingReport:
    """Stagewise decision loss plus cumulative test cost; earliest argmin preferred."""
    losses = [float(x) for x in stage_losses]
    if len(losses) != costs.horizon:
        raise ValueError("retrospective_total_cost: stage_losses and cost schedule "
                         "lengths must match")
    totals = [l + c for l, c in zip(losses, costs.cumulative)]
    best = min(totals)
    preferred = next(i for i, v in enumerate(totals) if v == best)
    if stage_labels is None:
        stage_labels = tuple(f"F{t + 1}" for t in range(len(losses)))
    return StoppingReport(
        stage_labels=tuple(stage_labels),
        decision_loss=tuple(losses),
        cumulative_cost=costs.cumulative,
        total=tuple(totals),
        preferred_stage=preferred,
    )


def sensitivity_sweep(stage_losses, schedules) -> list[StoppingReport]:
    """One retrospective stopping analysis per cost schedule."""
    schedules = list(schedules)
    if not schedules:
        raise ValueError("sensitivity_sweep: need at least one schedule")
    return [retrospective_total_cost(stage_losses, s) for s in schedules]
