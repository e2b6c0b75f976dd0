"""Finite discrete staged-information worlds with exact conditionals.

A world has a latent binary outcome with prior theta and T signal stages.
Signal t takes values in a finite alphabet, with conditional distribution
given the outcome and all previous signals.  Every joint probability is an
explicit product, so posteriors, projections, transition laws, and Bellman
values can be computed by enumeration rather than sampling — this module is
the correctness oracle for the probabilistic identities the rest of the
package relies on.

Decision stages run 0..T: stage 0 is the empty history (posterior = prior),
stage t has histories of length t.  Histories are indexed in mixed radix:
index(h + [s]) = index(h) * alphabet[t] + s.

Optional coarsening maps give, for each stage t >= 1, a partition of the
stage-t histories (cell ids).  Because cells are unions of histories, the
coarse information is always contained in the full stage-t information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

__all__ = [
    "SyntheticWorld",
    "exact_posteriors",
    "exact_projections",
    "sample_trajectories",
    "martingale_check",
    "reverse_martingale_check",
    "random_world",
    "world_to_dict",
    "world_from_dict",
    "save_world",
    "load_world",
]

PROB_TOL = 1e-12


@dataclass(frozen=True)
class SyntheticWorld:
    prior: float
    alphabets: tuple[int, ...]
    # tables[t] has shape (2, n_histories(t), alphabets[t]): P(s | d, history)
    tables: tuple[np.ndarray, ...]
    # coarsenings[t] maps stage-(t+1) history index -> cell id (length T when given)
    coarsenings: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if not (0.0 < self.prior < 1.0):
            raise ValueError("SyntheticWorld invariant violated: prior in (0, 1)")
        alphabets = tuple(int(a) for a in self.alphabets)
        if not alphabets or any(a < 1 for a in alphabets):
            raise ValueError("SyntheticWorld: alphabets must be positive sizes")
        tables = tuple(np.asarray(tbl, dtype=float) for tbl in self.tables)
        if len(tables) != len(alphabets):
            raise ValueError("SyntheticWorld: one conditional table per stage")
        n_hist = 1
        for t, (a, tbl) in enumerate(zip(alphabets, tables)):
            if tbl.shape != (2, n_hist, a):
                raise ValueError(f"SyntheticWorld: table {t} must have shape "
                                 f"(2, {n_hist}, {a}), got {tbl.shape}")
            if np.any(tbl < 0):
                raise ValueError("SyntheticWorld invariant violated: nonnegative "
                                 "conditional probabilities")
            if np.max(np.abs(tbl.sum(axis=2) - 1.0)) > PROB_TOL:
                raise ValueError("SyntheticWorld invariant violated: conditional "
                                 f"distributions at stage {t} sum to 1 within {PROB_TOL:g}")
            tbl.flags.writeable = False
            n_hist *= a
        coarsenings = self.coarsenings
        if coarsenings is not None:
            coarsenings = tuple(np.asarray(c, dtype=np.int64) for c in coarsenings)
            if len(coarsenings) != len(alphabets):
                raise ValueError("SyntheticWorld: one coarsening per signal stage")
            n_hist = 1
            for t, c in enumerate(coarsenings):
                n_hist *= alphabets[t]
                if c.shape != (n_hist,):
                    raise ValueError(f"SyntheticWorld: coarsening {t} must map the "
                                     f"{n_hist} stage-{t+1} histories")
                if np.any(c < 0):
                    raise ValueError("SyntheticWorld: coarsening cell ids are nonnegative")
                c.flags.writeable = False
        object.__setattr__(self, "prior", float(self.prior))
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "coarsenings", coarsenings)

    @property
    def horizon(self) -> int:
        """Number of signal stages T; decision stages run 0..T."""
        return len(self.alphabets)

    def n_histories(self, t: int) -> int:
        out = 1
        for a in self.alphabets[:t]:
            out *= a
        return out


def history_tuples(world: SyntheticWorld, t: int) -> list[tuple[int, ...]]:
    """Stage-t histories in index order."""
    out = [()]
    for a in world.alphabets[:t]:
        out = [h + (s,) for h in out for s in range(a)]
    return out


def stage_joints(world: SyntheticWorld) -> list[np.ndarray]:
    """For each decision stage t, the array P(d, history) of shape (2, n_histories(t))."""
    joint = np.array([[1.0 - world.prior], [world.prior]])
    joints = [joint]
    for tbl in world.tables:
        # children[d, i*a + s] = joint[d, i] * P(s | d, i)
        joint = (joint[:, :, None] * tbl).reshape(2, -1)
        joints.append(joint)
    return joints


def _stage_posterior_arrays(world: SyntheticWorld):
    """Per stage: (posterior array, history-probability array)."""
    out = []
    for joint in stage_joints(world):
        prob = joint.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            post = np.where(prob > 0, joint[1] / prob, np.nan)
        out.append((post, prob))
    return out


def exact_posteriors(world: SyntheticWorld) -> list[dict[tuple[int, ...], float]]:
    """Stage-t map history -> P(outcome | history); zero-probability histories omitted."""
    result = []
    for t, (post, prob) in enumerate(_stage_posterior_arrays(world)):
        hist = history_tuples(world, t)
        result.append({h: float(x) for h, x, p in zip(hist, post, prob) if p > 0})
    return result


def exact_projections(world: SyntheticWorld) -> list[dict[int, float]]:
    """Per signal stage t >= 1: map cell id -> P(outcome | cell).

    Each cell's value is the probability-weighted average of the stage
    posterior over the histories in the cell.
    """
    if world.coarsenings is None:
        raise ValueError("exact_projections: world has no coarsening maps")
    joints = stage_joints(world)
    result = []
    for t, cells in enumerate(world.coarsenings, start=1):
        joint = joints[t]
        n_cells = int(cells.max()) + 1
        num = np.zeros(n_cells)
        den = np.zeros(n_cells)
        np.add.at(num, cells, joint[1])
        np.add.at(den, cells, joint.sum(axis=0))
        result.append({c: float(num[c] / den[c]) for c in range(n_cells) if den[c] > 0})
    return result


def sample_trajectories(world: SyntheticWorld, n: int, seed: int):
    """n i.i.d. draws of (signal history, outcome), deterministic given seed.

    Uses the counter-based Philox generator so disjoint seeds give
    independent, schedule-independent streams.
    """
    if n < 1:
        raise ValueError("sample_trajectories: n must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))
    d = (rng.random(n) < world.prior).astype(np.int64)
    signals = np.zeros((n, world.horizon), dtype=np.int64)
    hist_idx = np.zeros(n, dtype=np.int64)
    for t, (a, tbl) in enumerate(zip(world.alphabets, world.tables)):
        probs = tbl[d, hist_idx]           # (n, a)
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(n)
        s = (u[:, None] >= cdf).sum(axis=1)
        s = np.minimum(s, a - 1)
        signals[:, t] = s
        hist_idx = hist_idx * a + s
    return signals, d


def martingale_check(world: SyntheticWorld) -> float:
    """Max over histories of |E[X_{t+1} | history] - X_t(history)| by enumeration."""
    arrays = _stage_posterior_arrays(world)
    worst = 0.0
    for t in range(world.horizon):
        post_t, prob_t = arrays[t]
        post_n, prob_n = arrays[t + 1]
        a = world.alphabets[t]
        child_prob = prob_n.reshape(-1, a)
        child_post = post_n.reshape(-1, a)
        for i in range(child_prob.shape[0]):
            if prob_t[i] <= 0:
                continue
            w = child_prob[i] / prob_t[i]
            live = child_prob[i] > 0
            expected = float(np.sum(w[live] * child_post[i][live]))
            worst = max(worst, abs(expected - post_t[i]))
    return worst


def _omega_cells(world: SyntheticWorld, t: int) -> np.ndarray:
    """Cell id of each full history under the stage-t coarsening."""
    n_full = world.n_histories(world.horizon)
    n_t = world.n_histories(t)
    suffix = n_full // n_t
    prefix_of_full = np.arange(n_full) // suffix
    return world.coarsenings[t - 1][prefix_of_full]


def reverse_martingale_check(world: SyntheticWorld) -> float:
    """Max violation of E[Y_t | next coarse cell] = Y_{t+1} by enumeration.

    Requires a decreasing coarsening chain: each stage-(t+1) cell must be a
    union of stage-t cells (as subsets of the outcome space).
    """
    if world.coarsenings is None:
        raise ValueError("reverse_martingale_check: world has no coarsening maps")
    T = world.horizon
    # nesting check on the induced partitions of the full-history space
    for t in range(1, T):
        fine = _omega_cells(world, t)
        coarse = _omega_cells(world, t + 1)
        mapped: dict[int, int] = {}
        for f, c in zip(fine.tolist(), coarse.tolist()):
            if f in mapped and mapped[f] != c:
                raise ValueError(
                    "reverse_martingale_check: coarsening chain is not decreasing "
                    f"(stage-{t} cell {f} splits across stage-{t+1} cells "
                    f"{mapped[f]} and {c})")
            mapped[f] = c
    joints = stage_joints(world)
    projections = exact_projections(world)
    full_joint = joints[T]
    full_prob = full_joint.sum(axis=0)
    worst = 0.0
    for t in range(1, T):
        fine = _omega_cells(world, t)
        coarse = _omega_cells(world, t + 1)
        y_t = projections[t - 1]
        y_next = projections[t]
        n_cells = int(coarse.max()) + 1
        num = np.zeros(n_cells)
        den = np.zeros(n_cells)
        for idx in range(full_prob.shape[0]):
            p = full_prob[idx]
            if p <= 0:
                continue
            num[coarse[idx]] += p * y_t[fine[idx]]
            den[coarse[idx]] += p
        for c in range(n_cells):
            if den[c] > 0:
                worst = max(worst, abs(num[c] / den[c] - y_next[c]))
    return worst


def random_world(
    seed: int,
    max_stages: int = 4,
    max_alphabet: int = 4,
    with_coarsening: bool = True,
) -> SyntheticWorld:
    """A random valid world for property tests.

    All conditional probabilities are kept at or above 0.05 (uniform mixing
    weight 0.3 guarantees this for alphabets up to 6), so every history has
    positive probability and every posterior is defined.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    T = int(rng.integers(1, max_stages + 1))
    alphabets = tuple(int(rng.integers(2, max_alphabet + 1)) for _ in range(T))
    prior = float(rng.uniform(0.05, 0.95))
    tables = []
    n_hist = 1
    for a in alphabets:
        raw = rng.dirichlet(np.ones(a), size=(2, n_hist))
        tbl = 0.7 * raw + 0.3 / a
        tables.append(tbl)
        n_hist *= a
    coarsenings = None
    if with_coarsening:
        maps = []
        n_hist = 1
        prev_cells = None
        for a in alphabets:
            n_hist *= a
            if prev_cells is None:
                m = int(rng.integers(1, n_hist + 1))
                assign = rng.integers(0, m, size=n_hist)
            else:
                # merge the parent stage's cells so the chain is decreasing
                n_prev = int(prev_cells.max()) + 1
                m = int(rng.integers(1, n_prev + 1))
                merge = rng.integers(0, m, size=n_prev)
                assign = merge[np.repeat(prev_cells, a)]
            # relabel compactly in order of first appearance
            _, assign = np.unique(assign, return_inverse=True)
            maps.append(assign.astype(np.int64))
            prev_cells = assign
        coarsenings = tuple(maps)
    return SyntheticWorld(prior=prior, alphabets=alphabets,
                          tables=tuple(tables), coarsenings=coarsenings)


def world_to_dict(world: SyntheticWorld) -> dict:
    doc = {
        "prior": world.prior,
        "alphabets": list(world.alphabets),
        "tables": [tbl.tolist() for tbl in world.tables],
    }
    if world.coarsenings is not None:
        doc["coarsenings"] = [c.tolist() for c in world.coarsenings]
    return doc


def world_from_dict(doc: dict) -> SyntheticWorld:
    coarsenings = doc.get("coarsenings")
    return SyntheticWorld(
        prior=float(doc["prior"]),
        alphabets=tuple(int(a) for a in doc["alphabets"]),
        tables=tuple(np.asarray(t, dtype=float) for t in doc["tables"]),
        coarsenings=None if coarsenings is None
        else tuple(np.asarray(c, dtype=np.int64) for c in coarsenings),
    )


def save_world(world: SyntheticWorld, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(world_to_dict(world), fh, sort_keys=True)


def load_world(path) -> SyntheticWorld:
    with open(path) as fh:
        return world_from_dict(yaml.safe_load(fh))
