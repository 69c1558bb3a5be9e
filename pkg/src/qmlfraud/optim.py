"""COBYLA-style derivative-free minimization and the training loop.

Only the unconstrained path is implemented. The method keeps a simplex of
``n + 1`` evaluated points with the best one as its pole, fits the linear
interpolant of the objective on the simplex, and steps a distance ``rho``
down the interpolant's gradient. When the simplex degenerates it is repaired
with a geometry step; when steps stop paying off ``rho`` is halved until it
reaches ``rho_end``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

# simplex acceptability and step constants
ALPHA = 0.25  # min distance of a vertex to the opposite face, in units of rho
BETA = 2.1  # max edge length from the pole, in units of rho
GAMMA = 0.5  # geometry step length, in units of rho
DELTA = 1.1


class OptimizerError(ValueError):
    pass


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    max_evals: int = 350
    rho_begin: float = 1.0
    rho_end: float = 1e-4
    seed: int = 0
    method: str = "cobyla"

    def __post_init__(self):
        if not 0 < self.rho_end < self.rho_begin:
            raise OptimizerError("need 0 < rho_end < rho_begin")
        if self.max_evals < 1:
            raise OptimizerError("max_evals must be >= 1")


@dataclass
class LossHistory:
    entries: list[tuple[int, float]] = field(default_factory=list)

    def append(self, value: float) -> None:
        self.entries.append((len(self.entries) + 1, float(value)))

    @property
    def losses(self) -> np.ndarray:
        return np.array([v for _, v in self.entries])

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.losses) if self.entries else np.array([])

    def __len__(self):
        return len(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eval", "loss"])
        for i, v in self.entries:
            w.writerow([i, repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> LossHistory:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["eval", "loss"]:
            raise ValueError("loss history CSV must start with header eval,loss")
        return cls([(int(i), float(v)) for i, v in rows[1:]])


class _Evaluator:
    """Counts evaluations, records history and tracks the best point."""

    def __init__(self, objective, max_evals):
        self.objective = objective
        self.max_evals = max_evals
        self.history = LossHistory()
        self.x_best = None
        self.f_best = np.inf

    def __call__(self, x: np.ndarray) -> float:
        if len(self.history) >= self.max_evals:
            raise _BudgetExhausted
        f = float(self.objective(x.copy()))
        if np.isnan(f):
            f = np.inf
        self.history.append(f)
        if f < self.f_best:
            self.f_best, self.x_best = f, x.copy()
        return f


def cobyla_minimize(
    objective: Callable[[np.ndarray], float], x0, cfg: OptimizerConfig = OptimizerConfig()
) -> tuple[np.ndarray, float, LossHistory]:
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    if n == 0:
        raise OptimizerError("cannot minimize over zero dimensions")
    ev = _Evaluator(objective, cfg.max_evals)
    f0 = ev(x0)
    if not np.isfinite(f0):
        raise OptimizerError("objective is not finite at the starting point")
    try:
        _cobyla_loop(ev, x0, f0, cfg)
    except _BudgetExhausted:
        pass
    return ev.x_best, ev.f_best, ev.history


def _cobyla_loop(ev: _Evaluator, x0: np.ndarray, f0: float, cfg: OptimizerConfig) -> None:
    n = x0.size
    rho = cfg.rho_begin
    pole, fpole = x0.copy(), f0
    # sim[j] is vertex j relative to the pole; row j of simi is the matching
    # row of the inverse, so simi @ sim.T = I
    sim = rho * np.eye(n)
    fsim = np.empty(n)
    for j in range(n):
        fj = ev(pole + sim[j])
        fsim[j] = fj
        if fj < fpole:
            # the new vertex becomes the pole, the old pole its vertex j
            d = sim[j].copy()
            pole = pole + d
            sim[:j] -= d
            sim[j] = -d
            fsim[j], fpole = fpole, fj
    simi = np.linalg.inv(sim).T
    took_step = True

    while True:
        # keep the best vertex as the pole
        jbest = int(np.argmin(fsim))
        if fsim[jbest] < fpole:
            d = sim[jbest].copy()
            pole = pole + d
            sim -= d
            sim[jbest] = -d
            fsim[jbest], fpole = fpole, fsim[jbest]
            simi = np.linalg.inv(sim).T

        parsig, pareta = ALPHA * rho, BETA * rho
        vsig = 1.0 / np.linalg.norm(simi, axis=1)
        veta = np.linalg.norm(sim, axis=1)
        acceptable = bool(np.all(vsig >= parsig) and np.all(veta <= pareta))
        grad = simi.T @ (fsim - fpole)

        if not took_step and not acceptable:
            # geometry step: replace the worst-placed vertex
            if veta.max() > pareta:
                jdrop = int(np.argmax(veta))
            else:
                jdrop = int(np.argmin(vsig))
            dx = GAMMA * rho * vsig[jdrop] * simi[jdrop]
            if grad @ dx > 0:
                dx = -dx
            fnew = ev(pole + dx)
            sim[jdrop] = dx
            fsim[jdrop] = fnew
            simi = np.linalg.inv(sim).T
            took_step = True
            continue

        gnorm = np.linalg.norm(grad)
        reduce_rho = False
        if gnorm == 0.0 or not np.isfinite(gnorm):
            reduce_rho = acceptable
            took_step = acceptable
            if not acceptable:
                continue
        else:
            dx = -rho * grad / gnorm
            predicted = rho * gnorm
            fnew = ev(pole + dx)
            actual = fpole - fnew

            # choose the vertex to replace
            vec = np.abs(simi @ dx)
            ratio = 1.0 if actual <= 0 else 0.0
            jdrop = -1
            for j in range(n):
                if vec[j] > ratio:
                    jdrop, ratio = j, vec[j]
            sigbar = vec * vsig
            edgmax = DELTA * rho
            far = -1
            for j in range(n):
                if sigbar[j] >= parsig or sigbar[j] >= vsig[j]:
                    dist = np.linalg.norm(dx - sim[j]) if actual > 0 else veta[j]
                    if dist > edgmax:
                        far, edgmax = j, dist
            if far >= 0:
                jdrop = far
            if jdrop >= 0:
                sim[jdrop] = dx
                fsim[jdrop] = fnew
                simi = np.linalg.inv(sim).T
                if actual > 0 and actual >= 0.1 * predicted:
                    took_step = True
                    continue
            if not acceptable:
                took_step = False
                continue
            reduce_rho = True
            took_step = True

        if reduce_rho:
            if rho <= cfg.rho_end:
                return
            rho *= 0.5
            if rho <= 1.5 * cfg.rho_end:
                rho = cfg.rho_end


OPTIMIZERS: dict[str, Callable] = {"cobyla": cobyla_minimize}


def minimize(objective, x0, cfg: OptimizerConfig = OptimizerConfig()):
    try:
        method = OPTIMIZERS[cfg.method]
    except KeyError:
        raise OptimizerError(f"unknown optimizer {cfg.method!r}; have {sorted(OPTIMIZERS)}") from None
    return method(objective, x0, cfg)


def initial_params(spec, seed: int) -> np.ndarray:
    """Quantum angles uniform in [0, 1]; EQNN head weights uniform in [-0.5, 0.5]."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 1.0, spec.n_quantum_params)
    if spec.architecture != "EQNN":
        return theta
    head = rng.uniform(-0.5, 0.5, spec.n_qubits + 1)
    return np.concatenate([theta, head])


def make_objective(spec, X, y, seed: int = 0):
    """Full-batch cross-entropy objective over a fixed training set.

    Feature-map states are computed once; each call only runs the ansatz.
    """
    from qmlfraud.models import binary_cross_entropy, compiled

    model = compiled(spec)
    encoded = model.encode(X)
    y = np.asarray(y, dtype=float)
    shots = spec.shots if (spec.architecture == "SQNN" and spec.shot_training) else 0
    calls = [0]

    def objective(params):
        calls[0] += 1
        states = model.evolve(encoded, params)
        # a fresh shot stream per call, reproducible from the run seed
        p1 = model.p1_from_states(states, params, seed=(seed, calls[0]), shots=shots)
        return binary_cross_entropy(p1, y)

    return objective


def train(spec, train_table, cfg: OptimizerConfig = OptimizerConfig()):
    """Fit ``spec`` on a DataTable; returns (params, LossHistory)."""
    X, y = train_table.features, train_table.labels
    if len(y) == 0:
        raise OptimizerError("empty training table")
    if X.shape[1] != spec.n_qubits:
        raise OptimizerError(f"table has {X.shape[1]} features, model has {spec.n_qubits} qubits")
    objective = make_objective(spec, X, y, seed=cfg.seed)
    x0 = initial_params(spec, cfg.seed)
    params, f_best, history = minimize(objective, x0, cfg)
    log.debug("trained %s: best loss %.6f after %d evals", spec.architecture, f_best, len(history))
    return params, history
