"""Iterative solvers over a SampleObjective.

Four algorithms share the RunRecord trace format:

* ``run_svrg``    variance-reduced stochastic gradient on the factor U,
                  with a fresh full-gradient anchor every outer iteration
* ``run_fgd``     full factored gradient descent (one iteration per epoch)
* ``run_sfgd``    stochastic factored gradient descent with a diminishing
                  step (n sampled steps per epoch)
* ``run_projgd``  projected gradient descent in X-space (baseline)

Epoch accounting follows sample-gradient counts: FGD, SFGD, and ProjGD
spend n sample gradients per epoch, SVRG spends n + m per outer
iteration.  Metric evaluations are not counted.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import gram, procrustes_dist, proj_psd, symmetrize

DIVERGE_LIMIT = 1e150


class DivergedError(RuntimeError):
    """Iterate left the representable range; carries the partial record."""

    def __init__(self, message, epoch, record):
        super().__init__(message)
        self.epoch = epoch
        self.record = record


@dataclass
class SolverConfig:
    algorithm: str
    r: int
    epochs: int
    seed: int
    m: int | None = None
    eval_every: int = 1
    schedule: object | None = None
    eta: float | None = None
    eta0: float | None = None
    t0: float | None = None

    def __post_init__(self):
        if not self.algorithm:
            raise ValueError("algorithm label must be a nonempty string")
        if self.r < 1:
            raise ValueError("rank r must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.m is not None and self.m < 1:
            raise ValueError("inner-loop length m must be at least 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be at least 1")


@dataclass
class Row:
    epoch: int
    eta: float
    f: float
    error_X: float | None
    error_U: float | None
    metric: float | None
    sample_grads: int


@dataclass
class RunRecord:
    algorithm: str
    seed: int
    n: int
    m: int | None
    rows: list = field(default_factory=list)
    diverged: bool = False
    diverged_epoch: int | None = None
    final_U: np.ndarray | None = None
    final_X: np.ndarray | None = None


def epoch_cost(algorithm, n, m=None):
    """Sample gradients spent per epoch of the named algorithm."""
    if algorithm.startswith("svrg"):
        if m is None or m < 1:
            raise ValueError("svrg epoch cost needs the inner-loop length m")
        return n + m
    if algorithm in ("fgd", "sfgd", "projgd"):
        return n
    raise ValueError(f"unknown algorithm: {algorithm!r}")


def _metrics(X, U, X_ref, U_ref, metric):
    error_X = None
    if X_ref is not None:
        error_X = float(
            np.linalg.norm(X - X_ref) / max(1.0, np.linalg.norm(X_ref))
        )
    error_U = None
    if U_ref is not None and U is not None:
        error_U = procrustes_dist(U, U_ref)
    mval = float(metric(X)) if metric is not None else None
    return error_X, error_U, mval


def _check_factor(obj, config, U0):
    U = np.array(U0, dtype=float)
    if U.ndim != 2 or U.shape != (obj.p, config.r):
        raise ValueError(
            f"initial factor must have shape ({obj.p}, {config.r}), got {U.shape}"
        )
    return U


def _finite(M):
    return bool(np.isfinite(M).all()) and float(np.abs(M).max()) <= DIVERGE_LIMIT


def _diverge(record, epoch, grads, has_x_ref, has_u, has_u_ref, has_metric, U, X):
    nan = float("nan")
    record.rows.append(
        Row(
            epoch=epoch,
            eta=0.0,
            f=nan,
            error_X=nan if has_x_ref else None,
            error_U=nan if (has_u and has_u_ref) else None,
            metric=nan if has_metric else None,
            sample_grads=grads,
        )
    )
    record.diverged = True
    record.diverged_epoch = epoch
    record.final_U = U
    record.final_X = X
    raise DivergedError(f"iterate diverged at epoch {epoch}", epoch, record)


def run_svrg(obj, config, U0, X_ref=None, U_ref=None, metric=None):
    """Variance-reduced solver on the factor, Option-I outer update.

    Every outer iteration recomputes the anchor gradient ``grad f_i`` at
    the stored snapshot instead of caching the n per-sample gradients, and
    consults the step schedule once with the snapshot and its full matrix
    gradient.
    """
    if config.schedule is None:
        raise ValueError("run_svrg needs config.schedule")
    if config.m is None:
        raise ValueError("run_svrg needs config.m")
    m = config.m
    Utilde = _check_factor(obj, config, U0)
    rng = np.random.default_rng(config.seed)
    record = RunRecord(config.algorithm, config.seed, obj.n, m)
    cost = epoch_cost("svrg", obj.n, m)
    gstf = obj.grad_sample_times_factor
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.epochs):
            Xt = gram(Utilde)
            f, G = obj.value_and_grad_full(Xt)
            g_anchor = G @ Utilde
            eta = config.schedule.next_step(k, Xt, G)
            if k % config.eval_every == 0:
                ex, eu, mv = _metrics(Xt, Utilde, X_ref, U_ref, metric)
                record.rows.append(Row(k, eta, float(f), ex, eu, mv, k * cost))
            idx = rng.integers(0, obj.n, size=m)
            U = Utilde.copy()
            # The update is applied in place on fresh oracle outputs; the
            # inner loop runs n+ times per epoch and per-step temporaries
            # dominate its cost otherwise.
            for i in idx.tolist():
                if gstf is not None:
                    current = gstf(i, None, U)
                    anchor = gstf(i, Xt, Utilde)
                else:
                    current = obj.grad_sample(i, gram(U)) @ U
                    anchor = obj.grad_sample(i, Xt) @ Utilde
                current -= anchor
                current += g_anchor
                current *= eta
                U -= current
            Utilde = U
            if not _finite(Utilde):
                _diverge(
                    record, k + 1, (k + 1) * cost,
                    X_ref is not None, True, U_ref is not None, metric is not None,
                    Utilde, None,
                )
        Xt = gram(Utilde)
        ex, eu, mv = _metrics(Xt, Utilde, X_ref, U_ref, metric)
        record.rows.append(
            Row(config.epochs, 0.0, float(obj.eval_full(Xt)), ex, eu, mv,
                config.epochs * cost)
        )
    record.final_U = Utilde
    record.final_X = Xt
    return record


def run_fgd(obj, config, U0, X_ref=None, U_ref=None, metric=None):
    """Full factored gradient descent; one iteration is one epoch."""
    if config.eta is None or config.eta < 0:
        raise ValueError("run_fgd needs config.eta >= 0")
    U = _check_factor(obj, config, U0)
    record = RunRecord(config.algorithm, config.seed, obj.n, None)
    cost = epoch_cost("fgd", obj.n)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.epochs):
            X = gram(U)
            f, G = obj.value_and_grad_full(X)
            if k % config.eval_every == 0:
                ex, eu, mv = _metrics(X, U, X_ref, U_ref, metric)
                record.rows.append(Row(k, config.eta, float(f), ex, eu, mv, k * cost))
            U = U - config.eta * (G @ U)
            if not _finite(U):
                _diverge(
                    record, k + 1, (k + 1) * cost,
                    X_ref is not None, True, U_ref is not None, metric is not None,
                    U, None,
                )
        X = gram(U)
        ex, eu, mv = _metrics(X, U, X_ref, U_ref, metric)
        record.rows.append(
            Row(config.epochs, 0.0, float(obj.eval_full(X)), ex, eu, mv,
                config.epochs * cost)
        )
    record.final_U = U
    record.final_X = X
    return record


def run_sfgd(obj, config, U0, X_ref=None, U_ref=None, metric=None):
    """Stochastic factored gradient descent with a diminishing step.

    The step at global inner step t is ``eta0 / (1 + t / t0)`` with t
    counted across epochs; t0 defaults to the sample size, and
    ``t0 = math.inf`` degenerates to a fixed step.  One epoch is n
    sampled steps.  The row for epoch k records the step used at the
    first inner step of that epoch.
    """
    if config.eta0 is None or config.eta0 <= 0:
        raise ValueError("run_sfgd needs config.eta0 > 0")
    t0 = float(config.t0) if config.t0 is not None else float(obj.n)
    if not (t0 > 0 or t0 == math.inf):
        raise ValueError("t0 must be positive")
    U = _check_factor(obj, config, U0)
    rng = np.random.default_rng(config.seed)
    record = RunRecord(config.algorithm, config.seed, obj.n, None)
    cost = epoch_cost("sfgd", obj.n)
    gstf = obj.grad_sample_times_factor
    t = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.epochs):
            if k % config.eval_every == 0:
                X = gram(U)
                ex, eu, mv = _metrics(X, U, X_ref, U_ref, metric)
                eta_row = config.eta0 / (1.0 + t / t0)
                record.rows.append(
                    Row(k, eta_row, float(obj.eval_full(X)), ex, eu, mv, k * cost)
                )
            idx = rng.integers(0, obj.n, size=obj.n)
            for i in idx.tolist():
                eta_t = config.eta0 / (1.0 + t / t0)
                if gstf is not None:
                    direction = gstf(i, None, U)
                else:
                    direction = obj.grad_sample(i, gram(U)) @ U
                direction *= eta_t
                U -= direction
                t += 1
            if not _finite(U):
                _diverge(
                    record, k + 1, (k + 1) * cost,
                    X_ref is not None, True, U_ref is not None, metric is not None,
                    U, None,
                )
        X = gram(U)
        ex, eu, mv = _metrics(X, U, X_ref, U_ref, metric)
        record.rows.append(
            Row(config.epochs, 0.0, float(obj.eval_full(X)), ex, eu, mv,
                config.epochs * cost)
        )
    record.final_U = U
    record.final_X = X
    return record


def run_projgd(obj, config, X0, X_ref=None, metric=None):
    """Projected gradient descent in X-space; one iteration is one epoch."""
    if config.eta is None or config.eta < 0:
        raise ValueError("run_projgd needs config.eta >= 0")
    X = symmetrize(np.array(X0, dtype=float))
    if X.shape != (obj.p, obj.p):
        raise ValueError(f"initial matrix must have shape ({obj.p}, {obj.p})")
    record = RunRecord(config.algorithm, config.seed, obj.n, None)
    cost = epoch_cost("projgd", obj.n)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.epochs):
            f, G = obj.value_and_grad_full(X)
            if k % config.eval_every == 0:
                ex, _, mv = _metrics(X, None, X_ref, None, metric)
                record.rows.append(Row(k, config.eta, float(f), ex, None, mv, k * cost))
            raw = X - config.eta * G
            if not _finite(raw):
                _diverge(
                    record, k + 1, (k + 1) * cost,
                    X_ref is not None, False, False, metric is not None,
                    None, raw,
                )
            X = proj_psd(raw)
        ex, _, mv = _metrics(X, None, X_ref, None, metric)
        record.rows.append(
            Row(config.epochs, 0.0, float(obj.eval_full(X)), ex, None, mv,
                config.epochs * cost)
        )
    record.final_U = None
    record.final_X = X
    return record
