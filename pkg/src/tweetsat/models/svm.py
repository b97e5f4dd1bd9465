"""C-SVC trained by SMO, one binary machine per class pair.

The binary solver follows the decomposition used by LIBSVM: the working
pair is the maximal violating index ``i`` plus the second-order choice of
``j``, and iteration stops once the KKT gap ``m(a) - M(a)`` drops below
``tol``. Every step solves its two-variable subproblem exactly, so the
dual objective never decreases.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .common import N_CLASSES, load_params, save_params

logger = logging.getLogger(__name__)

TAU = 1e-12


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class SvmConfig:
    C: float = 10.0
    kernel: str = "linear"
    gamma: float = None
    tol: float = 1e-3
    max_iter: int = 1_000_000

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")


def default_gamma(X):
    var = X.var()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


class Kernel:
    def __init__(self, X, kind, gamma=None, cache_columns=512):
        self.X = X
        self.kind = kind
        self.gamma = gamma
        self.sq = np.einsum("ij,ij->i", X, X)
        n = len(X)
        self.full = None
        self.cache = OrderedDict()
        self.cache_columns = cache_columns
        if n <= 2500:
            self.full = self.between(X, X, self.sq, self.sq)

    def between(self, A, B, sqA=None, sqB=None):
        dots = A @ B.T
        if self.kind == "linear":
            return dots
        sqA = np.einsum("ij,ij->i", A, A) if sqA is None else sqA
        sqB = np.einsum("ij,ij->i", B, B) if sqB is None else sqB
        d2 = np.maximum(sqA[:, None] + sqB[None, :] - 2 * dots, 0.0)
        return np.exp(-self.gamma * d2)

    def diag(self):
        if self.kind == "linear":
            return self.sq.copy()
        return np.ones(len(self.X))

    def column(self, i):
        if self.full is not None:
            return self.full[:, i]
        col = self.cache.get(i)
        if col is not None:
            self.cache.move_to_end(i)
            return col
        col = self.between(self.X, self.X[i : i + 1], self.sq, self.sq[i : i + 1])[:, 0]
        self.cache[i] = col
        if len(self.cache) > self.cache_columns:
            self.cache.popitem(last=False)
        return col


@dataclass
class BinarySolution:
    alpha: np.ndarray
    b: float
    gap: float
    iterations: int
    objective_trace: list = field(default_factory=list)

    @property
    def dual_objective(self):
        return self.objective_trace[-1] if self.objective_trace else 0.0


def smo_binary(kernel, y, C, tol=1e-3, max_iter=1_000_000):
    """Maximise sum(a) - 1/2 a'Qa subject to 0 <= a <= C and y'a = 0."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of the minimisation form  1/2 a'Qa - e'a
    QD = kernel.diag()
    obj = 0.0
    trace = [obj]
    gap = np.inf
    it = 0
    pos = y > 0
    while it < max_iter:
        yG = -y * G
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            gap = 0.0
            break
        cand = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand))
        m = cand[i]
        M = np.min(np.where(low, yG, np.inf))
        gap = m - M
        if gap < tol:
            break
        Ki = kernel.column(i)
        diff = m - yG
        ok = low & (diff > 0)
        quad = QD[i] + QD - 2.0 * Ki
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(ok, -(diff * diff) / quad, np.inf)
        j = int(np.argmin(score))
        Kj = kernel.column(j)

        Qij = y[i] * y[j] * Ki[j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            q = QD[i] + QD[j] + 2 * Qij
            q = q if q > 0 else TAU
            delta = (-G[i] - G[j]) / q
            d0 = ai - aj
            ni, nj = ai + delta, aj + delta
            if d0 > 0:
                if nj < 0:
                    nj, ni = 0.0, d0
            elif ni < 0:
                ni, nj = 0.0, -d0
            if d0 > 0:
                if ni > C:
                    ni, nj = C, C - d0
            elif nj > C:
                nj, ni = C, C + d0
        else:
            q = QD[i] + QD[j] - 2 * Qij
            q = q if q > 0 else TAU
            delta = (G[i] - G[j]) / q
            s = ai + aj
            ni, nj = ai - delta, aj + delta
            if s > C:
                if ni > C:
                    ni, nj = C, s - C
            elif nj < 0:
                nj, ni = 0.0, s
            if s > C:
                if nj > C:
                    nj, ni = C, s - C
            elif ni < 0:
                ni, nj = 0.0, s
        dai, daj = ni - ai, nj - aj
        # change of the maximisation objective, from the pre-step gradient
        obj -= G[i] * dai + G[j] * daj + 0.5 * (
            QD[i] * dai * dai + QD[j] * daj * daj + 2 * Qij * dai * daj
        )
        trace.append(obj)
        alpha[i], alpha[j] = ni, nj
        G += y * (y[i] * dai * Ki + y[j] * daj * Kj)
        it += 1
    else:
        logger.warning("SMO stopped at max_iter=%d with KKT gap %.3g", max_iter, gap)

    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (at_upper & ~pos) | (at_lower & pos)
        lb_mask = (at_upper & pos) | (at_lower & ~pos)
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = (ub + lb) / 2 if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return BinarySolution(alpha=alpha, b=-float(rho), gap=float(gap), iterations=it, objective_trace=trace)


def kkt_violations(alpha, y, K, b, C):
    """Per-sample violation of the C-SVC optimality conditions."""
    y = np.asarray(y, dtype=np.float64)
    margin = y * ((alpha * y) @ K + b)
    v = np.zeros_like(margin)
    lower = alpha <= 0
    upper = alpha >= C
    free = ~(lower | upper)
    v[lower] = np.maximum(0.0, 1.0 - margin[lower])
    v[upper] = np.maximum(0.0, margin[upper] - 1.0)
    v[free] = np.abs(margin[free] - 1.0)
    return v


def dual_objective(alpha, y, K):
    ya = alpha * np.asarray(y, dtype=np.float64)
    return float(alpha.sum() - 0.5 * ya @ K @ ya)


@dataclass
class PairMachine:
    classes: tuple  # (positive class, negative class)
    support: np.ndarray
    coef: np.ndarray  # alpha * y for the support vectors
    b: float
    gap: float
    dual_objective: float
    iterations: int
    w: np.ndarray = None  # linear kernel only

    def decision(self, X, kernel_fn):
        if self.w is not None:
            return X @ self.w + self.b
        if len(self.support) == 0:
            return np.full(len(X), self.b)
        return kernel_fn(X, self.support) @ self.coef + self.b


@dataclass
class SvmModel:
    config: SvmConfig
    n_features: int
    gamma: float
    machines: list

    def _kernel_fn(self, A, B):
        dots = A @ B.T
        if self.config.kernel == "linear":
            return dots
        sqA = np.einsum("ij,ij->i", A, A)
        sqB = np.einsum("ij,ij->i", B, B)
        return np.exp(-self.gamma * np.maximum(sqA[:, None] + sqB[None, :] - 2 * dots, 0.0))

    def decision_functions(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.column_stack([m.decision(X, self._kernel_fn) for m in self.machines])

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise SvmError(f"expected {self.n_features} features, got shape {X.shape}")
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        votes = np.zeros((len(X), N_CLASSES), dtype=np.int64)
        for m in self.machines:
            f = m.decision(X, self._kernel_fn)
            a, b = m.classes
            votes[:, a] += f >= 0
            votes[:, b] += f < 0
        return np.argmax(votes, axis=1)

    def save(self, path):
        arrays = []
        extra = {"n_features": self.n_features, "gamma": self.gamma, "machines": []}
        for m in self.machines:
            arrays += [m.support, m.coef, m.w if m.w is not None else np.zeros(0)]
            extra["machines"].append(
                {
                    "classes": list(m.classes),
                    "b": m.b,
                    "gap": m.gap,
                    "dual_objective": m.dual_objective,
                    "iterations": m.iterations,
                    "linear": m.w is not None,
                }
            )
        save_params(path, "svm", self.config, arrays, extra)

    @classmethod
    def load(cls, path):
        meta, arrays = load_params(path, "svm")
        cfg = SvmConfig(**meta["config"])
        extra = meta["extra"]
        machines = []
        for k, info in enumerate(extra["machines"]):
            sv, coef, w = arrays[3 * k : 3 * k + 3]
            machines.append(
                PairMachine(
                    tuple(info["classes"]),
                    sv,
                    coef,
                    info["b"],
                    info["gap"],
                    info["dual_objective"],
                    info["iterations"],
                    w if info["linear"] else None,
                )
            )
        return cls(cfg, extra["n_features"], extra["gamma"], machines)


def svm_train(X, y, cfg=None, seed=0):
    """One-vs-one C-SVC.

    `seed` is accepted for interface symmetry with the other trainers; the
    working-set rule is deterministic so it has no effect on the result.
    """
    cfg = cfg or SvmConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise SvmError("X must be 2-D with one label per row")
    if not np.all(np.isfinite(X)):
        raise SvmError("non-finite values in X")
    classes = sorted(set(y.tolist()))
    if len(classes) < 2:
        raise SvmError("need at least two classes")
    gamma = cfg.gamma
    if cfg.kernel == "rbf" and gamma is None:
        gamma = default_gamma(X)
    machines = []
    for a, b in combinations(classes, 2):
        mask = (y == a) | (y == b)
        Xp = X[mask]
        yp = np.where(y[mask] == a, 1.0, -1.0)
        kern = Kernel(Xp, cfg.kernel, gamma)
        sol = smo_binary(kern, yp, cfg.C, cfg.tol, cfg.max_iter)
        sv = sol.alpha > 0
        coef = sol.alpha[sv] * yp[sv]
        w = coef @ Xp[sv] if cfg.kernel == "linear" else None
        machines.append(
            PairMachine(
                (a, b), Xp[sv], coef, sol.b, sol.gap, sol.dual_objective, sol.iterations, w
            )
        )
        logger.debug("pair %s: %d iterations, gap %.2e", (a, b), sol.iterations, sol.gap)
    return SvmModel(cfg, X.shape[1], gamma, machines)


def svm_predict(model, X):
    return model.predict(X)
