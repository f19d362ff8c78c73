"""Price predictors trained on lagged-close instances.

Five learners share a ``fit(instances) / predict(features)`` interface:

- ``YesterdayClose`` (``YC``): predicts the most recent close, no training.
- ``TrainingSetMinimum`` (``MinValInTS``): predicts the smallest target seen
  in training — a deliberately bad floor used as a sanity baseline.
- ``LeastSquaresRegressor`` (``LR``): ordinary least squares on the 3 lags.
- ``BayesianRidgeRegressor`` (``BRR``): evidence-approximation ridge whose
  regularization is re-estimated from the data.
- ``MlpRegressor`` (``MLPR``): a single-hidden-layer network trained
  full-batch with adam.

``fit`` is a pure function of (constructor arguments, training data): the
seeded learners re-initialize their generator on every call, so refitting on
the same data always reproduces bit-identical predictions.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .data import Instance

LEARNER_KINDS: tuple[str, ...] = ("YC", "MinValInTS", "LR", "BRR", "MLPR")


def _design_matrix(instances: Sequence[Instance]) -> tuple[np.ndarray, np.ndarray]:
    if not instances:
        raise ValueError("cannot fit on an empty training set")
    X = np.array([inst.features for inst in instances], dtype=float)
    y = np.array([inst.target for inst in instances], dtype=float)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data contains non-finite values")
    return X, y


class Learner:
    """Base: fit on instances, predict a close from a 3-lag feature tuple."""

    kind: str = "?"

    def fit(self, instances: Sequence[Instance]) -> "Learner":
        raise NotImplementedError

    def predict(self, features: Sequence[float]) -> float:
        raise NotImplementedError

    def _require_fitted(self, attr: str) -> None:
        if getattr(self, attr, None) is None:
            raise RuntimeError(f"{type(self).__name__} used before fit()")


class YesterdayClose(Learner):
    """Predicts tomorrow's close as today's close (random-walk baseline)."""

    kind = "YC"

    def fit(self, instances: Sequence[Instance]) -> "YesterdayClose":
        return self

    def predict(self, features: Sequence[float]) -> float:
        return float(features[-1])


class TrainingSetMinimum(Learner):
    """Predicts the minimum target of its training set, always."""

    kind = "MinValInTS"

    def __init__(self) -> None:
        self._minimum: float | None = None

    def fit(self, instances: Sequence[Instance]) -> "TrainingSetMinimum":
        _, y = _design_matrix(instances)
        self._minimum = float(y.min())
        return self

    def predict(self, features: Sequence[float]) -> float:
        self._require_fitted("_minimum")
        return self._minimum


class LeastSquaresRegressor(Learner):
    """OLS on the three lagged closes via the normal equations.

    A singular Gram matrix (e.g. constant training prices) falls back to the
    minimum-norm least-squares solution, which is scale-free and always
    defined.
    """

    kind = "LR"

    def __init__(self) -> None:
        self._coef: np.ndarray | None = None
        self._intercept = 0.0

    def fit(self, instances: Sequence[Instance]) -> "LeastSquaresRegressor":
        X, y = _design_matrix(instances)
        A = np.hstack([X, np.ones((X.shape[0], 1))])
        gram = A.T @ A
        rhs = A.T @ y
        try:
            w = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            w = np.linalg.lstsq(A, y, rcond=None)[0]
        self._coef = w[:-1]
        self._intercept = float(w[-1])
        return self

    def predict(self, features: Sequence[float]) -> float:
        self._require_fitted("_coef")
        return float(np.dot(self._coef, np.asarray(features, dtype=float)) + self._intercept)


class BayesianRidgeRegressor(Learner):
    """Bayesian linear regression with evidence-approximation hyperparameters.

    Centers features and target, then alternates between the posterior for
    the weights and MacKay updates for the noise precision ``alpha`` and
    weight precision ``lambda``, both given Gamma(1e-6, 1e-6) hyperpriors so
    the updates stay finite even on noiseless data.  Stops after ``max_iter``
    sweeps or when the weights move less than ``tol`` in L1 norm.

    On clean linear data the estimated ridge ``lambda/alpha`` collapses
    towards zero and the fit agrees with ordinary least squares.
    """

    kind = "BRR"

    def __init__(self, max_iter: int = 300, tol: float = 1e-3) -> None:
        self.max_iter = max_iter
        self.tol = tol
        self._coef: np.ndarray | None = None
        self._intercept = 0.0
        self.alpha_: float | None = None
        self.lambda_: float | None = None
        self.n_iter_: int | None = None

    _HYPER = 1e-6  # Gamma hyperprior scale for both precisions

    def fit(self, instances: Sequence[Instance]) -> "BayesianRidgeRegressor":
        X, y = _design_matrix(instances)
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        yc = y - y_mean
        n_samples, n_features = Xc.shape

        y_var = float(yc.var())
        alpha = 1.0 / y_var if y_var > 0.0 else 1.0
        lam = 1.0

        # Work in the eigenbasis of the Gram matrix: every sweep then costs a
        # handful of scalar operations instead of a linear solve.
        gram = Xc.T @ Xc
        xty = Xc.T @ yc
        eigvals, eigvecs = np.linalg.eigh(gram)
        eigvals = [max(float(e), 0.0) for e in eigvals]
        q = [float(v) for v in eigvecs.T @ xty]
        yty = float(yc @ yc)
        hyper2 = 2.0 * self._HYPER

        coef_eig = [0.0] * n_features
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            ridge = lam / alpha
            prev = coef_eig
            coef_eig = [qi / (ei + ridge) for qi, ei in zip(q, eigvals)]
            gamma = sum(alpha * e / (lam + alpha * e) for e in eigvals)
            sq_norm = sum(c * c for c in coef_eig)
            rss = max(
                yty - 2.0 * sum(c * qi for c, qi in zip(coef_eig, q))
                + sum(c * c * e for c, e in zip(coef_eig, eigvals)),
                0.0,
            )
            lam = (gamma + hyper2) / (sq_norm + hyper2)
            alpha = (n_samples - gamma + hyper2) / (rss + hyper2)
            if n_iter > 1 and sum(abs(c - p) for c, p in zip(coef_eig, prev)) < self.tol:
                break

        ridge = lam / alpha
        final_eig = np.array([qi / (ei + ridge) for qi, ei in zip(q, eigvals)])
        self._coef = eigvecs @ final_eig
        self._intercept = float(y_mean - self._coef @ x_mean)
        self.alpha_, self.lambda_, self.n_iter_ = alpha, lam, n_iter
        return self

    def predict(self, features: Sequence[float]) -> float:
        self._require_fitted("_coef")
        return float(np.dot(self._coef, np.asarray(features, dtype=float)) + self._intercept)


class MlpRegressor(Learner):
    """One-hidden-layer (100 relu units) regressor trained with full-batch adam.

    Both the features and the target are standardized by training statistics
    (zero-deviation columns fall back to scale 1), weights start from a seeded
    Glorot-uniform draw, and training runs exactly ``epochs`` full-batch adam
    steps (lr 1e-3, betas 0.9/0.999) on half mean squared error — no early
    stopping, so a fit's cost is constant and its result is a deterministic
    function of (seed, data).
    """

    kind = "MLPR"

    def __init__(self, hidden: int = 100, epochs: int = 200, lr: float = 1e-3, seed: int = 0) -> None:
        self.hidden = hidden
        self.epochs = epochs
        self.lr = lr
        self.seed = seed
        self._params: tuple[np.ndarray, ...] | None = None
        self._x_mean: np.ndarray | None = None
        self._x_scale: np.ndarray | None = None
        self._y_mean = 0.0
        self._y_scale = 1.0

    @staticmethod
    def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    def fit(self, instances: Sequence[Instance]) -> "MlpRegressor":
        X, y = _design_matrix(instances)
        self._x_mean = X.mean(axis=0)
        x_std = X.std(axis=0)
        self._x_scale = np.where(x_std > 0.0, x_std, 1.0)
        self._y_mean = float(y.mean())
        y_std = float(y.std())
        self._y_scale = y_std if y_std > 0.0 else 1.0

        Xs = (X - self._x_mean) / self._x_scale
        ys = (y - self._y_mean) / self._y_scale
        n = Xs.shape[0]

        rng = np.random.default_rng(self.seed)
        w1 = self._glorot(rng, Xs.shape[1], self.hidden)
        b1 = rng.uniform(
            -math.sqrt(6.0 / (Xs.shape[1] + self.hidden)),
            math.sqrt(6.0 / (Xs.shape[1] + self.hidden)),
            size=self.hidden,
        )
        w2 = self._glorot(rng, self.hidden, 1)
        b2 = rng.uniform(
            -math.sqrt(6.0 / (self.hidden + 1)),
            math.sqrt(6.0 / (self.hidden + 1)),
            size=1,
        )

        params = [w1, b1, w2, b2]
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8

        for step in range(1, self.epochs + 1):
            z1 = Xs @ w1 + b1
            a1 = np.maximum(z1, 0.0)
            out = (a1 @ w2 + b2).ravel()
            # d(loss)/d(out) for loss = mean((out - y)^2) / 2
            g_out = (out - ys)[:, None] / n
            g_w2 = a1.T @ g_out
            g_b2 = g_out.sum(axis=0)
            g_a1 = g_out @ w2.T
            g_z1 = g_a1 * (z1 > 0.0)
            g_w1 = Xs.T @ g_z1
            g_b1 = g_z1.sum(axis=0)

            for i, grad in enumerate((g_w1, g_b1, g_w2, g_b2)):
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad * grad
                m_hat = m[i] / (1.0 - beta1 ** step)
                v_hat = v[i] / (1.0 - beta2 ** step)
                params[i] = params[i] - self.lr * m_hat / (np.sqrt(v_hat) + eps)
            w1, b1, w2, b2 = params

        self._params = (w1, b1, w2, b2)
        return self

    def predict(self, features: Sequence[float]) -> float:
        self._require_fitted("_params")
        w1, b1, w2, b2 = self._params
        xs = (np.asarray(features, dtype=float) - self._x_mean) / self._x_scale
        a1 = np.maximum(xs @ w1 + b1, 0.0)
        out = (a1 @ w2 + b2).item()
        return out * self._y_scale + self._y_mean


def make_learner(kind: str, seed: int = 0) -> Learner:
    """Instantiate a learner by kind token; ``seed`` only affects ``MLPR``."""
    if kind == "YC":
        return YesterdayClose()
    if kind == "MinValInTS":
        return TrainingSetMinimum()
    if kind == "LR":
        return LeastSquaresRegressor()
    if kind == "BRR":
        return BayesianRidgeRegressor()
    if kind == "MLPR":
        return MlpRegressor(seed=seed)
    raise ValueError(f"unknown learner kind {kind!r}; expected one of {', '.join(LEARNER_KINDS)}")
