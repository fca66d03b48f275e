"""Linear models: logistic regression and a hinge-loss linear SVM.

Both standardize features internally (fit ignores zero-variance columns by
leaving their scale at 1) and map coefficients back to the original space, so
the stored parameters apply directly to raw feature rows.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import ClassifierModel, prepare_fit_inputs, register_model, sigmoid

LOGIT_TOL = 1e-6
LOGIT_MAX_ITER = 10000


def logistic_loss_and_gradient(
    beta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    l2_strength: float,
) -> tuple[float, np.ndarray]:
    """Weighted mean logistic loss with an L2 penalty on the coefficients.

    ``beta[0]`` is the (unpenalized) intercept, ``beta[1:]`` the coefficients.
    Returns (loss, gradient) for the full parameter vector.
    """
    z = beta[0] + X @ beta[1:]
    # log(1 + exp(-s)) computed stably via logaddexp
    y_pm = 2.0 * y - 1.0
    losses = np.logaddexp(0.0, -y_pm * z)
    wsum = w.sum()
    loss = float((w * losses).sum() / wsum)
    loss += 0.5 * l2_strength * float(beta[1:] @ beta[1:])
    p = sigmoid(z)
    err = w * (p - y) / wsum
    grad = np.empty_like(beta)
    grad[0] = err.sum()
    grad[1:] = X.T @ err + l2_strength * beta[1:]
    return loss, grad


@register_model
class LogisticRegressionModel(ClassifierModel):
    """P(Y=1|x) = sigmoid(intercept + coefficients . x)."""

    kind = "logistic_regression"

    def __init__(self, intercept: float, coefficients: np.ndarray,
                 l2_strength: float, n_iterations: int = 0):
        self.intercept = intercept
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        self.l2_strength = l2_strength
        self.n_iterations = n_iterations
        self.n_features = self.coefficients.size

    def _proba(self, X: np.ndarray) -> np.ndarray:
        p1 = sigmoid(self.intercept + X @ self.coefficients)
        return np.column_stack([1.0 - p1, p1])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "l2_strength": self.l2_strength,
            "n_iterations": self.n_iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticRegressionModel":
        return cls(d["intercept"], np.array(d["coefficients"]),
                   d["l2_strength"], d.get("n_iterations", 0))


def train_logistic_regression(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    l2_strength: float = 1e-4,
    penalty: str = "l2",
    tol: float = LOGIT_TOL,
    max_iter: int = LOGIT_MAX_ITER,
) -> LogisticRegressionModel:
    """Full-batch gradient descent with Armijo backtracking line search.

    Converges when the gradient max-norm drops below ``tol``. The L2 penalty
    keeps separable data finite.
    """
    if penalty != "l2":
        raise ValueError("only the l2 penalty is supported")
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Xs = (X - mu) / sd

    beta = np.zeros(X.shape[1] + 1)
    loss, grad = logistic_loss_and_gradient(beta, Xs, y, w, l2_strength)
    it = 0
    for it in range(1, max_iter + 1):
        if np.abs(grad).max() < tol:
            break
        step = 1.0
        g2 = float(grad @ grad)
        for _ in range(60):
            candidate = beta - step * grad
            new_loss, new_grad = logistic_loss_and_gradient(
                candidate, Xs, y, w, l2_strength
            )
            if new_loss <= loss - 1e-4 * step * g2:
                break
            step *= 0.5
        beta, loss, grad = candidate, new_loss, new_grad

    coef = beta[1:] / sd
    intercept = float(beta[0] - (beta[1:] * mu / sd).sum())
    return LogisticRegressionModel(intercept, coef, l2_strength, it)


def _platt_calibrate(
    margins: np.ndarray, y: np.ndarray, w: np.ndarray,
    max_iter: int = 100,
) -> tuple[float, float]:
    """Fit p = sigmoid(a * margin + c) by Newton steps on regularized targets."""
    n_pos = float(w[y == 1].sum())
    n_neg = float(w[y == 0].sum())
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    a, c = 1.0, 0.0
    for _ in range(max_iter):
        z = a * margins + c
        p = sigmoid(z)
        d = w * (p - t)
        g = np.array([float(d @ margins), float(d.sum())])
        s = w * p * (1.0 - p)
        h11 = float(s @ (margins ** 2)) + 1e-12
        h12 = float(s @ margins)
        h22 = float(s.sum()) + 1e-12
        det = h11 * h22 - h12 * h12
        if abs(det) < 1e-18:
            break
        da = (h22 * g[0] - h12 * g[1]) / det
        dc = (h11 * g[1] - h12 * g[0]) / det
        a, c = a - da, c - dc
        if max(abs(da), abs(dc)) < 1e-10:
            break
    return float(a), float(c)


@register_model
class LinearSvmModel(ClassifierModel):
    """Hinge-loss linear classifier; decision boundary is w . x + b = 0.

    The hard decision is the margin sign exactly. Probabilities come from a
    Platt sigmoid fit on training margins and are used for ranking and soft
    voting, not for the decision.
    """

    kind = "linear_svm"

    def __init__(self, weights: np.ndarray, bias: float, regularization: float,
                 platt_a: float, platt_c: float):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = bias
        self.regularization = regularization
        self.platt_a = platt_a
        self.platt_c = platt_c
        self.n_features = self.weights.size

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights + self.bias

    def _proba(self, X: np.ndarray) -> np.ndarray:
        p1 = sigmoid(self.platt_a * (X @ self.weights + self.bias) + self.platt_c)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "regularization": self.regularization,
            "platt_a": self.platt_a,
            "platt_c": self.platt_c,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSvmModel":
        return cls(np.array(d["weights"]), d["bias"], d["regularization"],
                   d["platt_a"], d["platt_c"])


def train_linear_svm(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    regularization: float = 1e-3,
    epochs: int = 300,
    step_size: float = 0.5,
) -> LinearSvmModel:
    """Deterministic full-batch subgradient descent on the hinge objective.

    objective = reg/2 * ||w||^2 + weighted mean of max(0, 1 - y (w.x + b)).
    The step decays as step_size / sqrt(t + 1) over a fixed epoch count.
    Features are standardized internally; stored weights act on raw rows.
    """
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Xs = (X - mu) / sd
    y_pm = 2.0 * y - 1.0
    wsum = w.sum()

    wv = np.zeros(X.shape[1])
    b = 0.0
    for t in range(epochs):
        margins = y_pm * (Xs @ wv + b)
        viol = margins < 1.0
        coeff = (w * y_pm * viol) / wsum
        grad_w = regularization * wv - Xs.T @ coeff
        grad_b = -float(coeff.sum())
        eta = step_size / np.sqrt(t + 1.0)
        wv = wv - eta * grad_w
        b = b - eta * grad_b

    margins = Xs @ wv + b
    a, c = _platt_calibrate(margins, y, w)
    weights = wv / sd
    bias = float(b - (wv * mu / sd).sum())
    return LinearSvmModel(weights, bias, regularization, a, c)
