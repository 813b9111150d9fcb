"""One-vs-rest linear classifiers trained by stochastic subgradient descent."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

__all__ = [
    "NULL",
    "REL",
    "ARG",
    "CORE_ROLES",
    "DEFAULT_ROLES",
    "RoleSet",
    "LinearClassifier",
    "MaxEntClassifier",
    "LinearSVMClassifier",
    "make_classifier",
    "objective_and_gradient",
    "predict_1step",
    "predict_2step",
]

NULL = "NULL"
REL = "REL"
ARG = "ARG"
CORE_ROLES = ("Arg0", "Arg1", "Arg2", "Arg3", "Arg4")
DEFAULT_ROLES = CORE_ROLES + tuple(
    "ArgM-" + r for r in (
        "ADJ", "ADV", "CAU", "COM", "DIR", "DIS", "DSP", "EXT", "GOL", "I", "LOC",
        "LVB", "MNR", "MOD", "NEG", "PRD", "PRP", "Partice", "REC", "RES", "TMP",
    )
)


@dataclass(frozen=True)
class RoleSet:
    labels: tuple = DEFAULT_ROLES + (NULL,)
    core: frozenset = frozenset(CORE_ROLES)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate role labels")
        if not self.core <= set(self.labels):
            raise ValueError("core roles must be a subset of the labels")

    def __contains__(self, label) -> bool:
        return label in self.labels

    def canonical(self, name: str) -> str:
        """Map case variants such as ``ARGM-NEG`` onto the configured spelling."""
        if name in self.labels or name == REL:
            return name
        for label in self.labels:
            if label.lower() == name.lower():
                return label
        if name.upper() == REL:
            return REL
        raise ValueError(f"unknown role {name!r}")

    def sort_key(self, label):
        try:
            return (0, self.labels.index(label), "")
        except ValueError:
            return (1, 0, str(label))

    def order(self, labels: Iterable) -> list:
        return sorted(set(labels), key=self.sort_key)


def _margins(W, b, X, Y):
    return Y * (X @ W + b)


def objective_and_gradient(W: np.ndarray, b: np.ndarray, X, Y: np.ndarray, lam: float,
                           loss: str = "log") -> tuple[float, np.ndarray, np.ndarray]:
    """Regularised one-vs-rest loss and its (sub)gradient.

    ``Y`` holds +1/-1 targets, one column per class. The objective is
    ``lam/2 * ||W||^2 + mean_i sum_c loss(y_ic * (x_i . w_c + b_c))``;
    the bias is not regularised.
    """
    n = X.shape[0]
    M = _margins(W, b, X, Y)
    if loss == "log":
        # log(1 + exp(-m)), stable for large |m|
        losses = np.logaddexp(0.0, -M)
        G = -Y * expit(-M)
    elif loss == "hinge":
        losses = np.maximum(0.0, 1.0 - M)
        G = -Y * (M < 1.0)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    value = 0.5 * lam * float(np.sum(W * W)) + float(losses.sum()) / n
    gW = lam * W + np.asarray(X.T @ G) / n
    gb = G.sum(axis=0) / n
    return value, gW, gb


class LinearClassifier(ClassifierMixin, BaseEstimator):
    """Multi-class linear classifier, one binary hyperplane per class.

    Minimises ``1/2 ||w||^2 + C * sum_i loss_i`` per class with mini-batch
    subgradient steps ``eta_t = eta0 / (1 + lam * t)`` where
    ``lam = 1 / (C * n_samples)``. Batches are drawn from a seeded shuffle
    each epoch, so training is deterministic.

    Parameters
    ----------
    loss : {"hinge", "log"}
        Hinge gives a linear SVM, log gives maximum entropy (logistic).
    C : float
        Inverse regularisation strength.
    eta0 : float
        Initial learning rate.
    n_epochs : int
        Passes over the data. Zero leaves an all-zero model.
    batch_size : int
    random_state : int
    label_order : sequence, optional
        Class order; decides ``classes_`` and therefore argmax ties.
    """

    def __init__(self, loss="hinge", C=0.1, eta0=0.1, n_epochs=50, batch_size=16,
                 random_state=0, label_order=None):
        self.loss = loss
        self.C = C
        self.eta0 = eta0
        self.n_epochs = n_epochs
        self.batch_size = batch_size
        self.random_state = random_state
        self.label_order = label_order

    def _ordered_classes(self, y) -> list:
        order = list(self.label_order) if self.label_order is not None else []
        rank = {label: i for i, label in enumerate(order)}
        return sorted(set(y), key=lambda c: (c not in rank, rank.get(c, 0), str(c)))

    def fit(self, X, y):
        if self.loss not in ("hinge", "log"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        X = sp.csr_matrix(X, dtype=float)
        y = list(y)
        n, d = X.shape
        if n == 0:
            raise ValueError("cannot fit on empty data")
        if len(y) != n:
            raise ValueError(f"X has {n} rows but y has {len(y)} labels")
        self.classes_ = np.array(self._ordered_classes(y), dtype=object)
        index = {c: i for i, c in enumerate(self.classes_)}
        L = len(self.classes_)
        Y = -np.ones((n, L))
        Y[np.arange(n), [index[label] for label in y]] = 1.0
        W = np.zeros((d, L))
        b = np.zeros(L)
        lam = 1.0 / (self.C * n)
        curve = []
        if L > 1:
            rng = np.random.default_rng(self.random_state)
            t = 0
            bs = max(1, int(self.batch_size))
            for _ in range(int(self.n_epochs)):
                perm = rng.permutation(n)
                Xp, Yp = X[perm], Y[perm]
                for start in range(0, n, bs):
                    Xb, Yb = Xp[start:start + bs], Yp[start:start + bs]
                    _, gW, gb = objective_and_gradient(W, b, Xb, Yb, lam, self.loss)
                    eta = self.eta0 / (1.0 + lam * t)
                    W -= eta * gW
                    b -= eta * gb
                    t += 1
                curve.append(objective_and_gradient(W, b, X, Y, lam, self.loss)[0])
        self.coef_ = W.T.copy()
        self.intercept_ = b
        self.n_features_in_ = d
        self.objective_curve_ = curve
        return self

    def decision_function(self, X) -> np.ndarray:
        """Raw ``w_c . x + b_c`` for every class, shape ``(n_samples, n_classes)``."""
        check_is_fitted(self, "coef_")
        X = sp.csr_matrix(X, dtype=float) if sp.issparse(X) else np.atleast_2d(np.asarray(X, float))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.asarray(X @ self.coef_.T) + self.intercept_

    def predict(self, X) -> np.ndarray:
        # np.argmax returns the first maximum, i.e. the earliest class in order
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        return {
            "params": self.get_params(),
            "classes": list(self.classes_),
            "coef": self.coef_.tolist(),
            "intercept": self.intercept_.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearClassifier":
        params = dict(data["params"])
        model = LinearClassifier(**params)
        model.classes_ = np.array(data["classes"], dtype=object)
        model.coef_ = np.array(data["coef"], dtype=float).reshape(len(model.classes_), -1)
        model.intercept_ = np.array(data["intercept"], dtype=float)
        model.n_features_in_ = model.coef_.shape[1]
        model.objective_curve_ = []
        return model


class MaxEntClassifier(LinearClassifier):
    def __init__(self, loss="log", C=1.0, eta0=0.1, n_epochs=50, batch_size=16,
                 random_state=0, label_order=None):
        super().__init__(loss, C, eta0, n_epochs, batch_size, random_state, label_order)


class LinearSVMClassifier(LinearClassifier):
    def __init__(self, loss="hinge", C=0.1, eta0=0.1, n_epochs=50, batch_size=16,
                 random_state=0, label_order=None):
        super().__init__(loss, C, eta0, n_epochs, batch_size, random_state, label_order)


def make_classifier(kind: str, C: Optional[float] = None, **params) -> LinearClassifier:
    """``kind`` is ``"svm"`` or ``"maxent"``; ``C`` defaults to 0.1 and 1.0 respectively."""
    if kind == "svm":
        return LinearClassifier(loss="hinge", C=0.1 if C is None else C, **params)
    if kind in ("maxent", "me"):
        return LinearClassifier(loss="log", C=1.0 if C is None else C, **params)
    raise ValueError(f"unknown classifier kind {kind!r}")


def predict_1step(model: LinearClassifier, X) -> np.ndarray:
    return model.predict(X)


def predict_2step(id_model: LinearClassifier, cls_model: Optional[LinearClassifier], X) -> np.ndarray:
    """Identify arguments first, then classify the identified ones."""
    is_arg = id_model.predict(X) == ARG
    out = np.full(X.shape[0], NULL, dtype=object)
    if cls_model is not None and is_arg.any():
        rows = np.flatnonzero(is_arg)
        out[rows] = cls_model.predict(X[rows])
    return out
