"""Single-round win-rate prediction from lineup pairs.

One ``winrate(camp1, camp2)`` interface covers the synthetic oracle, a
lookup table, and the learned net.  The learned model is an
sklearn-style estimator (``fit`` / ``predict_proba`` / ``get_params``)
over multi-hot lineup features; a zero-hidden-layer instance of the same
estimator is the logistic baseline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score
from sklearn.model_selection import KFold

from .net import AdamState, DenseNet, load_checkpoint, save_checkpoint, train_step
from .oracle import MatchDataset


def encode_lineups(n_heroes: int, lineup_c1, lineup_c2) -> np.ndarray:
    """Multi-hot feature vector: camp1 occupancy (N) then camp2 occupancy (N)."""
    x = np.zeros(2 * n_heroes, dtype=np.float32)
    seen = set()
    for offset, lineup in ((0, lineup_c1), (n_heroes, lineup_c2)):
        for h in lineup:
            h = int(h)
            if not 0 <= h < n_heroes:
                raise ValueError(f"hero id {h} out of range")
            if h in seen:
                raise ValueError(f"hero id {h} appears twice across the lineups")
            seen.add(h)
            x[offset + h] = 1.0
    return x


def encode_dataset(n_heroes: int, dataset: MatchDataset) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized multi-hot encoding of a whole dataset."""
    n = len(dataset)
    x = np.zeros((n, 2 * n_heroes), dtype=np.float32)
    rows = np.arange(n)[:, None]
    if n:
        x[rows, dataset.camp1] = 1.0
        x[rows, n_heroes + dataset.camp2] = 1.0
    return x, dataset.win.astype(np.float32)


class TableWinratePredictor:
    """Fixed lookup keyed on unordered lineup pairs; 0.5 when unseen."""

    def __init__(self, table: dict | None = None, default: float = 0.5):
        self.table = {}
        self.default = default
        if table:
            for (a, b), phi in table.items():
                self.set(a, b, phi)

    def set(self, lineup_c1, lineup_c2, phi: float):
        self.table[(frozenset(lineup_c1), frozenset(lineup_c2))] = float(phi)

    def winrate(self, lineup_c1, lineup_c2) -> float:
        key = (frozenset(lineup_c1), frozenset(lineup_c2))
        if key in self.table:
            return self.table[key]
        rev = (key[1], key[0])
        if rev in self.table:
            return 1.0 - self.table[rev]
        return self.default


class WinrateClassifier(BaseEstimator, ClassifierMixin):
    """Dense net over multi-hot lineup features, sigmoid win probability.

    ``hidden=()`` gives the logistic-regression baseline trained with the
    same engine.  Early-stops when validation loss stops improving.
    """

    def __init__(self, hidden=(256, 128), lr=1e-4, batch_size=256, epochs=30,
                 l2=0.0, seed=0, val_fraction=0.1, patience=3,
                 calibrate=False, symmetrize=False):
        self.hidden = hidden
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.val_fraction = val_fraction
        self.patience = patience
        self.calibrate = calibrate
        self.symmetrize = symmetrize

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float32)
        y = np.asarray(y, dtype=np.float32)
        if len(X) == 0:
            raise ValueError("cannot fit on an empty dataset")
        if len(np.unique(y)) < 2:
            warnings.warn("training labels contain a single class")
        rng = np.random.default_rng(self.seed)
        n_val = int(len(X) * self.val_fraction) if len(X) >= 20 else 0
        perm = rng.permutation(len(X))
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        self.net_ = DenseNet(X.shape[1], tuple(self.hidden), "sigmoid", seed=self.seed)
        adam = AdamState(self.net_, lr=self.lr)
        self.history_ = []
        best_val, best_params, since_best = np.inf, None, 0
        for epoch in range(self.epochs):
            order = rng.permutation(train_idx)
            losses = []
            for i in range(0, len(order), self.batch_size):
                idx = order[i:i + self.batch_size]
                loss, _ = train_step(self.net_, adam, X[idx], y[idx], "bce", self.l2)
                losses.append(loss)
            entry = {"epoch": epoch, "train_loss": float(np.mean(losses))}
            if n_val:
                val_loss, _, _ = self.net_.loss_and_grads(X[val_idx], y[val_idx], "bce")
                entry["val_loss"] = float(val_loss)
                if val_loss < best_val - 1e-5:
                    best_val, since_best = val_loss, 0
                    best_params = [p.copy() for p in self.net_.parameters()]
                else:
                    since_best += 1
            self.history_.append(entry)
            if n_val and since_best > self.patience:
                break
        if best_params is not None:
            self.net_.set_parameters(best_params)
        self.platt_ = None
        if self.calibrate and n_val:
            self.platt_ = self._fit_platt(X[val_idx], y[val_idx])
        return self

    def _raw_proba(self, X):
        """Positive-class probability before calibration.

        With ``symmetrize`` on, the feature vector is treated as two
        camp halves and the prediction is averaged with the complement of
        the side-swapped input, so f(A,B) + f(B,A) = 1 by construction.
        """
        X = np.asarray(X, dtype=np.float32)
        p = self.net_.forward(X)
        if self.symmetrize:
            half = X.shape[1] // 2
            swapped = np.concatenate([X[:, half:], X[:, :half]], axis=1)
            p = 0.5 * (p + 1.0 - self.net_.forward(swapped))
        return p

    def _fit_platt(self, X_val, y_val):
        """Platt scaling on the validation split: sigmoid(a*logit + b)."""
        from scipy.optimize import minimize
        p = np.clip(self._raw_proba(X_val).astype(np.float64), 1e-7, 1 - 1e-7)
        logit = np.log(p / (1.0 - p))
        y = y_val.astype(np.float64)

        def nll(ab):
            z = ab[0] * logit + ab[1]
            # log(1 + e^z) computed stably
            return float(np.mean(np.logaddexp(0.0, z) - y * z))

        res = minimize(nll, x0=np.array([1.0, 0.0]), method="Nelder-Mead")
        return (float(res.x[0]), float(res.x[1]))

    def predict_proba(self, X):
        p = self._raw_proba(X)
        if getattr(self, "platt_", None) is not None:
            a, b = self.platt_
            p = np.clip(p.astype(np.float64), 1e-7, 1 - 1e-7)
            z = a * np.log(p / (1.0 - p)) + b
            p = 1.0 / (1.0 + np.exp(-z))
        return np.stack([1.0 - p, p], axis=1)

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)


class NetWinratePredictor:
    """Learned φ behind the common ``winrate`` interface.

    With ``symmetrize`` on (default), prediction averages f(A,B) and
    1 - f(B,A) so the zero-sum complement property holds at inference.
    """

    def __init__(self, net: DenseNet, n_heroes: int, symmetrize: bool = True,
                 platt: tuple[float, float] | None = None):
        if net.input_dim != 2 * n_heroes:
            raise ValueError("net input width must be 2 * n_heroes")
        self.net = net
        self.n_heroes = n_heroes
        self.symmetrize = symmetrize
        self.platt = platt

    def winrate(self, lineup_c1, lineup_c2) -> float:
        x = encode_lineups(self.n_heroes, lineup_c1, lineup_c2)[None, :]
        p = float(self.net.forward(x)[0])
        if self.symmetrize:
            xr = encode_lineups(self.n_heroes, lineup_c2, lineup_c1)[None, :]
            pr = float(self.net.forward(xr)[0])
            p = 0.5 * (p + 1.0 - pr)
        if self.platt is not None:
            a, b = self.platt
            p = min(max(p, 1e-7), 1.0 - 1e-7)
            z = a * np.log(p / (1.0 - p)) + b
            p = float(1.0 / (1.0 + np.exp(-z)))
        return p

    def save(self, path):
        save_checkpoint(self.net, path, metadata={
            "model": "winrate", "n_heroes": self.n_heroes,
            "symmetrize": self.symmetrize,
            "platt": list(self.platt) if self.platt else None})

    @classmethod
    def load(cls, path) -> "NetWinratePredictor":
        net, _, meta = load_checkpoint(path)
        platt = meta.get("platt")
        return cls(net, meta["n_heroes"], meta.get("symmetrize", True),
                   platt=tuple(platt) if platt else None)


def train_winrate(dataset: MatchDataset, n_heroes: int, symmetrize: bool = True,
                  **hyper) -> NetWinratePredictor:
    """Train the learned predictor on a match dataset."""
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    x, y = encode_dataset(n_heroes, dataset)
    clf = WinrateClassifier(symmetrize=symmetrize, **hyper).fit(x, y)
    pred = NetWinratePredictor(clf.net_, n_heroes, symmetrize=symmetrize,
                               platt=clf.platt_)
    pred.history = clf.history_
    return pred


def evaluate_metrics(model, dataset: MatchDataset, n_heroes: int,
                     k_folds: int = 10, seed: int = 0) -> dict:
    """Accuracy / AUC / F1 averaged over k folds.

    ``model`` is either an sklearn-style estimator (retrained per fold on
    the remaining folds) or a fixed predictor with ``winrate`` (evaluated
    per fold as-is).  AUC uses the rank statistic with tie correction;
    single-class folds are excluded from AUC with a warning.
    """
    if k_folds < 2:
        raise ValueError("k_folds must be >= 2")
    x, y = encode_dataset(n_heroes, dataset)
    trainable = hasattr(model, "fit")
    if not trainable:
        probs_all = np.array([model.winrate(a, b)
                              for a, b in zip(dataset.camp1, dataset.camp2)])
    folds = []
    kf = KFold(n_splits=k_folds, shuffle=True, random_state=seed)
    for train_idx, test_idx in kf.split(x):
        if trainable:
            from sklearn.base import clone
            est = clone(model).fit(x[train_idx], y[train_idx])
            probs = est.predict_proba(x[test_idx])[:, 1]
        else:
            probs = probs_all[test_idx]
        yt = y[test_idx]
        fold = {
            "accuracy": float(accuracy_score(yt, probs >= 0.5)),
            "f1": float(f1_score(yt, probs >= 0.5, zero_division=0)),
        }
        if len(np.unique(yt)) < 2:
            warnings.warn("fold has a single class; AUC undefined, excluded")
            fold["auc"] = None
        else:
            fold["auc"] = float(roc_auc_score(yt, probs))
        folds.append(fold)
    aucs = [f["auc"] for f in folds if f["auc"] is not None]
    return {
        "accuracy": float(np.mean([f["accuracy"] for f in folds])),
        "auc": float(np.mean(aucs)) if aucs else None,
        "f1": float(np.mean([f["f1"] for f in folds])),
        "folds": folds,
    }


@dataclass
class HeroStats:
    """Per-hero appearance counts and winning-side rates."""

    appearances: np.ndarray
    wins: np.ndarray

    @property
    def n_heroes(self) -> int:
        return len(self.appearances)

    def winrate(self, hero: int) -> float:
        if self.appearances[hero] == 0:
            return 0.5
        return float(self.wins[hero] / self.appearances[hero])

    @property
    def winrates(self) -> np.ndarray:
        out = np.full(self.n_heroes, 0.5)
        seen = self.appearances > 0
        out[seen] = self.wins[seen] / self.appearances[seen]
        return out

    def to_json(self) -> dict:
        return {"appearances": self.appearances.tolist(), "wins": self.wins.tolist()}


def hero_stats(dataset: MatchDataset, n_heroes: int) -> HeroStats:
    """Count every appearance on either side; winning-side credit per hero."""
    apps = np.zeros(n_heroes, dtype=np.int64)
    wins = np.zeros(n_heroes, dtype=np.int64)
    for a, b, y in zip(dataset.camp1, dataset.camp2, dataset.win):
        for h in a:
            apps[h] += 1
            wins[h] += int(y)
        for h in b:
            apps[h] += 1
            wins[h] += 1 - int(y)
    return HeroStats(apps, wins)
