"""Scikit-learn style wrappers around the lattice and MLP trainers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .lattice import LatticeSpec, interpolate_many
from .mechanics import PhysicsParams
from .mlp import init_mlp, mlp_forward, mlp_train
from .training import Dataset, TrainSchedule, train

__all__ = ["SpringSticksRegressor", "MlpRegressor"]


class SpringSticksRegressor(BaseEstimator, RegressorMixin):
    """Piecewise-multilinear regressor trained by damped stochastic dynamics.

    The lattice covers the bounding box of the training inputs (optionally
    padded); node heights relax toward the data under spring forces, friction
    and thermal noise.
    """

    def __init__(self, nodes_per_dim=5, mass=1.0, stiffness=1.0, friction=10.0,
                 temperature=1e-3, boltzmann=1.0, epochs=300, batch_size=16,
                 dt_epoch=0.1, inner_steps="auto", domain_pad=0.0, seed=0):
        self.nodes_per_dim = nodes_per_dim
        self.mass = mass
        self.stiffness = stiffness
        self.friction = friction
        self.temperature = temperature
        self.boltzmann = boltzmann
        self.epochs = epochs
        self.batch_size = batch_size
        self.dt_epoch = dt_epoch
        self.inner_steps = inner_steps
        self.domain_pad = domain_pad
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        y2 = y[:, None] if y.ndim == 1 else y
        self._y_1d = y.ndim == 1
        d = X.shape[1]
        nodes = self.nodes_per_dim
        if np.isscalar(nodes):
            nodes = [int(nodes)] * d
        lo = X.min(axis=0) - self.domain_pad
        hi = X.max(axis=0) + self.domain_pad
        span = np.where(hi > lo, hi - lo, 1.0)
        hi = np.where(hi > lo, hi, lo + span)
        self.spec_ = LatticeSpec.for_domain(lo, hi, nodes, m=y2.shape[1])
        params = PhysicsParams(mass=self.mass, stiffness=self.stiffness,
                               friction=self.friction, temperature=self.temperature,
                               boltzmann=self.boltzmann)
        schedule = TrainSchedule(epochs=self.epochs,
                                 batch_size=min(self.batch_size, X.shape[0]),
                                 dt_epoch=self.dt_epoch, inner_steps=self.inner_steps,
                                 seed=self.seed)
        self.report_ = train(self.spec_, params, Dataset(X, y2), schedule)
        self.state_ = self.report_.final_state
        return self

    def predict(self, X):
        if not hasattr(self, "state_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X)
        pred = interpolate_many(self.spec_, self.state_, X)
        return pred[:, 0] if self._y_1d else pred


class MlpRegressor(BaseEstimator, RegressorMixin):
    """One-hidden-layer ReLU network trained by SGD; biases optionally frozen."""

    def __init__(self, hidden=16, lr=1e-2, epochs=300, batch_size=16,
                 bias_trainable=True, seed=0):
        self.hidden = hidden
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.bias_trainable = bias_trainable
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        y2 = y[:, None] if y.ndim == 1 else y
        self._y_1d = y.ndim == 1
        params = init_mlp(X.shape[1], y2.shape[1], self.hidden, self.seed,
                          bias_trainable=self.bias_trainable)
        self.params_, self.loss_trace_, self.diverged_ = mlp_train(
            params, Dataset(X, y2), lr=self.lr, epochs=self.epochs,
            batch_size=min(self.batch_size, X.shape[0]), seed=self.seed)
        return self

    def predict(self, X):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before predict")
        X = check_array(X)
        pred = mlp_forward(self.params_, X)
        return pred[:, 0] if self._y_1d else pred
