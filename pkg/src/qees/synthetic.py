"""Closed-form tasks for exercising the optimizer without an environment."""

from __future__ import annotations

import numpy as np


class QuadraticBowl:
    """F(theta) = -||theta - target||^2; the behavior is the first two coordinates."""

    bc_dim = 2

    def __init__(self, target, start=None):
        self.target = np.asarray(target, dtype=np.float64).copy()
        self.dim = self.target.size
        if self.dim < 2:
            raise ValueError("QuadraticBowl needs at least 2 dimensions")
        self.start = np.zeros(self.dim) if start is None else np.asarray(start, dtype=np.float64).copy()

    def fitness(self, theta) -> float:
        d = np.asarray(theta, dtype=np.float64) - self.target
        return -float(d @ d)

    def initial_center(self, seed: int) -> np.ndarray:
        return self.start.copy()

    def evaluate(self, thetas: np.ndarray, episode_seeds=None, workers: int = 1):
        d = thetas - self.target[None, :]
        fitness = -np.einsum("ij,ij->i", d, d)
        return fitness, thetas[:, :2].copy()

    def evaluate_center(self, theta: np.ndarray):
        return self.fitness(theta), np.asarray(theta[:2], dtype=np.float64).copy()


class LinearTask:
    """F(theta) = a . theta."""

    bc_dim = 2

    def __init__(self, direction):
        self.a = np.asarray(direction, dtype=np.float64).copy()
        self.dim = self.a.size

    def initial_center(self, seed: int) -> np.ndarray:
        return np.zeros(self.dim)

    def evaluate(self, thetas: np.ndarray, episode_seeds=None, workers: int = 1):
        return thetas @ self.a, thetas[:, :2].copy()

    def evaluate_center(self, theta: np.ndarray):
        return float(theta @ self.a), np.asarray(theta[:2], dtype=np.float64).copy()
