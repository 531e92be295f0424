from math import sqrt

import numpy as np


def parabolic_distance_2(x, t: float, y, s: float) -> float:
    """δ2((x,t),(y,s)) = sqrt(|x - y|^2 + |t - s|)"""
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return sqrt(float(diff @ diff) + abs(t - s))


def parabolic_distance_inf(x, t: float, y, s: float) -> float:
    """δ∞((x,t),(y,s)) = max(|x - y|, sqrt(|t - s|))"""
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return max(float(np.linalg.norm(diff)), sqrt(abs(t - s)))
