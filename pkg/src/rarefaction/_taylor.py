"""Truncated univariate Taylor arithmetic on coefficient arrays.

A jet is an array ``x`` of shape ``(K + 1, ...)`` with ``x[k] = f^(k)(t0)/k!``.
Trailing axes are batch axes (one jet per sample time).  The recurrences are
the standard ones of automatic differentiation in Taylor mode.
"""
from __future__ import annotations

import numpy as np


def const(value, K: int, like: np.ndarray) -> np.ndarray:
    out = np.zeros((K + 1,) + np.shape(like))
    out[0] = value
    return out


def variable(t: np.ndarray, K: int) -> np.ndarray:
    """Jet of the identity function expanded at ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros((K + 1,) + t.shape)
    out[0] = t
    if K >= 1:
        out[1] = 1.0
    return out


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(K + 1):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(K + 1):
        acc = a[k] - np.sum(out[:k] * b[k:0:-1], axis=0) if k else a[0].copy()
        out[k] = acc / b[0]
    return out


def recip(b: np.ndarray) -> np.ndarray:
    return div(const(1.0, b.shape[0] - 1, b[0]), b)


def deriv(a: np.ndarray) -> np.ndarray:
    """Jet of ``f'`` (one order shorter)."""
    k = np.arange(1, a.shape[0]).reshape((-1,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def integ(a: np.ndarray, c0) -> np.ndarray:
    """Jet of the antiderivative with constant term ``c0`` (one order longer)."""
    k = np.arange(1, a.shape[0] + 1).reshape((-1,) + (1,) * (a.ndim - 1))
    out = np.zeros((a.shape[0] + 1,) + a.shape[1:])
    out[0] = c0
    out[1:] = a / k
    return out


def exp(a: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for k in range(1, K + 1):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        out[k] = np.sum(j * a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / k
    return out


def log(a: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, K + 1):
        j = np.arange(1, k).reshape((-1,) + (1,) * (a.ndim - 1))
        s = np.sum(j * out[1:k] * a[k - 1 : 0 : -1], axis=0) if k > 1 else 0.0
        out[k] = (a[k] - s / k) / a[0]
    return out


def sqrt(a: np.ndarray) -> np.ndarray:
    K = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = np.sqrt(a[0])
    for k in range(1, K + 1):
        s = np.sum(out[1:k] * out[k - 1 : 0 : -1], axis=0) if k > 1 else 0.0
        out[k] = (a[k] - s) / (2.0 * out[0])
    return out


def power(a: np.ndarray, p: float) -> np.ndarray:
    """``a**p`` for positive ``a[0]``."""
    return exp(p * log(a))


def sincos(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    K = a.shape[0] - 1
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    s[0] = np.sin(a[0])
    c[0] = np.cos(a[0])
    for k in range(1, K + 1):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        ja = j * a[1 : k + 1]
        s[k] = np.sum(ja * c[k - 1 :: -1][:k], axis=0) / k
        c[k] = -np.sum(ja * s[k - 1 :: -1][:k], axis=0) / k
    return s, c
