"""Traced finite-dimensional algebras and their noncommutative L^p machinery.

An element is a direct sum of square complex blocks; block ``b`` carries a
positive trace weight ``w_b`` so that ``tau(x) = sum_b w_b Tr(x_b)``.  Every
norm here is computed from the singular values of the blocks, which come from
the eigendecomposition of ``x* x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

RANK_CUTOFF = 1e-12
SELF_ADJOINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TracedElement:
    blocks: tuple[np.ndarray, ...]
    weights: tuple[float, ...]

    def __init__(self, blocks, weights=None):
        if isinstance(blocks, np.ndarray) and blocks.ndim == 2:
            blocks = [blocks]
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks)
        if weights is None:
            weights = (1.0,) * len(blocks)
        weights = tuple(float(w) for w in np.broadcast_to(weights, (len(blocks),)))
        if not blocks:
            raise ValueError("need at least one block")
        for b in blocks:
            if b.shape[0] != b.shape[1]:
                raise ValueError(f"block of shape {b.shape} is not square")
        if any(not w > 0 for w in weights):
            raise ValueError("block weights must be strictly positive")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def diagonal(cls, values, weights=None) -> "TracedElement":
        """Commutative element: one 1x1 block per value (a function on a weighted finite set)."""
        values = np.asarray(values, dtype=complex).ravel()
        return cls([v.reshape(1, 1) for v in values], 1.0 if weights is None else weights)

    @classmethod
    def identity_like(cls, x: "TracedElement") -> "TracedElement":
        return cls([np.eye(b.shape[0]) for b in x.blocks], x.weights)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    def _check_compatible(self, other: "TracedElement"):
        if self.dims != other.dims or not np.allclose(self.weights, other.weights):
            raise ValueError("elements live in different traced algebras")

    def adjoint(self) -> "TracedElement":
        return TracedElement([b.conj().T for b in self.blocks], self.weights)

    def __add__(self, other: "TracedElement") -> "TracedElement":
        self._check_compatible(other)
        return TracedElement([a + b for a, b in zip(self.blocks, other.blocks)], self.weights)

    def __sub__(self, other: "TracedElement") -> "TracedElement":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "TracedElement":
        return TracedElement([scalar * b for b in self.blocks], self.weights)

    def __matmul__(self, other: "TracedElement") -> "TracedElement":
        self._check_compatible(other)
        return TracedElement([a @ b for a, b in zip(self.blocks, other.blocks)], self.weights)

    def allclose(self, other: "TracedElement", atol: float = 1e-12) -> bool:
        return self.dims == other.dims and all(
            np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.blocks, other.blocks)
        )

    def is_self_adjoint(self, tol: float = SELF_ADJOINT_TOL) -> bool:
        scale = max(1.0, max(np.abs(b).max() for b in self.blocks))
        return all(np.abs(b - b.conj().T).max() <= tol * scale for b in self.blocks)


@dataclass(frozen=True)
class SingularProfile:
    """The step function ``t -> mu_t(x)``.

    ``values[i]`` is the value on ``(breakpoints[i-1], breakpoints[i]]`` with an
    implicit ``breakpoints[-1] = 0``; beyond the last breakpoint the profile is 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="left")
        padded = np.append(self.values, 0.0)
        out = padded[idx]
        return np.where(t > 0, out, np.inf if len(self.values) else 0.0)

    @property
    def support_trace(self) -> float:
        return float(self.breakpoints[-1]) if len(self.breakpoints) else 0.0

    def allclose(self, other: "SingularProfile", atol: float = 1e-10) -> bool:
        if len(self.values) != len(other.values):
            return False
        return bool(
            np.allclose(self.breakpoints, other.breakpoints, atol=atol, rtol=0)
            and np.allclose(self.values, other.values, atol=atol, rtol=0)
        )


def trace(x: TracedElement) -> complex:
    return complex(sum(w * np.trace(b) for b, w in zip(x.blocks, x.weights)))


def _abs_eigenvalues(x: TracedElement) -> list[np.ndarray]:
    # eigenvectors v of x* x; the eigenvalue of |x| is read off as ||x v||, which stays
    # accurate near zero where sqrt of the eigenvalue would only give ~1e-8 ||x||
    out = []
    for b in x.blocks:
        _, vec = np.linalg.eigh(b.conj().T @ b)
        out.append(np.linalg.norm(b @ vec, axis=0))
    return out


def singular_values(x: TracedElement) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of |x| with their trace weights, sorted decreasingly.

    Values below ``RANK_CUTOFF * ||x||_inf`` are dropped.
    """
    per_block = _abs_eigenvalues(x)
    vals = np.concatenate(per_block)
    wts = np.concatenate([np.full(len(s), w) for s, w in zip(per_block, x.weights)])
    if vals.size == 0 or vals.max() == 0.0:
        return np.empty(0), np.empty(0)
    keep = vals > RANK_CUTOFF * vals.max()
    vals, wts = vals[keep], wts[keep]
    order = np.argsort(-vals, kind="stable")
    return vals[order], wts[order]


def lp_norm(x: TracedElement, p: float) -> float:
    """``tau(|x|^p)^(1/p)``; operator norm for ``p = inf``."""
    if not (p >= 1):
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    per_block = _abs_eigenvalues(x)
    if np.isinf(p):
        return float(max((s.max() if s.size else 0.0) for s in per_block))
    # factor out the largest value so huge exponents (p' near 1) do not overflow
    top = max((s.max() if s.size else 0.0) for s in per_block)
    if top == 0.0:
        return 0.0
    total = sum(w * np.sum((s / top) ** p) for s, w in zip(per_block, x.weights))
    return float(top * total ** (1.0 / p))


def singular_numbers(x: TracedElement) -> SingularProfile:
    """Generalized singular numbers ``mu_t(x) = inf{lam > 0 : tau(1_(lam, inf)(|x|)) < t}``.

    With the strict inequality the value on ``(W_{k-1}, W_k]`` is the k-th largest
    eigenvalue of ``|x|``, where ``W_k`` is the cumulative trace weight; the profile
    is therefore left-continuous at each breakpoint.
    """
    vals, wts = singular_values(x)
    if vals.size == 0:
        return SingularProfile(np.empty(0), np.empty(0))
    cum = np.cumsum(wts)
    # merge eigenvalues equal up to RANK_CUTOFF * ||x||_inf into one step
    distinct = np.append(vals[:-1] - vals[1:] > RANK_CUTOFF * vals[0], True)
    return SingularProfile(cum[distinct], vals[distinct])


def weak_lp_norm(x: TracedElement, p: float) -> float:
    """``sup_t t^(1/p) mu_t(x)``, attained at right endpoints of the constancy intervals."""
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    prof = singular_numbers(x)
    if prof.values.size == 0:
        return 0.0
    if np.isinf(p):
        return float(prof.values[0])
    return float(np.max(prof.breakpoints ** (1.0 / p) * prof.values))


def spectral_projection(x: TracedElement, interval: Sequence[float]) -> TracedElement:
    """Spectral projection of a self-adjoint ``x`` onto the open interval ``(lo, hi)``."""
    lo, hi = interval
    if not x.is_self_adjoint():
        raise ValueError("spectral_projection needs a self-adjoint element")
    blocks = []
    for b in x.blocks:
        herm = 0.5 * (b + b.conj().T)
        ev, vec = np.linalg.eigh(herm)
        sel = (ev > lo) & (ev < hi)
        v = vec[:, sel]
        blocks.append(v @ v.conj().T)
    return TracedElement(blocks, x.weights)


def holder_pair(x: TracedElement, y: TracedElement) -> tuple[float, float]:
    """``(|tau(x* y)|, ||x||_2 ||y||_2)``."""
    return abs(trace(x.adjoint() @ y)), lp_norm(x, 2) * lp_norm(y, 2)
