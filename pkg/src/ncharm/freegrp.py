"""Free groups: reduced words, balls, heat-semigroup symbols and their weak norms,
truncated convolution operators, and Mikhlin-type symbols lifted to words.

A reduced word is a tuple of syllables ``(generator, exponent)`` with generators
numbered from 1, exponents nonzero and adjacent generators distinct.  Its string
form is ``"1^2.3^-1"``; the identity is ``"e"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ._errors import Refusal
from .nclp import TracedElement

DEFAULT_CAP = 10**7


@dataclass(frozen=True, order=True)
class ReducedWord:
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        syl = tuple((int(g), int(e)) for g, e in self.syllables)
        for i, (g, e) in enumerate(syl):
            if g < 1 or e == 0:
                raise ValueError(f"bad syllable {(g, e)}")
            if i and syl[i - 1][0] == g:
                raise ValueError("adjacent syllables share a generator; word is not reduced")
        object.__setattr__(self, "syllables", syl)

    @classmethod
    def reduce(cls, syllables: Iterable[tuple[int, int]]) -> "ReducedWord":
        out: list[list[int]] = []
        for g, e in syllables:
            if e == 0:
                continue
            if out and out[-1][0] == g:
                out[-1][1] += e
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([g, e])
        return cls(tuple((g, e) for g, e in out))

    @classmethod
    def parse(cls, text: str) -> "ReducedWord":
        text = text.strip()
        if text in ("", "e"):
            return cls()
        syl = []
        for part in text.split("."):
            g, _, e = part.partition("^")
            syl.append((int(g), int(e) if e else 1))
        return cls.reduce(syl)

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        return ".".join(f"{g}^{e}" for g, e in self.syllables)

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    @property
    def length(self) -> int:
        return len(self)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return word_mul(self, other)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.syllables)

    @property
    def max_generator(self) -> int:
        return max((g for g, _ in self.syllables), default=0)


IDENTITY = ReducedWord()


def generator(i: int, exponent: int = 1) -> ReducedWord:
    return ReducedWord(((i, exponent),))


def word_mul(x: ReducedWord, y: ReducedWord) -> ReducedWord:
    left = list(x.syllables)
    right = list(y.syllables)
    while left and right and left[-1][0] == right[0][0]:
        g = left[-1][0]
        e = left.pop()[1] + right.pop(0)[1]
        if e:
            left.append((g, e))
            break
    return ReducedWord(tuple(left + right))


def sphere_count(n: int, k: int) -> int:
    """Number of reduced words of length exactly ``k`` in ``F_n``."""
    if k == 0:
        return 1
    return 2 * n * (2 * n - 1) ** (k - 1)


def ball_count(n: int, L: int) -> int:
    return sum(sphere_count(n, k) for k in range(L + 1))


def _letters(n: int):
    return [(g, s) for g in range(1, n + 1) for s in (1, -1)]


def ball_enumerate(n: int, L: int, cap: int = DEFAULT_CAP) -> list[ReducedWord]:
    """All reduced words of ``F_n`` with length at most ``L``, ordered by length."""
    if n < 1 or L < 0:
        raise ValueError("need n >= 1 and L >= 0")
    expected = ball_count(n, L)
    if expected > cap:
        raise Refusal(f"ball of radius {L} in F_{n} has {expected} elements, above the cap {cap}",
                      count=expected, cap=cap)
    letters = _letters(n)
    out = [IDENTITY]
    frontier: list[tuple[tuple[int, int], ...]] = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for g, s in letters:
                if w and w[-1] == (g, -s):
                    continue
                nxt.append(w + ((g, s),))
        frontier = nxt
        out.extend(ReducedWord.reduce(w) for w in frontier)
    return out


def heat_symbol(t: float, g: ReducedWord) -> float:
    """``m_t(g) = exp(-t |g|)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    return math.exp(-t * len(g))


def distribution(n: int, t: float, alpha: float, cap: int = DEFAULT_CAP) -> dict:
    """``#{g : m_t(g) > alpha}`` by enumerating the level set ``|g| < |log alpha| / t``.

    Returns the exact count, the bound ``(2n)^(|log alpha|/t)`` and the radius used.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    if alpha >= 1:
        return {"count": 0, "bound": 0.0, "radius": -1, "exact": True}
    x = abs(math.log(alpha)) / t
    bound = float((2 * n) ** x)
    # largest integer strictly below x
    L = math.ceil(x) - 1
    expected = ball_count(n, L)
    if expected > cap:
        raise Refusal(f"level set has {expected} elements, above the cap {cap}",
                      bound=bound, count=expected, radius=L)
    words = ball_enumerate(n, L, cap)
    count = sum(1 for w in words if math.exp(-t * len(w)) > alpha)
    return {"count": count, "bound": bound, "radius": L, "exact": True}


def weak_norm_counting(n: int, t: float, r: float, kmax: int = 100000) -> dict:
    """``sup_{alpha > 0} alpha lambda(alpha)^(1/r)`` for ``m_t`` on ``F_n``, from exact ball counts.

    On ``[e^{-t(k+1)}, e^{-tk})`` the level set is the ball of radius ``k``, so the
    supremum is ``sup_k e^{-tk} B_k^(1/r)``.  ``log B_k`` is concave in ``k``, hence
    the terms are unimodal; the growth rate ``rho = e^{-t} (2n-1)^(1/r)`` decides
    finiteness (``rho > 1`` diverges, at ``rho = 1`` the terms increase to a finite
    limit).
    """
    if not (t > 0 and r > 0):
        raise ValueError("need t > 0 and r > 0")
    if math.isinf(r):
        return {"value": 1.0, "finite": True, "argmax_k": 0, "rho": math.exp(-t), "mode": "exact"}
    rho = math.exp(-t) * (2 * n - 1) ** (1.0 / r)

    def term(k):
        return math.exp(-t * k + log_ball_count(n, k) / r)

    if n >= 2 and rho > 1 + 1e-12:
        return {"value": math.inf, "finite": False, "argmax_k": None, "rho": rho, "mode": "exact"}
    if n >= 2 and abs(rho - 1) <= 1e-12:
        limit = (n / (n - 1)) ** (1.0 / r)
        return {"value": limit, "finite": True, "argmax_k": None, "rho": rho, "mode": "exact",
                "note": "terms increase to the limit (n/(n-1))^(1/r), not attained"}
    best, arg = term(0), 0
    for k in range(1, kmax):
        v = term(k)
        if v < best:
            break
        best, arg = v, k
    return {"value": best, "finite": True, "argmax_k": arg, "rho": rho, "mode": "exact"}


def ball_count_closed(n: int, k: int) -> float:
    """``B_k`` in closed form (float, for large ``k``)."""
    if n == 1:
        return 2.0 * k + 1.0
    return (n * float(2 * n - 1) ** k - 1.0) / (n - 1)


def log_ball_count(n: int, k: int) -> float:
    if n == 1:
        return math.log(2.0 * k + 1.0)
    q = 2 * n - 1
    return math.log(n / (n - 1)) + k * math.log(q) + math.log1p(-math.exp(-k * math.log(q)) / n)


def weak_norm_bound(n: int, t: float, r: float) -> dict:
    """Weak norm computed from the bound ``lambda(alpha) <= (2n)^(|log alpha|/t)``.

    ``sup_x e^{-x} (2n)^{x/(t r)}`` is 1 when ``t >= log(2n)/r`` and infinite otherwise.
    """
    finite = t * r >= math.log(2 * n) * (1 - 1e-12)
    return {"value": 1.0 if finite else math.inf, "finite": bool(finite),
            "threshold_t": math.log(2 * n) / r, "mode": "bound"}


def exact_threshold(n: int, r: float) -> float:
    """Smallest ``t`` with a finite exact weak norm: ``log(2n-1)/r`` (``0`` when ``n = 1``)."""
    return math.log(2 * n - 1) / r


# --- truncated convolution ------------------------------------------------------------------


@dataclass
class BallFunction:
    n: int
    L: int
    coeffs: dict

    def __post_init__(self):
        self.coeffs = {(ReducedWord.parse(k) if isinstance(k, str) else k): complex(v)
                       for k, v in self.coeffs.items()}
        for w in self.coeffs:
            if len(w) > self.L or w.max_generator > self.n:
                raise ValueError(f"word {w} lies outside the ball of radius {self.L} in F_{self.n}")

    def __call__(self, w: ReducedWord) -> complex:
        return self.coeffs.get(w, 0.0)

    def l2_norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    @classmethod
    def delta(cls, n: int, L: int, w: ReducedWord | str = IDENTITY, value: complex = 1.0):
        return cls(n, L, {w: value})

    @classmethod
    def random(cls, n: int, L: int, rng: np.random.Generator, density: float = 1.0):
        words = ball_enumerate(n, L)
        vals = rng.normal(size=len(words)) + 1j * rng.normal(size=len(words))
        keep = rng.random(len(words)) < density
        return cls(n, L, {w: v for w, v, k in zip(words, vals, keep) if k})


def truncated_multiplier(m: Callable[[ReducedWord], complex], f: BallFunction) -> BallFunction:
    """Pointwise product ``(m f)(g) = m(g) f(g)``."""
    return BallFunction(f.n, f.L, {w: m(w) * v for w, v in f.coeffs.items()})


def truncated_convolver(f: BallFunction, L: int, cap: int = 20000) -> TracedElement:
    """Left convolution by ``f`` compressed to ``span{delta_x : |x| <= L}``, trace ``Tr / |ball|``."""
    if f.L > L:
        raise ValueError("support of f exceeds the truncation radius")
    size = ball_count(f.n, L)
    if size > cap:
        raise Refusal(f"truncated operator would be {size}x{size}, above the cap {cap}",
                      size=size, cap=cap)
    ball = ball_enumerate(f.n, L)
    index = {w: i for i, w in enumerate(ball)}
    M = np.zeros((size, size), dtype=complex)
    for g, v in f.coeffs.items():
        if v == 0:
            continue
        for j, x in enumerate(ball):
            i = index.get(word_mul(g, x))
            if i is not None:
                M[i, j] += v
    return TracedElement([M], [1.0 / size])


def truncation_defect(f: BallFunction, L: int) -> float:
    """``||f||_2^2 - tau(L_f* L_f)`` for the truncated operator."""
    from .nclp import trace
    M = truncated_convolver(f, L)
    return f.l2_norm_sq() - trace(M.adjoint() @ M).real


# --- Mikhlin-type symbols -------------------------------------------------------------------


def hm_lift(m: Callable[[np.ndarray], float], g: ReducedWord, d: int) -> complex:
    """``m`` evaluated on the exponent vector of ``g``.

    Zeros pad the vector when ``g`` has fewer than ``d`` syllables; with ``d`` or more
    syllables only the first ``d`` exponents are used.
    """
    ex = list(g.exponents[:d]) + [0] * max(0, d - len(g.syllables))
    return m(np.array(ex, dtype=float))


def _derivative_table(values: np.ndarray, h: float, order: int) -> dict:
    """All mixed central differences of total order ``<= order`` (via repeated gradients)."""
    d = values.ndim
    table = {(0,) * d: values}
    frontier = {(0,) * d: values}
    for _ in range(order):
        nxt = {}
        for alpha, arr in frontier.items():
            grads = np.gradient(arr, h) if d > 1 else [np.gradient(arr, h)]
            for j in range(d):
                beta = tuple(a + (1 if i == j else 0) for i, a in enumerate(alpha))
                if beta not in nxt and beta not in table:
                    nxt[beta] = grads[j]
        table.update(nxt)
        frontier = nxt
    return table


def _hm_sup(m: Callable, d: int, extent: float, h: float, order: int) -> tuple[float, tuple]:
    npts = int(round(2 * extent / h)) + 1
    axis = np.linspace(-extent, extent, npts)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    xi = np.stack(mesh, axis=-1)
    vals = np.asarray(m(xi), dtype=complex)
    radius = np.sqrt(np.sum(xi * xi, axis=-1))
    table = _derivative_table(vals, h, order)
    # drop the layers touched by one-sided differences and a ball of radius h around 0
    core = tuple(slice(order, npts - order) for _ in range(d))
    mask = radius[core] > h * (1 + 1e-9)
    best, arg = 0.0, (0,) * d
    for alpha, arr in table.items():
        k = sum(alpha)
        v = (radius[core] ** k * np.abs(arr[core]))[mask]
        if v.size and v.max() > best:
            best, arg = float(v.max()), alpha
    return best, arg


def hm_condition(m: Callable[[np.ndarray], float], d: int, extent: float = 8.0, h: float = 0.05,
                 growth_tol: float = 0.05) -> dict:
    """Finite-difference estimate of ``max_{|a| <= d//2 + 1} sup |xi|^|a| |d^a m(xi)|``.

    ``m`` receives an array of shape ``(..., d)``.  The supremum is taken on
    ``[-extent, extent]^d`` and again on the half-size box; if it grows by more than
    ``growth_tol`` the symbol is declared unbounded.
    """
    order = d // 2 + 1
    npts = int(round(extent / h))
    if npts < 4 * order + 4:
        raise Refusal(f"grid too coarse for derivatives of order {order}: need extent/h >= "
                      f"{4 * order + 4}, got {npts}", order=order)
    full, arg = _hm_sup(m, d, extent, h, order)
    half, _ = _hm_sup(m, d, extent / 2, h, order)
    unbounded = full > (1 + growth_tol) * half
    return {"C_m": math.inf if unbounded else full, "sup_on_grid": full, "sup_half_box": half,
            "finite": not unbounded, "order": order, "worst_multi_index": list(arg),
            "grid": {"extent": extent, "h": h, "d": d}}


def multiplier_norms(n: int, L: int, t: float, f: BallFunction) -> dict:
    """Truncated operator norms of ``L_f`` and ``L_{m_t f}``."""
    Mf = truncated_convolver(f, L).blocks[0]
    Mmf = truncated_convolver(truncated_multiplier(lambda w: heat_symbol(t, w), f), L).blocks[0]
    return {"norm_f": float(np.linalg.norm(Mf, 2)), "norm_mf": float(np.linalg.norm(Mmf, 2))}
