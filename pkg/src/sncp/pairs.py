"""Orthonormal direction pairs on S^{n-1} and on the diagonal hyperplane."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, RangeError, ValidationError

__all__ = [
    "MODES",
    "OrthoPair",
    "diagonal_pair_with_overlap",
    "load_pair_file",
    "named_pair",
    "overlap_t",
    "random_pair",
    "sphere_pair_with_overlap",
]

MODES = ("sphere", "diagonal")
PAIR_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class OrthoPair:
    """Two orthonormal vectors; ``mode="diagonal"`` also requires mean zero."""

    eta1: np.ndarray
    eta2: np.ndarray
    mode: str = "sphere"

    def __post_init__(self):
        e1 = np.array(self.eta1, dtype=float)
        e2 = np.array(self.eta2, dtype=float)
        e1.setflags(write=False)
        e2.setflags(write=False)
        object.__setattr__(self, "eta1", e1)
        object.__setattr__(self, "eta2", e2)
        problems = self.violations()
        if problems:
            raise ValidationError("invalid pair: " + "; ".join(problems))

    @property
    def n(self) -> int:
        return self.eta1.shape[0]

    def violations(self, atol: float = PAIR_ATOL) -> list[str]:
        e1, e2 = self.eta1, self.eta2
        out = []
        if self.mode not in MODES:
            return [f"mode must be one of {MODES}, got {self.mode!r}"]
        if e1.ndim != 1 or e1.shape != e2.shape:
            return ["eta1 and eta2 must be 1-d vectors of equal length"]
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            return ["vectors must be finite"]
        if self.n < 2:
            out.append("n must be >= 2")
        if abs(e1 @ e1 - 1) > atol:
            out.append(f"|eta1| != 1 (|eta1|^2 = {e1 @ e1!r})")
        if abs(e2 @ e2 - 1) > atol:
            out.append(f"|eta2| != 1 (|eta2|^2 = {e2 @ e2!r})")
        if abs(e1 @ e2) > atol:
            out.append(f"<eta1, eta2> != 0 ({e1 @ e2!r})")
        if self.mode == "diagonal":
            if self.n < 4:
                out.append("diagonal mode needs n >= 4")
            if abs(e1.sum()) > atol:
                out.append(f"sum(eta1) != 0 ({e1.sum()!r})")
            if abs(e2.sum()) > atol:
                out.append(f"sum(eta2) != 0 ({e2.sum()!r})")
        return out

    @property
    def overlap(self) -> float:
        return overlap_t(self)

    def matrix(self) -> np.ndarray:
        """The pair as an (n, 2) column matrix."""
        return np.column_stack([self.eta1, self.eta2])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eta1": self.eta1.tolist(),
            "eta2": self.eta2.tolist(),
            "mode": self.mode,
        }


def overlap_t(pair: OrthoPair) -> float:
    """sum_i eta1(i)^2 eta2(i)^2."""
    return float(np.sum(pair.eta1**2 * pair.eta2**2))


def _unit(n: int, idx: int) -> np.ndarray:
    v = np.zeros(n)
    v[idx] = 1.0
    return v


def named_pair(name: str, n: int, mode: str | None = None, indices=None) -> OrthoPair:
    """The built-in pairs ``e``, ``xi`` and ``xi_bar``.

    Indices are 1-based.  ``e`` and sphere ``xi`` use two indices (default
    1, 2); the diagonal pairs ``xi`` and ``xi_bar`` use four (default
    1, 2, 3, 4).  ``mode`` defaults to sphere for ``e`` and diagonal for
    ``xi_bar``; ``xi`` needs it spelled out when ambiguous (sphere is
    assumed).
    """
    if mode is None:
        mode = "diagonal" if name == "xi_bar" else "sphere"
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    if name == "e":
        if mode != "sphere":
            raise ValidationError("pair 'e' is not in the diagonal hyperplane")
        i, j = indices or (1, 2)
        return OrthoPair(_unit(n, i - 1), _unit(n, j - 1), "sphere")
    if name == "xi" and mode == "sphere":
        i, j = indices or (1, 2)
        a, b = _unit(n, i - 1), _unit(n, j - 1)
        r = math.sqrt(0.5)
        return OrthoPair(r * (a + b), r * (a - b), "sphere")
    if mode != "diagonal":
        raise ValidationError(f"pair {name!r} is only defined in diagonal mode")
    if n < 4:
        raise DomainError("diagonal pairs need n >= 4")
    i, j, k, l = (_unit(n, x - 1) for x in (indices or (1, 2, 3, 4)))
    if name == "xi":
        # the unit-norm version (division by 2) in both vectors
        return OrthoPair((i - j + k - l) / 2, (i - j - k + l) / 2, "diagonal")
    if name == "xi_bar":
        r = math.sqrt(0.5)
        return OrthoPair(r * (i - j), r * (k - l), "diagonal")
    raise ValidationError(f"unknown pair name {name!r}")


def sphere_pair_with_overlap(n: int, t: float) -> OrthoPair:
    """A rotation in the (e1, e2) plane; overlap is sin^2(2a)/2 = t."""
    if not 0 <= t <= 0.5:
        raise RangeError(f"sphere overlap must lie in [0, 1/2], got {t}")
    a = 0.5 * math.asin(min(1.0, math.sqrt(2 * t)))
    e1 = math.cos(a) * _unit(n, 0) + math.sin(a) * _unit(n, 1)
    e2 = -math.sin(a) * _unit(n, 0) + math.cos(a) * _unit(n, 1)
    return OrthoPair(e1, e2, "sphere")


def diagonal_pair_with_overlap(n: int, t: float) -> OrthoPair:
    """eta1 = xi_bar1, eta2 = cos(b) xi_bar2 + sin(b) (e1+e2-e3-e4)/2.

    The overlap equals sin^2(b)/4, covering [0, 1/4] for every n >= 4.
    """
    if not 0 <= t <= 0.25:
        raise RangeError(f"diagonal overlap must lie in [0, 1/4], got {t}")
    if n < 4:
        raise DomainError("diagonal pairs need n >= 4")
    b = math.asin(min(1.0, math.sqrt(4 * t)))
    base = named_pair("xi_bar", n, "diagonal")
    u = np.zeros(n)
    u[:4] = (0.5, 0.5, -0.5, -0.5)
    e2 = math.cos(b) * base.eta2 + math.sin(b) * u
    return OrthoPair(base.eta1, e2, "diagonal")


def random_pair(n: int, mode: str, rng: np.random.Generator) -> OrthoPair:
    """Haar-random orthonormal pair (within the diagonal hyperplane if asked)."""
    z = rng.standard_normal((n, 2))
    if mode == "diagonal":
        if n < 4:
            raise DomainError("diagonal pairs need n >= 4")
        z -= z.mean(axis=0)
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diag(r))
    if mode == "diagonal":
        q -= q.mean(axis=0)
    return OrthoPair(q[:, 0], q[:, 1], mode)


def load_pair_file(path) -> OrthoPair:
    """Read ``{"n": int, "eta1": [...], "eta2": [...], "mode": ...}``."""
    data = json.loads(Path(path).read_text())
    try:
        n = int(data["n"])
        pair = OrthoPair(data["eta1"], data["eta2"], data.get("mode", "sphere"))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed pair file: {exc}") from exc
    if pair.n != n:
        raise ValidationError(f"n = {n} does not match vector length {pair.n}")
    return pair
