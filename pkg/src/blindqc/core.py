"""Discrete angle arithmetic and the dense linear algebra shared by every module.

Angles live on the eighth-turn grid ``k * pi/4`` and are stored as the integer
``k`` reduced mod 8, so that protocol formulas never accumulate floating error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ATOL = 1e-10
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Angle8:
    """The angle ``index * pi/4``; ``index`` is always kept in {0..7}."""

    index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", int(self.index) % 8)

    def __add__(self, other: AngleLike) -> Angle8:
        return Angle8(self.index + as_angle(other).index)

    __radd__ = __add__

    def __sub__(self, other: AngleLike) -> Angle8:
        return Angle8(self.index - as_angle(other).index)

    def __neg__(self) -> Angle8:
        return Angle8(-self.index)

    def flip(self) -> Angle8:
        """Add pi."""
        return Angle8(self.index + 4)

    @property
    def radians(self) -> float:
        return self.index * math.pi / 4

    def __int__(self) -> int:
        return self.index

    def __repr__(self) -> str:
        return f"Angle8({self.index})"


AngleLike = Union[Angle8, int]


def as_angle(a: AngleLike) -> Angle8:
    return a if isinstance(a, Angle8) else Angle8(int(a))


def angle_add(a: AngleLike, b: AngleLike) -> Angle8:
    return as_angle(a) + as_angle(b)


_PHASES = np.exp(1j * np.pi / 4 * np.arange(8))


def phase(a: AngleLike) -> complex:
    """``exp(i * a)`` taken from a lookup table."""
    return complex(_PHASES[as_angle(a).index])


def plus_state(theta: AngleLike) -> np.ndarray:
    """Amplitudes of ``|+_theta> = (|0> + e^{i theta}|1>)/sqrt(2)``."""
    return np.array([1.0, phase(theta)], dtype=complex) / math.sqrt(2)


def minus_state(theta: AngleLike) -> np.ndarray:
    return plus_state(as_angle(theta).flip())


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())


def basis_projector(k: int, dim: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    m[k, k] = 1.0
    return m


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def check_density(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return ``m`` as a density matrix (Hermitian, unit trace, PSD)."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol * max(1, m.shape[0]):
        raise ValueError(f"trace {np.trace(m).real:.3e} != 1")
    if np.linalg.eigvalsh(m)[0] < -1e-10:
        raise ValueError("matrix has a negative eigenvalue")
    return m


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in ascending order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(m)


def trace_norm_hermitian(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix (no validation)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (is_hermitian(a) and is_hermitian(b)):
        raise ValueError("trace distance needs Hermitian inputs")
    d = 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(a - b))))
    return min(max(d, 0.0), 1.0)
