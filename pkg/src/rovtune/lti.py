"""Continuous-time SISO LTI systems as rational transfer functions.

Polynomials are real coefficient lists in descending powers of s. Denominators
are normalized to monic at construction so equality checks and Routh arrays
are canonical. No pole-zero cancellation is ever performed: the closed loops
built here contain near-cancellations whose removal would corrupt the
dynamics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class AlgebraicLoop(ValueError):
    """Feedback interconnection collapsed to a zero denominator."""


class DegenerateDenominator(ValueError):
    """Stability test requires a denominator of degree >= 1."""


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients in descending powers of s.

    Exact leading zeros are trimmed at construction (threshold is exact zero
    only, so system order is never changed silently); the zero polynomial is
    stored as (0.0,).
    """

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(math.isfinite(v) for v in c):
            raise ValueError("polynomial coefficients must be finite")
        i = 0
        while i < len(c) - 1 and c[i] == 0.0:
            i += 1
        object.__setattr__(self, "coeffs", c[i:])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, s: float) -> float:
        return float(np.polyval(self.coeffs, s))


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product by coefficient convolution."""
    if a.is_zero or b.is_zero:
        return Polynomial((0.0,))
    return Polynomial(tuple(np.convolve(a.coeffs, b.coeffs)))


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    """Coefficient-wise sum after left-padding the shorter operand."""
    n = max(len(a.coeffs), len(b.coeffs))
    ca = (0.0,) * (n - len(a.coeffs)) + a.coeffs
    cb = (0.0,) * (n - len(b.coeffs)) + b.coeffs
    return Polynomial(tuple(x + y for x, y in zip(ca, cb)))


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(tuple(p))


@dataclass(frozen=True)
class TransferFunction:
    """Proper rational transfer function num(s)/den(s), den monic."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self) -> None:
        num = _as_poly(self.num)
        den = _as_poly(self.den)
        if den.is_zero:
            raise ValueError("transfer function denominator is the zero polynomial")
        if num.degree > den.degree:
            raise ValueError(
                f"improper transfer function: deg(num)={num.degree} > deg(den)={den.degree}"
            )
        lead = den.coeffs[0]
        if lead != 1.0:
            num = Polynomial(tuple(c / lead for c in num.coeffs))
            den = Polynomial(tuple(c / lead for c in den.coeffs))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)


@dataclass(frozen=True)
class StateSpace:
    """Controllable-canonical realization: x' = Ax + Bu, y = Cx + Du."""

    A: np.ndarray  # (n, n)
    B: np.ndarray  # (n, 1)
    C: np.ndarray  # (1, n)
    D: float

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float).reshape(-1, 1)
        C = np.array(self.C, dtype=float).reshape(1, -1)
        n = A.shape[0]
        if A.shape != (n, n) or B.shape != (n, 1) or C.shape != (1, n):
            raise ValueError(f"inconsistent state-space dimensions: A{A.shape} B{B.shape} C{C.shape}")
        for m in (A, B, C):
            m.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", float(self.D))

    @property
    def order(self) -> int:
        return self.A.shape[0]


def default_yaw_plant() -> TransferFunction:
    """Yaw-angle-per-thrust plant of the modeled vehicle."""
    return TransferFunction(Polynomial((0.01394,)), Polynomial((1.0, 2.08, 0.4681)))


def series(c: TransferFunction, g: TransferFunction) -> TransferFunction:
    """Cascade c*g. No pole-zero cancellation."""
    return TransferFunction(poly_mul(c.num, g.num), poly_mul(c.den, g.den))


def unity_feedback(l: TransferFunction) -> TransferFunction:
    """Close the loop around l with unit negative feedback: L/(1+L)."""
    den = poly_add(l.den, l.num)
    if den.is_zero:
        raise AlgebraicLoop("1 + L vanished identically; loop has no causal closed form")
    return TransferFunction(l.num, den)


def to_state_space(tf: TransferFunction) -> StateSpace:
    """Controllable canonical form of a proper transfer function."""
    n = tf.den.degree
    if n == 0:
        # static gain: no dynamics, direct feedthrough only
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), tf.num.coeffs[0])
    a = np.asarray(tf.den.coeffs[1:])  # den is monic
    b = np.zeros(n + 1)
    b[n + 1 - len(tf.num.coeffs):] = tf.num.coeffs
    A = np.zeros((n, n))
    A[0, :] = -a
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = (b[1:] - a * b[0]).reshape(1, n)
    return StateSpace(A, B, C, b[0])


_ROUTH_EPS = 1e-9


def is_stable(tf: TransferFunction) -> bool:
    """Strict Hurwitz test on the denominator via the Routh array.

    A zero first-column pivot in a row that is not entirely zero is replaced
    by eps = 1e-9 and the sign pattern of the perturbed array decides. An
    entirely zero row signals a root constellation symmetric about the origin
    (imaginary pairs included), so marginally stable polynomials classify as
    NOT stable.
    """
    n = tf.den.degree
    if n == 0:
        raise DegenerateDenominator("denominator is constant; no poles to classify")
    c = tf.den.coeffs  # monic, leading 1.0
    # necessary condition: a monic Hurwitz polynomial has all coefficients > 0
    if any(v <= 0.0 for v in c):
        return False
    width = (n + 2) // 2
    row0 = np.zeros(width)
    row1 = np.zeros(width)
    row0[: len(c[0::2])] = c[0::2]
    row1[: len(c[1::2])] = c[1::2]
    first_col = [row0[0]]
    prev, cur = row0, row1
    for _ in range(n):
        if not cur.any():
            return False  # full zero row: roots symmetric about the origin
        pivot = cur[0] if cur[0] != 0.0 else _ROUTH_EPS
        first_col.append(pivot)
        nxt = np.zeros(width)
        nxt[:-1] = (pivot * prev[1:] - prev[0] * cur[1:]) / pivot
        prev, cur = np.concatenate(([pivot], cur[1:])), nxt
    return all(v > 0.0 for v in first_col)
