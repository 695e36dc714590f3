"""Vector fields with multilinear differentials, and forcing amplitudes.

The expansion machinery needs the n-th differential of the field,
``f_n(y)[v_1, ..., v_n]``, symmetric and linear in each direction, supplied
exactly by the caller.  Nested central differences are provided as a
validation oracle only; they lose too many digits at high order to sit in
the production path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedOrder, ValidationFailed

__all__ = [
    "VectorField",
    "ForcingTerm",
    "fd_differential",
    "validate_field",
    "linear_field",
    "polynomial_field",
    "constant_amplitude",
    "polynomial_amplitude",
]


@dataclass
class VectorField:
    """Autonomous vector field with user-supplied exact differentials.

    ``differential(n, y, directions)`` must return the n-th derivative tensor
    contracted with the given direction vectors; ``max_order`` is the highest
    n for which that is implemented.
    """

    dimension: int
    evaluate: object
    differential: object
    max_order: int

    def __call__(self, y):
        return np.asarray(self.evaluate(y), dtype=complex)

    def apply(self, n, y, directions):
        if n == 0:
            return self(y)
        if n > self.max_order:
            raise UnsupportedOrder(
                f"differential of order {n} requested but the field only "
                f"supports order {self.max_order}"
            )
        if len(directions) != n:
            raise ValueError(f"order {n} differential needs {n} directions")
        return np.asarray(self.differential(n, y, list(directions)), dtype=complex)


@dataclass
class ForcingTerm:
    """One forcing channel: a base frequency and its amplitude function.

    ``amplitude_derivative(j, t)`` is the j-th time derivative, with
    ``j = 0`` reproducing the amplitude itself.  ``max_derivative_order`` of
    None means unlimited.
    """

    kappa: object
    amplitude: object
    amplitude_derivative: object
    max_derivative_order: int | None = None

    def derivative(self, j, t):
        if self.max_derivative_order is not None and j > self.max_derivative_order:
            raise UnsupportedOrder(
                f"amplitude derivative of order {j} requested but only "
                f"{self.max_derivative_order} supported"
            )
        return np.asarray(self.amplitude_derivative(j, t), dtype=complex)


def fd_differential(fld, n, y, directions, h=1e-4):
    """n-fold nested central difference of the field along the directions.

    O(h^2) for analytic fields; usable up to n = 4 before roundoff dominates.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    y = np.asarray(y, dtype=complex)
    if n == 0:
        return fld(y)
    v = np.asarray(directions[0], dtype=complex)
    plus = fd_differential(fld, n - 1, y + h * v, directions[1:], h)
    minus = fd_differential(fld, n - 1, y - h * v, directions[1:], h)
    return (plus - minus) / (2.0 * h)


def _richardson_fd(fld, n, y, directions, h):
    """Two-step Richardson pairing of the central difference, O(h^4)."""
    coarse = fd_differential(fld, n, y, directions, 2.0 * h)
    fine = fd_differential(fld, n, y, directions, h)
    return (4.0 * fine - coarse) / 3.0


def validate_field(fld, samples, h=1e-3, threshold=1e-5):
    """Check the declared differentials against the finite-difference oracle.

    ``samples`` is a list of (y, directions) pairs; each is tested at every
    order up to ``max_order``.  Deviations above ``threshold`` (relative to
    the larger of the two results and 1) raise ValidationFailed.  The step is
    widened with the order to balance truncation against the eps / h^n
    roundoff amplification of nested differences.
    """
    failures = []
    report = []
    for y, directions in samples:
        for n in range(1, fld.max_order + 1):
            dirs = directions[:n]
            if len(dirs) < n:
                continue
            exact = fld.apply(n, y, dirs)
            approx = _richardson_fd(fld, n, y, dirs, h * 2.0 ** (n - 1))
            scale = max(1.0, float(np.max(np.abs(exact))), float(np.max(np.abs(approx))))
            dev = float(np.max(np.abs(exact - approx))) / scale
            report.append((n, dev))
            if dev > threshold:
                failures.append((n, y, dev))
    if failures:
        worst = ", ".join(f"order {n}: dev {dev:.2e}" for n, _, dev in failures[:5])
        raise ValidationFailed(
            f"{len(failures)} differential checks failed ({worst})", failures=failures
        )
    return report


# -- common field constructors ------------------------------------------------


def linear_field(matrix, max_order=6):
    """Field f(y) = A y; all differentials above the first vanish."""
    a = np.asarray(matrix, dtype=complex)
    d = a.shape[0]

    def diff(n, y, directions):
        if n == 1:
            return a @ np.asarray(directions[0], dtype=complex)
        return np.zeros(d, dtype=complex)

    return VectorField(dimension=d, evaluate=lambda y: a @ y, differential=diff, max_order=max_order)


class _Poly:
    """Multivariate polynomial as {exponent tuple: complex coefficient}."""

    def __init__(self, dimension, terms):
        self.dimension = dimension
        self.terms = dict(terms)

    def directional_derivative(self, v):
        out = {}
        for expo, coef in self.terms.items():
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                new = list(expo)
                new[i] -= 1
                key = tuple(new)
                out[key] = out.get(key, 0.0) + coef * e * v[i]
        return _Poly(self.dimension, out)

    def __call__(self, y):
        total = 0.0 + 0.0j
        for expo, coef in self.terms.items():
            val = coef
            for yi, e in zip(y, expo):
                if e:
                    val = val * yi**e
            total += val
        return total


def polynomial_field(dimension, component_terms, max_order=6):
    """Field whose components are polynomials; differentials are exact.

    ``component_terms[j]`` maps exponent tuples to coefficients for component
    j, e.g. ``{(0, 1): 1.0}`` for y_2 and ``{(2, 0): -0.5}`` for -0.5 y_1^2.
    """
    polys = [_Poly(dimension, terms) for terms in component_terms]

    def evaluate(y):
        return np.array([p(y) for p in polys], dtype=complex)

    def diff(n, y, directions):
        out = np.empty(dimension, dtype=complex)
        for j, p in enumerate(polys):
            q = p
            for v in directions:
                q = q.directional_derivative(np.asarray(v, dtype=complex))
            out[j] = q(y)
        return out

    return VectorField(dimension=dimension, evaluate=evaluate, differential=diff, max_order=max_order)


# -- amplitude constructors ---------------------------------------------------


def constant_amplitude(kappa, vector):
    vec = np.asarray(vector, dtype=complex)
    zero = np.zeros_like(vec)
    return ForcingTerm(
        kappa=kappa,
        amplitude=lambda t: vec,
        amplitude_derivative=lambda j, t: vec if j == 0 else zero,
        max_derivative_order=None,
    )


def polynomial_amplitude(kappa, coefficients):
    """Amplitude a(t) = sum_j coefficients[j] t^j with exact derivatives."""
    coeffs = np.asarray(coefficients, dtype=complex)
    if coeffs.ndim != 2:
        raise ValueError("coefficients must have shape (degree + 1, dimension)")

    def derivative(j, t):
        out = np.zeros(coeffs.shape[1], dtype=complex)
        for p in range(j, coeffs.shape[0]):
            fac = 1.0
            for q in range(p, p - j, -1):
                fac *= q
            out += coeffs[p] * fac * t ** (p - j)
        return out

    return ForcingTerm(
        kappa=kappa,
        amplitude=lambda t: derivative(0, t),
        amplitude_derivative=derivative,
        max_derivative_order=None,
    )
