"""Built-in problems, problem registry, and config-file loading.

Vector fields and their differentials are registered in code; config files
only carry the numeric skeleton of a problem (dimension, frequency basis,
frequency coordinates, initial state, horizon) plus the name of a registered
field bundle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .deriv_engine import (
    VectorField,
    constant_amplitude,
    linear_field,
    polynomial_amplitude,
    polynomial_field,
)
from .expansion import Problem
from .freq_algebra import BaseFrequency, FrequencyBasis
from .linear_closed_form import LinearForcing, LinearProblem

__all__ = [
    "RegisteredProblem",
    "memristor_field",
    "get_problem",
    "register_problem",
    "problem_names",
    "register_field_bundle",
    "load_problem_config",
]

SQRT2 = math.sqrt(2.0)


# -- memristor circuit field ----------------------------------------------------

# Two-memristor circuit: components 1 and 5 are linear, 2 and 4 are a linear
# voltage difference times a rational function of y2, component 3 adds a
# bilinear y3 * (quadratic in y1) piece.


def _reciprocal_derivs(x, e):
    """Derivatives through order 4 of 1 / ((1 + e) + 3 e x^2)."""
    den = (1.0 + e) + 3.0 * e * x * x
    d1 = 6.0 * e * x
    d2 = 6.0 * e
    g0 = 1.0 / den
    g1 = -d1 / den**2
    g2 = 2.0 * d1**2 / den**3 - d2 / den**2
    g3 = -6.0 * d1**3 / den**4 + 6.0 * d1 * d2 / den**3
    g4 = 24.0 * d1**4 / den**5 - 36.0 * d1**2 * d2 / den**4 + 6.0 * d2**2 / den**3
    return (g0, g1, g2, g3, g4)


def _window_recip_derivs(x, e):
    """Derivatives through order 4 of (1 + 3 x^2) / ((1 + e) + 3 e x^2)."""
    g = _reciprocal_derivs(x, e)
    w = (1.0 + 3.0 * x * x, 6.0 * x, 6.0, 0.0, 0.0)
    out = []
    for n in range(5):
        val = 0.0
        for k in range(min(n, 2) + 1):
            val = val + math.comb(n, k) * w[k] * g[n - k]
        out.append(val)
    return tuple(out)


def _linear_times_scalar_diff(n, lin_value, lin_dots, scalar_derivs, var_comps):
    """n-th differential of L(y) * phi(y_var) with L linear.

    ``lin_dots[i]`` is the gradient of L contracted with direction i and
    ``var_comps[i]`` the direction's component in the phi variable.
    """
    prod_all = 1.0
    for v in var_comps:
        prod_all = prod_all * v
    total = lin_value * scalar_derivs[n] * prod_all
    for i in range(n):
        rest = 1.0
        for j, v in enumerate(var_comps):
            if j != i:
                rest = rest * v
        total = total + lin_dots[i] * scalar_derivs[n - 1] * rest
    return total


def memristor_field(a=8.0, b=10.0, c=0.0, d=2.0, e=0.1):
    """The five-state memristor circuit field with differentials to order 4."""

    def evaluate(y):
        y1, y2, y3, y4, y5 = y
        g = 1.0 / ((1.0 + e) + 3.0 * e * y2 * y2)
        h = (1.0 + 3.0 * y2 * y2) * g
        return np.array(
            [
                y3,
                (y4 - y3) * g,
                a * y3 * (d - (1.0 + 3.0 * y1 * y1)) - a * (y3 - y4) * h,
                (y3 - y4) * h + y5,
                -b * y4 - c * y5,
            ],
            dtype=complex,
        )

    def differential(n, y, directions):
        y1, y2, y3, y4, _ = y
        g = _reciprocal_derivs(y2, e)
        h = _window_recip_derivs(y2, e)
        phi = (d - (1.0 + 3.0 * y1 * y1), -6.0 * y1, -6.0, 0.0, 0.0)

        v1 = [dirn[0] for dirn in directions]
        v2 = [dirn[1] for dirn in directions]
        dots_43 = [dirn[3] - dirn[2] for dirn in directions]  # grad of y4 - y3
        dots_34 = [dirn[2] - dirn[3] for dirn in directions]  # grad of y3 - y4
        dots_3 = [dirn[2] for dirn in directions]

        row2 = _linear_times_scalar_diff(n, y4 - y3, dots_43, g, v2)
        row3 = a * _linear_times_scalar_diff(n, y3, dots_3, phi, v1) - a * (
            _linear_times_scalar_diff(n, y3 - y4, dots_34, h, v2)
        )
        row4 = _linear_times_scalar_diff(n, y3 - y4, dots_34, h, v2)
        row1 = 0.0
        row5 = 0.0
        if n == 1:
            row1 = directions[0][2]
            row4 = row4 + directions[0][4]
            row5 = -b * directions[0][3] - c * directions[0][4]
        return np.array([row1, row2, row3, row4, row5], dtype=complex)

    return VectorField(dimension=5, evaluate=evaluate, differential=differential, max_order=4)


# -- built-in problems -------------------------------------------------------------


@dataclass
class RegisteredProblem:
    name: str
    problem: Problem
    linear: LinearProblem | None
    t_end: float
    omegas: tuple
    default_order: int
    notes: str = ""


def _standard_basis():
    return FrequencyBasis([1.0, SQRT2], names=("1", "sqrt(2)"))


def _linear_example():
    basis = _standard_basis()
    matrix = np.array([[0.0, 1.0], [-21.0 / 5.0, -3.0 / 5.0]], dtype=complex)
    kappas = [
        BaseFrequency(1, basis, coords=(0, 1)),
        BaseFrequency(2, basis, coords=(-1, -1)),
    ]
    amp1 = [[0.0, 0.0], [0.0, 1.0]]  # t in the second component
    amp2 = [[0.0, 0.0], [0.0, 0.0], [0.0, 1.0]]  # t^2 in the second component
    problem = Problem(
        vector_field=linear_field(matrix, max_order=8),
        forcings=[
            polynomial_amplitude(kappas[0], amp1),
            polynomial_amplitude(kappas[1], amp2),
        ],
        y0=[0.5, 0.5],
        basis=basis,
    )
    linear = LinearProblem(
        matrix=matrix,
        forcings=[
            LinearForcing(kappa=kappas[0].value, coefficients=amp1),
            LinearForcing(kappa=kappas[1].value, coefficients=amp2),
        ],
        y0=np.array([0.5, 0.5]),
    )
    return RegisteredProblem(
        name="linear_example",
        problem=problem,
        linear=linear,
        t_end=5.0,
        omegas=(250.0, 500.0, 1000.0, 2000.0, 4000.0),
        default_order=4,
        notes="damped oscillator with t and t^2 amplitudes; exact solution available",
    )


def _memristor(amp=0.1, a=8.0, b=10.0, c=0.0, d=2.0, e=0.1):
    basis = _standard_basis()
    kappas = [
        BaseFrequency(1, basis, coords=(1, 0)),
        BaseFrequency(2, basis, coords=(-1, 0)),
        BaseFrequency(3, basis, coords=(0, 1)),
        BaseFrequency(4, basis, coords=(0, -1)),
    ]
    drive = amp * b / 2j
    signs = (1.0, -1.0, 1.0, -1.0)
    forcings = [
        constant_amplitude(kappa, [0.0, 0.0, 0.0, 0.0, sign * drive])
        for kappa, sign in zip(kappas, signs)
    ]
    problem = Problem(
        vector_field=memristor_field(a=a, b=b, c=c, d=d, e=e),
        forcings=forcings,
        y0=[-0.8, -0.4, 0.0, 1e-4, 0.0],
        basis=basis,
    )
    return RegisteredProblem(
        name="memristor",
        problem=problem,
        linear=None,
        t_end=3.0,
        omegas=(100.0, 1000.0),
        default_order=3,
        notes="two-memristor circuit driven by two sine pairs",
    )


def _cubic_demo_field(dimension):
    if dimension != 2:
        raise ValueError("the cubic demo field is two-dimensional")
    return polynomial_field(
        2,
        [
            {(0, 1): 1.0, (3, 0): -0.2},
            {(1, 0): -1.0, (0, 1): -0.1, (2, 0): 0.15},
        ],
        max_order=8,
    )


def _worked_example():
    basis = _standard_basis()
    kappas = [
        BaseFrequency(1, basis, coords=(1, 0)),
        BaseFrequency(2, basis, coords=(0, 1)),
        BaseFrequency(3, basis, coords=(-1, -1)),
    ]
    forcings = [
        constant_amplitude(kappas[0], [0.5, 0.0]),
        polynomial_amplitude(kappas[1], [[0.0, 0.4], [0.0, 0.2]]),
        constant_amplitude(kappas[2], [0.3, -0.2]),
    ]
    problem = Problem(
        vector_field=_cubic_demo_field(2),
        forcings=forcings,
        y0=[0.1, 0.2],
        basis=basis,
    )
    return RegisteredProblem(
        name="worked_example",
        problem=problem,
        linear=None,
        t_end=5.0,
        omegas=(200.0, 400.0),
        default_order=3,
        notes="three frequencies with a zero triple sum; field is pluggable",
    )


_BUILTIN_FACTORIES = {
    "linear_example": _linear_example,
    "memristor": _memristor,
    "worked_example": _worked_example,
}
_REGISTRY: dict = {}


def get_problem(name) -> RegisteredProblem:
    if name in _REGISTRY:
        return _REGISTRY[name]
    factory = _BUILTIN_FACTORIES.get(name)
    if factory is None:
        raise KeyError(
            f"unknown problem {name!r}; known: {sorted(set(_BUILTIN_FACTORIES) | set(_REGISTRY))}"
        )
    _REGISTRY[name] = factory()
    return _REGISTRY[name]


def register_problem(registered: RegisteredProblem):
    if registered.name in _REGISTRY or registered.name in _BUILTIN_FACTORIES:
        raise ValueError(f"problem {registered.name!r} already registered")
    _REGISTRY[registered.name] = registered
    return registered


def problem_names():
    return sorted(set(_BUILTIN_FACTORIES) | set(_REGISTRY))


# -- config files --------------------------------------------------------------------


@dataclass
class FieldBundle:
    """In-code part of a config-defined problem: field plus amplitudes."""

    make_field: object  # dimension -> VectorField
    make_amplitudes: object  # (kappas, dimension) -> list of ForcingTerm


def _default_amplitudes(kappas, dimension):
    out = []
    for m, kappa in enumerate(kappas, start=1):
        vec = np.zeros(dimension, dtype=complex)
        vec[(m - 1) % dimension] = 0.5
        out.append(constant_amplitude(kappa, vec))
    return out


_FIELD_BUNDLES = {
    "cubic_demo": FieldBundle(_cubic_demo_field, _default_amplitudes),
    "memristor": FieldBundle(
        lambda dimension: memristor_field(),
        _default_amplitudes,
    ),
}


def register_field_bundle(name, bundle: FieldBundle):
    if name in _FIELD_BUNDLES:
        raise ValueError(f"field bundle {name!r} already registered")
    _FIELD_BUNDLES[name] = bundle


def _parse_number(x):
    if isinstance(x, (list, tuple)):
        re, im = x
        return complex(re, im)
    return complex(x)


def load_problem_config(path, name=None):
    """Problem from a JSON config plus a registered field bundle.

    Keys: ``dimension``, ``basis`` (list of reals, optionally with
    ``basis_names``), ``kappa`` (one rational coordinate vector per channel,
    entries are ints or strings like ``"-1/2"``), ``y0``, ``t_end``, and
    ``field`` (bundle name, default ``cubic_demo``).
    """
    with open(path) as fh:
        cfg = json.load(fh)
    dimension = int(cfg["dimension"])
    basis = FrequencyBasis(
        cfg["basis"],
        names=cfg.get("basis_names"),
        mode=cfg.get("mode", "exact"),
        tolerance=cfg.get("tolerance", 1e-9),
    )
    if basis.mode == "exact":
        kappas = [
            BaseFrequency(m, basis, coords=[str(q) for q in coords])
            for m, coords in enumerate(cfg["kappa"], start=1)
        ]
    else:
        kappas = [
            BaseFrequency(m, basis, value=float(value))
            for m, value in enumerate(cfg["kappa"], start=1)
        ]
    bundle_name = cfg.get("field", "cubic_demo")
    if bundle_name not in _FIELD_BUNDLES:
        raise KeyError(f"unknown field bundle {bundle_name!r}")
    bundle = _FIELD_BUNDLES[bundle_name]
    problem = Problem(
        vector_field=bundle.make_field(dimension),
        forcings=bundle.make_amplitudes(kappas, dimension),
        y0=[_parse_number(v) for v in cfg["y0"]],
        basis=basis,
    )
    return RegisteredProblem(
        name=name or cfg.get("name", "config_problem"),
        problem=problem,
        linear=None,
        t_end=float(cfg["t_end"]),
        omegas=tuple(float(w) for w in cfg.get("omegas", (500.0,))),
        default_order=int(cfg.get("order", 3)),
        notes=f"loaded from {path}",
    )
