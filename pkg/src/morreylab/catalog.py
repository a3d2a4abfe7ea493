"""Ready-made example spaces.

Every space here is small enough that all scans are exhaustive.  The
calibrated circle is tuned so the measure of the ball around any point at any
representative radius equals that radius exactly, which makes it the natural
test bed for comparing measure-power and radius-power norms.
"""

from __future__ import annotations

import numpy as np

from .space import QuasimetricSpace, build_space

__all__ = [
    "line_grid",
    "snowflake_grid",
    "two_atom",
    "calibrated_circle",
    "asymmetric_demo",
    "catalog",
    "get_space",
]


def line_grid(n: int) -> QuasimetricSpace:
    """n equispaced points on [0, 1] with uniform weights 1/n."""
    if n < 1:
        raise ValueError(f"grid size must be >= 1, got {n}")
    pts = [0.0] if n == 1 else np.linspace(0.0, 1.0, n).tolist()
    return build_space(pts, {"kind": "euclidean"}, [1.0 / n] * n, name=f"grid-{n}")


def snowflake_grid(n: int, exponent: float = 0.5) -> QuasimetricSpace:
    """Equispaced points on [0, 1] under |x - y|^exponent with uniform weights."""
    pts = [0.0] if n == 1 else np.linspace(0.0, 1.0, n).tolist()
    return build_space(pts, {"kind": "snowflake", "exponent": exponent},
                       [1.0 / n] * n, name=f"snowflake-{n}")


def two_atom(w0: float = 1.0, w1: float = 10.0, gap: float = 1.0) -> QuasimetricSpace:
    """Two atoms of very different mass, the minimal doubling stress test."""
    return build_space([0.0, gap], {"kind": "euclidean"}, [w0, w1], name="two-atom")


def calibrated_circle(n: int, circumference: float = 1.0) -> QuasimetricSpace:
    """n points on a circle with arc-length metric and weights h/2, h = spacing.

    Ball jump thresholds at any center are k*h for k = 1..floor(n/2); the ball
    at a representative radius in (k*h, (k+1)*h) has 2k+1 points of weight h/2
    each minus the correction at the center, giving measure exactly equal to
    the representative midpoint radius (k + 1/2) h.  So mu B(x, r_rep) = r_rep
    at every representative radius, for both parities of n.
    """
    if n < 3:
        raise ValueError(f"circle needs at least 3 points, got {n}")
    h = circumference / n
    pts = list(range(n))
    w = [h / 2.0] * n
    space = build_space(pts, {"kind": "circle", "circumference": circumference}, w,
                        name=f"circle-{n}")
    return space


def asymmetric_demo() -> QuasimetricSpace:
    """Small explicit asymmetric matrix with C_s = 2 and an inflated triangle."""
    mat = [
        [0.0, 1.0, 2.0, 1.5],
        [2.0, 0.0, 1.0, 2.5],
        [1.0, 2.0, 0.0, 1.0],
        [1.5, 2.0, 2.0, 0.0],
    ]
    return build_space(["a", "b", "c", "d"], {"kind": "matrix", "matrix": mat},
                       [1.0, 2.0, 1.0, 0.5], name="asym-4")


_BUILDERS = {
    "grid-4": lambda: line_grid(4),
    "grid-16": lambda: line_grid(16),
    "grid-64": lambda: line_grid(64),
    "snowflake-16": lambda: snowflake_grid(16),
    "two-atom": lambda: two_atom(),
    "circle-16": lambda: calibrated_circle(16),
    "circle-64": lambda: calibrated_circle(64),
    "circle-65": lambda: calibrated_circle(65),
    "asym-4": lambda: asymmetric_demo(),
}


def catalog() -> list[str]:
    return sorted(_BUILDERS)


def get_space(name: str) -> QuasimetricSpace:
    if name not in _BUILDERS:
        raise ValueError(f"unknown space {name!r}; available: {', '.join(catalog())}")
    return _BUILDERS[name]()
