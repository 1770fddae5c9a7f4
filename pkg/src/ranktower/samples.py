"""The sample surfaces used throughout the tests and scripts."""
from .arith import PolyQ, T
from .surface_model import BaseDescriptor, SurfaceSpec

P1 = BaseDescriptor("p1")
ELLIPTIC_BASE = BaseDescriptor("elliptic", -1, 1)  # y^2 = x^3 - x + 1


def e1() -> SurfaceSpec:
    """y^2 = x^3 + t x - t^3, with the section (t, t)."""
    return SurfaceSpec("E1", P1, T, -(T**3), {2, 3}, sections=((T, T),))


def p1_tx1() -> SurfaceSpec:
    """y^2 = x^3 + t x + 1."""
    return SurfaceSpec("y^2 = x^3 + t x + 1", P1, T, PolyQ([1]), {2, 3})


def elliptic_example() -> SurfaceSpec:
    """Y^2 = X^3 + x X + 1 over y^2 = x^3 - x + 1."""
    return SurfaceSpec("Y^2 = X^3 + x X + 1 over y^2 = x^3 - x + 1", ELLIPTIC_BASE, T, PolyQ([1]), {2, 3})


def elliptic_ydep() -> SurfaceSpec:
    """Y^2 = X^3 + x X + (1 + y) over the same base; trace engine only."""
    return SurfaceSpec(
        "Y^2 = X^3 + x X + (1 + y) over y^2 = x^3 - x + 1",
        ELLIPTIC_BASE, T, PolyQ([1]), {2, 3}, a6_y=PolyQ([1]),
    )
