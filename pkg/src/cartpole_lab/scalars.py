"""Scalar arithmetic that treats real and complex values uniformly.

The model right-hand sides are written against these helpers so that the
same code path serves ordinary double-precision runs and runs where one
parameter carries a tiny imaginary perturbation. Trig on complex inputs is
assembled from the real libm kernels, so a zero imaginary part reproduces
the real run bit for bit.
"""
from __future__ import annotations

import math

import numpy as np


def as_scalar(x):
    """Python float or complex from any numeric or numpy scalar.

    CPython's complex division (Smith's algorithm) is exact when the
    imaginary parts are zero; numpy's complex128 division is not, so model
    arithmetic is done on Python scalars.
    """
    return x.item() if isinstance(x, np.generic) else x


def sin(x):
    if isinstance(x, complex):
        return complex(math.sin(x.real) * math.cosh(x.imag),
                       math.cos(x.real) * math.sinh(x.imag))
    return math.sin(x)


def cos(x):
    if isinstance(x, complex):
        return complex(math.cos(x.real) * math.cosh(x.imag),
                       -math.sin(x.real) * math.sinh(x.imag))
    return math.cos(x)


def clip_by_real(x, lo: float, hi: float):
    """Clamp judged by the real part; saturation returns the pure-real bound.

    A saturated output is a constant, so its derivative content (the
    imaginary part) is dropped along with it.
    """
    r = x.real
    if r > hi:
        return hi
    if r < lo:
        return lo
    return x
