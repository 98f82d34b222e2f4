"""
Leading truncation coefficients of the 1D and seven-point schemes.

For a plane wave with wave number c the seven-point residual divided by
the wave expands as C1 c^4 h^2 + C2 c^6 h^4 + ..., with C1 depending on the
normalized bubble amplitude beta = alpha2 / (c^2 h^2) and C2 additionally
on the direction through cos(6 theta).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from app.core.errors import ResonantParameterError
from app.core.fdstencil import (
    NEIGHBOURS,
    SQRT3,
    Scheme1D,
    StencilScheme,
    alpha1,
    stencil_1d,
)

logger = logging.getLogger(__name__)

DENOMINATOR = 322560.0 * SQRT3


@dataclass(frozen=True)
class TruncationCoeffs:
    c1: float
    c2: float
    theta: float
    beta: float


def trunc_coeffs(beta: float, theta: float) -> TruncationCoeffs:
    """Normalized form: C2 uses 80640*beta, so both coefficients depend on ch only"""
    c1 = (30240.0 - 483840.0 * beta) / DENOMINATOR
    c2 = (-2940.0 + 80640.0 * beta + 84.0 * math.cos(6.0 * theta)) / DENOMINATOR
    return TruncationCoeffs(c1, c2, theta, beta)


def trunc_coeffs_printed(alpha2: float, c: float, h: float, theta: float) -> TruncationCoeffs:
    """Coefficients with alpha2 entering as 80640*alpha2/c^2 and 483840*alpha2/(c^2 h^2)"""
    c1 = (30240.0 - 483840.0 * alpha2 / (c * c * h * h)) / DENOMINATOR
    c2 = (-2940.0 + 80640.0 * alpha2 / (c * c) + 84.0 * math.cos(6.0 * theta)) / DENOMINATOR
    return TruncationCoeffs(c1, c2, theta, alpha2 / (c * c * h * h))


@dataclass(frozen=True)
class SweepRow:
    ch: float
    c1: Optional[float]
    c2: Optional[float]
    beta: Optional[float]
    pole: bool = False


def coefficient_sweep(
    scheme: StencilScheme, theta: float, ch_grid: Sequence[float]
) -> List[SweepRow]:
    """C1/C2 over a ch grid; grid points on an alpha2 pole come back flagged"""
    rows = []
    for ch in ch_grid:
        try:
            beta = scheme.beta(ch, 1.0)
        except ResonantParameterError:
            logger.warning(f"Skipping ch={ch:g}: alpha2 pole for {scheme.label}")
            rows.append(SweepRow(float(ch), None, None, None, pole=True))
            continue
        coeffs = trunc_coeffs(beta, theta)
        rows.append(SweepRow(float(ch), coeffs.c1, coeffs.c2, beta))
    return rows


def sevenpoint_symbol(beta: float, c: float, h: float, theta: float) -> float:
    """Seven-point residual on a plane wave of direction theta, divided by the wave"""
    k = c * np.array([math.cos(theta), math.sin(theta)])
    steps = np.array([[di + 0.5 * dj, dj * SQRT3 / 2] for di, dj in NEIGHBOURS]) * h
    ring = float(np.sum(np.cos(steps @ k)))
    a2 = beta * (c * h) ** 2
    c2 = c * c
    return (
        (6.0 - ring) / (SQRT3 * h * h)
        - c2 * (6.0 + ring) / (8.0 * SQRT3)
        - a2 * c2 * (3.0 + ring) / (6.0 * SQRT3)
    )


def truncation_coeffs_1d(scheme: Scheme1D, ch: float) -> Tuple[float, float]:
    """Closed-form (c^4 h^2, c^6 h^4) coefficients of the 1D schemes"""
    scheme = Scheme1D(scheme)
    if scheme is Scheme1D.GALERKIN:
        return 1.0 / 12.0, -1.0 / 90.0
    if scheme is Scheme1D.PSEUDO_BUBBLE:
        t = ch * ch
        alpha1(ch, 1.0)  # pole guard
        return 1.0 / 12.0 - 3.0 / (4.0 * (12.0 - t)), -1.0 / 90.0 + 3.0 / (16.0 * (12.0 - t))
    # nodally exact
    return 0.0, 0.0


def stencil_residual_1d(scheme: Scheme1D, c: float, h: float) -> float:
    """Residual of the interior row applied to samples of sin(cx) where sin(cx) = 1"""
    off, diag = stencil_1d(scheme, c, h)
    x0 = math.pi / (2.0 * c)
    return off * math.sin(c * (x0 - h)) + diag * math.sin(c * x0) + off * math.sin(c * (x0 + h))


def fit_truncation_1d(scheme: Scheme1D, c: float, h: float) -> Tuple[float, float]:
    """
    Richardson fit of residual(h) = a c^4 h^2 + b c^6 h^4 from mesh sizes h and h/2.

    Returns (a, b).
    """
    r1 = stencil_residual_1d(scheme, c, h)
    r2 = stencil_residual_1d(scheme, c, h / 2.0)
    # r1 = A + B, r2 = A/4 + B/16 with A = a c^4 h^2, B = b c^6 h^4
    B = (r1 - 4.0 * r2) / (1.0 - 4.0 / 16.0)
    A = r1 - B
    return A / (c**4 * h**2), B / (c**6 * h**4)
