import math

import numpy as np
import pytest

from app.core.analysis import (
    DENOMINATOR,
    coefficient_sweep,
    fit_truncation_1d,
    sevenpoint_symbol,
    trunc_coeffs,
    trunc_coeffs_printed,
    truncation_coeffs_1d,
)
from app.core.errors import ResonantParameterError
from app.core.fdstencil import Scheme1D, StencilScheme

SQRT3 = math.sqrt(3.0)


class TestSevenPointCoefficients:
    def test_galerkin_values(self):
        coeffs = trunc_coeffs(0.0, math.pi / 3.0)
        assert coeffs.c1 == pytest.approx(0.0541266, rel=1e-5)
        assert coeffs.c1 == pytest.approx(0.09375 / SQRT3, rel=1e-12)
        assert coeffs.c2 == pytest.approx(-0.0051119, rel=1e-4)

    def test_fourth_order_cancels_c1(self):
        scheme = StencilScheme.fourth_order()
        for theta in np.linspace(0.0, math.pi, 100):
            rows = coefficient_sweep(scheme, theta, [0.1, 0.7, 2.5])
            assert all(row.c1 == 0.0 for row in rows)

    @pytest.mark.parametrize("theta", [0.0, 0.2, 1.1])
    def test_c2_period(self, theta):
        a = trunc_coeffs(0.03, theta).c2
        b = trunc_coeffs(0.03, theta + math.pi / 3.0).c2
        assert a == pytest.approx(b, abs=1e-15)

    def test_pseudo_rfb_small_ch_limit(self):
        rows = coefficient_sweep(StencilScheme.pseudo_rfb(), 0.0, [1e-6])
        assert rows[0].beta == pytest.approx(1.0 / 108.0)
        assert rows[0].c1 == pytest.approx((30240.0 - 483840.0 / 108.0) / DENOMINATOR)

    def test_pseudo_ab_small_ch_values(self):
        row = coefficient_sweep(StencilScheme.pseudo_ab(6.8), 0.0, [1e-6])[0]
        assert row.beta == pytest.approx(0.062963, rel=1e-4)
        assert row.c1 == pytest.approx(-0.000401, rel=1e-2)
        row = coefficient_sweep(StencilScheme.pseudo_ab(5.4), 0.0, [1e-6])[0]
        assert row.beta == pytest.approx(0.05, rel=1e-9)
        assert row.c1 == pytest.approx(0.010825, rel=1e-3)

    def test_pole_rows_are_flagged(self):
        rows = coefficient_sweep(StencilScheme.pseudo_rfb(), 0.0, [1.0, math.sqrt(72.0), 9.0])
        assert [r.pole for r in rows] == [False, True, False]
        assert rows[1].c1 is None and rows[1].beta is None
        assert len(rows) == 3

    def test_printed_form_reduces_at_unit_h(self):
        c, theta = 2.3, 0.4
        alpha2 = StencilScheme.pseudo_ab(6.8).alpha2(c, 1.0)
        printed = trunc_coeffs_printed(alpha2, c, 1.0, theta)
        normalized = trunc_coeffs(alpha2 / c**2, theta)
        assert printed.c1 == pytest.approx(normalized.c1, rel=1e-13)
        assert printed.c2 == pytest.approx(normalized.c2, rel=1e-13)

    def test_printed_form_differs_elsewhere(self):
        c, h = 50.0, 0.02
        alpha2 = StencilScheme.pseudo_rfb().alpha2(c, h)
        printed = trunc_coeffs_printed(alpha2, c, h, 0.0)
        normalized = trunc_coeffs(alpha2 / (c * h) ** 2, 0.0)
        assert printed.c1 == pytest.approx(normalized.c1, rel=1e-13)
        assert printed.c2 != pytest.approx(normalized.c2, rel=1e-3)


class TestSymbol:
    @pytest.mark.parametrize("beta", [0.0, 0.03])
    def test_leading_term_is_c1(self, beta):
        c, h = 10.0, 1e-3
        symbol = sevenpoint_symbol(beta, c, h, 0.4)
        assert symbol / (c**4 * h**2) == pytest.approx(trunc_coeffs(beta, 0.4).c1, rel=1e-3)

    def test_direction_dependence_is_c2(self):
        c, h = 10.0, 0.01
        along = sevenpoint_symbol(0.0, c, h, 0.0)
        across = sevenpoint_symbol(0.0, c, h, math.pi / 6.0)
        assert (along - across) / (c**6 * h**4) == pytest.approx(168.0 / DENOMINATOR, rel=2e-2)

    def test_fourth_order_leading_term_vanishes(self):
        c = 5.0
        coarse = sevenpoint_symbol(0.0625, c, 0.02, 0.3)
        fine = sevenpoint_symbol(0.0625, c, 0.01, 0.3)
        assert coarse / fine == pytest.approx(16.0, rel=5e-2)


class TestOneDimensionalTruncation:
    def test_closed_forms(self):
        assert truncation_coeffs_1d(Scheme1D.GALERKIN, 0.5) == (1.0 / 12.0, -1.0 / 90.0)
        assert truncation_coeffs_1d(Scheme1D.EXACT_BUBBLE, 0.5) == (0.0, 0.0)
        a, _ = truncation_coeffs_1d(Scheme1D.PSEUDO_BUBBLE, SQRT3)
        assert a == pytest.approx(0.0, abs=1e-15)

    def test_pseudo_bubble_pole(self):
        with pytest.raises(ResonantParameterError):
            truncation_coeffs_1d(Scheme1D.PSEUDO_BUBBLE, math.sqrt(12.0))

    def test_galerkin_fit(self):
        a, b = fit_truncation_1d(Scheme1D.GALERKIN, 10.0, 0.01)
        assert a == pytest.approx(1.0 / 12.0, rel=2e-2)
        assert b == pytest.approx(-1.0 / 90.0, rel=2e-2)

    def test_pseudo_bubble_fit(self):
        a, _ = fit_truncation_1d(Scheme1D.PSEUDO_BUBBLE, 1.0, 0.3)
        expected, _ = truncation_coeffs_1d(Scheme1D.PSEUDO_BUBBLE, 0.3)
        assert a == pytest.approx(expected, rel=5e-2)
