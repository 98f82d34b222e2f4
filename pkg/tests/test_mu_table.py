import logging

import numpy as np
import pytest

from app.core.errors import MuTableError, OutOfCalibrationError
from app.core.mesh import ElementKind
from app.core.mu_table import (
    MuTable,
    dump_table,
    get_mu_table,
    load_mu_table,
    lookup_mu,
    select_n_s,
)


def _first_rows(table: MuTable):
    seen = {}
    for row in table.rows:
        seen.setdefault(row.key, row)
    return list(seen.values())


class TestPackagedTables:
    def test_ranges(self, tri_table, quad_table):
        assert tri_table.kind is ElementKind.TRIANGLE
        assert tri_table.max_key == 3.15
        assert quad_table.max_key == 2.51
        assert [r.n_s for r in tri_table.regimes] == [10, 15]
        assert [r.n_s for r in quad_table.regimes] == [8, 10]

    def test_regimes_are_built_once(self, tri_table):
        assert tri_table.regimes is tri_table.regimes

    @pytest.mark.parametrize("kind", [ElementKind.TRIANGLE, ElementKind.QUAD])
    def test_exact_keys_return_printed_rows(self, kind):
        table = get_mu_table(kind)
        for row in _first_rows(table):
            assert lookup_mu(table, row.key) == (row.mu, row.n_s)

    def test_below_table(self, tri_table, quad_table):
        assert lookup_mu(tri_table, 0.5) == (5.4, 10)
        assert lookup_mu(tri_table, 1e-6) == (5.4, 10)
        assert lookup_mu(quad_table, 0.3) == (2.5, 8)

    def test_interpolation(self, tri_table):
        mu, n_s = lookup_mu(tri_table, 0.62)
        assert n_s == 10
        assert mu == pytest.approx(5.43 + 0.02 * (0.62 - 0.583) / (0.644 - 0.583), abs=1e-12)
        assert mu == pytest.approx(5.4421, abs=1e-4)

    def test_interpolation_stays_in_regime(self, tri_table):
        mu, n_s = lookup_mu(tri_table, 2.6)
        assert n_s == 15
        assert mu == pytest.approx(7.8 + 0.15 * 0.023 / 0.072, abs=1e-12)

    def test_regime_boundaries(self, tri_table, quad_table):
        assert lookup_mu(tri_table, 2.577) == (8.3, 10)
        assert lookup_mu(quad_table, 1.49) == (2.7, 8)
        assert lookup_mu(quad_table, 1.5)[1] == 10
        assert lookup_mu(quad_table, 2.51) == (3.29, 10)

    def test_monotone_within_regimes(self, tri_table):
        for regime in tri_table.regimes:
            # the first key of a later regime belongs to the regime before it
            keys = np.linspace(regime.keys[0], regime.keys[-1], 200)[1:]
            mus = [lookup_mu(tri_table, k)[0] for k in keys]
            assert np.all(np.diff(mus) >= 0)

    def test_out_of_calibration(self, tri_table):
        with pytest.raises(OutOfCalibrationError) as info:
            lookup_mu(tri_table, 3.2)
        assert info.value.clamped_mu == 8.65
        assert info.value.n_s == 15

    def test_clamping_warns(self, quad_table, caplog):
        with caplog.at_level(logging.WARNING):
            assert lookup_mu(quad_table, 2.6, clamp=True) == (3.29, 10)
        assert "clamping" in caplog.text

    def test_key_must_be_positive(self, tri_table):
        with pytest.raises(ValueError):
            lookup_mu(tri_table, 0.0)

    def test_select_n_s(self, tri_table):
        assert select_n_s(tri_table, 2.0) == 10
        assert select_n_s(tri_table, 2.6) == 15
        assert select_n_s(tri_table, 5.0) == 15


class TestTableFiles:
    def test_dump_reloads(self, tmp_path, quad_table):
        path = tmp_path / "quad.txt"
        path.write_text(dump_table(quad_table))
        assert load_mu_table(path).rows == quad_table.rows

    def test_custom_table_through_cache(self, tmp_path):
        path = tmp_path / "custom.txt"
        path.write_text("kind tri\n0.5 2.0 10\n1.0 3.0 10\n")
        table = get_mu_table(ElementKind.TRIANGLE, str(path))
        assert lookup_mu(table, 0.75) == pytest.approx((2.5, 10))

    def test_kind_mismatch(self, tmp_path):
        path = tmp_path / "quad_as_tri.txt"
        path.write_text("kind quad\n1.0 2.5 8\n")
        with pytest.raises(MuTableError, match="quad table"):
            get_mu_table(ElementKind.TRIANGLE, str(path))

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("", "empty"),
            ("kind hex\n", "line 1"),
            ("kind tri\n0.5 2.0\n", "line 2"),
            ("kind tri\n0.5 2.0 10\n0.4 2.1 10\n", "line 3"),
            ("# header\nkind tri\n0.5 2.0 10\n0.5 2.1 10\n", "line 4"),
            ("kind tri\n0.5 2.0 10\n0.6 2.0 15\n0.7 2.0 10\n", "not contiguous"),
        ],
    )
    def test_malformed(self, tmp_path, text, fragment):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(MuTableError, match=fragment):
            load_mu_table(path)
