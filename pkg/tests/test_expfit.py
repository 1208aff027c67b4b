import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from equispec.exceptions import DatasetError
from equispec.expfit import (
    FilmDataset,
    InverseLawRegressor,
    cross_validate_truncated,
    fit_inverse_law,
    load_dataset,
    shipped_dataset_path,
    synthetic_inverse,
    synthetic_square_well,
)
from equispec.potentials import truncated_spacing

HEADER = "source,d_value,d_unit,dE_meV\n"


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoad:
    def test_bilayer_conversion(self, tmp_path):
        ds = load_dataset(write(tmp_path, HEADER + "hirahara,10,BL,800\n"))
        assert ds.d_nm.tolist() == [4.0]
        assert ds.dE_meV.tolist() == [800.0]

    def test_custom_bilayer(self, tmp_path):
        ds = load_dataset(write(tmp_path, HEADER + "a,10,BL,800\nb,3,nm,100\n"), d_bl=0.5)
        assert ds.d_nm.tolist() == [5.0, 3.0]

    def test_empty(self, tmp_path):
        with pytest.raises(DatasetError, match="no records"):
            load_dataset(write(tmp_path, HEADER))
        with pytest.raises(DatasetError, match="no records"):
            load_dataset(write(tmp_path, ""))

    def test_comments_and_sigma(self, tmp_path):
        ds = load_dataset(write(tmp_path, "# note\nsource,d_value,d_unit,dE_meV,sigma_meV\n\na,4,nm,300,10\n"))
        assert ds.sigma_meV.tolist() == [10.0]

    @pytest.mark.parametrize(
        "body,line,match",
        [
            ("a,10,BL\n", 2, "expected 4 fields"),
            ("a,x,BL,800\n", 2, "not a number"),
            ("a,10,mm,800\n", 2, "d_unit"),
            ("a,-1,nm,800\n", 2, "thickness must be positive"),
            ("a,1,nm,800\nb,1,nm,0\n", 3, "energy spacing must be positive"),
        ],
    )
    def test_malformed_rows(self, tmp_path, body, line, match):
        with pytest.raises(DatasetError, match=match) as info:
            load_dataset(write(tmp_path, HEADER + body))
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}: ")

    def test_bad_header(self, tmp_path):
        with pytest.raises(DatasetError, match="header"):
            load_dataset(write(tmp_path, "d,dE\n1,2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / "missing.csv")

    def test_synthetic_round_trip(self, tmp_path):
        d_bl = [7, 10, 20, 40]
        rows = "".join(f"s,{b},BL,{3340 * 1 / b!r}\n" for b in d_bl)
        ds = load_dataset(write(tmp_path, HEADER + rows))
        assert np.allclose(ds.dE_meV, synthetic_inverse(ds.d_nm), rtol=1e-14)

    def test_shipped(self):
        ds = load_dataset(shipped_dataset_path())
        assert len(ds) == 10
        assert set(ds.sources) == {"kroger", "hirahara"}


class TestRegressor:
    def test_fixed_inverse_exact(self):
        d = np.linspace(2, 40, 8)
        reg = InverseLawRegressor().fit(d, 1336.0 / d)
        assert reg.C_ == pytest.approx(1336.0, rel=1e-12)
        assert reg.r_squared_ == pytest.approx(1.0)
        assert reg.predict([4.0]) == pytest.approx([334.0])

    def test_power_law_exact(self):
        d = np.geomspace(2, 40, 8)
        reg = InverseLawRegressor("power_law", n_bootstrap=0).fit(d, 50 * d**-1.7)
        assert reg.alpha_ == pytest.approx(1.7, rel=1e-10)
        assert reg.C_ == pytest.approx(50, rel=1e-10)

    def test_bootstrap_deterministic(self):
        rng = np.random.default_rng(1)
        d = np.geomspace(2, 40, 10)
        y = 1336 / d * (1 + 0.03 * rng.normal(size=10))
        a = InverseLawRegressor("power_law", random_state=5).fit(d, y).alpha_interval_
        b = InverseLawRegressor("power_law", random_state=5).fit(d, y).alpha_interval_
        assert a == b and a[0] < 1.0 < a[1]

    def test_minimum_records(self):
        with pytest.raises(ValueError, match="at least 3"):
            InverseLawRegressor().fit([1, 2], [1, 2])
        with pytest.raises(ValueError, match="at least 4"):
            InverseLawRegressor("power_law").fit([1, 2, 3], [1, 2, 3])

    def test_singular_design(self):
        with pytest.raises(np.linalg.LinAlgError):
            InverseLawRegressor("power_law").fit([2, 2, 2, 2], [1, 2, 3, 4])

    def test_invalid(self):
        with pytest.raises(ValueError):
            InverseLawRegressor("cubic").fit([1, 2, 3], [1, 2, 3])
        with pytest.raises(ValueError):
            InverseLawRegressor().fit([1, -2, 3], [1, 2, 3])
        with pytest.raises(AttributeError):
            InverseLawRegressor().predict([1])

    def test_sklearn_api(self):
        est = InverseLawRegressor(n_bootstrap=10)
        assert clone(est).get_params()["n_bootstrap"] == 10
        d = np.linspace(2, 40, 8)
        assert est.fit(d.reshape(-1, 1), 100 / d).score(d.reshape(-1, 1), 100 / d) == pytest.approx(1.0)

    def test_weights_pull_fit(self):
        d = np.array([2.0, 4.0, 8.0, 16.0])
        y = 100 / d
        y[0] *= 1.5
        w = np.array([0.0, 1.0, 1.0, 1.0])
        reg = InverseLawRegressor().fit(d, y, sample_weight=w)
        assert reg.C_ == pytest.approx(100.0)


class TestFit:
    def test_reference_slope(self):
        d = np.linspace(2.8, 40, 10)
        res = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_inverse(d)))
        assert res.C_in_bilayers_eV == pytest.approx(3.34, rel=1e-9)
        assert res.V0_over_mstar_eV == pytest.approx(2.93, rel=5e-3)

    @given(st.floats(0.2, 5.0))
    def test_rescaling_thickness(self, s):
        d = np.array([3.0, 5.0, 9.0, 20.0])
        y = np.array([400.0, 260.0, 150.0, 64.0])
        a = fit_inverse_law(FilmDataset.from_arrays(d, y))
        b = fit_inverse_law(FilmDataset.from_arrays(d * s, y))
        assert b.C_eV_nm == pytest.approx(a.C_eV_nm * s, rel=1e-10)
        pa = fit_inverse_law(FilmDataset.from_arrays(d, y), "power_law", n_bootstrap=0)
        pb = fit_inverse_law(FilmDataset.from_arrays(d * s, y), "power_law", n_bootstrap=0)
        assert pb.alpha == pytest.approx(pa.alpha, rel=1e-9)

    def test_units_invariance(self):
        bl = np.array([7.0, 10.0, 20.0, 40.0])
        y = 3340 / bl
        a = fit_inverse_law(FilmDataset.from_arrays(bl, y, unit="BL"))
        b = fit_inverse_law(FilmDataset.from_arrays(bl * 0.4, y, unit="nm"))
        assert a.V0_over_mstar_eV == pytest.approx(b.V0_over_mstar_eV, rel=1e-12)

    def test_power_law_distinguishes_scalings(self):
        d = np.geomspace(2, 40, 10)
        inv = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_inverse(d)), "power_law")
        box = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_square_well(d)), "power_law")
        assert inv.alpha == pytest.approx(1.0, abs=1e-6)
        assert box.alpha == pytest.approx(2.0, abs=1e-6)
        assert box.V0_over_mstar_eV is None

    def test_sigma_weighting(self):
        ds = FilmDataset.from_arrays([2.0, 4.0, 8.0], [500.0, 330.0, 170.0], sigma=[1.0, 50.0, 50.0])
        res = fit_inverse_law(ds)
        assert res.weighted
        assert res.C_eV_nm == pytest.approx(1.0, rel=0.02)

    def test_json_fields(self):
        d = np.linspace(2, 40, 5)
        out = json.loads(json.dumps(fit_inverse_law(FilmDataset.from_arrays(d, 100 / d)).to_dict()))
        assert {"model", "C_eV_nm", "alpha", "V0_over_mstar_eV", "r_squared"} <= set(out)

    def test_dataset_invariants(self):
        with pytest.raises(DatasetError):
            FilmDataset.from_arrays([1.0, 2.0], [1.0])
        with pytest.raises(DatasetError):
            FilmDataset((), 0.4)
        with pytest.raises(DatasetError):
            FilmDataset.from_arrays([1.0], [1.0], d_bl=0)


class TestTruncated:
    def test_reference_well(self):
        c = cross_validate_truncated(8.0, 16.0)
        assert c.dE_formula_meV == pytest.approx(138.02, abs=0.01)
        assert c.max_relative_deviation < 0.01
        assert c.n_levels >= 40

    def test_thin_film(self):
        c = cross_validate_truncated(2.93, 3.7)
        assert c.dE_numeric_meV == pytest.approx(358, rel=0.02)

    def test_four_times_thicker(self):
        assert truncated_spacing(2.93, 4 * 3.7) == pytest.approx(truncated_spacing(2.93, 3.7) / 4)

    def test_too_shallow(self):
        c = cross_validate_truncated(0.001, 0.5)
        assert c.warning == "fewer than 2 levels below 0.9 V0"
        assert np.isnan(c.max_relative_deviation)

    def test_invalid(self):
        with pytest.raises(ValueError):
            cross_validate_truncated(-1, 2)

    def test_record_serializable(self):
        json.dumps(cross_validate_truncated(2.93, 3.7).to_dict())
