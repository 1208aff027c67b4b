import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from equispec.numerics import EigenSolution, Grid1D
from equispec.potentials import PotentialModel, UnitScale, evaluate, harmonic_state, reference_spectrum
from equispec.spectral import (
    SchrodingerSolver,
    _two_means,
    apply_shift_operator,
    classify_states,
    polynomial_fit,
    rows_to_csv,
    solve_potential,
    spacing_report,
    spectrum_rows,
)


@pytest.fixture(scope="module")
def harmonic():
    return solve_potential(PotentialModel.harmonic(), k=12, h=0.01)


class TestSolve:
    def test_harmonic_levels(self, harmonic):
        assert np.max(np.abs(harmonic.energies - (np.arange(12) + 0.5))) < 1e-3

    def test_second_order_convergence(self):
        m = PotentialModel.harmonic()
        g1 = Grid1D.from_spacing(-10, 10, 0.04)
        g2 = Grid1D.from_spacing(-10, 10, 0.02)
        e1 = solve_potential(m, g1, k=5).energies - (np.arange(5) + 0.5)
        e2 = solve_potential(m, g2, k=5).energies - (np.arange(5) + 0.5)
        assert np.allclose(e1 / e2, 4.0, rtol=0.02)

    def test_states_match_closed_form(self, harmonic):
        x = harmonic.grid.nodes
        for n in range(5):
            exact = harmonic_state(n, x)
            assert np.max(np.abs(np.abs(harmonic.states[:, n]) - np.abs(exact))) < 1e-3

    def test_walls_are_zero(self, harmonic):
        assert np.all(harmonic.states[[0, -1]] == 0)

    @pytest.mark.parametrize("A", [0.5, 4.0])
    def test_isotonic_ladder(self, A):
        m = PotentialModel.isotonic(A)
        sol = solve_potential(m, k=6, h=0.005)
        ref = reference_spectrum(m, 5).energies()
        assert np.max(np.abs(sol.energies - ref)) < 1e-3

    def test_isotonic_negative_side_same_spectrum(self):
        pos = solve_potential(PotentialModel.isotonic(1.0), k=4, h=0.005)
        neg = solve_potential(PotentialModel.isotonic(1.0, "negative"), k=4, h=0.005)
        assert np.allclose(pos.energies, neg.energies, atol=1e-9)

    @pytest.mark.parametrize("m", [2, 4, 1, 3])
    def test_darboux_ladder(self, m):
        model = PotentialModel.darboux(m)
        sol = solve_potential(model, k=6, h=0.005)
        ref = reference_spectrum(model, 5).energies()
        assert np.max(np.abs(sol.energies - ref)) < 2e-3

    def test_unit_scale(self, harmonic):
        scale = UnitScale(0.5, 20.0)
        sol = solve_potential(PotentialModel.harmonic(), k=12, h=0.01, scale=scale)
        assert np.allclose(sol.energies, 20.0 * harmonic.energies)
        assert sol.metadata["units"] == "nm/meV"
        assert sol.grid.h == pytest.approx(0.01 * scale.length_nm)
        assert np.allclose(sol.grid.h * (sol.states**2).sum(axis=0), 1.0)

    def test_scale_rejected_for_physical_model(self):
        with pytest.raises(ValueError):
            solve_potential(PotentialModel.truncated_from_ratio(8, 16), k=3, h=0.05, scale=UnitScale())

    def test_truncated_well_equidistant(self):
        m = PotentialModel.truncated_from_ratio(8.0, 16.0)
        sol = solve_potential(m, k=20, h=0.01)
        assert np.allclose(np.diff(sol.energies), 138.02, rtol=5e-3)

    def test_ql_matches_lapack(self):
        m = PotentialModel.harmonic()
        g = Grid1D.from_spacing(-8, 8, 0.05)
        a = solve_potential(m, g, k=5).energies
        b = solve_potential(m, g, k=5, method="ql").energies
        assert np.allclose(a, b, atol=1e-10)

    def test_wall_warning(self):
        with pytest.warns(RuntimeWarning):
            solve_potential(PotentialModel.harmonic(), Grid1D.from_spacing(-2, 2, 0.02), k=6)


class TestEstimator:
    def test_fit_predict(self):
        est = SchrodingerSolver(k=5, h=0.01).fit(PotentialModel.harmonic())
        assert est.predict([0, 4]) == pytest.approx([0.5, 4.5], abs=1e-3)

    def test_params_and_clone(self):
        est = SchrodingerSolver(k=7, h=0.02)
        assert est.get_params()["k"] == 7
        c = clone(est.set_params(h=0.03))
        assert c.h == 0.03 and not hasattr(c, "solution_")

    def test_not_fitted(self):
        with pytest.raises(AttributeError, match="not fitted"):
            SchrodingerSolver().predict([0])

    def test_bad_params(self):
        with pytest.raises(ValueError):
            SchrodingerSolver(k=0).fit(PotentialModel.harmonic())

    def test_out_of_range(self):
        est = SchrodingerSolver(k=3).fit(PotentialModel.harmonic())
        with pytest.raises(IndexError):
            est.predict([3])


class TestReport:
    def test_harmonic_report(self, harmonic):
        r = spacing_report(harmonic)
        assert r.mean_spacing == pytest.approx(1.0, abs=1e-3)
        assert r.cv < 1e-3
        assert r.slope == pytest.approx(1.0, abs=1e-3)
        assert r.r_squared > 0.999999

    def test_window_and_labels(self, harmonic):
        labels = ["a" if i % 2 else "b" for i in range(12)]
        r = spacing_report(harmonic, (2, 9), labels)
        assert r.n.tolist() == list(range(2, 10))
        assert r.per_class["a"]["mean"] == pytest.approx(2.0, abs=1e-3)
        d = r.to_dict()
        assert d["per_class"]["b"]["count"] == 3

    def test_window_errors(self, harmonic):
        with pytest.raises(ValueError):
            spacing_report(harmonic, (0, 1))
        with pytest.raises(ValueError):
            spacing_report(harmonic, (5, 40))
        with pytest.raises(ValueError):
            spacing_report(harmonic, None, ["a"])

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
    def test_polynomial_fit_exact(self, a, b, c):
        n = np.arange(10.0)
        coef, r2 = polynomial_fit(n, a * n**2 + b * n + c, 2)
        assert np.allclose(coef, [a, b, c], atol=1e-7)

    def test_rows_csv(self, harmonic):
        text = rows_to_csv(spectrum_rows(harmonic), ["n", "E", "dE"])
        lines = text.splitlines()
        assert lines[0] == "n,E,dE"
        assert lines[-1].endswith(",")  # no spacing after the last level
        assert len(lines) == 13


class TestClassification:
    def test_two_means_separates_clusters(self):
        v = np.array([0.01, 0.02, 0.015, 0.4, 0.45, 0.5])
        thr = _two_means(v)
        assert 0.02 < thr < 0.4
        assert _two_means(np.ones(4)) is None

    def test_single_ladder_is_not_split(self, harmonic):
        cls = classify_states(harmonic, evaluate(PotentialModel.harmonic(), harmonic.grid))
        assert not cls.split
        assert cls.n_classes == 1

    def test_input_validation(self, harmonic):
        with pytest.raises(ValueError):
            classify_states(harmonic, np.zeros(3))
        with pytest.raises(ValueError):
            classify_states(EigenSolution(harmonic.energies, harmonic.states), np.zeros(3))

    def test_type1_has_one_class(self, type1_solved):
        gen, sol = type1_solved
        assert not classify_states(sol, gen.U).split

    @pytest.mark.slow
    def test_type2_split(self, type2_solved):
        gen, sol, cls = type2_solved
        assert cls.split and cls.n_classes == 2
        c1 = np.flatnonzero(cls.labels == "1")
        # localized ladder sits on one side of the broad well
        assert len(set(cls.region[c1].tolist())) == 1
        assert np.all(cls.forbidden[c1].mean() > cls.forbidden[cls.labels == "2"].mean())
        d = cls.to_dict()
        assert d["n_classes"] == 2 and len(d["labels"]) == len(sol.energies)

    @pytest.mark.slow
    def test_rows_carry_labels(self, type3_solved):
        gen, sol, cls = type3_solved
        rows = spectrum_rows(sol, cls)
        assert {r["class"] for r in rows} <= {"1-left", "1-right", "2"}


class TestShiftOperators:
    def test_order1_harmonic(self, harmonic):
        r = apply_shift_operator(harmonic, 1)
        assert r.passed.all()
        assert r.ground_annihilation < 1e-3

    def test_order2_isotonic(self):
        m = PotentialModel.isotonic(1.0)
        sol = solve_potential(m, k=7, h=0.005)
        r = apply_shift_operator(sol, 2, m)
        assert r.overlaps.min() > 0.999
        assert r.ground_annihilation < 1e-2
        assert np.allclose(apply_shift_operator(sol, 2, 1.0).overlaps, r.overlaps)

    def test_order3_on_harmonic(self, harmonic):
        # W = 0 solves the shift ODE, so the third-order ladder applies to xi^2/2
        r = apply_shift_operator(harmonic, 3, PotentialModel.harmonic())
        assert r.overlaps.min() > 0.999

    def test_order3_darboux_skips_ground(self):
        m = PotentialModel.darboux(2)
        sol = solve_potential(m, k=8, h=0.01)
        r = apply_shift_operator(sol, 3, m)
        # isolated ground state is not connected to the ladder above it
        assert r.overlaps[0] < 1e-2
        assert r.overlaps[1:].min() > 0.999

    def test_order3_on_generated(self, type1_solved):
        gen, _ = type1_solved
        sol = solve_potential(gen, k=10)
        r = apply_shift_operator(sol, 3, gen)
        assert r.overlaps.shape == (9,)
        assert np.all((0 <= r.overlaps) & (r.overlaps <= 1 + 1e-12))
        # U ~ 1/(xi - pole)^2 at the walls: the ladder maps states out of the
        # domain there, so overlaps stay well below one
        assert not r.passed.any()

    def test_order3_from_array(self, harmonic):
        x = harmonic.grid.nodes
        jet = np.column_stack([x**2 / 2, x, np.ones_like(x), np.zeros_like(x)])
        r = apply_shift_operator(harmonic, 3, jet)
        assert r.overlaps.min() > 0.999

    def test_errors(self, harmonic):
        with pytest.raises(ValueError):
            apply_shift_operator(harmonic, 4)
        with pytest.raises(ValueError):
            apply_shift_operator(harmonic, 2)
        with pytest.raises(ValueError, match="U and its first three derivatives"):
            apply_shift_operator(harmonic, 3)
