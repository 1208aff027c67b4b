"""Acceptance criteria, one recorded PASS/FAIL line each (shown in the
terminal summary). Known shortfalls are strict xfails: they must keep failing
at the stated tolerance, and the recorded line shows by how much."""

import time
from fractions import Fraction as F

import numpy as np
import pytest

from equispec import cli
from equispec.exact import RationalPolynomial as P
from equispec.expfit import (
    FilmDataset,
    fit_inverse_law,
    load_dataset,
    shipped_dataset_path,
    synthetic_inverse,
    synthetic_square_well,
)
from equispec.numerics import Grid1D
from equispec.perturbation import (
    correction_degree,
    diagonal_polynomial,
    equidistance_verdict,
    matrix_element,
    offdiagonal_polynomial,
)
from equispec.potentials import PotentialModel, reference_spectrum, truncated_spacing
from equispec.spectral import apply_shift_operator, polynomial_fit, solve_potential, spacing_report

from test_perturbation import DIAGONAL, OFFDIAGONAL, quadrature_element

CLASS1_MEV = 358.0


def test_01_harmonic_baseline(criterion):
    t = time.perf_counter()
    sol = solve_potential(PotentialModel.harmonic(), Grid1D.from_spacing(-12, 12, 0.001), k=20)
    elapsed = time.perf_counter() - t
    err = float(np.max(np.abs(sol.energies - (np.arange(20) + 0.5))))
    criterion(1, "harmonic baseline", err < 1e-4 and elapsed < 10,
              f"max|E_n - (n+1/2)| = {err:.2e} for n<=19 (tol 1e-4), {elapsed:.2f} s (limit 10 s)")


def test_02_isotonic(criterion):
    worst = {}
    for A in (0.5, 1.0, 4.0):
        m = PotentialModel.isotonic(A)
        sol = solve_potential(m, k=11, h=0.002)
        worst[A] = float(np.max(np.abs(sol.energies - reference_spectrum(m, 10).energies())))
    ok = max(worst.values()) < 1e-3
    criterion(2, "isotonic ladders", ok, ", ".join(f"A={a}: {e:.1e}" for a, e in worst.items()) + " (tol 1e-3)")


def test_03_truncated_well(criterion):
    m = PotentialModel.truncated_from_ratio(8.0, 16.0)
    ref = reference_spectrum(m, 10**6)
    sol = solve_potential(m, k=ref.n_max + 3, h=0.005)
    e = sol.energies[sol.energies < 0.9 * m.params["v0"]]
    sp = np.diff(e)
    dev = float(np.max(np.abs(sp / 138.0 - 1)))
    formula = truncated_spacing(8.0, 16.0)
    ok = dev < 0.01 and abs(formula / 138 - 1) < 0.01
    criterion(3, "truncated well", ok,
              f"{len(e)} levels below 0.9 V0, spacings {sp.min():.2f}..{sp.max():.2f} meV, "
              f"max dev from 138 meV {dev:.2%} (tol 1%), formula {formula:.2f} meV")


def test_04_experimental_fit(criterion):
    d = np.geomspace(2.8, 40, 12)
    exact = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_inverse(d)))
    c_err = abs(exact.C_in_bilayers_eV / 3.34 - 1)
    v_err = abs(exact.V0_over_mstar_eV / 2.93 - 1)
    shipped = fit_inverse_law(load_dataset(shipped_dataset_path()))
    s_c = abs(shipped.C_in_bilayers_eV / 3.34 - 1)
    s_v = abs(shipped.V0_over_mstar_eV / 2.93 - 1)
    a1 = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_inverse(d)), "power_law").alpha
    a2 = fit_inverse_law(FilmDataset.from_arrays(d, synthetic_square_well(d)), "power_law").alpha
    ok = c_err < 5e-3 and v_err < 5e-3 and s_c < 0.1 and s_v < 0.1 and abs(a1 - 1) < 0.1 and abs(a2 - 2) < 0.1
    criterion(4, "experimental fit", ok,
              f"synthetic C={exact.C_in_bilayers_eV:.4f} eV*d_BL ({c_err:.1e}), V0/m*={exact.V0_over_mstar_eV:.4f} "
              f"({v_err:.1e}); shipped (reconstructed) C={shipped.C_in_bilayers_eV:.3f}, "
              f"V0/m*={shipped.V0_over_mstar_eV:.3f}; alpha 1/d={a1:.4f}, box={a2:.4f}")


def _ladder(m, k=8, h=0.005):
    sol = solve_potential(PotentialModel.darboux(m), k=k, h=h)
    return sol.energies


def test_05_darboux(criterion):
    parts, ok = [], True
    # gap 1 + 2m for m in {2, 4} is the even family index 2m
    for m in (2, 4):
        e = _ladder(2 * m)
        gap, sp = e[1] - e[0], np.diff(e[1:])
        good = abs(gap - (1 + 2 * m)) < 1e-2 and np.max(np.abs(sp - 1)) < 1e-3
        ok &= good
        parts.append(f"m={m}: gap {gap:.4f} (want {1 + 2 * m}), spacing dev {np.max(np.abs(sp - 1)):.1e}")
    for m in (1, 3):
        sp = np.diff(_ladder(m))
        good = np.max(np.abs(sp - 2)) < 1e-3
        ok &= good
        parts.append(f"m={m}: half-line spacing dev {np.max(np.abs(sp - 2)):.1e}")
    criterion(5, "Darboux ladders", ok, "; ".join(parts))


# criterion 6 is split into sub-checks


def test_06a_residual_certificates(criterion, type1_solved, type2_solved, type3_solved):
    res = {n: g.max_residual for n, g in (("type1", type1_solved[0]), ("type2", type2_solved[0]), ("type3", type3_solved[0]))}
    criterion("6a", "shift-ODE residuals", max(res.values()) < 1e-4,
              ", ".join(f"{k} {v:.1e}" for k, v in res.items()) + " (tol 1e-4)")


@pytest.mark.xfail(strict=True, reason="lowest type-1 spacings grow from the start; see decisions ledger")
def test_06b_type1_low_spacing(criterion, type1_solved):
    e = type1_solved[1].energies
    sp = np.diff(e[:8])
    cv = float(sp.std() / sp.mean())
    criterion("6b", "type-1 lowest-8 spacing CV", cv < 0.05, f"CV {cv:.1%} (tol 5%), spacings {np.round(sp, 3).tolist()}")


def test_06c_type1_growth(criterion, type1_solved):
    e = type1_solved[1].energies
    n = np.arange(20, len(e))
    (a, b, c), r2 = polynomial_fit(n, e[20:], 2)
    criterion("6c", "type-1 super-linear growth", a > 0 and r2 > 0.99,
              f"E_n ~ {a:.4f} n^2 + {b:.3f} n + {c:.3f} over n=20..{len(e) - 1}, R^2={r2:.8f}")


def _class_stats(solved):
    gen, sol, cls = solved
    report = spacing_report(sol, None, cls.combined_labels())
    c1 = [v for k, v in report.per_class.items() if k.startswith("1")]
    c2 = report.per_class.get("2")
    return cls, report, c1, c2


def test_06d_two_classes(criterion, type2_solved, type3_solved):
    n2 = type2_solved[2].n_classes
    n3 = type3_solved[2].n_classes
    criterion("6d", "two classes for type-2/3", n2 == 2 and n3 == 2, f"type2 {n2}, type3 {n3} classes")


def test_06e_type2_class1_cv(criterion, type2_solved):
    _, _, c1, _ = _class_stats(type2_solved)
    cv = max(v["cv"] for v in c1)
    criterion("6e", "type-2 class-1 spacing CV", cv < 0.05, f"CV {cv:.2%} over {c1[0]['count']} spacings (tol 5%)")


@pytest.mark.xfail(strict=True, reason="class-1 ladder of the pole-bounded type-3 well is irregular; see ledger")
def test_06f_type3_class1_cv(criterion, type3_solved):
    _, _, c1, _ = _class_stats(type3_solved)
    cv = max(v["cv"] for v in c1)
    criterion("6f", "type-3 class-1 spacing CV", cv < 0.05, f"CV {cv:.2%} over {c1[0]['count']} spacings (tol 5%)")


@pytest.mark.xfail(strict=True, reason="class-2 spacing exceeds class-1 spacing in the reproduced type-3 well")
def test_06g_type3_ratio(criterion, type3_solved):
    _, _, c1, c2 = _class_stats(type3_solved)
    ratio = c2["mean"] / c1[0]["mean"]
    criterion("6g", "type-3 class-2/class-1 ratio", abs(ratio / 0.746 - 1) < 0.10, f"{ratio:.3f} (want 0.746 +- 10%)")


@pytest.mark.xfail(strict=True, reason="merged type-3 spacing follows from 6g; not reproducible")
def test_06h_type3_merged(criterion, type3_solved):
    _, report, c1, _ = _class_stats(type3_solved)
    mev = report.mean_spacing * CLASS1_MEV / c1[0]["mean"]
    criterion("6h", "type-3 merged mean spacing", abs(mev / 108 - 1) < 0.15, f"{mev:.1f} meV (want 108 +- 15%)")


@pytest.mark.xfail(strict=True, reason="type-2 merged mean lands just above the band; see ledger")
def test_06i_type2_merged(criterion, type2_solved):
    _, report, c1, _ = _class_stats(type2_solved)
    mev = report.mean_spacing * CLASS1_MEV / c1[0]["mean"]
    criterion("6i", "type-2 merged mean spacing", abs(mev / 180 - 1) < 0.15, f"{mev:.1f} meV (want 180 +- 15%)")


def test_07_perturbation_tables(criterion):
    t = time.perf_counter()
    diag_ok = all(diagonal_polynomial(j) == p for j, p in DIAGONAL.items())
    off_ok = all(offdiagonal_polynomial(j, l) == p for (j, l), p in OFFDIAGONAL.items())
    worst = 0.0
    for j in range(9):
        for m in range(11):
            for n in range(11):
                exact = float(matrix_element(m, n, j))
                worst = max(worst, abs(exact - quadrature_element(m, n, j)) / max(1.0, abs(exact)))
    elapsed = time.perf_counter() - t
    ok = diag_ok and off_ok and worst < 1e-10 and elapsed < 30
    criterion(7, "perturbation tables", ok,
              f"{len(DIAGONAL)} u_kk and {len(OFFDIAGONAL)} p_kl exact: {diag_ok and off_ok}; "
              f"quadrature max rel dev {worst:.1e} (tol 1e-10); {elapsed:.2f} s")


def test_08_scaling(criterion):
    d1 = {j: correction_degree(j, 1) for j in (2, 4, 6, 8)}
    d2 = {j: correction_degree(j, 2) for j in range(2, 7)}
    d3 = {j: correction_degree(j, 3) for j in (2, 4, 6)}
    deg_ok = all(v == j // 2 for j, v in d1.items()) and all(v == j - 1 for j, v in d2.items()) \
        and all(v == 3 * j // 2 - 2 for j, v in d3.items())
    equi = [[1], [0, 1], [0, 0, 1], [F(2, 3), F(-1, 5), F(7, 4)]]
    viol = [[0, 0, 0, 1], [0, 0, 0, 0, 1], [0, 0, 1, 0, F(1, 10)]]
    eq_ok = all(equidistance_verdict(u, 3).equidistant for u in equi)
    orders = [equidistance_verdict(u, 3).violation_order for u in viol]
    ok = deg_ok and eq_ok and all(o is not None for o in orders)
    criterion(8, "scaling theorems", ok,
              f"deg1 {list(d1.values())}, deg2 {list(d2.values())}, deg3 {list(d3.values())}; "
              f"equidistant cases {eq_ok}; violation orders xi^3/xi^4/xi^2+0.1xi^4 = {orders}")


def test_09_shift_operators(criterion):
    h_sol = solve_potential(PotentialModel.harmonic(), k=12, h=0.005)
    h = apply_shift_operator(h_sol, 1)
    iso = PotentialModel.isotonic(1.0)
    i = apply_shift_operator(solve_potential(iso, k=7, h=0.002), 2, iso)
    ok = h.overlaps[:11].min() >= 0.999 and i.overlaps[:6].min() >= 0.999 and h.ground_annihilation < 1e-3
    criterion(9, "shift operators", ok,
              f"harmonic min overlap {h.overlaps[:11].min():.10f} (n<=10), isotonic A=1 {i.overlaps[:6].min():.8f} "
              f"(n<=5), ground annihilation {h.ground_annihilation:.1e} (tol 1e-3)")


def test_10_determinism(criterion, tmp_path):
    runs = [
        ["solve", "--potential", "truncated", "--states"],
        ["generate", "--preset", "type1", "--svg"],
        ["perturb", "--poly", "0,0,1,0,1", "--orders", "3"],
        ["fit", "--model", "power_law"],
    ]
    same = True
    for i, args in enumerate(runs):
        outs = [tmp_path / f"{i}{tag}" for tag in "ab"]
        codes = [cli.main(args + ["--out", str(o)]) for o in outs]
        files = sorted(p.name for p in outs[0].iterdir())
        same &= codes == [0, 0] and all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files)
    criterion(10, "determinism", same, f"{len(runs)} commands run twice, byte-identical: {same}")
