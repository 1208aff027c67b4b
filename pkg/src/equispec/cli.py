"""Command-line front end: ``equispec solve|generate|perturb|fit``.

Every option can also come from a YAML config (``--config``); flags win over
config keys, config keys over built-in defaults. Each run writes its resolved
config next to the outputs.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .exceptions import (
    BranchInfeasibleError,
    DatasetError,
    EigenSolveError,
    GridError,
    IntegrationError,
    NonFiniteError,
    ResidualError,
    SingularityError,
    UnsupportedFamilyError,
)
from .numerics import Grid1D, RKControls
from .potentials import PotentialModel, UnitScale, evaluate, reference_spectrum
from .shift_ode import PRESETS, ShiftOdeProblem, generate
from .spectral import classify_states, rows_to_csv, solve_potential, spacing_report, spectrum_rows

SCHEMA_VERSION = 1
ENV_OUTPUT = "EQUISPEC_OUTPUT_DIR"
FLOAT_FMT = "%.12g"
J_CAP = 10
P_CAP = 4

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


DEFAULTS = {
    "solve": {
        "potential": "harmonic",
        "preset": None,
        "A": 1.0,
        "m": 2,
        "side": None,
        "V0_over_m": 8.0,
        "d_nm": 16.0,
        "mass_ratio": 1.0,
        "hbar_omega_meV": None,
        "k": None,
        "h": None,
        "x_min": None,
        "x_max": None,
        "window": None,
        "method": "lapack",
        "states": False,
        "classify": None,
        "svg": False,
        "out": None,
    },
    "generate": {
        "preset": None,
        "form": None,
        "A": None,
        "B": None,
        "xi0": None,
        "jet": None,
        "zero_jet": False,
        "branch": None,
        "xi_min": None,
        "xi_max": None,
        "h": 0.005,
        "tolerance": 1e-4,
        "integrator": "rk4",
        "step": 1e-4,
        "cap": 1e6,
        "svg": False,
        "out": None,
    },
    "perturb": {
        "monomial": None,
        "poly": None,
        "orders": 2,
        "k": "0..10",
        "j_cap": J_CAP,
        "svg": False,
        "out": None,
    },
    "fit": {
        "data": None,
        "synthetic": None,
        "model": "fixed_inverse",
        "d_bl": 0.4,
        "n_bootstrap": 1000,
        "seed": 0,
        "svg": False,
        "out": None,
    },
}

FAMILIES = {"harmonic", "isotonic", "darboux", "truncated"}


# ----------------------------------------------------------------------
# config handling
# ----------------------------------------------------------------------


def _flatten(cfg: dict, command: str) -> dict:
    """Merge a command section over top-level keys and lift nested mappings.

    ``potential: {family: isotonic, A: 1}`` becomes ``potential=isotonic, A=1``;
    other nested mappings (e.g. ``grid: {h: 0.01}``) are lifted as-is.
    """
    flat = {}
    sections = {c for c in DEFAULTS}
    merged = {k: v for k, v in cfg.items() if k not in sections}
    if isinstance(cfg.get(command), dict):
        merged.update(cfg[command])
    for key, val in merged.items():
        key = str(key).replace("-", "_")
        if isinstance(val, dict):
            for ik, iv in val.items():
                ik = str(ik).replace("-", "_")
                if ik in ("family", "name"):
                    flat[key] = iv
                else:
                    flat[ik] = iv
        else:
            flat[key] = val
    return flat


def load_config(path, command: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must be a mapping")
    flat = _flatten(cfg, command)
    unknown = sorted(set(flat) - set(DEFAULTS[command]))
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    return flat


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    given = vars(args)
    if given.get("config"):
        cfg.update(load_config(given["config"], command))
    for key, val in given.items():
        if key in cfg:
            cfg[key] = val
    return cfg


def _output_dir(cfg: dict, command: str) -> Path:
    base = cfg.get("out") or os.environ.get(ENV_OUTPUT) or os.path.join("equispec_out", command)
    return Path(base)


def _clean(obj):
    """JSON-safe copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(FLOAT_FMT % v)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Grid1D):
        return _clean(obj.to_dict())
    return obj


class Writer:
    def __init__(self, out: Path, command: str, cfg: dict):
        self.out = out
        self.command = command
        self.cfg = cfg
        self.files = []

    def text(self, name: str, content: str):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        self.files.append(name)

    def json(self, name: str, payload: dict):
        body = {"schema_version": SCHEMA_VERSION, "command": self.command, **payload}
        self.text(name, json.dumps(_clean(body), indent=2, sort_keys=True) + "\n")

    def config(self):
        resolved = {k: v for k, v in self.cfg.items() if k != "out"}
        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, self.command: _clean(resolved)}
        self.text("config.yaml", yaml.safe_dump(doc, sort_keys=True, default_flow_style=False))


def _csv(columns, rows) -> str:
    return rows_to_csv([dict(zip(columns, r)) for r in rows], columns, FLOAT_FMT)


def _svg(writer: Writer, name: str, series, **kw):
    from .svg import line_chart

    writer.text(name, line_chart(series, **kw))


def _parse_floats(text, name: str) -> list:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).replace(" ", "").split(",") if s != ""]
    try:
        return [float(v) for v in items]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _parse_range(text, name: str) -> range:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        lo, hi = text
    else:
        s = str(text)
        if ".." not in s:
            raise UsageError(f"{name}: expected LO..HI, got {text!r}")
        lo, hi = s.split("..", 1)
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"{name}: bounds must be integers, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise UsageError(f"{name}: need 0 <= LO <= HI, got {lo}..{hi}")
    return range(lo, hi + 1)


# ----------------------------------------------------------------------
# solve
# ----------------------------------------------------------------------


def _build_model(cfg) -> PotentialModel:
    fam = cfg["potential"]
    if fam not in FAMILIES:
        raise UsageError(f"potential: unknown family {fam!r}; choose from {sorted(FAMILIES)}")
    try:
        if fam == "harmonic":
            return PotentialModel.harmonic()
        if fam == "isotonic":
            return PotentialModel.isotonic(float(cfg["A"]), cfg["side"] or "positive")
        if fam == "darboux":
            return PotentialModel.darboux(int(cfg["m"]), cfg["side"])
        return PotentialModel.truncated_from_ratio(
            float(cfg["V0_over_m"]), float(cfg["d_nm"]), float(cfg["mass_ratio"])
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(f"potential parameters: {exc}") from None


def cmd_solve(cfg: dict, writer: Writer) -> int:
    if cfg["k"] is not None and int(cfg["k"]) < 1:
        raise UsageError("k: must be >= 1")
    gen = None
    model = None
    if cfg["preset"]:
        if cfg["preset"] not in PRESETS:
            raise UsageError(f"preset: unknown {cfg['preset']!r}; choose from {sorted(PRESETS)}")
        gen = generate(PRESETS[cfg["preset"]])
        source = gen
    else:
        model = _build_model(cfg)
        source = model
    truncated = model is not None and model.family == "truncated_harmonic"
    ref = None
    if model is not None:
        try:
            ref = reference_spectrum(model, 10**6 if truncated else 0)
        except ValueError as exc:
            raise UsageError(f"potential parameters: {exc}") from None
    k = cfg["k"]
    if k is None:
        k = ref.n_max + 3 if truncated else (100 if gen is not None else 20)
    h = cfg["h"]
    if h is None:
        h = 0.005 if gen is not None else 0.01
    k, h = int(k), float(h)
    cfg["k"], cfg["h"] = k, h
    scale = None
    if cfg["hbar_omega_meV"] is not None:
        if truncated:
            raise UsageError("hbar_omega_meV: only applies to dimensionless potentials")
        scale = UnitScale(float(cfg["mass_ratio"]), float(cfg["hbar_omega_meV"]))

    grid = None
    if cfg["x_min"] is not None or cfg["x_max"] is not None:
        if cfg["x_min"] is None or cfg["x_max"] is None:
            raise UsageError("x_min/x_max: give both or neither")
        grid = Grid1D.from_spacing(float(cfg["x_min"]), float(cfg["x_max"]), h)
    elif gen is not None and h != gen.grid.h:
        grid = Grid1D.from_spacing(gen.grid.x_min, gen.grid.x_max, h)

    sol = solve_potential(source, grid, k=k, h=h, scale=scale, method=cfg["method"])
    if len(sol.energies) < k:
        raise NumericalFailure(f"only {len(sol.energies)} levels found, requested {k}")

    classification = None
    want_cls = cfg["classify"] if cfg["classify"] is not None else gen is not None
    if want_cls:
        if scale is not None:
            raise UsageError("classify: not available together with a unit scale")
        if gen is not None:
            samples = gen.U if sol.grid.n_points == gen.grid.n_points else evaluate(gen.to_model(), sol.grid)
        else:
            samples = evaluate(model, sol.grid)
        classification = classify_states(sol, samples)

    e = sol.energies
    if cfg["window"] is not None:
        win = _parse_range(cfg["window"], "window")
        window = (win.start, win.stop - 1)
    elif truncated:
        below = int(np.sum(e < ref.valid_below))
        window = (0, max(below - 1, 0))
    else:
        window = None
    labels = classification.combined_labels() if classification is not None else None
    try:
        report = spacing_report(sol, window, labels)
    except ValueError as exc:
        raise UsageError(f"window: {exc}") from None

    payload = {"spectrum": report.to_dict(), "metadata": sol.metadata, "k": k, "h": h}
    if classification is not None:
        payload["classification"] = classification.to_dict()
    if gen is not None:
        payload["generator"] = gen.summary()
    if ref is not None:
        n = np.arange(len(e)) if not truncated else np.arange(report.n[-1] + 1)
        exact = ref.energies(int(n[-1])) if not truncated else ref.offset + ref.spacing * n
        if scale is not None:
            exact = scale.energy(exact)
        dev = np.abs(e[: len(n)] - exact)
        payload["reference"] = {**ref.to_dict(), "max_abs_error": float(dev.max()), "compared_levels": len(n)}

    rows = spectrum_rows(sol, classification)
    writer.text("energies.csv", rows_to_csv(rows, ["n", "E"], FLOAT_FMT))
    writer.json("report.json", payload)
    if cfg["states"]:
        cols = ["x"] + [f"psi_{i}" for i in range(k)]
        data = np.column_stack([sol.grid.nodes, sol.states])
        writer.text("states.csv", _csv(cols, data.tolist()))
    if cfg["svg"]:
        n = np.arange(len(e))
        _svg(writer, "energies.svg", [("E_n", n, e)], title="levels", xlabel="n", ylabel="E", markers=True)
    return EXIT_OK


# ----------------------------------------------------------------------
# generate
# ----------------------------------------------------------------------


def _build_problem(cfg) -> ShiftOdeProblem:
    over = {}
    if cfg["A"] is not None:
        over["A"] = float(cfg["A"])
    if cfg["B"] is not None:
        over["B"] = float(cfg["B"])
    if cfg["xi0"] is not None:
        over["xi0"] = float(cfg["xi0"])
    if cfg["branch"] is not None:
        over["branch"] = cfg["branch"]
    form = cfg["form"]
    if form is not None:
        over["form"] = form
    if cfg["preset"]:
        if cfg["preset"] not in PRESETS:
            raise UsageError(f"preset: unknown {cfg['preset']!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[cfg["preset"]].to_dict()
    else:
        base = ShiftOdeProblem().to_dict()
        if form is None:
            base["form"] = "first_integral_AB" if cfg["B"] is not None else "first_integral_A"
        if base["form"] == "first_integral_AB" and cfg["branch"] is None:
            base["branch"] = "plus"
    base.update(over)
    if base["form"] != "first_integral_AB":
        base["branch"] = None
        if not cfg["preset"] and cfg["B"] is None:
            base["B"] = None
    length = {"full_fourth_order": 4, "first_integral_A": 3, "first_integral_AB": 2}.get(base["form"])
    if length is None:
        raise UsageError(f"form: unknown {base['form']!r}")
    if cfg["zero_jet"]:
        if cfg["jet"] is not None:
            raise UsageError("jet: give either jet or zero_jet")
        base["jet"] = [0.0] * length
    elif cfg["jet"] is not None:
        base["jet"] = _parse_floats(cfg["jet"], "jet")
    elif len(base["jet"]) != length:
        base["jet"] = [0.0] * length
    lo, hi = base["xi_range"]
    if cfg["xi_min"] is not None:
        lo = float(cfg["xi_min"])
    if cfg["xi_max"] is not None:
        hi = float(cfg["xi_max"])
    base["xi_range"] = (lo, hi)
    try:
        return ShiftOdeProblem(
            base["form"], base["A"], base["B"], base["xi0"], tuple(base["jet"]), base["branch"], base["xi_range"]
        )
    except ValueError as exc:
        raise UsageError(f"problem: {exc}") from None


def cmd_generate(cfg: dict, writer: Writer) -> int:
    problem = _build_problem(cfg)
    if cfg["integrator"] not in ("rk4", "dopri5"):
        raise UsageError("integrator: choose rk4 or dopri5")
    controls = RKControls(method=cfg["integrator"], step=float(cfg["step"]))
    lo, hi = problem.xi_range
    grid = Grid1D.from_spacing(lo, hi, float(cfg["h"]))
    gen = generate(
        problem, grid, controls=controls, cap=float(cfg["cap"]), tolerance=float(cfg["tolerance"]), certify=False
    )
    writer.text("potential.csv", _csv(["x", "U"], np.column_stack([gen.x, gen.U]).tolist()))
    res = np.where(gen.excluded, np.nan, gen.residual)
    writer.text("residual.csv", _csv(["x", "res"], np.column_stack([gen.x, res]).tolist()))
    writer.json("report.json", {"generator": gen.summary()})
    if cfg["svg"]:
        _svg(writer, "potential.svg", [("U", gen.x, gen.U)], title="potential", xlabel="xi", ylabel="U")
    if not gen.accepted:
        raise NumericalFailure(
            f"residual {gen.max_residual:.3e} exceeds tolerance {gen.tolerance:g} (outputs kept for inspection)"
        )
    return EXIT_OK


# ----------------------------------------------------------------------
# perturb
# ----------------------------------------------------------------------


def _perturbation_coeffs(cfg) -> list:
    if (cfg["monomial"] is None) == (cfg["poly"] is None):
        raise UsageError("perturbation: give exactly one of monomial or poly")
    if cfg["monomial"] is not None:
        j = int(cfg["monomial"])
        if j < 0:
            raise UsageError("monomial: power must be >= 0")
        return [Fraction(0)] * j + [Fraction(1)]
    raw = cfg["poly"]
    items = raw if isinstance(raw, (list, tuple)) else [s for s in str(raw).replace(" ", "").split(",")]
    try:
        return [Fraction(str(v)) for v in items]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"poly: expected comma-separated rationals u_0,u_1,..., got {raw!r}") from None


def cmd_perturb(cfg: dict, writer: Writer) -> int:
    from .perturbation import (
        CONVENTION,
        correction_series,
        diagonal_polynomial,
        equidistance_verdict,
        offdiagonal_polynomial,
    )

    u = _perturbation_coeffs(cfg)
    while len(u) > 1 and u[-1] == 0:
        u.pop()
    cap = int(cfg["j_cap"])
    if len(u) - 1 > cap:
        raise UsageError(f"perturbation degree {len(u) - 1} exceeds the cap {cap}")
    p_max = int(cfg["orders"])
    if not 1 <= p_max <= P_CAP:
        raise UsageError(f"orders: must be between 1 and {P_CAP}")
    ks = _parse_range(cfg["k"], "k")
    if len(ks) < 3:
        raise UsageError("k: need at least 3 consecutive values")

    table_rows = []
    for j, c in enumerate(u):
        if c == 0:
            continue
        for l in range(0, j + 1):
            if (j - l) % 2:
                continue
            poly = diagonal_polynomial(j) if l == 0 else offdiagonal_polynomial(j, l)
            kind = "u_kk" if l == 0 else "p_kl"
            table_rows.append([j, l, kind, poly.format("k"), poly.degree])
    writer.text("tables.csv", rows_to_csv(
        [dict(zip(["j", "l", "kind", "polynomial", "degree"], r)) for r in table_rows],
        ["j", "l", "kind", "polynomial", "degree"],
    ))

    verdict = equidistance_verdict(u, p_max, ks)
    corr = []
    for k, row in zip(verdict.ks, verdict.table):
        for p, v in enumerate(row, start=1):
            corr.append({"k": k, "p": p, "exact": str(v), "value": float(v)})
    writer.text("corrections.csv", rows_to_csv(corr, ["k", "p", "exact", "value"], FLOAT_FMT))
    payload = verdict.to_dict()
    payload["u"] = [str(c) for c in u]
    payload["orders"] = p_max
    writer.json("verdict.json", payload)
    if cfg["svg"]:
        series = [
            (f"order {p}", list(verdict.ks), [float(row[p - 1]) for row in verdict.table]) for p in range(1, p_max + 1)
        ]
        _svg(writer, "corrections.svg", series, title="corrections", xlabel="k", ylabel="eps_k^(p)", markers=True)
    return EXIT_OK


# ----------------------------------------------------------------------
# fit
# ----------------------------------------------------------------------


def cmd_fit(cfg: dict, writer: Writer) -> int:
    from .expfit import (
        FilmDataset,
        fit_inverse_law,
        load_dataset,
        shipped_dataset_path,
        synthetic_inverse,
        synthetic_square_well,
    )

    if cfg["model"] not in ("fixed_inverse", "power_law"):
        raise UsageError("model: choose fixed_inverse or power_law")
    d_bl = float(cfg["d_bl"])
    if cfg["synthetic"] is not None:
        if cfg["data"] is not None:
            raise UsageError("data: give either data or synthetic")
        d = np.geomspace(2.0, 40.0, 12)
        gens = {"inverse": synthetic_inverse, "square_well": synthetic_square_well}
        if cfg["synthetic"] not in gens:
            raise UsageError(f"synthetic: choose from {sorted(gens)}")
        data = FilmDataset.from_arrays(d, gens[cfg["synthetic"]](d), source=cfg["synthetic"], d_bl=d_bl)
        origin = f"synthetic:{cfg['synthetic']}"
    else:
        path = cfg["data"] or shipped_dataset_path()
        data = load_dataset(path, d_bl)
        origin = "shipped" if cfg["data"] is None else str(path)
    try:
        res = fit_inverse_law(data, cfg["model"], n_bootstrap=int(cfg["n_bootstrap"]), random_state=int(cfg["seed"]))
    except ValueError as exc:
        raise UsageError(f"fit: {exc}") from None
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"fit: {exc}") from None
    payload = res.to_dict()
    payload["C_eV_per_bilayer"] = res.C_in_bilayers_eV
    payload["dataset"] = {"origin": origin, "n_records": len(data), "sources": sorted(set(data.sources))}
    writer.json("fit.json", payload)
    d = data.d_nm
    grid = np.geomspace(d.min(), d.max(), 200)
    line = res.C_eV_nm * 1e3 * grid ** (-res.alpha)
    writer.text("fitline.csv", _csv(["d_nm", "dE_meV"], np.column_stack([grid, line]).tolist()))
    if cfg["svg"]:
        series = [("fit", grid, line), ("data", d, data.dE_meV, "markers")]
        _svg(writer, "fit.svg", series, title="spacing vs thickness", xlabel="d (nm)", ylabel="dE (meV)")
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def _bool_flag(p, name, help_):
    p.add_argument(name, action=argparse.BooleanOptionalAction, default=argparse.SUPPRESS, help=help_)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="equispec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML config; flags override its keys")
        p.add_argument("--out", default=S, help=f"output directory (default ${ENV_OUTPUT} or ./equispec_out/<command>)")
        _bool_flag(p, "--svg", "also write SVG line charts")

    p = sub.add_parser("solve", help="eigenvalues of a named potential or a generated preset")
    common(p)
    p.add_argument("--potential", default=S, help="harmonic | isotonic | darboux | truncated")
    p.add_argument("--preset", default=S, help="solve a generated shift-ODE preset (type1/type2/type3)")
    p.add_argument("--A", dest="A", type=float, default=S, help="isotonic strength")
    p.add_argument("--m", type=int, default=S, help="Darboux index")
    p.add_argument("--side", default=S, help="positive | negative | full_line")
    p.add_argument("--V0-over-m", dest="V0_over_m", type=float, default=S, help="truncated well V0/m* in eV/m_e")
    p.add_argument("--d-nm", dest="d_nm", type=float, default=S, help="truncated well width in nm")
    p.add_argument("--mass-ratio", dest="mass_ratio", type=float, default=S, help="m*/m_e")
    p.add_argument("--hbar-omega-meV", dest="hbar_omega_meV", type=float, default=S, help="map to nm/meV")
    p.add_argument("--k", type=int, default=S, help="number of levels")
    p.add_argument("--h", type=float, default=S, help="grid spacing")
    p.add_argument("--x-min", dest="x_min", type=float, default=S)
    p.add_argument("--x-max", dest="x_max", type=float, default=S)
    p.add_argument("--window", default=S, help="level window LO..HI for the spacing report")
    p.add_argument("--method", choices=["lapack", "ql"], default=S)
    _bool_flag(p, "--states", "write states.csv")
    _bool_flag(p, "--classify", "split states into localized/delocalized classes")

    p = sub.add_parser("generate", help="integrate the shift-operator ODE into a potential")
    common(p)
    p.add_argument("--preset", default=S, help="type1 | type2 | type3")
    p.add_argument("--form", default=S, help="full_fourth_order | first_integral_A | first_integral_AB")
    p.add_argument("--A", dest="A", type=float, default=S)
    p.add_argument("--B", dest="B", type=float, default=S)
    p.add_argument("--xi0", type=float, default=S, help="anchor point")
    p.add_argument("--jet", default=S, help="initial values, comma separated")
    _bool_flag(p, "--zero-jet", "all initial values zero")
    p.add_argument("--branch", choices=["plus", "minus"], default=S)
    p.add_argument("--xi-min", dest="xi_min", type=float, default=S)
    p.add_argument("--xi-max", dest="xi_max", type=float, default=S)
    p.add_argument("--h", type=float, default=S, help="output grid spacing")
    p.add_argument("--tolerance", type=float, default=S, help="residual certificate bound")
    p.add_argument("--integrator", choices=["rk4", "dopri5"], default=S)
    p.add_argument("--step", type=float, default=S, help="integrator step")
    p.add_argument("--cap", type=float, default=S, help="|W| above which a pole is declared")

    p = sub.add_parser("perturb", help="exact perturbation corrections for a polynomial perturbation")
    common(p)
    p.add_argument("--monomial", type=int, default=S, help="perturbation xi^j")
    p.add_argument("--poly", default=S, help='coefficients u_0,u_1,... e.g. "1,0,1"')
    p.add_argument("--orders", type=int, default=S, help=f"highest order (<= {P_CAP})")
    p.add_argument("--k", default=S, help="level range LO..HI")
    p.add_argument("--j-cap", dest="j_cap", type=int, default=S, help=f"largest allowed power (default {J_CAP})")

    p = sub.add_parser("fit", help="fit the thickness dependence of the spacing")
    common(p)
    p.add_argument("--data", default=S, help="CSV dataset (default: bundled reconstruction)")
    p.add_argument("--synthetic", choices=["inverse", "square_well"], default=S, help="use exact synthetic data")
    p.add_argument("--model", choices=["fixed_inverse", "power_law"], default=S)
    p.add_argument("--d-bl", dest="d_bl", type=float, default=S, help="bilayer thickness in nm")
    p.add_argument("--n-bootstrap", dest="n_bootstrap", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    return parser


COMMANDS = {"solve": cmd_solve, "generate": cmd_generate, "perturb": cmd_perturb, "fit": cmd_fit}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = args.command
    try:
        cfg = resolve(command, args)
        writer = Writer(_output_dir(cfg, command), command, cfg)
        try:
            code = COMMANDS[command](cfg, writer)
        finally:
            if writer.files:
                writer.config()
    except UsageError as exc:
        print(f"equispec {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedFamilyError, GridError, SingularityError) as exc:
        print(f"equispec {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, ResidualError, BranchInfeasibleError, IntegrationError, NonFiniteError,
            EigenSolveError, ArithmeticError) as exc:
        print(f"equispec {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DatasetError, OSError) as exc:
        print(f"equispec {command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in writer.files:
        print(writer.out / name)
    return code


if __name__ == "__main__":
    sys.exit(main())
