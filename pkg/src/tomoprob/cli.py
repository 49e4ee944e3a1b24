"""Command-line front end.

    tomoprob tomogram    --state fock:0 --mu 1 --nu 0
    tomoprob wigner      --state coherent:1
    tomoprob reconstruct --state fock:1            (Wigner function from tomograms)
    tomoprob measure     --state fock:1 --mu 0.6 --nu 0.8
    tomoprob spin        --j 0.5 --theta 1.0 --state up
    tomoprob star        --a fock:0 --b fock:0 --targets "0.3,1,0;0,0,1"
    tomoprob evolve      --state coherent:1 --a2 0.5 --times 0,0.5,1
    tomoprob validate    --state state.json

``--state`` takes a shorthand (``fock:N``, ``coherent:1+1j``, ``up``,
``down``), an inline JSON document, or the path of a JSON document.
``--config`` names a JSON file whose keys override the flags.  The
``TOMOPROB_GRID`` environment variable picks the default grid preset.

Exit codes: 0 success, 1 bad input, 2 numerical-contract violation, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from . import csvio
from .ctomo import (
    frame_from_angles,
    reconstruction_axis,
    tomogram_family,
    tomogram_family_from_wigner,
    tomogram_from_density,
    tomogram_from_fock,
    tomogram_from_wavefunction,
    tomogram_from_wigner,
    wigner_from_density,
    wigner_from_tomogram,
)
from .exceptions import InputError, NumericalContractError, TomoprobError
from .states import (
    PositionGrid,
    SymplecticFrame,
    kernel_from_fock,
    load_state_spec,
    parse_state_spec,
    validate_state,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
GRID_ENV = "TOMOPROB_GRID"
WINDOW = 8  # frames on each side of a pulled-back frame in `evolve`

PRESETS = {
    "coarse": {"x_min": -6.0, "x_max": 6.0, "x_step": 0.1, "grid_min": -10.0, "grid_max": 10.0, "grid_points": 401, "dim": 24},
    "default": {"x_min": -8.0, "x_max": 8.0, "x_step": 0.05, "grid_min": -10.0, "grid_max": 10.0, "grid_points": 1001, "dim": 32},
    "fine": {"x_min": -10.0, "x_max": 10.0, "x_step": 0.02, "grid_min": -12.0, "grid_max": 12.0, "grid_points": 2001, "dim": 48},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p: argparse.ArgumentParser, state: bool = True):
    if state:
        p.add_argument("--state", help="state shorthand, inline JSON or JSON file")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="JSON file whose keys override flags")
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--x-step", type=float)
    p.add_argument("--dim", type=int, help="number-basis truncation")


def _frame_flags(p: argparse.ArgumentParser):
    p.add_argument("--mu", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--squeeze", type=float, help="with --angle: mu = e^s cos a, nu = e^-s sin a")
    p.add_argument("--angle", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomoprob", description="Tomograms, quantum probability measures and their star product.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tomogram", help="tomogram w(X; mu, nu) of a state")
    _common(p)
    _frame_flags(p)
    p.add_argument("--route", choices=("wavefunction", "density", "fock", "wigner"), default="wavefunction")

    p = sub.add_parser("wigner", help="Wigner function on a (q, p) grid")
    _common(p)
    p.add_argument("--q-step", type=float, default=0.1)
    p.add_argument("--p-step", type=float, default=0.1)
    p.add_argument("--extent", type=float, default=5.0, help="half-width of the square (q, p) window")

    p = sub.add_parser("reconstruct", help="Wigner function from a tomogram family")
    _common(p)
    p.add_argument("--input", help="CSV X,mu,nu,w on a rectangular grid (instead of --state)")
    p.add_argument("--frame-extent", type=float, default=7.0)
    p.add_argument("--frame-step", type=float, default=0.5)
    p.add_argument("--extent", type=float, default=4.0)
    p.add_argument("--q-step", type=float, default=0.25)
    p.add_argument("--p-step", type=float, default=0.25)

    p = sub.add_parser("measure", help="distribution function of mu x + nu p")
    _common(p)
    _frame_flags(p)
    p.add_argument("--route", choices=("operator", "tomogram"), default="operator")

    p = sub.add_parser("spin", help="spin tomogram, measure atoms or reconstruction")
    _common(p)
    p.add_argument("--j", type=float, default=0.5)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--psi", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--angles", help="CSV phi,psi,theta; one tomogram per row")
    p.add_argument("--atoms", action="store_true", help="emit measure atoms x,prob")
    p.add_argument("--reconstruct", action="store_true", help="invert the tomograms of --angles")

    p = sub.add_parser("star", help="star product of symplectic measures at target points")
    _common(p, state=False)
    p.add_argument("--a", required=False, help="first operator (state spec)")
    p.add_argument("--b", required=False, help="second operator (state spec)")
    p.add_argument("--targets", help='"X,mu,nu;X,mu,nu;..."')
    p.add_argument("--route", choices=("operator", "kernel", "exact"), default="operator")
    p.add_argument("--frame-extent", type=float, default=7.5)
    p.add_argument("--frame-step", type=float, default=0.75)
    p.add_argument("--symbol", action="store_true", help="emit the symbol grid of --a instead")

    p = sub.add_parser("evolve", help="tomogram trajectory under p^2/2 + a2 q^2 + a1 q + a0")
    _common(p)
    _frame_flags(p)
    p.add_argument("--a2", type=float, default=0.5)
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--a0", type=float, default=0.0)
    p.add_argument("--times", default="0,1")
    p.add_argument("--frame-step", type=float, default=0.1)

    p = sub.add_parser("validate", help="check a density matrix and report")
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _state(text: str | None):
    if not text:
        raise InputError("--state is required")
    t = text.strip()
    if not t.startswith("{") and (t.endswith(".json") or os.path.sep in t):
        return load_state_spec(t)
    return parse_state_spec(t)


def _preset() -> dict:
    name = os.environ.get(GRID_ENV, "default")
    if name not in PRESETS:
        raise InputError(f"{GRID_ENV}={name!r} is not one of {sorted(PRESETS)}")
    return PRESETS[name]


def _x_axis(args) -> np.ndarray:
    pre = _preset()
    lo = pre["x_min"] if args.x_min is None else args.x_min
    hi = pre["x_max"] if args.x_max is None else args.x_max
    step = pre["x_step"] if args.x_step is None else args.x_step
    if not (step > 0 and hi > lo):
        raise InputError("X axis needs x-max > x-min and a positive step")
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _dim(args) -> int:
    d = _preset()["dim"] if args.dim is None else args.dim
    if d < 2:
        raise InputError("--dim must be at least 2")
    return d


def _grid_dim(args, grid: PositionGrid) -> int:
    """Truncation capped at the largest one whose basis functions fit on ``grid``."""
    reach = min(-grid.x_min, grid.x_max) - 4.0
    fit = int(((reach * reach) - 1) // 2) if reach > 1 else 1
    return max(2, min(_dim(args), fit))


def _position_grid() -> PositionGrid:
    pre = _preset()
    return PositionGrid(pre["grid_min"], pre["grid_max"], pre["grid_points"])


def _frame(args) -> SymplecticFrame:
    if args.squeeze is not None or args.angle is not None:
        return frame_from_angles(args.squeeze or 0.0, args.angle or 0.0)
    return SymplecticFrame(1.0 if args.mu is None else args.mu, 0.0 if args.nu is None else args.nu)


def _axis(extent: float, step: float) -> np.ndarray:
    if not (step > 0 and extent > 0):
        raise InputError("grid extent and step must be positive")
    n = int(round(extent / step))
    return step * np.arange(-n, n + 1)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc


def _apply_config(args):
    if not getattr(args, "config", None):
        return args
    with open(args.config, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest == "command":
            if value != args.command:
                raise InputError(f"config is for command {value!r}, not {args.command!r}")
            continue
        if not hasattr(args, dest):
            raise InputError(f"unknown config key {key!r} for {args.command}")
        setattr(args, dest, json.dumps(value) if dest in ("state", "a", "b") and isinstance(value, dict) else value)
    return args


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _emit(args, kind: str, rows):
    with _sink(args.output) as out:
        csvio.write_table(out, csvio.HEADERS[kind], rows, args.format)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _tomogram_route(args, spec):
    route = args.route
    if route == "wavefunction":
        psi = spec.wavefunction(_position_grid())
        return lambda f, X: tomogram_from_wavefunction(psi, f, X)
    if route == "fock":
        rho = spec.fock_density(_dim(args))
        return lambda f, X: tomogram_from_fock(rho, f, X)
    grid = _position_grid()
    kernel = kernel_from_fock(spec.fock_density(_grid_dim(args, grid)), grid)
    if route == "density":
        return lambda f, X: tomogram_from_density(kernel, f, X)
    w = wigner_from_density(kernel)
    return lambda f, X: tomogram_from_wigner(w, f, X)


def cmd_tomogram(args):
    spec = _state(args.state)
    frame = _frame(args)
    tomo = _tomogram_route(args, spec)(frame, _x_axis(args))
    tomo.validate()
    fam = tomogram_family(lambda f, X: tomo, [frame.mu], [frame.nu], tomo.X)
    _emit(args, "tomogram", csvio.tomogram_rows(fam))


def _axis_on_grid(grid: PositionGrid, extent: float, step: float) -> np.ndarray:
    """Grid nodes in [-extent, extent] taken every ``step`` (rounded to whole node strides)."""
    stride = max(1, int(round(step / grid.spacing)))
    pts = grid.points
    idx = np.arange(0, grid.n_points, stride)
    keep = idx[np.abs(pts[idx]) <= extent + 1e-12]
    return pts[keep]


def cmd_wigner(args):
    spec = _state(args.state)
    grid = _position_grid()
    kernel = kernel_from_fock(spec.fock_density(_grid_dim(args, grid)), grid)
    w = wigner_from_density(kernel, _axis_on_grid(grid, args.extent, args.q_step), _axis(args.extent, args.p_step))
    _emit(args, "wigner", csvio.wigner_rows(w))


def cmd_reconstruct(args):
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            _, data = csvio.read_table(fh, csvio.HEADERS["tomogram"])
        fam = csvio.tomogram_family_from_rows(data)
    else:
        spec = _state(args.state)
        ax = reconstruction_axis(args.frame_extent, args.frame_step)
        X = np.arange(-55.0, 55.0 + 1e-9, 0.05)
        grid = PositionGrid(-10.0, 10.0, 201)
        w = wigner_from_density(kernel_from_fock(spec.fock_density(_grid_dim(args, grid)), grid),
                                grid.points[np.abs(grid.points) <= 7 + 1e-12], np.linspace(-7, 7, 141))
        fam = tomogram_family_from_wigner(w, ax, ax, X)
    out = wigner_from_tomogram(fam, _axis(args.extent, args.q_step), _axis(args.extent, args.p_step))
    _emit(args, "wigner", csvio.wigner_rows(out))


def cmd_measure(args):
    from .measures import cdf_from_tomogram, quadrature_measure

    spec = _state(args.state)
    frame = _frame(args)
    X = _x_axis(args)
    if args.route == "operator":
        cdf = quadrature_measure(spec.fock_density(_dim(args)), frame, X)
    else:
        psi = spec.wavefunction(_position_grid())
        cdf = cdf_from_tomogram(tomogram_from_wavefunction(psi, frame, X))
    cdf.validate_probability(tol=1e-4)
    _emit(args, "cdf", csvio.cdf_rows(cdf))


def cmd_spin(args):
    from .spin import (
        EulerAngles,
        as_spin,
        reconstruct_spin_density,
        spin_atoms,
        spin_measure_relation,
        spin_state_from_spec,
        spin_tomogram,
    )
    from .states import StateSpec

    text = args.state or "up"
    spec = _state(text)
    if spec.type == "spin" and "matrix" not in spec.params:
        spec = StateSpec("spin", {**spec.params, "j": as_spin(args.j)})
    rho = spin_state_from_spec(spec)
    if args.angles:
        with open(args.angles, encoding="utf-8") as fh:
            angles = csvio.read_angle_grid(fh)
    else:
        angles = [EulerAngles(args.phi, args.psi, args.theta)]
    if args.reconstruct:
        est = reconstruct_spin_density([spin_tomogram(rho, a) for a in angles])
        err = float(np.max(np.abs(est.elements - rho.elements)))
        doc = {
            "j": est.j,
            "real": [[csvio.fmt(v) for v in row] for row in est.elements.real],
            "imag": [[csvio.fmt(v) for v in row] for row in est.elements.imag],
            "max_abs_error": csvio.fmt(err),
        }
        with _sink(args.output) as out:
            out.write(_json_doc(doc))
        return
    rows = []
    for a in angles:
        cdf, tomo = spin_measure_relation(rho, a)
        rows.extend(spin_atoms(cdf) if args.atoms else zip(tomo.m, tomo.probs))
    _emit(args, "atoms" if args.atoms else "spin", rows)


def _json_doc(doc: dict) -> str:
    """JSON with pre-formatted numeric strings written as bare numbers."""
    def enc(v):
        if isinstance(v, list):
            return "[" + ", ".join(enc(x) for x in v) + "]"
        if isinstance(v, str):
            return v
        return csvio.fmt(v)
    return "{" + ", ".join(f'"{k}": {enc(v)}' for k, v in doc.items()) + "}\n"


def _targets(text: str | None):
    from .starprod import PhasePoint

    if not text:
        raise InputError("--targets is required")
    pts = []
    for chunk in text.split(";"):
        vals = _floats(chunk)
        if len(vals) != 3:
            raise InputError(f"target {chunk!r} must be X,mu,nu")
        pts.append(PhasePoint(*vals))
    return pts


def cmd_star(args):
    from . import starprod as sp

    dim = _dim(args) if args.dim is not None else 12
    a = _state(args.a).fock_density(dim).elements
    if args.symbol:
        X = _x_axis(args)
        ax = reconstruction_axis(args.frame_extent, args.frame_step)
        _emit(args, "symbol", csvio.symbol_rows(sp.dequantize(a, X, ax, ax)))
        return
    b = _state(args.b).fock_density(dim).elements
    targets = _targets(args.targets)
    if args.route == "exact":
        vals = [sp.measure_from_operator(a @ b, (t.mu, t.nu), [t.X], None)(t.X) for t in targets]
    else:
        ax = reconstruction_axis(args.frame_extent, args.frame_step)
        X = np.array([0.0, 1.0])  # the families are used through their atoms only
        fa = sp.measure_family(a, ax, ax, X, None)
        fb = sp.measure_family(b, ax, ax, X, None)
        fn = sp.star_multiply_measures if args.route == "kernel" else sp.star_multiply_operator_route
        vals = fn(fa, fb, targets)
    rows = ((t.X, t.mu, t.nu, complex(v).real, complex(v).imag) for t, v in zip(targets, vals))
    _emit(args, "symbol", rows)


def cmd_evolve(args):
    from .evolution import QuadraticPotential, TomogramTrajectory, characteristics_propagator, pulled_back_frame

    spec = _state(args.state)
    V = QuadraticPotential(args.a2, args.a1, args.a0)
    frame = _frame(args)
    times = _floats(args.times)
    if not times:
        raise InputError("--times is empty")
    h = args.frame_step
    if not h > 0:
        raise InputError("--frame-step must be positive")
    X = _x_axis(args)
    rho = spec.fock_density(_dim(args))
    values = []
    for t in times:
        # initial tomograms on a local window of frames around the pulled-back one
        m0, n0, _ = (float(v) for v in pulled_back_frame(frame.mu, frame.nu, V, t))
        offsets = h * np.arange(-WINDOW, WINDOW + 1)
        mu, nu = m0 + offsets, n0 + offsets
        if np.any(np.hypot(*np.meshgrid(mu, nu)) < 1e-12):
            mu = mu + h / 2
        w0 = tomogram_family(lambda f, x: tomogram_from_fock(rho, f, x), mu, nu, X)
        values.append(characteristics_propagator(w0, V, t, [frame.mu], [frame.nu]).values)
    traj = TomogramTrajectory(np.array(times), np.array([frame.mu]), np.array([frame.nu]), X, np.array(values))
    traj.validate(norm_tol=1e-4)
    _emit(args, "trajectory", csvio.trajectory_rows(traj))


def cmd_validate(args):
    spec = _state(args.state)
    m = spec.raw_matrix() if spec.type in ("mixed", "spin") and "matrix" in spec.params else spec.fock_density(_dim(args)).elements
    diag = validate_state(m)
    report = diag.report()
    with _sink(args.output) as out:
        out.write(report + "\n")
    if not diag.passed:
        raise NumericalContractError(report)


COMMANDS = {
    "tomogram": cmd_tomogram,
    "wigner": cmd_wigner,
    "reconstruct": cmd_reconstruct,
    "measure": cmd_measure,
    "spin": cmd_spin,
    "star": cmd_star,
    "evolve": cmd_evolve,
    "validate": cmd_validate,
}


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _apply_config(args)
        COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalContractError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TomoprobError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
