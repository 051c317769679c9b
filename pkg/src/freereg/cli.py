"""Command line entry point: ``freereg <command> ...``.

Exit codes: 0 success, 1 identity check failed, 2 usage or input error,
3 resource or convergence error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import plotting
from .eigen import ConvergenceError
from .freetrace import SEMICIRCULAR, BudgetExceeded, moments
from .matrix_model import (
    CSV_SCHEMA_LINE,
    SCHEMA_VERSION,
    NotHermitian,
    bimodule_commutator_residual,
    empirical_measure,
    mc_moments,
    rational_hermitian_tuple,
    sample_gue,
    sample_gue_tuple,
    trial_rng,
)
from .nccalc import diff, flip, hochschild_defect, number_op, phi_t, sharp
from .ncpoly import NcPoly
from .parser import ParseError, VariableOutOfRange, format_poly, parse, lower, max_variable
from .scalar import Scalar, format_fraction
from .spectral import (
    SparseMass,
    decay_exponent,
    geometric_grid,
    histogram,
    ks_distance,
    log_energy,
    max_window_mass,
    reference_free_poisson,
    reference_semicircle,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    polynomial: str
    n: int
    N: int = 500
    trials: int = 5
    seed: int = 0
    bins: int = 50
    eps_start: float = 0.4
    eps_ratio: float = 0.7
    eps_count: int = 8
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.N < 1:
            raise UsageError(f"--N must be >= 1, got {self.N}")
        if self.trials < 1:
            raise UsageError(f"--trials must be >= 1, got {self.trials}")
        if not 0 < self.eps_ratio < 1:
            raise UsageError(f"--eps-ratio must lie in (0, 1), got {self.eps_ratio}")
        if self.bins < 1:
            raise UsageError(f"--bins must be >= 1, got {self.bins}")


# --- output helpers -------------------------------------------------------------

def _threads() -> int:
    raw = os.environ.get("FREEREG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"FREEREG_THREADS must be an integer, got {raw!r}") from None


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _emit(text: str, path: str | None) -> None:
    if path:
        _atomic_write(path, text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, Scalar):
        return {"re": format_fraction(x.re), "im": format_fraction(x.im)}
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _envelope(command: str, config: RunConfig | dict, result) -> dict:
    cfg = asdict(config) if isinstance(config, RunConfig) else dict(config)
    cfg.pop("output", None)  # where a result is written is not part of the result
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg, "result": result}


def _poly(text: str, n: int | None) -> NcPoly:
    ast = parse(text)
    need = max_variable(ast)
    return lower(ast, n if n is not None else max(1, need))


def _config(args, **extra) -> RunConfig:
    fields = dict(
        polynomial=args.poly,
        n=args.n_resolved,
        N=getattr(args, "N", 500),
        trials=getattr(args, "trials", 5),
        seed=getattr(args, "seed", 0),
        bins=getattr(args, "bins", 50),
        eps_start=getattr(args, "eps_start", 0.4),
        eps_ratio=getattr(args, "eps_ratio", 0.7),
        eps_count=getattr(args, "eps_count", 8),
        output=getattr(args, "out", None),
        format=getattr(args, "format", "json"),
    )
    fields.update(extra)
    return RunConfig(**fields)


def _measure(P: NcPoly, cfg: RunConfig, args):
    return empirical_measure(
        P, cfg.N, cfg.trials, cfg.seed,
        control=getattr(args, "control", None),
        backend=getattr(args, "backend", "native"),
        threads=_threads(),
    )


def _reference(name: str | None):
    if name is None:
        return None
    if name == "free-poisson":
        return reference_free_poisson()
    if name.startswith("semicircle"):
        _, _, var = name.partition(":")
        return reference_semicircle(float(var) if var else 1.0)
    raise UsageError(f"unknown reference law {name!r} (semicircle[:variance] or free-poisson)")


# --- commands ----------------------------------------------------------------------

def cmd_derive(args) -> int:
    P = args.P
    T = diff(P, args.j)
    ts = [float(Fraction(t)) for t in args.t.split(",")] if args.t else []
    deg = P.degree()
    parts = [] if deg < 0 else [P.homogeneous_part(m) for m in range(int(deg) + 1)]
    result = {
        "polynomial": format_poly(P),
        "diff": T.to_dict(),
        "diff_text": str(T),
        "number_op": number_op(P).to_dict(),
        "number_op_text": format_poly(number_op(P)),
        "phi_t": [{"t": t, "value": phi_t(P, t).to_dict()} for t in ts],
        "homogeneous_parts": [
            {"m": m, "value": Pm.to_dict(), "text": format_poly(Pm)} for m, Pm in enumerate(parts)
        ],
    }
    _emit(_dump(_envelope("derive", {"polynomial": args.poly, "n": P.n, "j": args.j, "t": ts}, result)), args.out)
    return EXIT_OK


def identity_audit(P: NcPoly, seed: int = 0, float_N: int = 50, exact_N: int = 3) -> list[dict]:
    """Run the exact and matrix-level identity checks for one polynomial."""
    rows = []
    defect = hochschild_defect(P)
    rows.append({"check": "hochschild_defect == 0 (exact)", "passed": not defect, "detail": str(defect)})

    rng = trial_rng(seed, 0)
    Yq = rational_hermitian_tuple(P.n, exact_N, rng)
    uq = rational_hermitian_tuple(2, exact_N, rng)
    res_q = bimodule_commutator_residual(P, Yq)
    res_quv = bimodule_commutator_residual(P, Yq, uq[1], uq[2])
    rows.append({"check": f"bimodule residual, u=v=1, exact N={exact_N}", "passed": res_q == 0.0, "detail": res_q})
    rows.append({"check": f"bimodule residual, generic u,v, exact N={exact_N}", "passed": res_quv == 0.0, "detail": res_quv})

    rng = trial_rng(seed, 1)
    Yf = sample_gue_tuple(P.n, float_N, rng)
    u, v = sample_gue(float_N, rng), sample_gue(float_N, rng)
    res_f = bimodule_commutator_residual(P, Yf, u, v, relative=True)
    rows.append({"check": f"bimodule residual, float N={float_N} (relative <= 1e-9)", "passed": res_f <= 1e-9, "detail": res_f})

    y_star = P.adjoint()
    present = P.letters()
    for i in range(1, P.n + 1):
        val = sharp(flip(diff(P, i)), y_star)
        if i in present:
            rows.append({"check": f"(d_{i} y)^flip # y* != 0 (x{i} occurs)", "passed": bool(val), "detail": format_poly(val)})
        else:
            rows.append({"check": f"(d_{i} y)^flip # y* == 0 (x{i} absent)", "passed": not val, "detail": format_poly(val)})
    return rows


def cmd_check(args) -> int:
    rows = identity_audit(args.P, seed=args.seed)
    ok = all(r["passed"] for r in rows)
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        print(f"{r['check']:<{width}}  {'pass' if r['passed'] else 'FAIL'}")
    if args.out:
        _atomic_write(args.out, _dump(_envelope("check", {"polynomial": args.poly, "n": args.P.n, "seed": args.seed},
                                                {"all_passed": ok, "checks": rows})))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_simulate(args) -> int:
    cfg = _config(args)
    ref = _reference(args.reference)
    mu = _measure(args.P, cfg, args)
    hist = histogram(mu, cfg.bins)
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    meta = dict(mu.meta)
    meta["bins"] = cfg.bins
    if ref is not None:
        meta["reference"] = ref.name
        meta["ks_distance"] = ks_distance(mu, ref)
    meta_text = _dump({"schema_version": SCHEMA_VERSION, **meta})
    _atomic_write(os.path.join(out_dir, "measure.csv"), mu.to_csv())
    _atomic_write(os.path.join(out_dir, "histogram.csv"), hist.to_csv())
    _atomic_write(os.path.join(out_dir, "metadata.json"), meta_text)
    if args.figure:
        plotting.plot_spectrum(hist, os.path.join(out_dir, "spectrum.png"), ref, title=meta["polynomial"])
    print(meta_text, end="")
    return EXIT_OK


def cmd_moments(args) -> int:
    if args.k < 1:
        raise UsageError(f"--k must be >= 1, got {args.k}")
    cfg = _config(args)
    P = args.P
    exact = moments(P, args.k, SEMICIRCULAR, budget=args.budget)
    mc = mc_moments(P, args.k, cfg.N, cfg.trials, cfg.seed, threads=_threads())
    rows = []
    for j, (ex, m) in enumerate(zip(exact, mc), start=1):
        exc = complex(ex)
        rows.append({
            "j": j,
            "exact": {"re": format_fraction(ex.re), "im": format_fraction(ex.im)},
            "exact_float": exc.real,
            "monte_carlo": float(m.real),
            "monte_carlo_imag": float(m.imag),
            "gap": float(abs(m - exc)),
        })
    if cfg.format == "csv":
        lines = [CSV_SCHEMA_LINE, "j,exact_re,exact_im,exact_float,monte_carlo,gap"]
        lines += [
            f"{r['j']},{r['exact']['re']},{r['exact']['im']},{r['exact_float']!r},{r['monte_carlo']!r},{r['gap']!r}"
            for r in rows
        ]
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(_envelope("moments", cfg, {"k": args.k, "rows": rows, "max_gap": max(r["gap"] for r in rows)}))
    _emit(text, cfg.output)
    if args.figure:
        plotting.plot_moments(rows, args.figure)
    return EXIT_OK


def cmd_entropy(args) -> int:
    cfg = _config(args)
    if cfg.format != "json":
        raise UsageError("entropy output is JSON only")
    est = log_energy(_measure(args.P, cfg, args))
    result = asdict(est)
    for key in ("log_energy", "chi"):
        if not np.isfinite(result[key]):
            result[key] = None
    _emit(_dump(_envelope("entropy", cfg, result)), cfg.output)
    return EXIT_OK


def cmd_decay(args) -> int:
    cfg = _config(args)
    grid = geometric_grid(cfg.eps_start, cfg.eps_ratio, cfg.eps_count)
    mu = _measure(args.P, cfg, args)
    rep = decay_exponent(mu, args.t, grid, one_sided=args.one_sided)
    if cfg.format == "csv":
        lines = [CSV_SCHEMA_LINE, "eps,mass"] + [f"{e!r},{m!r}" for e, m in zip(rep.eps, rep.masses)]
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(_envelope("decay", cfg, asdict(rep)))
    _emit(text, cfg.output)
    if args.figure:
        plotting.plot_decay(rep, args.figure)
    return EXIT_OK


def cmd_atoms(args) -> int:
    cfg = _config(args)
    if cfg.format != "json":
        raise UsageError("atoms output is JSON only")
    mu = _measure(args.P, cfg, args)
    rep = max_window_mass(mu, args.eps, coefficient=args.atom_coefficient, power=args.atom_power)
    _emit(_dump(_envelope("atoms", {**asdict(cfg), "eps": args.eps, "control": args.control}, asdict(rep))), cfg.output)
    return EXIT_OK


# --- argument parsing ------------------------------------------------------------------

def _add_poly(p):
    p.add_argument("poly", help="polynomial, e.g. 'x1*x2 + x2*x1' (see README for the grammar)")
    p.add_argument("--n", type=int, default=None, help="number of variables (default: largest index used)")


def _add_mc(p, N=500, trials=5):
    p.add_argument("--N", type=int, default=N, help=f"matrix size (default {N})")
    p.add_argument("--trials", type=int, default=trials, help=f"independent GUE tuples (default {trials})")
    p.add_argument("--seed", type=int, default=0, help="master seed; trial t uses the stream (seed, t)")
    p.add_argument("--backend", choices=["native", "lapack"], default="native",
                   help="eigenvalue solver (default: self-contained Householder + implicit QL)")
    p.add_argument("--control", choices=["bernoulli"], default=None,
                   help="replace x1 by a diagonal +-1 matrix (positive control with atoms)")


def _add_out(p, formats=("json",)):
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=list(formats), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="freereg",
        description="Noncommutative difference-quotient calculus and random-matrix checks of "
        "spectral regularity for polynomials in free semicircular variables.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="difference quotient, number operator, grading automorphism, homogeneous parts")
    _add_poly(p)
    p.add_argument("--j", type=int, required=True, help="differentiate with respect to x_j")
    p.add_argument("--t", default="0,1/4,1/2", help="comma-separated t values for the grading automorphism table")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("check", help="audit the identities: Hochschild cycle (symbolic and matrix bimodule) and "
                                     "the flip criterion for variables a polynomial does not involve")
    _add_poly(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="also write the audit as JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="pooled GUE spectrum of P(Y): measure CSV, histogram CSV, metadata JSON")
    _add_poly(p)
    _add_mc(p)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out-dir", default="freereg-out", help="directory for measure.csv, histogram.csv, metadata.json")
    p.add_argument("--reference", default=None, help="semicircle[:variance] or free-poisson; adds a KS distance")
    p.add_argument("--figure", action="store_true", help="also render spectrum.png")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="exact semicircular moments tau(P^j) next to Monte Carlo tr_N(P(Y)^j)")
    _add_poly(p)
    _add_mc(p, N=500, trials=5)
    p.add_argument("--k", type=int, default=4, help="highest moment order")
    p.add_argument("--budget", type=int, default=2_000_000, help="term budget for exact powers")
    _add_out(p, ("json", "csv"))
    p.add_argument("--figure", default=None, help="PNG path for a gap plot")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("entropy", help="logarithmic energy and one-variable free entropy of the simulated spectrum")
    _add_poly(p)
    _add_mc(p)
    _add_out(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("decay", help="fitted exponent alpha in mu([t-eps, t+eps]) ~ eps^alpha")
    _add_poly(p)
    _add_mc(p)
    p.add_argument("--t", type=float, default=0.0, help="center point")
    p.add_argument("--eps-start", type=float, default=0.4)
    p.add_argument("--eps-ratio", type=float, default=0.7)
    p.add_argument("--eps-count", type=int, default=8)
    p.add_argument("--one-sided", action="store_true", help="use windows [t, t+eps]")
    _add_out(p, ("json", "csv"))
    p.add_argument("--figure", default=None, help="PNG path for the log-log fit")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("atoms", help="largest spectral mass in a window of width eps (atom detector)")
    _add_poly(p)
    _add_mc(p)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--atom-coefficient", type=float, default=1.0, help="flag when mass > coefficient * eps^power")
    p.add_argument("--atom-power", type=float, default=0.4)
    _add_out(p)
    p.set_defaults(func=cmd_atoms)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        args.P = _poly(args.poly, args.n)
        args.n_resolved = args.P.n
        if args.command == "derive" and not 1 <= args.j <= args.P.n:
            raise UsageError(f"--j {args.j} outside 1..{args.P.n}")
        return args.func(args)
    except (ParseError, VariableOutOfRange, UsageError, NotHermitian, IndexError) as exc:
        print(f"freereg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, ConvergenceError) as exc:
        print(f"freereg: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SparseMass as exc:
        print(f"freereg: error: {exc} (raise --N or --trials)", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"freereg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
