"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration or failed precondition,
2 solver non-convergence, 3 I/O failure.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .acstructure import (
    coefficients_from_structure,
    levi_form_report,
    matrix_a_from_j,
    nondegeneracy_check,
    normalize_coordinates,
    perturbed_structure,
    sample_structure,
    standard_structure,
    twisted_product_structure,
    verify_block_structure,
)
from .beltrami import CoefficientPair, SolverConfig, Term, outer_iterate
from .discfield import DiscGrid, to_csv
from .errors import ConvergenceError
from .morse import (
    QuadraticData,
    crossing_profile,
    inclusion_check,
    morse_normal_form,
    takagi,
    totally_real_E,
)
from .transforms import verify_identities

log = logging.getLogger("jdisc")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_MATRIX = {
    "type": "array",
    "items": {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2},
    "minItems": 2,
    "maxItems": 2,
}
_EXPONENT = {"type": "integer", "minimum": 0}
_TERM = {
    "type": "object",
    "properties": {"c": _COMPLEX, "i": _EXPONENT, "j": _EXPONENT, "k": _EXPONENT, "l": _EXPONENT},
    "required": ["c"],
    "additionalProperties": False,
}
_GRID = {
    "oneOf": [
        {"type": "string", "pattern": r"^[0-9]+x[0-9]+$"},
        {
            "type": "object",
            "properties": {"n_radial": {"type": "integer"}, "n_angular": {"type": "integer"}},
            "required": ["n_radial", "n_angular"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "grid": _GRID,
        "solver": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "p": {"type": "number"},
                "p_candidates": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "tol_h": {"type": "number", "exclusiveMinimum": 0},
                "tol_outer": {"type": "number", "exclusiveMinimum": 0},
                "max_inner": {"type": "integer", "minimum": 1},
                "max_outer": {"type": "integer", "minimum": 1},
                "damping": {"type": "number"},
                "safety": {"type": "number", "minimum": 1},
                "norm_trials": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "coefficients": {
            "type": "object",
            "properties": {
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "a0": {"type": "number"},
                "a_terms": {"type": "array", "items": _TERM},
                "b_terms": {"type": "array", "items": _TERM},
            },
            "additionalProperties": False,
        },
        "structure": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["standard", "twisted", "perturbed"]},
                "s": {"type": "number"},
                "eps": {"type": "number"},
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "row": {"type": "integer", "minimum": 0, "maximum": 3},
                            "col": {"type": "integer", "minimum": 0, "maximum": 3},
                            "c": {"type": "number"},
                            "powers": {"type": "array", "items": _EXPONENT, "minItems": 4, "maxItems": 4},
                        },
                        "required": ["row", "col", "c", "powers"],
                        "additionalProperties": False,
                    },
                },
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer", "minimum": 16},
                "degree": {"type": "integer", "minimum": 1, "maximum": 10},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "takagi": {
            "type": "object",
            "properties": {"matrix": _MATRIX},
            "required": ["matrix"],
            "additionalProperties": False,
        },
        "morse": {
            "type": "object",
            "properties": {
                "a": _MATRIX,
                "b": _MATRIX,
                "rho0": {"type": "number"},
                "cubic": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "c": _COMPLEX,
                            "powers": {"type": "array", "items": _EXPONENT, "minItems": 4, "maxItems": 4},
                        },
                        "required": ["c", "powers"],
                        "additionalProperties": False,
                    },
                },
                "index": {"type": "integer", "minimum": 0, "maximum": 2},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "tau0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["a", "b", "index"],
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(Exception):
    pass


# -- helpers -----------------------------------------------------------------


def _parse_grid(section):
    if isinstance(section, dict):
        return DiscGrid(section["n_radial"], section["n_angular"])
    try:
        r, a = (int(x) for x in section.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"grid must look like RxA, got {section!r}") from exc
    return DiscGrid(r, a)


def _matrix(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _pairs(M):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def config_hash(config):
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    validate_config(config)
    return config


def validate_config(config):
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc


def _apply_flags(config, args):
    config = json.loads(json.dumps(config))
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "grid", None) is not None:
        config["grid"] = args.grid
    if getattr(args, "n", None) is not None:
        config.setdefault("solver", {})["n"] = args.n
    if getattr(args, "p", None) is not None:
        config.setdefault("solver", {})["p"] = args.p
    validate_config(config)
    return config


def _envelope(command, config, result):
    return {
        "command": command,
        "version": __version__,
        "config_hash": config_hash(config),
        "config": config,
        "result": result,
    }


def _emit(report, out):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


# -- builders ----------------------------------------------------------------


def _coefficients(section):
    return CoefficientPair(
        [Term.from_dict(t) for t in section.get("a_terms", [])],
        [Term.from_dict(t) for t in section.get("b_terms", [])],
        section.get("gamma", 0.5),
        section.get("a0"),
    )


def _structure(section, seed):
    kind = section["kind"]
    if kind == "standard":
        func = standard_structure
    elif kind == "twisted":
        func = twisted_product_structure(section.get("s", 0.05))
    else:
        terms = [(t["row"], t["col"], t["c"], tuple(t["powers"])) for t in section.get("terms", [])]
        func = perturbed_structure(terms, section.get("eps", 1.0))
    return sample_structure(func, section.get("gamma", 0.5), section.get("samples", 2000), seed)


def _solver_config(config):
    solver = dict(config.get("solver", {}))
    if "n" not in solver:
        raise ConfigError("solver.n (or --n) is required")
    if "p_candidates" in solver:
        solver["p_candidates"] = tuple(solver["p_candidates"])
    grid = _parse_grid(config.get("grid", "64x256"))
    return SolverConfig(n_radial=grid.n_radial, n_angular=grid.n_angular, seed=config.get("seed", 0), **solver)


# -- subcommands -------------------------------------------------------------


def cmd_solve(args, config):
    if "coefficients" in config and "structure" in config:
        raise ConfigError("give either coefficients or structure, not both")
    if "structure" in config:
        section = config["structure"]
        S = _structure(section, config.get("seed", 0))
        coeffs = coefficients_from_structure(S, degree=section.get("degree", 7))
    else:
        coeffs = _coefficients(config.get("coefficients", {}))
    solver = _solver_config(config)
    sol, report = outer_iterate(coeffs, solver)
    if args.fields:
        directory = Path(args.fields)
        for name in ("z", "w", "u", "v", "h"):
            atomic_write(directory / f"{name}.csv", to_csv(getattr(sol, name)))
    result = report.to_dict()
    result["coefficients"] = coeffs.to_dict()
    return result


def cmd_verify_ops(args, config):
    grid = _parse_grid(config.get("grid", "64x128"))
    checks = verify_identities(grid, seed=config.get("seed", 0))
    return {"identities": checks, "all_pass": all(c["pass"] for c in checks)}


def cmd_analyze_structure(args, config):
    if "structure" not in config:
        raise ConfigError("analyze-structure needs a 'structure' section")
    section = config["structure"]
    S = _structure(section, config.get("seed", 0))
    blocks = verify_block_structure(S)
    A = matrix_a_from_j(S).A
    result = {
        "samples": len(S.points),
        "block_structure": blocks,
        "min_abs_det": nondegeneracy_check(S),
        "sup_abs_a": float(np.abs(A[:, 0, 0]).max()),
        "max_second_column": float(np.abs(A[:, :, 1]).max()),
    }
    phi = normalize_coordinates(S)
    result["normalization"] = {"a": _pairs(phi.a.reshape(4, 2)), "residual_Az": phi.residual_Az}

    def u(x):
        return x[..., 2] + x[..., 0] ** 2 + x[..., 1] ** 2 + x[..., 3] ** 2

    levi = [levi_form_report(u, S.func, np.zeros(4), v) for v in np.eye(4)]
    result["levi_test_function"] = levi
    if blocks["passes"]:
        coeffs = coefficients_from_structure(S, degree=section.get("degree", 7))
        result["coefficients"] = coeffs.to_dict()
    result["certified"] = bool(blocks["passes"] and result["min_abs_det"] > 0 and result["sup_abs_a"] < 1)
    return result


def cmd_takagi(args, config):
    if "takagi" not in config:
        raise ConfigError("takagi needs a 'takagi' section with a matrix")
    B = _matrix(config["takagi"]["matrix"])
    U, d = takagi(B)
    D = U.T @ B @ U
    return {
        "U": _pairs(U),
        "d": d,
        "unitarity_error": float(np.abs(U.conj().T @ U - np.eye(2)).max()),
        "offdiag_error": float(max(abs(D[0, 1]), abs(D[1, 0]))),
        "singular_value_error": float(np.abs(d - np.linalg.svd(B, compute_uv=False)).max()),
    }


def cmd_morse(args, config):
    if "morse" not in config:
        raise ConfigError("morse needs a 'morse' section")
    section = config["morse"]
    q = QuadraticData(
        _matrix(section["a"]),
        _matrix(section["b"]),
        section.get("rho0", 0.0),
        [(c["c"], tuple(c["powers"])) for c in section.get("cubic", [])],
    )
    k = section["index"]
    model = morse_normal_form(q, k, section.get("eps", 0.1), section.get("delta", 0.05))
    result = {"model": model.to_dict()}
    if k > 0:
        prof = crossing_profile(k, section.get("tau0", 0.16), seed=config.get("seed", 0))
        result["crossing_profile"] = prof.to_dict()
        result["inclusions"] = inclusion_check(prof, seed=config.get("seed", 0))
        E = totally_real_E(1.0, k)
        result["E"] = {"c0": E.c0, "dimension": k, "origin_member": bool(E.contains(np.zeros(4)))}
    return result


def cmd_report(args, config):
    with open(args.input) as fh:
        data = json.load(fh)
    result = data.get("result", data)
    history = result.get("history")
    if not history:
        raise ConfigError(f"{args.input} has no iteration history")
    keys = sorted(history)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration"] + keys)
    for i in range(len(history[keys[0]])):
        writer.writerow([i + 1] + [repr(float(history[k][i])) for k in keys])
    if args.out:
        atomic_write(args.out, buf.getvalue())
    summary = {
        k: result.get(k)
        for k in ("converged", "outer_iters", "p", "a0", "winding_z", "min_jacobian", "envelope_C", "sup_w", "torus_distance")
    }
    summary["boundary_residual"] = result.get("residuals", {}).get("boundary")
    for k, v in summary.items():
        sys.stdout.write(f"{k:>18}: {v}\n")
    return None


COMMANDS = {
    "solve": cmd_solve,
    "verify-ops": cmd_verify_ops,
    "analyze-structure": cmd_analyze_structure,
    "takagi": cmd_takagi,
    "morse": cmd_morse,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="jdisc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "report":
            p.add_argument("input", help="solve report JSON")
            p.add_argument("--out", help="history CSV destination")
            continue
        p.add_argument("--config", help="JSON config document")
        p.add_argument("--out", help="report destination (stdout if omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid", help="grid as RxA, e.g. 64x256")
        if name == "solve":
            p.add_argument("--fields", help="directory for CSV field dumps")
            p.add_argument("--n", type=int)
            p.add_argument("--p", type=float)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "report":
            cmd_report(args, {})
            return EXIT_OK
        config = _apply_flags(load_config(args.config), args)
        result = COMMANDS[args.command](args, config)
        _emit(_envelope(args.command, config, result), args.out)
        if args.command in ("verify-ops", "analyze-structure"):
            ok = result["all_pass"] if args.command == "verify-ops" else result["certified"]
            return EXIT_OK if ok else EXIT_CONFIG
        return EXIT_OK
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE
    except (ConfigError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
