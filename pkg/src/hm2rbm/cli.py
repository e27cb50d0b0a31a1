"""hm2rbm command line.

File formats (indices are 0-based)::

    model: {"v": 3, "interactions": [{"set": [0, 1], "weight": 0.5}, ...]}
    rbm:   {"v": 3, "visible_bias": [...], "hidden": [{"w": [...], "c": 0.0}, ...]}

Repeated sets in a model file are summed on load.  Output JSON is canonical:
sorted keys and floats written with ``%.17g``.

Exit codes: 0 success, 2 bad input, 3 synthesis plan/precision failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, TypedDict

import numpy as np

from . import covering
from .errors import Hm2RbmError, InputError, PlanError, PrecisionError, RegionError
from .models import (
    HierarchicalModelSpec, RBMParams, coefficient_residual, hierarchical_distribution,
    kl_divergence, rbm_free_energy, rbm_marginal, total_variation)
from .softplus import SoftplusUnit, batch_coefficients, edge_pair_feasible
from .subsetpoly import members, varset
from .synth import synthesize_rbm

EXIT_OK, EXIT_INPUT, EXIT_SYNTH = 0, 2, 3
REGION_SLACK = 1e-9


class UsageError(InputError):
    pass


class Interaction(TypedDict):
    set: List[int]
    weight: float


class ModelFile(TypedDict):
    v: int
    interactions: List[Interaction]


class HiddenUnit(TypedDict):
    w: List[float]
    c: float


class RBMFile(TypedDict):
    v: int
    visible_bias: List[float]
    hidden: List[HiddenUnit]


# ------------------------------------------------------------ serialization

def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise UsageError(f"cannot serialize non-finite value {x}")
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(x) for x in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}")


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise UsageError(f"{what} must be an integer, got {x!r}")
    return x


def _real(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise UsageError(f"{what} must be a number, got {x!r}")
    return float(x)


def model_from_json(doc) -> HierarchicalModelSpec:
    if not isinstance(doc, dict) or "v" not in doc or "interactions" not in doc:
        raise UsageError('model file needs keys "v" and "interactions"')
    v = _int(doc["v"], "v")
    inter = []
    for k, item in enumerate(doc["interactions"]):
        if not isinstance(item, dict) or "set" not in item or "weight" not in item:
            raise UsageError(f'interaction {k} needs keys "set" and "weight"')
        idx = [_int(i, f"interaction {k} index") for i in item["set"]]
        if any(not 0 <= i < v for i in idx):
            raise UsageError(f"interaction {k} has an index outside [0, {v})")
        if len(set(idx)) != len(idx):
            raise UsageError(f"interaction {k} repeats an index")
        inter.append((varset(idx), _real(item["weight"], f"interaction {k} weight")))
    return HierarchicalModelSpec(v, tuple(inter))


def model_to_json(spec: HierarchicalModelSpec) -> ModelFile:
    return {"v": spec.v,
            "interactions": [{"set": list(members(s)), "weight": w}
                             for s, w in spec.interactions]}


def rbm_from_json(doc) -> RBMParams:
    if not isinstance(doc, dict) or not {"v", "visible_bias", "hidden"} <= set(doc):
        raise UsageError('rbm file needs keys "v", "visible_bias" and "hidden"')
    v = _int(doc["v"], "v")
    bias = [_real(b, "visible_bias entry") for b in doc["visible_bias"]]
    if len(bias) != v:
        raise UsageError(f"visible_bias has length {len(bias)}, expected {v}")
    units = []
    for k, hu in enumerate(doc["hidden"]):
        if not isinstance(hu, dict) or "w" not in hu or "c" not in hu:
            raise UsageError(f'hidden unit {k} needs keys "w" and "c"')
        w = [_real(x, f"hidden unit {k} weight") for x in hu["w"]]
        if len(w) != v:
            raise UsageError(f"hidden unit {k} has {len(w)} weights, expected {v}")
        units.append(SoftplusUnit(v, np.array(w), _real(hu["c"], f"hidden unit {k} bias")))
    return RBMParams(v, np.array(bias, dtype=float), tuple(units))


def rbm_to_json(params: RBMParams) -> RBMFile:
    return {"v": params.v,
            "visible_bias": [float(b) for b in params.visible_bias],
            "hidden": [{"w": [float(x) for x in u.w], "c": float(u.c)}
                       for u in params.units]}


def load_model(path) -> HierarchicalModelSpec:
    return model_from_json(_read_json(path))


def load_rbm(path) -> RBMParams:
    return rbm_from_json(_read_json(path))


def _write(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ----------------------------------------------------------------- commands

def cmd_bounds(args) -> int:
    if not 2 <= args.v_max <= 40:
        raise UsageError(f"v_max must be in [2, 40], got {args.v_max}")
    rows = covering.emit_tables(args.v_max, use_oracle=args.oracle)
    _write(covering.tables_csv(rows), args.out)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    spec = load_model(args.model)
    params, report = synthesize_rbm(spec, omega=args.omega, tol=args.tol,
                                    edge_pairs=args.edge_pairs)
    text = dumps(rbm_to_json(params))
    if args.out:
        _write(text, args.out)
        sys.stdout.write(dumps(report.to_json()))
    else:
        sys.stdout.write(text)
        sys.stderr.write(dumps(report.to_json()))
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = load_model(args.model)
    params = load_rbm(args.rbm)
    if spec.v != params.v:
        raise UsageError(f"model has v={spec.v} but rbm has v={params.v}")
    p = hierarchical_distribution(spec)
    q = rbm_marginal(params)
    out = {"kl": kl_divergence(p, q), "tv": total_variation(p, q),
           "residual_max": coefficient_residual(spec.coefficients(), rbm_free_energy(params))}
    sys.stdout.write(dumps(out))
    return EXIT_OK


def region_samples(bsize: int, samples: int, seed: int = 0, scale: float = 5.0):
    """Coefficient pairs ``(K_B, K_B')`` of random units on ``|B|`` variables.

    ``B = {0..bsize-1}`` and ``B' = B minus {bsize-1}``; weights and bias are
    uniform on ``[-scale, scale]``.  Returns (K_B, K_B', feasible flags).
    """
    rng = np.random.default_rng(seed)
    W = rng.uniform(-scale, scale, size=(samples, bsize))
    c = rng.uniform(-scale, scale, size=samples)
    K = batch_coefficients(W, c)
    full = (1 << bsize) - 1
    kb, kbp = K[:, full], K[:, full & ~(1 << (bsize - 1))]
    flags = np.array([edge_pair_feasible(bsize, a, b, REGION_SLACK).feasible
                      for a, b in zip(kb, kbp)], dtype=bool)
    return kb, kbp, flags


def cmd_region(args) -> int:
    if not 1 <= args.bsize <= 6:
        raise UsageError(f"bsize must be in [1, 6], got {args.bsize}")
    if args.samples < 0:
        raise UsageError("samples must be nonnegative")
    kb, kbp, flags = region_samples(args.bsize, args.samples, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K_B", "K_Bp", "feasible"])
    for a, b, f in zip(kb, kbp, flags):
        w.writerow(["%.17g" % a, "%.17g" % b, int(f)])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_cover(args) -> int:
    v, j = args.v, args.j
    if not 2 <= j <= v <= 14:
        raise UsageError(f"need 2 <= j <= v <= 14, got v={v}, j={j}")
    tuples = covering.greedy_layer_cover(v, j)
    bound = covering.covering_number_bound(v, j)
    out = {"v": v, "j": j, "size": len(tuples), "bound": bound.value,
           "bound_method": bound.method, "tuples": [t.to_json() for t in tuples]}
    sys.stdout.write(dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hm2rbm",
        description="Compile hierarchical models into RBMs and compute hidden-unit bounds.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="CSV of U(v,k) bounds for 2 <= k <= v <= v_max")
    p.add_argument("v_max", type=int)
    p.add_argument("--oracle", action="store_true",
                   help="exact covering search for cells without a closed form (v <= 9)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("synthesize", help="model JSON -> RBM JSON")
    p.add_argument("model")
    p.add_argument("--omega", type=float, default=None, help="base scale (default: automatic)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--edge-pairs", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="KL, TV and coefficient residual of an RBM")
    p.add_argument("model")
    p.add_argument("rbm")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("region", help="sampled edge-pair coefficient pairs as CSV")
    p.add_argument("bsize", type=int)
    p.add_argument("samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("cover", help="star-tuple cover of the j-subsets of v variables")
    p.add_argument("v", type=int)
    p.add_argument("j", type=int)
    p.set_defaults(func=cmd_cover)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except (PlanError, PrecisionError, RegionError) as e:
        print(f"hm2rbm: {e}", file=sys.stderr)
        return EXIT_SYNTH
    except (Hm2RbmError, ValueError, OverflowError) as e:
        print(f"hm2rbm: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
