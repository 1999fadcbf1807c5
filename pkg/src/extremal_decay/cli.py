"""Command-line interface: ``extremal-decay <mode> --config <file>``.

Modes ``decay``, ``onoff``, ``gauss``, ``simulate`` and ``verify``. The config
is one JSON document ``{"params": {...}, "output": ..., "seed": ...}``;
unknown keys anywhere are rejected.

Exit status: 0 on success, 1 on invalid configuration, 2 on numerical
failure, 3 when ``verify`` finds a failing criterion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import acceptance, kernels
from .core import NumericalError, RestrictedRate, Scaling
from .decay import decay_rate
from .gauss import GaussParams, gauss_decay, gauss_restricted
from .onoff import OnOffParams, onoff_decay_closed, onoff_restricted
from .sim import GaussianWalk, OnOffWalk, RngSpec, mc_sweep, write_csv

MODES = ("decay", "onoff", "gauss", "simulate", "verify")
TOP_KEYS = {"mode", "params", "output", "seed"}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# --- validation helpers -------------------------------------------------------

def _reject_unknown(params: dict, allowed: set, required: set = frozenset()):
    for key in sorted(set(params) - allowed):
        raise ConfigError(key, "unknown key")
    for key in sorted(required - set(params)):
        raise ConfigError(key, "required key missing")


def _real(params, key, default=None, lo=-math.inf, hi=math.inf, open_lo=True, open_hi=True):
    if key not in params:
        if default is None:
            raise ConfigError(key, "required key missing")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    v = float(v)
    bad_lo = v <= lo if open_lo else v < lo
    bad_hi = v >= hi if open_hi else v > hi
    if not math.isfinite(v) or bad_lo or bad_hi:
        lb, rb = "(" if open_lo else "[", ")" if open_hi else "]"
        raise ConfigError(key, f"{key} must lie in {lb}{lo:g}, {hi:g}{rb}, got {v:g}")
    return v


def _int(params, key, default=None, lo=None):
    if key not in params:
        if default is None:
            raise ConfigError(key, "required key missing")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(key, f"{key} must be at least {lo}, got {v}")
    return v


def _vector(params, key, positive=True, dim=None):
    if key not in params:
        raise ConfigError(key, "required key missing")
    v = params[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(key, "expected a nonempty list of numbers")
    arr = np.array(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(key, "entries must be finite")
    if positive and np.any(arr <= 0):
        raise ConfigError(key, f"{key} must be strictly positive coordinatewise")
    if dim is not None and arr.size != dim:
        raise ConfigError(key, f"expected {dim} entries, got {arr.size}")
    return arr


ONOFF_KEYS = {"c1", "c2", "V"}
GAUSS_KEYS = {"S", "c", "gamma", "d"}


def _onoff_params(params) -> OnOffParams:
    c1 = _real(params, "c1", lo=0.5, hi=1.0)
    c2 = _real(params, "c2", lo=0.5, hi=1.0)
    V = _real(params, "V", lo=0.0, hi=1.0)
    return OnOffParams(c1, c2, V)


def _gauss_params(params) -> GaussParams:
    gamma = _real(params, "gamma", lo=0.0, hi=2.0)
    if "S" in params:
        S = params["S"]
        try:
            S = np.array(S, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("S", "expected a square matrix of numbers") from None
        if S.ndim == 0:
            S = S.reshape(1, 1)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or not np.all(np.isfinite(S)):
            raise ConfigError("S", "expected a finite square matrix")
        d = S.shape[0]
        if "d" in params and _int(params, "d", lo=1) != d:
            raise ConfigError("d", "does not match the size of S")
    else:
        d = _int(params, "d", 1, lo=1)
        S = np.eye(d)
    c = _vector(params, "c", dim=d) if "c" in params else np.ones(d)
    # a singular S is a numerical failure, raised as LinAlgError here
    return GaussParams(S, c, gamma)


# --- tabulated restricted rates -------------------------------------------------

def load_table(path: str) -> RestrictedRate:
    """Restricted rate from a CSV with columns ``q1..qd, J``, linearly interpolated.

    The table must be a full rectangular grid for ``d > 1``. Outside the
    table, and wherever a neighbouring node is ``inf``, the value is ``inf``.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError("table", f"cannot read {path}: {exc.strerror}") from None
    if len(rows) < 3:
        raise ConfigError("table", "need a header and at least two rows")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError:
        raise ConfigError("table", "non-numeric entry") from None
    if data.ndim != 2 or data.shape[1] < 2:
        raise ConfigError("table", "expected columns q1..qd and J")
    Q, Jv = data[:, :-1], data[:, -1]
    d = Q.shape[1]
    if np.any(np.isnan(Jv)) or np.any(Jv < 0) or np.any(~np.isfinite(Q)):
        raise ConfigError("table", "J must be in [0, inf] and q finite")
    axes = [np.unique(Q[:, i]) for i in range(d)]
    if np.prod([len(a) for a in axes]) != len(Q) or any(len(a) < 2 for a in axes):
        raise ConfigError("table", "q columns must form a full rectangular grid")
    idx = tuple(np.searchsorted(axes[i], Q[:, i]) for i in range(d))
    values = np.empty([len(a) for a in axes])
    values[idx] = Jv
    finite = np.isfinite(values)
    interp_val = RegularGridInterpolator(axes, np.where(finite, values, 0.0),
                                         bounds_error=False, fill_value=math.inf)
    interp_inf = RegularGridInterpolator(axes, (~finite).astype(float),
                                         bounds_error=False, fill_value=1.0)

    def J(qs):
        out = interp_val(qs)
        out[interp_inf(qs) > 0] = math.inf
        return out

    return RestrictedRate(d, J, name=path)


# --- modes ---------------------------------------------------------------------

def _emit(obj, output: Optional[str]) -> str:
    text = json.dumps(obj) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    return text


def _prepare_decay(params):
    search = {"c_min", "c_max", "n_scan"}
    if "table" in params:
        _reject_unknown(params, {"table", "q", "A", "V"} | search, {"table", "q"})
        J = load_table(params["table"])
        s = Scaling(_real(params, "A", lo=0.0), _real(params, "V", lo=0.0))
    elif params.get("builtin") == "onoff":
        _reject_unknown(params, {"builtin", "q"} | ONOFF_KEYS | search, {"q"})
        p = _onoff_params(params)
        J, s = onoff_restricted(p), p.scaling
    elif params.get("builtin") == "gauss":
        _reject_unknown(params, {"builtin", "q"} | GAUSS_KEYS | search, {"q"})
        g = _gauss_params(params)
        J, s = gauss_restricted(g), g.scaling
    elif "builtin" in params:
        raise ConfigError("builtin", "must be 'onoff' or 'gauss'")
    else:
        raise ConfigError("table", "give either 'table' or 'builtin'")
    q = _vector(params, "q", dim=J.dim)
    c_min = _real(params, "c_min", 1e-4, lo=0.0)
    c_max = _real(params, "c_max", 1e4, lo=c_min)
    n_scan = _int(params, "n_scan", 2000, lo=10)

    def run(seed, output, log):
        res = decay_rate(J, q, s, c_min=c_min, c_max=c_max, n_scan=n_scan)
        return _emit(res.as_dict(), output), EXIT_OK

    return run


def _prepare_onoff(params):
    _reject_unknown(params, ONOFF_KEYS | {"q"}, ONOFF_KEYS | {"q"})
    p = _onoff_params(params)
    q = _vector(params, "q", dim=2)

    def run(seed, output, log):
        r = onoff_decay_closed(p, q)
        return _emit({"k": r.k, "t_star": r.t_star, "branch": r.branch}, output), EXIT_OK

    return run


def _prepare_gauss(params):
    _reject_unknown(params, GAUSS_KEYS | {"q"}, {"gamma", "q"})
    g = _gauss_params(params)
    q = _vector(params, "q", dim=g.d)

    def run(seed, output, log):
        r = gauss_decay(g, q)
        return _emit({"k": r.k, "t_star": r.t_star}, output), EXIT_OK

    return run


def _prepare_simulate(params):
    common = {"process", "q", "u", "N", "n_paths", "chunk_size", "workers"}
    proc = params.get("process")
    if proc == "onoff":
        _reject_unknown(params, common | ONOFF_KEYS, {"q", "u", "N", "n_paths"})
        gen = OnOffWalk(_onoff_params(params))
        N = _int(params, "N", lo=1)
        dim = 2
    elif proc == "gauss":
        _reject_unknown(params, common | GAUSS_KEYS | {"step"}, {"q", "u", "N", "n_paths", "step"})
        g = _gauss_params(params)
        step = _real(params, "step", lo=0.0)
        gen = GaussianWalk(g, step)
        N = _real(params, "N", lo=0.0)
        try:
            gen.n_steps(N)
        except ValueError as exc:
            raise ConfigError("N", str(exc)) from None
        dim = g.d
    else:
        raise ConfigError("process", "must be 'onoff' or 'gauss'")
    q = _vector(params, "q", dim=dim)
    us = _vector(params, "u", positive=False)
    if np.any(us < 0):
        raise ConfigError("u", "levels must be nonnegative")
    n_paths = _int(params, "n_paths", lo=100)
    chunk = _int(params, "chunk_size", 50_000, lo=1)
    workers = _int(params, "workers", 1, lo=1)
    epoch = gen.most_likely_epoch(q, float(us.max()))
    if N < 10.0 * epoch:
        raise ConfigError("N", f"truncation below most-likely epoch: N must be >= {10 * epoch:.6g}")

    def run(seed, output, log):
        log(f"simulating {n_paths} paths at {len(us)} levels ({kernels.BACKEND} kernels)")
        ests = mc_sweep(gen, us, q, N, n_paths, RngSpec(seed), chunk_size=chunk, workers=workers)
        buf = io.StringIO()
        write_csv(buf, ests, params["N"], seed)
        text = buf.getvalue()
        if output:
            with open(output, "w", newline="") as fh:
                fh.write(text)
            log(f"wrote {output}")
            return "", EXIT_OK
        return text, EXIT_OK

    return run


def _prepare_verify(params):
    allowed = set(acceptance.DEFAULTS) - {"seed"}
    _reject_unknown(params, allowed)
    cfg = {}
    for key in ("mc_paths", "mc_N", "onoff_paths", "onoff_horizon"):
        if key in params:
            cfg[key] = _int(params, key, lo=100 if key == "mc_paths" else 1)
    if "mc_step" in params:
        cfg["mc_step"] = _real(params, "mc_step", lo=0.0)
    if "mc_u" in params:
        cfg["mc_u"] = [float(u) for u in _vector(params, "mc_u")]

    def run(seed, output, log):
        log("running acceptance criteria")
        results = acceptance.run_all(dict(cfg, seed=seed))
        text = acceptance.report(results)
        if output:
            with open(output, "w") as fh:
                fh.write(text)
        return text, EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY

    return run


PREPARE = {
    "decay": _prepare_decay,
    "onoff": _prepare_onoff,
    "gauss": _prepare_gauss,
    "simulate": _prepare_simulate,
    "verify": _prepare_verify,
}


def _reject_constant(name):
    raise ConfigError("config", f"non-standard JSON constant {name}")


def load_config(path: str, mode: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    _reject_unknown(cfg, TOP_KEYS)
    if "mode" in cfg and cfg["mode"] != mode:
        raise ConfigError("mode", f"config is for mode {cfg['mode']!r}, not {mode!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params", "must be a JSON object")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="extremal-decay",
        description="Decay constants of supremum probabilities, closed-form examples "
                    "and Monte Carlo checks.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--output", help="write the result here (CSV for simulate)")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def log(msg):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        cfg = load_config(args.config, args.mode)
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError("seed", "must be an integer in [0, 2**64)")
        output = args.output or cfg.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("output", "must be a path string")
        run = PREPARE[args.mode](cfg.get("params", {}))
        text, status = run(seed, output, log)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
