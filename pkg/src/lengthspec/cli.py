"""Command-line entry point: ``lengthspec enumerate | analyze | validate-model``.

Exit codes: 0 success, 1 configuration or data error, 2 numerical
non-convergence, 3 incomplete horizon.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import schottky, spectrum
from .analysis import (TestFunction, corollary_arithmetic, dynamical_trace, estimate_entropy,
                       estimate_pressure, pot_ratio, separation_check, weighted_zeta, zeta)
from .config import RunConfig
from .errors import (ConfigurationError, IncompleteHorizonError, IncompleteInputError,
                     LengthSpecError, NonConvergenceError)
from .geometry import curvature_bounds
from .geometry.models import Cylinder, HalfPlane, Perturbed, Schottky
from .orbits import find_closed_geodesic

log = logging.getLogger("lengthspec")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_HORIZON = 0, 1, 2, 3
TASKS = ("zeta", "entropy", "pressure", "trace", "pot", "separation", "corollary")


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars plain."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# --- enumerate ------------------------------------------------------------

def _classes(model, cfg):
    if isinstance(model, HalfPlane):
        raise ConfigurationError("the half-plane has no closed geodesics")
    if isinstance(model, Schottky):
        return schottky.enumerate_classes(model.generators, cfg.max_word_length, cfg.unoriented)
    return ["a"]


def _solve(job):
    model, word, tol, shorten_tol, per_unit = job
    try:
        geo = find_closed_geodesic(model, word, tol=tol, per_unit=per_unit,
                                   shorten_tol=shorten_tol)
    except LengthSpecError as exc:
        return word, None, f"{type(exc).__name__}: {exc}"
    return word, geo, None


def _exact(generators, word):
    length = schottky.exact_length(word, generators)
    return _Orbit(word, length, np.full(4, np.nan), (math.exp(length), math.exp(-length)),
                  np.diag([math.exp(length), math.exp(-length)]), 0.0, 0)


@dataclass(frozen=True)
class _Orbit:
    word: str
    length: float
    state: np.ndarray
    eigenvalues: tuple
    matrix: np.ndarray
    residual: float
    iterations: int

    @classmethod
    def from_geodesic(cls, geo):
        return cls(geo.word, geo.length, np.asarray(geo.state, dtype=float),
                   tuple(geo.eigenvalues), np.asarray(geo.monodromy.matrix), geo.residual,
                   geo.iterations)

    @property
    def log_expanding(self):
        return math.log(max(abs(e) for e in self.eigenvalues))


def _find_orbits(model, words, cfg, workers):
    tol = cfg.tolerances
    jobs = [(model, w, tol["newton"], tol["shorten"], cfg.per_unit) for w in words]
    if workers <= 1 or len(jobs) < 2:
        results = [_solve(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve, jobs, chunksize=chunk))
    failures = [(w, msg) for w, _, msg in results if msg is not None]
    if failures:
        lines = "\n".join(f"  {w}: {msg}" for w, msg in failures)
        raise NonConvergenceError(f"{len(failures)} orbit(s) failed to converge:\n{lines}",
                                  word=failures[0][0])
    return [_Orbit.from_geodesic(geo) for _, geo, _ in results]


def _horizon(model, cfg, orbits):
    if isinstance(model, Schottky):
        return schottky.horizon(model.generators, cfg.max_word_length)
    # a cylinder has one primitive class; its powers up to the word bound are stored
    return (cfg.max_word_length + 1) * orbits[0].length * (1.0 - 1e-9)


def _save_orbits(path, orbits):
    np.savez(path,
             words=np.array([o.word for o in orbits], dtype="U"),
             lengths=np.array([o.length for o in orbits]),
             states=np.array([o.state for o in orbits]).reshape(-1, 4),
             eigenvalues=np.array([o.eigenvalues for o in orbits]).reshape(-1, 2),
             monodromy=np.array([o.matrix for o in orbits]).reshape(-1, 2, 2),
             residuals=np.array([o.residual for o in orbits]),
             iterations=np.array([o.iterations for o in orbits], dtype=int))


def load_orbits(path):
    """Orbit records from an ``orbits.npz`` sidecar."""
    try:
        data = np.load(path)
    except OSError as exc:
        raise IncompleteInputError(f"cannot read orbit sidecar {path}: {exc}") from None
    with data:
        return [_Orbit(str(w), float(l), s, tuple(e), m, float(r), int(i))
                for w, l, s, e, m, r, i in zip(data["words"], data["lengths"], data["states"],
                                               data["eigenvalues"], data["monodromy"],
                                               data["residuals"], data["iterations"])]


def cmd_enumerate(cfg, workers=None):
    """Enumerate classes, compute orbits and write spectrum.csv + orbits.npz."""
    model = cfg.build_model()
    words = _classes(model, cfg)
    if cfg.method == "exact":
        if not model.constant_curvature or not isinstance(model, (Schottky, Cylinder)):
            raise ConfigurationError("method 'exact' needs a constant-curvature model")
        orbits = [_exact(model.generators, w) for w in words]
    else:
        workers = workers or cfg.workers or os.cpu_count() or 1
        log.info("solving %d classes with %d worker(s)", len(words), workers)
        orbits = _find_orbits(model, words, cfg, workers)
    horizon = _horizon(model, cfg, orbits)
    meta = {"config_hash": cfg.hash, "seed": cfg.seed, "method": cfg.method,
            "model": model.kind, "max_word_length": cfg.max_word_length}
    records = [(o.word, o.length, o.log_expanding, o.residual) for o in orbits]
    spec = spectrum.from_primitives(records, horizon, cfg.convention,
                                    oriented=not cfg.unoriented,
                                    dedupe_tolerance=cfg.tolerances["dedupe"], metadata=meta)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spectrum.save(spec, out / "spectrum.csv")
    _save_orbits(out / "orbits.npz", orbits)
    print(f"orbits={len(orbits)} horizon={horizon:.6g}")
    return spec


# --- analyze --------------------------------------------------------------

def _complex(s):
    return complex(s[0], s[1]) if isinstance(s, (list, tuple)) else complex(s)


def _potential(p):
    if p in ("zero", "srb_half"):
        return p
    return ("constant", float(p))


def _task_zeta(spec, cfg, ctx):
    a = cfg.analysis
    out = []
    for s in a["s"]:
        for fn in (zeta, weighted_zeta):
            z = fn(spec, _complex(s), k_max=a["k_max"], truncation_T=a["truncation_T"])
            out.append({"task": "zeta", "kind": "weighted" if z.weighted else "plain",
                        **z.to_record()})
    return out


def _task_entropy(spec, cfg, ctx):
    return [{"task": "entropy", **ctx.entropy(spec, cfg).to_record()}]


def _task_pressure(spec, cfg, ctx):
    a = cfg.analysis
    return [{"task": "pressure",
             **estimate_pressure(spec, _potential(p), window=a["window"],
                                 epsilon=a["epsilon"]).to_record()}
            for p in a["potentials"]]


def _task_trace(spec, cfg, ctx):
    t = cfg.analysis.get("trace")
    if t is None:
        raise ConfigurationError("task 'trace' needs analysis.trace = {center, width}")
    phi = TestFunction(float(t["center"]), float(t["width"]))
    return [{"task": "trace", "center": phi.center, "width": phi.width,
             "support": list(phi.support), "value": dynamical_trace(spec, phi)}]


def _pot_grid(spec, cfg):
    T = cfg.analysis["T_values"]
    if T is not None:
        return [float(x) for x in T]
    return [float(x) for x in np.linspace(spec.max_length / 2.0, spec.max_length, 11)]


def _task_pot(spec, cfg, ctx):
    h = ctx.entropy(spec, cfg).h
    res = pot_ratio(spec, h, _pot_grid(spec, cfg))
    ctx.pot_rows = res.rows
    return [{"task": "pot", **res.to_record()}]


def _task_separation(spec, cfg, ctx):
    model = ctx.model(cfg)
    orbits = ctx.orbits()
    s = cfg.analysis["separation"]
    delta, B, n = float(s["delta"]), float(s["B"]), int(s["samples"])
    Ts = s.get("T")
    if Ts is None:
        lo = math.ceil(min(o.length for o in orbits) + delta)
        Ts = list(range(lo, int(math.floor(spec.max_length)) + 1))
    elif not isinstance(Ts, list):
        Ts = [Ts]
    out = []
    for T in Ts:
        if T > spec.max_length:
            raise IncompleteHorizonError(
                f"separation window ends at {T}, beyond the horizon {spec.max_length:.6g}")
        expected = [e.word for e in spec.primitives if T - delta <= e.primitive_length <= T]
        rep = separation_check(orbits, model, float(T), delta, B, n, expected=expected)
        out.append({"task": "separation", **rep.to_record()})
    return out


def _task_corollary(spec, cfg, ctx):
    c = cfg.analysis["corollary"]
    h = c.get("h")
    if h is None:
        h = max(0.0, ctx.entropy(spec, cfg).h)
    k1, k2 = c.get("k1"), c.get("k2")
    if k1 is None or k2 is None:
        b = curvature_bounds(ctx.model(cfg), margin=cfg.tolerances["curvature_margin"])
        k1 = b.k1 if k1 is None else k1
        k2 = b.k2 if k2 is None else k2
    return [{"task": "corollary", **corollary_arithmetic(h, k1, k2, c.get("n", 1)).to_record()}]


class _Context:
    """Lazily shared inputs across the tasks of one analyze run."""

    def __init__(self, spectrum_path, orbits_path):
        self.spectrum_path = Path(spectrum_path)
        self.orbits_path = orbits_path
        self._entropy = None
        self._model = None
        self.pot_rows = None

    def entropy(self, spec, cfg):
        if self._entropy is None:
            self._entropy = estimate_entropy(spec, window=cfg.analysis["window"])
        return self._entropy

    def model(self, cfg):
        if self._model is None:
            self._model = cfg.build_model()
        return self._model

    def orbits(self):
        path = self.orbits_path or self.spectrum_path.with_name("orbits.npz")
        orbits = load_orbits(path)
        if any(not np.all(np.isfinite(o.state)) for o in orbits):
            raise IncompleteInputError("orbit sidecar has no phase states (exact method)")
        return orbits


HANDLERS = {"zeta": _task_zeta, "entropy": _task_entropy, "pressure": _task_pressure,
            "trace": _task_trace, "pot": _task_pot, "separation": _task_separation,
            "corollary": _task_corollary}


def _write_pot_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# created: {_now()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "ratio"])
        for T, r in rows:
            w.writerow([repr(float(T)), repr(float(r))])


def cmd_analyze(cfg, spectrum_path, tasks, orbits_path=None):
    """Run analysis tasks and write results.jsonl (and pot_ratio.csv)."""
    spec = spectrum.load(spectrum_path)
    ctx = _Context(spectrum_path, orbits_path)
    records = []
    for task in tasks:
        for rec in HANDLERS[task](spec, cfg, ctx):
            records.append(_clean({**rec, "config_hash": cfg.hash, "seed": cfg.seed}))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"created": _now()}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    if ctx.pot_rows is not None:
        _write_pot_csv(out / "pot_ratio.csv", ctx.pot_rows)
    for rec in records:
        print(json.dumps(rec, sort_keys=True))
    return records


def cmd_validate_model(cfg):
    model = cfg.build_model()
    b = curvature_bounds(model, margin=cfg.tolerances["curvature_margin"])
    report = {"model": model.to_dict(), "k1": b.k1, "k2": b.k2, "k_min": b.k_min,
              "k_max": b.k_max, "sample_count": b.sample_count, "margin": b.margin,
              "injectivity_radius_lower_bound": model.injectivity_radius_lower_bound,
              "perturbed": isinstance(model, Perturbed), "config_hash": cfg.hash}
    print(json.dumps(_clean(report), sort_keys=True))
    return report


# --- entry point ----------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="lengthspec", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, dotted keys allowed; repeatable")

    e = sub.add_parser("enumerate", help="compute closed geodesics and write the spectrum")
    common(e)
    e.add_argument("--workers", type=int, help="worker processes (default: CPU count)")

    a = sub.add_parser("analyze", help="run analysis tasks on a stored spectrum")
    common(a)
    a.add_argument("--spectrum", required=True, help="spectrum CSV from 'enumerate'")
    a.add_argument("--orbits", help="orbit sidecar (default: orbits.npz next to the spectrum)")
    a.add_argument("--task", action="append", choices=TASKS + ("all",), required=True,
                   help="analysis task; repeatable")

    v = sub.add_parser("validate-model", help="check the model and report curvature bounds")
    common(v)
    return p


def _load(args):
    overrides = list(args.set)
    if args.out:
        overrides.append(f"output_dir={json.dumps(args.out)}")
    return RunConfig.load(args.config, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        if args.command == "enumerate":
            if args.workers is not None and args.workers < 1:
                raise ConfigurationError("--workers must be >= 1")
            cmd_enumerate(cfg, args.workers)
        elif args.command == "analyze":
            tasks = TASKS if "all" in args.task else tuple(dict.fromkeys(args.task))
            cmd_analyze(cfg, args.spectrum, tasks, args.orbits)
        else:
            cmd_validate_model(cfg)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except IncompleteHorizonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except LengthSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
