"""Command-line front end, sample cache and report files.

Every subcommand writes ``<out>/<subcommand>.csv`` (fixed columns, one row
per datum, ``#`` comment lines carrying the config fingerprint and tool
version) and ``<out>/<subcommand>.json`` (a versioned summary).  CSV floats
are written with ``repr`` so they round-trip exactly and reruns with the same
configuration produce identical bytes.

Exit codes: 0 clean, 1 usage error, 2 numerical failure, 3 cache conflict.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from filelock import FileLock, Timeout

from . import __version__
from .beurling_selberg import BoxSpec, fit_constant, indicator_W, l1_error, sinc2_majorant
from .critline_eval import (ENVELOPE_VERSION, EnvelopeError, SampleSet, find_zeros_zeta,
                            sample_fingerprint, sample_line, stratified_ordinates)
from .hashing import canonical_json, fingerprint
from .lfunc_registry import SpecError, TupleConfig, parse_tuple_arg, tuple_from_records
from .random_model import (QuadratureError, TailBoundError, direct_tail_estimate,
                           gmdp_prediction, product_mgf, random_poly_samples,
                           tilted_tail_estimate, xi)
from .stats_lab import (MOMENT_MODES, exponent_report, hybrid_residual, moment_estimate,
                        tail_measure)

logger = logging.getLogger(__name__)

CACHE_ENV = "LVALUELAB_CACHE"
SUMMARY_SCHEMA = "lvaluelab.summary/1"
CACHE_FORMAT = "lvaluelab.samples/1"
LOCK_TIMEOUT = 30.0

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_CACHE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class CacheConflict(Exception):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "lvaluelab"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    tup: Optional[TupleConfig]
    T: list
    N: int
    X: list
    H: float
    k: list
    V: list  # list of tuples, one entry per component
    seed: int
    out: Path
    cache: Path
    threads: Optional[int] = None
    emit_plot_data: bool = False
    mode: str = "min-abs"
    L: list = field(default_factory=lambda: [10.0, 20.0])
    box: list = field(default_factory=lambda: [(0.0, 1.0)])

    def canonical(self) -> dict:
        """Inputs that determine the results (paths and threads excluded)."""
        return {
            "subcommand": self.subcommand,
            "tuple": self.tup.canonical() if self.tup is not None else None,
            "T": [float(v) for v in self.T], "N": int(self.N), "X": [float(v) for v in self.X],
            "H": float(self.H), "k": [float(v) for v in self.k],
            "V": [[float(c) for c in v] for v in self.V], "seed": int(self.seed),
            "mode": self.mode, "L": [float(v) for v in self.L],
            "box": [[float(a), float(b)] for a, b in self.box],
            "envelope": ENVELOPE_VERSION,
        }

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.canonical())

    def validate(self):
        for name, vals in (("T", self.T), ("X", self.X), ("L", self.L)):
            if not vals:
                raise UsageError(f"--{name} needs at least one value")
            if any(not math.isfinite(v) or v <= 0 for v in vals):
                raise UsageError(f"--{name} values must be positive and finite")
        if self.N < 0:
            raise UsageError("--N must be non-negative")
        if self.H < 1:
            raise UsageError("--H must be >= 1")
        if any(not math.isfinite(v) or v <= 0 for v in self.k):
            raise UsageError("--k values must be positive")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        if self.mode not in MOMENT_MODES:
            raise UsageError(f"--mode must be one of {', '.join(MOMENT_MODES)}")
        if self.threads is not None and self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if any(not a < b for a, b in self.box):
            raise UsageError("--box intervals need c < d")
        needs_tuple = self.subcommand not in ("bs-approx", "zeros")
        if needs_tuple and self.tup is None:
            raise UsageError(f"{self.subcommand} needs --tuple")
        if self.tup is not None:
            for v in self.V:
                if len(v) != self.tup.r:
                    raise UsageError(f"--V entry {v} does not match the tuple size {self.tup.r}")
        if self.subcommand in ("sample", "tails", "moments", "zeros", "hybrid-check"):
            if any(2 * t > 1e7 for t in self.T):
                raise UsageError("--T must satisfy 2T <= 1e7")
        if self.subcommand in ("sample", "tails", "moments", "hybrid-check") and self.N < 1:
            raise UsageError("--N must be >= 1")
        if self.subcommand == "zeros" and self.T[0] < 1:
            raise UsageError("zeros needs --T >= 1")


def _parse_vector(token: str, r: int) -> tuple:
    parts = [p for p in token.split(",") if p != ""]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse --V entry {token!r}")
    if len(vals) == 1 and r > 1:
        vals = vals * r
    return tuple(vals)


def _parse_box(token: str) -> list:
    out = []
    for item in token.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise UsageError(f"box interval {item!r} must look like c:d")
        out.append((float(a), float(b)))
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


SUBCOMMANDS = ("sample", "tails", "moments", "hybrid-check", "random-model", "tilted",
               "bs-approx", "zeros")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lvaluelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lvaluelab {__version__}")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--tuple", dest="tuple_arg",
                   help="tuple file (JSON/YAML) or inline form like zeta@0,chi:4:1@0")
    p.add_argument("--T", type=float, nargs="+", default=[1e4], help="window start(s)")
    p.add_argument("--N", type=int, default=1000, help="number of samples / draws")
    p.add_argument("--X", type=float, nargs="+", default=[1e3], help="polynomial length(s)")
    p.add_argument("--H", type=float, default=1.0, help="smoothing scale H >= 1")
    p.add_argument("--k", type=float, nargs="+", default=[1.0], help="moment exponent(s)")
    p.add_argument("--V", nargs="+", default=["0"],
                   help="thresholds; each entry comma-separated per component")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--cache", default=None, help=f"cache directory (default ${CACHE_ENV})")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--emit-plot-data", action="store_true")
    p.add_argument("--mode", default="min-abs", help="moment mode")
    p.add_argument("--L", type=float, nargs="+", default=[10.0, 20.0], help="band limit(s)")
    p.add_argument("--box", default="0:1", help="box for bs-approx, e.g. 0:1,-1:0.5")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(argv=None) -> tuple:
    args = build_parser().parse_args(argv)
    tup = None
    if args.tuple_arg:
        try:
            tup = parse_tuple_arg(args.tuple_arg)
        except (SpecError, OSError, ValueError, KeyError) as exc:
            raise UsageError(f"bad --tuple: {exc}")
    r = tup.r if tup is not None else 1
    cfg = RunConfig(
        subcommand=args.subcommand, tup=tup, T=list(args.T), N=args.N, X=list(args.X),
        H=args.H, k=list(args.k), V=[_parse_vector(v, r) for v in args.V], seed=args.seed,
        out=Path(args.out), cache=Path(args.cache) if args.cache else default_cache_dir(),
        threads=args.threads, emit_plot_data=args.emit_plot_data, mode=args.mode,
        L=list(args.L), box=_parse_box(args.box))
    cfg.validate()
    return cfg, args


# ---------------------------------------------------------------------------
# sample cache
# ---------------------------------------------------------------------------

def _data_digest(t, logf, quality) -> str:
    h = hashlib.sha256()
    for arr in (np.ascontiguousarray(t, dtype="<f8"), np.ascontiguousarray(logf, dtype="<c16"),
                np.ascontiguousarray(quality, dtype="i1")):
        h.update(arr.tobytes())
    return h.hexdigest()


def _sample_header(samples: SampleSet) -> dict:
    return {
        "format": CACHE_FORMAT,
        "fingerprint": samples.fingerprint,
        "tuple": samples.tup.canonical(),
        "T": float(samples.T), "N": int(samples.N), "seed": int(samples.seed),
        "envelope": samples.envelope_version,
        "tool_version": __version__,
        "data_sha256": _data_digest(samples.t, samples.logf, samples.quality),
    }


def _check_header(header: dict, expected: Optional[str]) -> TupleConfig:
    if header.get("format") != CACHE_FORMAT:
        raise CacheConflict(f"unknown cache format {header.get('format')!r}")
    tup = tuple_from_records(header["tuple"])
    fp = sample_fingerprint(tup, header["T"], header["N"], header["seed"])
    if header.get("envelope") != ENVELOPE_VERSION:
        raise CacheConflict("cache written with a different precision envelope")
    if fp != header.get("fingerprint"):
        raise CacheConflict("cache header does not match its fingerprint")
    if expected is not None and fp != expected:
        raise CacheConflict(f"cache fingerprint {fp} differs from requested {expected}")
    return tup


def write_samples_npz(samples: SampleSet, path) -> None:
    path = Path(path)
    header = canonical_json(_sample_header(samples))
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, header=np.array(header), t=samples.t, logf=samples.logf,
                 quality=samples.quality)
    os.replace(tmp, path)


def read_samples_npz(path, expected_fingerprint: Optional[str] = None) -> SampleSet:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        t, logf, quality = data["t"], data["logf"], data["quality"]
    tup = _check_header(header, expected_fingerprint)
    if _data_digest(t, logf, quality) != header.get("data_sha256"):
        raise CacheConflict("cache data do not match the header checksum")
    return SampleSet(tup, float(header["T"]), int(header["N"]), int(header["seed"]), t, logf,
                     quality.astype(np.int8), header["envelope"])


def write_samples_csv(samples: SampleSet, path) -> None:
    header = _sample_header(samples)
    cols = ["t", "quality"]
    for j in range(samples.r):
        cols += [f"re_log_F{j}", f"im_log_F{j}"]
    rows = []
    for i in range(len(samples)):
        row = [repr(float(samples.t[i])), str(int(samples.quality[i]))]
        for j in range(samples.r):
            row += [repr(float(samples.logf[i, j].real)), repr(float(samples.logf[i, j].imag))]
        rows.append(row)
    _write_csv(path, [f"header {canonical_json(header)}"], cols, rows)


def read_samples_csv(path, expected_fingerprint: Optional[str] = None) -> SampleSet:
    header = None
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# header "):
                header = json.loads(line[len("# header "):])
            elif not line.startswith("#"):
                body.append(line)
    if header is None:
        raise CacheConflict("sample CSV has no header line")
    tup = _check_header(header, expected_fingerprint)
    reader = csv.reader(body)
    next(reader)
    rows = list(reader)
    n = len(rows)
    t = np.array([float(r[0]) for r in rows], dtype=float)
    quality = np.array([int(r[1]) for r in rows], dtype=np.int8)
    logf = np.empty((n, tup.r), dtype=complex)
    for j in range(tup.r):
        logf[:, j] = [complex(float(r[2 + 2 * j]), float(r[3 + 2 * j])) for r in rows]
    if _data_digest(t, logf, quality) != header.get("data_sha256"):
        raise CacheConflict("CSV data do not match the header checksum")
    return SampleSet(tup, float(header["T"]), int(header["N"]), int(header["seed"]), t, logf,
                     quality, header["envelope"])


def cache_roundtrip(samples: SampleSet, directory, fmt: str = "npz") -> SampleSet:
    """Write then read a sample set (used to check the cache formats)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if fmt == "npz":
        path = directory / f"samples-{samples.fingerprint}.npz"
        write_samples_npz(samples, path)
        return read_samples_npz(path, samples.fingerprint)
    path = directory / f"samples-{samples.fingerprint}.csv"
    write_samples_csv(samples, path)
    return read_samples_csv(path, samples.fingerprint)


def load_or_sample(tup: TupleConfig, T: float, N: int, seed: int, cache: Path) -> tuple:
    """Return (samples, cache_hit); the caller holds the cache lock."""
    fp = sample_fingerprint(tup, T, N, seed)
    path = Path(cache) / f"samples-{fp}.npz"
    if path.exists():
        logger.info("cache hit %s", path)
        return read_samples_npz(path, fp), True
    samples = sample_line(tup, T, N, seed)
    Path(cache).mkdir(parents=True, exist_ok=True)
    write_samples_npz(samples, path)
    return samples, False


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path, comments, columns, rows) -> None:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(buf.getvalue())
    os.replace(tmp, path)


@dataclass
class Outcome:
    columns: list
    rows: list
    outputs: dict = field(default_factory=dict)
    plot: Optional[list] = None  # (x, y) pairs
    notes: list = field(default_factory=list)


def _vec(v) -> str:
    return ";".join(repr(float(c)) for c in v)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _samples_for(cfg: RunConfig, T: float) -> tuple:
    return load_or_sample(cfg.tup, T, cfg.N, cfg.seed, cfg.cache)


def cmd_sample(cfg: RunConfig) -> Outcome:
    rows = []
    hits = []
    for T in cfg.T:
        s, hit = _samples_for(cfg, T)
        hits.append(hit)
        rows.append([T, cfg.N, cfg.seed, s.fingerprint, s.rejected_fraction(),
                     int(s.small_t_mask().sum())])
    return Outcome(["T", "N", "seed", "sample_fingerprint", "rejected_fraction", "n_small_t"],
                   rows, {"cache_hit": hits})


def cmd_tails(cfg: RunConfig) -> Outcome:
    rows, plot = [], []
    for T in cfg.T:
        s, _ = _samples_for(cfg, T)
        for V in cfg.V:
            rep = tail_measure(s, V)
            rows.append([T, _vec(V), rep.fraction, rep.std_error, rep.prediction, rep.ratio,
                         rep.n_ok, rep.n_rejected, rep.clean])
            plot.append((V[0], rep.fraction))
    return Outcome(["T", "V", "fraction", "std_error", "gaussian_prediction", "ratio", "n_ok",
                    "n_rejected", "clean"], rows, plot=plot)


def cmd_moments(cfg: RunConfig) -> Outcome:
    rows, fits, plot = [], [], []
    by_k: dict = {}
    for T in cfg.T:
        s, _ = _samples_for(cfg, T)
        for k in cfg.k:
            kk = [k] * s.r if cfg.mode == "product" else k
            rep = moment_estimate(s, cfg.mode, kk)
            by_k.setdefault(k, []).append(rep)
            rows.append([T, k, cfg.mode, rep.mean, rep.std_error, rep.predicted_exponent,
                         rep.n_ok, rep.n_rejected, rep.clean])
            plot.append((math.log(math.log(T)), math.log(rep.mean)))
    for k, reps in by_k.items():
        if len({r.T for r in reps}) >= 3:
            f = exponent_report(reps, cfg.tup)
            fits.append({"k": k, "slope": f.slope, "slope_se": f.slope_se,
                         "predicted": f.predicted, "discrepancy": f.discrepancy})
    return Outcome(["T", "k", "mode", "mean", "std_error", "predicted_exponent", "n_ok",
                    "n_rejected", "clean"], rows, {"exponent_fits": fits}, plot=plot)


def cmd_hybrid(cfg: RunConfig) -> Outcome:
    if cfg.tup.r != 1 or cfg.tup.specs[0].kind != "zeta":
        raise UsageError("hybrid-check is defined for zeta only")
    T = cfg.T[0]
    t = stratified_ordinates(T, cfg.N, cfg.seed)
    zeros = find_zeros_zeta(max(1.0, T - 1.0), 2 * T + 1.0)
    rows, summary, plot = [], {}, []
    for X in cfg.X:
        h = hybrid_residual(t, X, cfg.H, zeros=zeros)
        summary[repr(float(X))] = {"rms": h.rms, "n_rejected": h.n_rejected}
        plot.append((X, h.rms))
        for i in range(t.size):
            rows.append([t[i], X, h.residual[i].real, h.residual[i].imag, int(h.zero_terms[i]),
                         bool(h.rejected[i])])
    out = {"rms": summary, "zero_count": len(zeros), "zero_count_expected": zeros.expected_count,
           "zero_list_flagged": zeros.flagged}
    return Outcome(["t", "X", "re_residual", "im_residual", "zero_terms", "rejected"], rows, out,
                   plot=plot, notes=list(zeros.warnings))


def cmd_random_model(cfg: RunConfig) -> Outcome:
    rows = []
    for X in cfg.X:
        draws = random_poly_samples(cfg.tup, X, cfg.N, cfg.seed)
        v = draws.values
        for k in cfg.k:
            z = np.full(cfg.tup.r, k)
            e = np.exp(v @ z)
            mc = float(e.mean())
            mc_se = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else math.nan
            emin = np.exp(2 * k * v.min(axis=1))
            prod = float(np.real(product_mgf(cfg.tup, z, X)))
            try:
                xv = float(xi(cfg.tup, z, X))
            except TailBoundError:
                xv = math.nan
            try:
                gm = gmdp_prediction(cfg.tup, k, X)
            except ValueError:
                gm = math.nan
            rows.append([X, k, mc, mc_se, prod, xv, float(emin.mean()), gm])
    return Outcome(["X", "k", "mc_mgf", "mc_std_error", "product_mgf", "xi", "mc_min_moment",
                    "gmdp_prediction"], rows)


def cmd_tilted(cfg: RunConfig) -> Outcome:
    rows, notes = [], []
    for X in cfg.X:
        for V in cfg.V:
            til = tilted_tail_estimate(cfg.tup, X, V, N=cfg.N, seed=cfg.seed)
            dirc = direct_tail_estimate(cfg.tup, X, V, cfg.N, cfg.seed + 1)
            notes.extend(til.warnings)
            rows.append([X, _vec(V), til.estimate, til.std_error, til.ess, _vec(til.tilt),
                         dirc.estimate, dirc.std_error])
    return Outcome(["X", "V", "tilted_estimate", "tilted_std_error", "tilted_ess", "tilt",
                    "direct_estimate", "direct_std_error"], rows, notes=notes)


def cmd_bs_approx(cfg: RunConfig) -> Outcome:
    c = tuple(a for a, _ in cfg.box)
    d = tuple(b for _, b in cfg.box)
    r = len(c)
    n = max(cfg.N, 1)
    if r == 1:
        grid = np.linspace(c[0] - 2.0, d[0] + 2.0, n)[:, None]
    else:
        gen = np.random.Generator(np.random.Philox(key=[cfg.seed, 0]))
        lo = np.array(c) - 2.0
        hi = np.array(d) + 2.0
        grid = lo + (hi - lo) * gen.random((n, r))
    rows, out, plot = [], {}, []
    for L in cfg.L:
        box = BoxSpec(c, d, L)
        W = indicator_W(box, grid)
        ind = box.contains(grid)
        maj = sinc2_majorant(box, grid)
        info = {"fitted_constant": fit_constant(box, grid)}
        if r == 1:
            info["l1_error"] = l1_error(c[0], d[0], L)
        out[repr(float(L))] = info
        for i in range(n):
            rows.append([L, _vec(grid[i]), W[i], ind[i], abs(ind[i] - W[i]), maj[i]])
            if r == 1:
                plot.append((grid[i, 0], W[i]))
    return Outcome(["L", "xi", "W", "indicator", "abs_error", "sinc2_majorant"], rows,
                   {"per_L": out}, plot=plot)


def cmd_zeros(cfg: RunConfig) -> Outcome:
    T = cfg.T[0]
    zl = find_zeros_zeta(T, 2 * T)
    rows = [[i + 1, g] for i, g in enumerate(zl.ordinates)]
    out = {"count": len(zl), "expected_count": zl.expected_count,
           "smooth_count": zl.smooth_count, "flagged": zl.flagged}
    return Outcome(["index", "gamma"], rows, out, notes=list(zl.warnings))


COMMANDS = {
    "sample": cmd_sample, "tails": cmd_tails, "moments": cmd_moments,
    "hybrid-check": cmd_hybrid, "random-model": cmd_random_model, "tilted": cmd_tilted,
    "bs-approx": cmd_bs_approx, "zeros": cmd_zeros,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _versions() -> dict:
    import scipy
    return {"lvaluelab": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_summary(cfg: RunConfig, outputs: dict, errors: list, clean: bool, wall: float,
                  notes: list = ()) -> Path:
    summary = {
        "schema": SUMMARY_SCHEMA,
        "subcommand": cfg.subcommand,
        "fingerprint": cfg.fingerprint,
        "inputs": cfg.canonical(),
        "outputs": outputs,
        "errors": list(errors),
        "notes": list(notes),
        "clean": bool(clean),
        "versions": _versions(),
        "wall_time_s": wall,
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{cfg.subcommand}.json"
    path.write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    return path


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the exit status."""
    start = time.perf_counter()
    if cfg.threads:
        import numba
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    cfg.out.mkdir(parents=True, exist_ok=True)
    cfg.cache.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(cfg.cache / ".lock"))
    try:
        lock.acquire(timeout=LOCK_TIMEOUT)
    except Timeout:
        write_summary(cfg, {}, ["cache directory is locked by another run"], False,
                      time.perf_counter() - start)
        print(f"error: cache directory {cfg.cache} is locked", file=sys.stderr)
        return EXIT_CACHE
    try:
        outcome = COMMANDS[cfg.subcommand](cfg)
    except CacheConflict as exc:
        write_summary(cfg, {}, [f"cache conflict: {exc}"], False, time.perf_counter() - start)
        print(f"error: cache conflict: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except UsageError as exc:
        write_summary(cfg, {}, [f"usage: {exc}"], False, time.perf_counter() - start)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, TailBoundError, EnvelopeError, FloatingPointError,
            ArithmeticError, ValueError) as exc:
        write_summary(cfg, {}, [f"numerical failure: {type(exc).__name__}: {exc}"], False,
                      time.perf_counter() - start)
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        lock.release()
    comments = [f"fingerprint {cfg.fingerprint}", f"lvaluelab {__version__}",
                f"subcommand {cfg.subcommand}"]
    _write_csv(cfg.out / f"{cfg.subcommand}.csv", comments, outcome.columns, outcome.rows)
    if cfg.emit_plot_data and outcome.plot:
        _write_csv(cfg.out / f"{cfg.subcommand}.plot.dat", comments, ["x", "y"], outcome.plot)
    write_summary(cfg, outcome.outputs, [], True, time.perf_counter() - start, outcome.notes)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg, args = config_from_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    # numba falls back to another threading layer on its own; the notice is noise here
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
