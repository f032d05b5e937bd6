"""Benchmark suites, timed solver runs, treewidth annotation and regression."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import logging
import os
import random
import shlex
import shutil
import signal
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .cnf import write_dimacs
from .errors import ConfigError, InsufficientData, IoError
from .graphs import build_g_sigma, tseitin_graph
from .parity import (RParInstance, gen_rpar, instance_from_metadata, instance_metadata,
                     parse_metadata, random_raddpar, write_metadata)
from .permute import (RNG_VERSION, adjacent_swaps, bounded_displacement, mallows_process,
                      uniform_permutation)
from .treewidth import DEFAULT_CUTOFF, tw_bounds

log = logging.getLogger(__name__)

SAT, UNSAT, TIMEOUT, ERROR = "SAT", "UNSAT", "TIMEOUT", "ERROR"


@dataclass
class BenchRecord:
    instance_id: str
    kind: str = "rpar"
    n: int = 0
    distribution: str = ""
    param: str = ""
    seed: str = ""
    p: Optional[float] = None
    tw_lower: Optional[int] = None
    tw_upper: Optional[int] = None
    solver: str = ""
    status: str = ""
    seconds: Optional[float] = None
    proof_verified: Optional[bool] = None


FIELDS = [f.name for f in dataclasses.fields(BenchRecord)]


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    spearman: float
    count: int
    spearman_defined: bool = True


@dataclass
class SuiteConfig:
    """Instance counts per permutation family plus the parameter grids.

    Counts are spread round-robin over their grid. ``swap_grid`` values
    are multiples of n; ``raddpar_target`` is the expected number of
    input occurrences n(4p - 2p^2) kept fixed while p varies.
    """

    n: int = 40
    uniform: int = 0
    mallows: int = 0
    swaps: int = 0
    displacement: int = 0
    mallows_grid: tuple = (0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.98, 1.0)
    swap_grid: tuple = (0.5, 1, 2, 4, 8, 16, 32, 64, 128, 256)
    displacement_grid: tuple = (2, 4, 6, 8, 10)
    raddpar_per_p: int = 0
    p_grid: tuple = tuple(round(0.05 * i, 2) for i in range(1, 20))
    raddpar_target: float = 118.0
    favorable: bool = True
    seed: int = 0


def problem1_config(n: int = 50, seed: int = 0) -> SuiteConfig:
    return SuiteConfig(n=n, uniform=5, mallows=30, swaps=30, displacement=15, seed=seed)


def problem2_config(seed: int = 0) -> SuiteConfig:
    return SuiteConfig(raddpar_per_p=5, seed=seed)


def trend_config(n: int = 40, seed: int = 0) -> SuiteConfig:
    return SuiteConfig(n=n, mallows=20, swaps=20, seed=seed)


def raddpar_n(p: float, target: float) -> int:
    return max(4, round(target / (4 * p - 2 * p * p)))


def instance_rng(seed, idx) -> random.Random:
    return random.Random(f"{seed}:{idx}")


def _plan(cfg: SuiteConfig) -> list:
    plan = []
    for i in range(cfg.uniform):
        plan.append(("rpar", "uniform", ""))
    for i in range(cfg.mallows):
        plan.append(("rpar", "mallows", cfg.mallows_grid[i % len(cfg.mallows_grid)]))
    for i in range(cfg.swaps):
        plan.append(("rpar", "swaps", cfg.swap_grid[i % len(cfg.swap_grid)]))
    for i in range(cfg.displacement):
        grid = [d for d in cfg.displacement_grid if d < cfg.n] or [1]
        plan.append(("rpar", "displacement", grid[i % len(grid)]))
    for p in cfg.p_grid:
        for _ in range(cfg.raddpar_per_p):
            plan.append(("raddpar", "p", p))
    return plan


def make_instance(kind, dist, param, n, rng, cfg: SuiteConfig):
    if kind == "rpar":
        if dist == "uniform":
            sigma = uniform_permutation(n, rng)
        elif dist == "mallows":
            sigma = mallows_process(n, float(param), rng)
        elif dist == "swaps":
            sigma = adjacent_swaps(n, int(round(float(param) * n)), rng)
        elif dist == "displacement":
            sigma = bounded_displacement(n, int(param), rng)
        elif dist == "identity":
            sigma = tuple(range(1, n + 1))
        else:
            raise ConfigError(f"unknown permutation family {dist!r}")
        return gen_rpar(n, sigma)
    p = float(param)
    m = raddpar_n(p, cfg.raddpar_target)
    return random_raddpar(m, p, rng, favorable=cfg.favorable, min_size=2)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def gen_suite(cfg: SuiteConfig, outdir) -> list:
    """Write ``<id>.cnf`` and ``<id>.meta`` per instance plus ``manifest.txt``."""
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IoError(f"cannot write to {out}: {exc}") from None
    entries = []
    for idx, (kind, dist, param) in enumerate(_plan(cfg)):
        rng = instance_rng(cfg.seed, idx)
        inst = make_instance(kind, dist, param, cfg.n, rng, cfg)
        iid = f"{kind}-{idx:04d}"
        meta = instance_metadata(inst, id=iid, distribution=dist, param=param,
                                 seed=f"{cfg.seed}:{idx}", rng=RNG_VERSION)
        cnf_path, meta_path = out / f"{iid}.cnf", out / f"{iid}.meta"
        cnf_path.write_text(write_dimacs(inst.formula))
        meta_path.write_text(write_metadata(meta))
        entry = {"id": iid, "kind": kind, "n": meta["n"], "distribution": dist,
                 "param": param, "seed": meta["seed"], "cnf": cnf_path.name,
                 "meta": meta_path.name, "sha256": sha256_file(cnf_path)}
        if kind == "raddpar":
            entry["p"] = param
        entries.append(entry)
    header = {"rng": RNG_VERSION, "seed": cfg.seed, "count": len(entries)}
    text = "# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n"
    text += "".join(" ".join(f"{k}={v}" for k, v in e.items()) + "\n" for e in entries)
    (out / "manifest.txt").write_text(text)
    return entries


def read_manifest(path) -> list:
    entries = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        entries.append(dict(tok.split("=", 1) for tok in line.split()))
    return entries


# -- treewidth ---------------------------------------------------------------

def instance_tw_bounds(inst, cutoff: int = DEFAULT_CUTOFF):
    """rPar: bounds on G_sigma (with the G* sandwich); rAddPar: its Tseitin graph."""
    if isinstance(inst, RParInstance):
        g = build_g_sigma(inst.n, inst.sigma)
        matching = [((0, i), (1, i)) for i in range(1, inst.n + 1)]
        return tw_bounds(g, cutoff, matching=matching)
    return tw_bounds(tseitin_graph(inst).graph, cutoff)


def annotate_treewidth(entries: list, directory, cutoff: int = DEFAULT_CUTOFF) -> list:
    directory = Path(directory)
    for e in entries:
        meta = parse_metadata((directory / e["meta"]).read_text())
        b = instance_tw_bounds(instance_from_metadata(meta), cutoff)
        e["tw_lower"], e["tw_upper"] = b.lower, b.upper
    return entries


# -- solver runs -------------------------------------------------------------

def _command(solver_cmd) -> list:
    cmd = shlex.split(solver_cmd) if isinstance(solver_cmd, str) else list(solver_cmd)
    if not cmd:
        raise ConfigError("empty solver command")
    if shutil.which(cmd[0]) is None:
        raise ConfigError(f"solver executable {cmd[0]!r} not found")
    return cmd


def run_solver(solver_cmd, cnf_path, time_limit_s: float = 3600.0):
    """Run ``solver_cmd cnf_path`` under a wall-clock limit.

    Returns ``(status, seconds)``; exit code 10 is SAT, 20 is UNSAT.
    """
    cmd = _command(solver_cmd) + [str(cnf_path)]
    start = time.perf_counter()
    proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
                            start_new_session=True)
    try:
        code = proc.wait(timeout=time_limit_s)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.wait()
        return TIMEOUT, time.perf_counter() - start
    elapsed = time.perf_counter() - start
    return {10: SAT, 20: UNSAT}.get(code, ERROR), elapsed


def run_suite(entries: list, directory, solver_cmd, time_limit_s: float = 60.0,
              jobs: int = 1) -> list:
    """Solve every manifest entry; records come back in manifest order."""
    directory = Path(directory)
    name = Path(_command(solver_cmd)[0]).name

    def one(e):
        status, secs = run_solver(solver_cmd, directory / e["cnf"], time_limit_s)
        if status == SAT:
            log.error("solver reported SAT on %s; generated instances are unsatisfiable", e["id"])
        return BenchRecord(
            instance_id=e["id"], kind=e.get("kind", ""), n=int(e.get("n", 0)),
            distribution=e.get("distribution", ""), param=str(e.get("param", "")),
            seed=e.get("seed", ""), p=float(e["p"]) if e.get("p") else None,
            tw_lower=_opt_int(e.get("tw_lower")), tw_upper=_opt_int(e.get("tw_upper")),
            solver=name, status=status, seconds=round(secs, 6))

    if jobs <= 1:
        return [one(e) for e in entries]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, entries))


def _opt_int(v):
    return None if v in (None, "") else int(v)


# -- statistics --------------------------------------------------------------

def regression(records: Sequence[BenchRecord]) -> RegressionResult:
    """Least squares of log2(seconds) on tw_upper, plus Spearman rho.

    Timeouts and records without a positive time or treewidth are skipped.
    Constant data gives rho = 0 with ``spearman_defined`` False.
    """
    pts = [(r.tw_upper, r.seconds) for r in records
           if r.status != TIMEOUT and r.seconds and r.seconds > 0 and r.tw_upper is not None]
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 timed records, got {len(pts)}")
    x = np.array([float(t) for t, _ in pts])
    y = np.log2(np.array([s for _, s in pts]))
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return RegressionResult(float(slope), float(intercept), 0.0, len(pts), False)
    rho, _ = stats.spearmanr(x, y)
    return RegressionResult(float(slope), float(intercept), float(rho), len(pts))


def emit_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = dataclasses.asdict(r)
        w.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()


def _coerce(name, value):
    if value == "":
        return None if name in ("p", "tw_lower", "tw_upper", "seconds", "proof_verified") else ""
    if name in ("n", "tw_lower", "tw_upper"):
        return int(value)
    if name in ("p", "seconds"):
        return float(value)
    if name == "proof_verified":
        return value == "True"
    return value


def read_csv(text: str) -> list:
    rows = csv.DictReader(io.StringIO(text))
    return [BenchRecord(**{k: _coerce(k, v) for k, v in row.items()}) for row in rows]


def regression_csv(res: RegressionResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slope", "intercept", "spearman", "count", "spearman_defined"])
    w.writerow([res.slope, res.intercept, res.spearman, res.count, res.spearman_defined])
    return buf.getvalue()
