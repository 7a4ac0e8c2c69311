"""Parameter sweeps over video scenarios.

Cell seeds come from the master seed by ``numpy.random.SeedSequence``:
``SeedSequence([master, k, d, jitter, rep]).generate_state(1)[0]``. Every
cell is independent of the others and of the order they run in.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import run, verify_trace
from .metrics import goodput_ratio
from .offline import benchmark_offline
from .traffic import VideoScenario, gen_video

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    policies: tuple[str, ...] = ("greedy", "greedy-slack", "opportunistic")
    k: tuple[int, ...] = (6,)
    d: tuple[int, ...] = ()
    dk: tuple[int, ...] = ()  # d given as multiples of k; used when ``d`` is empty
    jitter: tuple[int, ...] = (5,)
    reps: int = 5
    seed: int = 0
    streams: int = 50
    frames_per_stream: int = 3600
    workers: int = 1
    verify: bool = False


def cell_seed(master: int, k: int, d: int, jitter: int, rep: int) -> int:
    return int(np.random.SeedSequence([master, k, d, jitter, rep]).generate_state(1)[0])


def cells(cfg: SweepConfig) -> list[tuple[int, int, int, int]]:
    out = []
    for k in cfg.k:
        ds = cfg.d if cfg.d else tuple(m * k for m in cfg.dk)
        for d in ds:
            for j in cfg.jitter:
                for rep in range(cfg.reps):
                    out.append((k, d, j, rep))
    return out


def run_cell(cfg: SweepConfig, k: int, d: int, jitter: int, rep: int) -> list[dict]:
    seed = cell_seed(cfg.seed, k, d, jitter, rep)
    seq = gen_video(VideoScenario(k, d, cfg.streams, cfg.frames_per_stream, None, jitter, seed))
    bench = benchmark_offline(seq)
    rows = []
    for name in cfg.policies:
        trace = run(seq, name, seed)
        if cfg.verify:
            problems = verify_trace(seq, trace)
            if problems:
                raise RuntimeError(f"{name}: trace violations: {problems[:3]}")
        rows.append(
            {
                "policy": name,
                "k": k,
                "d": d,
                "b": seq.b,
                "seed": seed,
                "jitter": jitter,
                "goodput": trace.goodput,
                "benchmark_goodput": bench.goodput,
                "ratio": goodput_ratio(trace.goodput, bench.goodput),
            }
        )
    return rows


def _safe_cell(args):
    cfg, cell = args
    try:
        return cell, run_cell(cfg, *cell), None
    except Exception as exc:  # one bad cell must not sink the sweep
        return cell, [], f"{type(exc).__name__}: {exc}"


def run_sweep(cfg: SweepConfig) -> tuple[list[dict], list[str]]:
    """All rows in cell order, plus one message per failed cell."""
    jobs = [(cfg, c) for c in cells(cfg)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_safe_cell, jobs))
    else:
        results = [_safe_cell(j) for j in jobs]
    rows, errors = [], []
    for cell, cell_rows, err in results:
        if err is not None:
            log.warning("cell k=%d d=%d jitter=%d rep=%d failed: %s", *cell, err)
            errors.append(f"k={cell[0]} d={cell[1]} jitter={cell[2]} rep={cell[3]}: {err}")
        rows.extend(cell_rows)
    return rows, errors
