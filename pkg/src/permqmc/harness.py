"""Benchmark harness: discrepancy tables, convergence runs, parameter sweeps.

Every run is described by an :class:`ExperimentConfig`; seeds are derived as
``base_seed + trial_index`` so re-running a config reproduces every numeric
column (wall-time columns excepted).  Reports are CSV with the fully
resolved config embedded in ``#`` comment lines.  Trials can be dispatched
over a process pool; output ordering is by (cell, trial) regardless of
completion order.
"""

from __future__ import annotations

import contextlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .discrepancy import discrepancy
from .estimators import (
    ShapleyEstimate,
    exact_shapley_subsets,
    mse,
    owen_multilinear,
    shapley_from_permutations,
    stratified_castro,
)
from .games import (
    Game,
    external_predictor,
    glove_game,
    interaction_game,
    linear_game,
    load_table,
    marginalization_game,
)
from .kernels import KernelSpec
from .samplers import SAMPLERS, SamplerConfig, get_sampler

__all__ = [
    "ExperimentConfig",
    "open_game",
    "estimate_once",
    "run_discrepancy_table",
    "run_convergence",
    "run_sweep",
    "write_report",
]


@dataclass
class ExperimentConfig:
    """One benchmark run: cells x trials, with shared kernel, game and seeds."""

    cells: list[dict] = field(default_factory=list)
    trials: int = 25
    base_seed: int = 0
    kernel: dict = field(default_factory=lambda: KernelSpec().to_dict())
    game: dict | None = None
    sweep: dict | None = None
    out: str | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trial count must be >= 1, got {self.trials}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "cells": self.cells,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "kernel": self.kernel,
            "game": self.game,
            "sweep": self.sweep,
            "jobs": self.jobs,
        }

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec.from_dict(self.kernel)


@contextlib.contextmanager
def open_game(spec: dict) -> Iterator[Game]:
    """Build a game from its JSON spec, closing any predictor subprocess on exit.

    Specs: ``{"kind": "glove"}``; ``{"kind": "linear", "coeffs": [...],
    "baseline": 0.0}``; ``{"kind": "interaction", "d": 8, "pairs":
    [[i, j, strength], ...]}``; ``{"kind": "tabular", "data": path,
    "row": 0, "background": [start, stop], "predictor_cmd": "..."}``.
    """
    kind = spec.get("kind")
    if kind == "glove":
        yield glove_game()
    elif kind == "linear":
        yield linear_game(spec["coeffs"], spec.get("baseline", 0.0))
    elif kind == "interaction":
        yield interaction_game(spec["d"], [tuple(p) for p in spec["pairs"]])
    elif kind == "tabular":
        _, data = load_table(spec["data"])
        row = int(spec.get("row", 0))
        start, stop = spec.get("background", [0, min(100, data.shape[0])])
        background = data[start:stop]
        with external_predictor(
            spec["predictor_cmd"], timeout=float(spec.get("predictor_timeout", 60.0))
        ) as predictor:
            yield marginalization_game(predictor, data[row], background)
    else:
        raise ValueError(f"unknown game kind {kind!r}")


def estimate_once(
    game: Game,
    algorithm: str,
    seed: int | None,
    *,
    n: int = 100,
    kernel: KernelSpec | None = None,
    pool_size: int = 25,
    nodes: int = 10,
    draws: int = 10,
    budget: int | None = None,
) -> ShapleyEstimate:
    """One Shapley estimate with any supported algorithm.

    ``algorithm`` is a permutation sampler name, ``owen``, ``owen_halved``,
    ``stratified`` or ``exact``.
    """
    if algorithm in SAMPLERS:
        cfg = SamplerConfig(
            n=n, d=game.d, kernel=kernel or KernelSpec(), pool_size=pool_size, seed=seed
        )
        return shapley_from_permutations(game, get_sampler(algorithm)(cfg))
    rng = np.random.default_rng(seed)
    if algorithm == "owen":
        return owen_multilinear(game, nodes, draws, antithetic=False, rng=rng)
    if algorithm == "owen_halved":
        return owen_multilinear(game, nodes, draws, antithetic=True, rng=rng)
    if algorithm == "stratified":
        return stratified_castro(game, budget if budget is not None else 2 * game.d**2, rng=rng)
    if algorithm == "exact":
        return exact_shapley_subsets(game)
    raise ValueError(f"unknown estimation algorithm {algorithm!r}")


def _estimate_kwargs(cell: dict) -> dict:
    keys = ("n", "pool_size", "nodes", "draws", "budget")
    return {k: cell[k] for k in keys if k in cell}


# -- trial workers (module level so a process pool can pickle them) ----------


def _discrepancy_trial(payload: dict) -> dict:
    cfg = SamplerConfig(
        n=payload["n"],
        d=payload["d"],
        kernel=KernelSpec.from_dict(payload["kernel"]),
        pool_size=payload.get("pool_size", 25),
        seed=payload["seed"],
    )
    sample_set = get_sampler(payload["algorithm"])(cfg)
    return {
        "cell": payload["cell"],
        "trial": payload["trial"],
        "disc": discrepancy(sample_set, cfg.kernel),
        "time": sample_set.meta.wall_time_s,
    }


def _convergence_trial(payload: dict) -> dict:
    with open_game(payload["game"]) as game:
        estimate = estimate_once(
            game,
            payload["algorithm"],
            payload["seed"],
            kernel=KernelSpec.from_dict(payload["kernel"]),
            **payload["kwargs"],
        )
    return {
        "cell": payload["cell"],
        "trial": payload["trial"],
        "values": estimate.values.tolist(),
        "marginal_evals": estimate.marginal_evals,
        "v_evals": estimate.v_evals,
    }


def _dispatch(cfg: ExperimentConfig, worker, payloads: list[dict]) -> list[dict]:
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(worker, payloads))
    else:
        results = [worker(p) for p in payloads]
    return sorted(results, key=lambda r: (r["cell"], r["trial"]))


def run_discrepancy_table(cfg: ExperimentConfig) -> list[dict]:
    """Mean/std of discrepancy and generation time per (d, n, algorithm) cell."""
    payloads = [
        {
            "cell": idx,
            "trial": t,
            "seed": cfg.base_seed + t,
            "kernel": cfg.kernel,
            **cell,
        }
        for idx, cell in enumerate(cfg.cells)
        for t in range(cfg.trials)
    ]
    results = _dispatch(cfg, _discrepancy_trial, payloads)
    rows = []
    for idx, cell in enumerate(cfg.cells):
        disc = np.array([r["disc"] for r in results if r["cell"] == idx])
        times = np.array([r["time"] for r in results if r["cell"] == idx])
        rows.append(
            {
                "d": cell["d"],
                "n": cell["n"],
                "algorithm": cell["algorithm"],
                "disc_mean": float(disc.mean()),
                "disc_std": float(disc.std(ddof=1)) if disc.size > 1 else 0.0,
                "time_mean": float(times.mean()),
                "time_std": float(times.std(ddof=1)) if times.size > 1 else 0.0,
            }
        )
    if cfg.out:
        write_report(cfg.out, cfg, rows)
    return rows


def _reference_values(cfg: ExperimentConfig, per_trial: dict[int, list[dict]]) -> np.ndarray:
    with open_game(cfg.game) as game:
        if game.d <= 20:
            return exact_shapley_subsets(game).values
    # no tractable oracle: fall back to the mean estimate over all trials
    stacked = [np.array(r["values"]) for rows in per_trial.values() for r in rows]
    return np.mean(stacked, axis=0)


def run_convergence(cfg: ExperimentConfig) -> list[dict]:
    """MSE against the exact oracle (or trial-mean reference) per cell, with 95% CI."""
    if cfg.game is None:
        raise ValueError("convergence runs need a game spec")
    payloads = [
        {
            "cell": idx,
            "trial": t,
            "seed": cfg.base_seed + t,
            "kernel": cfg.kernel,
            "game": cfg.game,
            "algorithm": cell["algorithm"],
            "kwargs": _estimate_kwargs(cell),
        }
        for idx, cell in enumerate(cfg.cells)
        for t in range(cfg.trials)
    ]
    results = _dispatch(cfg, _convergence_trial, payloads)
    per_trial: dict[int, list[dict]] = {}
    for r in results:
        per_trial.setdefault(r["cell"], []).append(r)
    reference = _reference_values(cfg, per_trial)
    rows = []
    for idx, cell in enumerate(cfg.cells):
        cell_results = per_trial[idx]
        errors = np.array([mse(reference, np.array(r["values"])) for r in cell_results])
        rows.append(
            {
                "algorithm": cell["algorithm"],
                "params": json.dumps(_estimate_kwargs(cell), sort_keys=True),
                "marginal_evals": int(np.mean([r["marginal_evals"] for r in cell_results])),
                "v_evals_mean": float(np.mean([r["v_evals"] for r in cell_results])),
                "mse_mean": float(errors.mean()),
                "mse_ci95": float(1.96 * errors.std(ddof=1) / math.sqrt(errors.size))
                if errors.size > 1
                else 0.0,
            }
        )
    if cfg.out:
        write_report(cfg.out, cfg, rows)
    return rows


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Sweep lambda, pool size, or kernel kind for a greedy sampler.

    Reports discrepancy statistics per swept value, plus MSE statistics when
    a game spec is present.
    """
    if not cfg.sweep:
        raise ValueError("sweep runs need a sweep spec")
    axis = cfg.sweep.get("axis")
    if axis not in ("lambda", "pool_size", "kernel"):
        raise ValueError(f"sweep axis must be lambda, pool_size or kernel, got {axis!r}")
    values = cfg.sweep.get("values")
    if not values:
        raise ValueError("sweep needs a nonempty list of values")
    algorithm = cfg.sweep.get("algorithm", "herding")
    n = int(cfg.sweep.get("n", 100))
    d = int(cfg.sweep.get("d", 10))
    pool_size = int(cfg.sweep.get("pool_size", 25))
    base_kernel = cfg.kernel_spec()

    rows = []
    with contextlib.ExitStack() as stack:
        game = reference = None
        if cfg.game is not None:
            game = stack.enter_context(open_game(cfg.game))
            reference = exact_shapley_subsets(game).values
        for value in values:
            kernel = base_kernel
            pool = pool_size
            if axis == "lambda":
                kernel = KernelSpec(kind="mallows", lam=float(value))
            elif axis == "kernel":
                kernel = KernelSpec(kind=str(value), lam=base_kernel.lam)
            else:
                pool = int(value)
            discs = []
            errors = []
            for t in range(cfg.trials):
                sampler_cfg = SamplerConfig(
                    n=n, d=d, kernel=kernel, pool_size=pool, seed=cfg.base_seed + t
                )
                sample_set = get_sampler(algorithm)(sampler_cfg)
                discs.append(discrepancy(sample_set, kernel))
                if game is not None:
                    estimate = shapley_from_permutations(game, sample_set)
                    errors.append(mse(reference, estimate.values))
            _append_sweep_row(rows, axis, value, algorithm, n, d, discs, errors)
    if cfg.out:
        write_report(cfg.out, cfg, rows)
    return rows


def _append_sweep_row(rows, axis, value, algorithm, n, d, discs, errors) -> None:
    discs = np.array(discs)
    row = {
        "axis": axis,
        "value": value,
        "algorithm": algorithm,
        "n": n,
        "d": d,
        "disc_mean": float(discs.mean()),
        "disc_std": float(discs.std(ddof=1)) if discs.size > 1 else 0.0,
    }
    if errors:
        err = np.array(errors)
        row["mse_mean"] = float(err.mean())
        row["mse_ci95"] = (
            float(1.96 * err.std(ddof=1) / math.sqrt(err.size)) if err.size > 1 else 0.0
        )
    rows.append(row)


def write_report(path: str, cfg: ExperimentConfig, rows: list[dict]) -> None:
    """CSV report with the resolved config embedded as a reproducibility header."""
    if not rows:
        raise ValueError("nothing to write")
    columns = list(rows[0])
    lines = [f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, str) and ("," in value or '"' in value):
        escaped = value.replace('"', '""')
        return f'"{escaped}"'
    return str(value)


def write_plot_data(path: str, cfg: ExperimentConfig, rows: list[dict]) -> None:
    """Gnuplot-compatible companion file: whitespace-separated columns,
    column names and the resolved config in ``#`` comments."""
    if not rows:
        raise ValueError("nothing to write")
    columns = list(rows[0])
    lines = [
        f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}",
        "# columns: " + " ".join(columns),
    ]
    for row in rows:
        lines.append(" ".join(_format_cell(row[c]).replace(" ", "_") for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
