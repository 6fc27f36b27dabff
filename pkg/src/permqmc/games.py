"""Cooperative games: characteristic functions over player subsets.

A :class:`Game` wraps a deterministic characteristic function v(S) over
subsets of ``{0, ..., d-1}`` together with an evaluation counter.  Built-in
games come with known exact attributions for use as test oracles; the
marginalisation game turns any predictor plus a background data set into a
characteristic function, replacing out-of-coalition features with background
values and averaging the predictions.
"""

from __future__ import annotations

import csv
import json
import queue
import shlex
import subprocess
import threading
from typing import Callable, Collection, Sequence

import numpy as np

from .errors import PredictorError

__all__ = [
    "Game",
    "linear_game",
    "glove_game",
    "interaction_game",
    "marginalization_game",
    "external_predictor",
    "ExternalPredictor",
    "load_table",
]


class Game:
    """Characteristic function with an evaluation counter.

    ``fn`` receives the coalition as a frozenset of 0-based player indices
    and must be deterministic for the lifetime of the game instance.
    """

    def __init__(self, d: int, fn: Callable[[frozenset], float], name: str = "game") -> None:
        if d < 2:
            raise ValueError(f"a game needs at least 2 players, got {d}")
        self.d = d
        self.name = name
        self._fn = fn
        self.eval_count = 0

    def value(self, members: Collection[int]) -> float:
        """v(S) for coalition S; increments the evaluation counter."""
        coalition = frozenset(members)
        if coalition and (min(coalition) < 0 or max(coalition) >= self.d):
            raise ValueError(f"player indices must lie in 0..{self.d - 1}")
        self.eval_count += 1
        return float(self._fn(coalition))

    def grand_minus_empty(self) -> float:
        return self.value(range(self.d)) - self.value(())

    def __repr__(self) -> str:
        return f"Game({self.name!r}, d={self.d})"


def linear_game(coeffs: Sequence[float], baseline: float = 0.0) -> Game:
    """v(S) = baseline + sum of coefficients over S; player i is worth exactly coeffs[i]."""
    c = np.asarray(coeffs, dtype=np.float64)
    if not np.isfinite(c).all():
        raise ValueError("coefficients must be finite")
    return Game(c.size, lambda s: baseline + sum(c[i] for i in s), name="linear")


def glove_game() -> Game:
    """Three players; a left glove (0 or 1) is worthless without the right glove (2)."""
    return Game(3, lambda s: 1.0 if 2 in s and (0 in s or 1 in s) else 0.0, name="glove")


def interaction_game(d: int, pairs: Sequence[tuple[int, int, float]]) -> Game:
    """v(S) = sum of pair strengths over pairs fully contained in S.

    Pure pairwise-interaction value, so sampler quality actually shows: a
    player in no pair is a dummy with exact attribution zero.
    """
    normalised = []
    for i, j, strength in pairs:
        if not (0 <= i < d and 0 <= j < d) or i == j:
            raise ValueError(f"bad interaction pair ({i}, {j}) for d={d}")
        normalised.append((int(i), int(j), float(strength)))

    def fn(s: frozenset) -> float:
        return sum(w for i, j, w in normalised if i in s and j in s)

    return Game(d, fn, name="interaction")


def marginalization_game(
    predictor: Callable[[np.ndarray], np.ndarray],
    foreground: Sequence[float],
    background: np.ndarray,
) -> Game:
    """Characteristic function of a predictor explained against a background set.

    v(S) composites the foreground row with every background row (foreground
    values on S, background values elsewhere), evaluates the predictor on all
    composites in a single batched call, and returns the mean prediction.
    The background set is fixed at construction so the game stays
    deterministic.
    """
    fg = np.asarray(foreground, dtype=np.float64)
    bg = np.atleast_2d(np.asarray(background, dtype=np.float64))
    if bg.shape[0] == 0:
        raise ValueError("background set must be nonempty")
    if fg.ndim != 1 or bg.shape[1] != fg.size:
        raise ValueError("foreground and background must share the feature count")

    def fn(s: frozenset) -> float:
        mask = np.zeros(fg.size, dtype=bool)
        mask[list(s)] = True
        composites = np.where(mask[None, :], fg[None, :], bg)
        preds = np.asarray(predictor(composites), dtype=np.float64)
        if preds.shape != (bg.shape[0],):
            raise PredictorError(
                f"predictor returned shape {preds.shape}, expected ({bg.shape[0]},)"
            )
        return float(preds.mean())

    return Game(fg.size, fn, name="marginalization")


class ExternalPredictor:
    """Line-protocol client for an external predictor subprocess.

    Protocol: newline-delimited JSON over stdin/stdout.  Each request is one
    line ``{"rows": [[...], ...]}``; the reply is one line
    ``{"preds": [...]}`` with one prediction per row, in order.  The stream
    is flushed after every request.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 60.0) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise PredictorError(f"could not launch predictor {argv!r}: {exc}") from exc
        self.timeout = timeout
        self._line_no = 0
        self._replies: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._replies.put(line)
        self._replies.put(None)  # EOF marker

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        if self._proc.poll() is not None:
            raise PredictorError(
                f"predictor exited with code {self._proc.returncode} before request"
            )
        request = json.dumps({"rows": rows.tolist()})
        try:
            assert self._proc.stdin is not None
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise PredictorError(f"predictor pipe closed: {exc}") from exc
        try:
            line = self._replies.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise PredictorError(
                f"predictor timed out after {self.timeout}s on response line {self._line_no + 1}"
            ) from None
        self._line_no += 1
        if line is None:
            code = self._proc.wait()
            raise PredictorError(
                f"predictor closed its output (exit code {code}) at response line {self._line_no}"
            )
        try:
            payload = json.loads(line)
            preds = np.asarray(payload["preds"], dtype=np.float64)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PredictorError(
                f"malformed predictor response at line {self._line_no}: {line!r}"
            ) from exc
        if preds.shape != (rows.shape[0],):
            raise PredictorError(
                f"predictor response at line {self._line_no} has {preds.size} predictions "
                f"for {rows.shape[0]} rows"
            )
        return preds

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalPredictor":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def external_predictor(command: str | Sequence[str], timeout: float = 60.0) -> ExternalPredictor:
    """Launch an external predictor speaking the line protocol."""
    return ExternalPredictor(command, timeout=timeout)


def load_table(path: str) -> tuple[list[str], np.ndarray]:
    """Read a CSV data file (header row, one instance per line) into floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty data file: {path}") from None
        rows = [[float(tok) for tok in row] for row in reader if row]
    if not rows:
        raise ValueError(f"no data rows in {path}")
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != len(header):
        raise ValueError(f"row width differs from header in {path}")
    return header, data
