"""Contrastive triple sampling.

A triple is (ctx, pos, neg): pos is a short window, ctx a longer window
containing it, and neg pairs a foreign environment window with pos's own
system window.  That last construction is the point of the whole method: the
negative is "what this system would look like under an environment it did
not actually experience", so distance to it measures dependency breakage
rather than surface novelty.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import MultivariateSeries, SnippetRange


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class Triple:
    ctx: np.ndarray        # (C, ctx_len)
    pos: np.ndarray        # (C, w)
    neg: np.ndarray        # (C, w)
    env_pos: np.ndarray | None   # (N, w) environment inside pos
    env_neg: np.ndarray | None   # (N, w) environment inside neg
    pos_window: SnippetRange


def window_length(T: int, window_frac: float) -> int:
    return round(window_frac * T)


def _stack(series: MultivariateSeries) -> np.ndarray:
    return np.concatenate([series.env, series.sys], axis=0)


def _draw_windows(
    T: int, w: int, rng: np.random.Generator
) -> tuple[SnippetRange, SnippetRange]:
    ctx_len = int(rng.integers(w, T + 1))
    ctx_start = int(rng.integers(0, T - ctx_len + 1))
    pos_start = int(rng.integers(ctx_start, ctx_start + ctx_len - w + 1))
    return SnippetRange(ctx_start, ctx_len), SnippetRange(pos_start, w)


def _disjoint_start(
    T: int, w: int, pos: SnippetRange, rng: np.random.Generator
) -> int | None:
    """A start for a length-w window not overlapping pos, or None if impossible."""
    left = pos.start - w + 1          # starts 0 .. left-1 end before pos
    right = (T - w) - pos.stop + 1    # starts pos.stop .. T-w begin after pos
    n_left = max(0, left)
    n_right = max(0, right)
    if n_left + n_right == 0:
        return None
    pick = int(rng.integers(0, n_left + n_right))
    return pick if pick < n_left else pos.stop + (pick - n_left)


def sample_triple(
    series: MultivariateSeries,
    other: MultivariateSeries,
    rng: np.random.Generator,
    window_frac: float,
    break_dependency: bool = True,
) -> Triple:
    """Draw one contrastive triple from `series`, borrowing from `other`.

    break_dependency=True builds the dependency-breaking negative (foreign
    env + own sys); False takes the negative wholesale from `other`, the
    plain contrastive baseline.
    """
    T = series.length
    w = window_length(T, window_frac)
    if w < 2:
        raise SamplingError(f"window length {w} too short (T={T}, frac={window_frac})")
    if T < 2 * w:
        raise SamplingError(f"series length {T} must be at least twice the window {w}")

    ctx_win, pos_win = _draw_windows(T, w, rng)
    full = _stack(series)
    ctx = full[:, ctx_win.start : ctx_win.stop]
    pos = full[:, pos_win.start : pos_win.stop]

    if not break_dependency:
        if other.length < w:
            raise SamplingError("other series too short for a negative window")
        start = int(rng.integers(0, other.length - w + 1))
        neg = _stack(other)[:, start : start + w]
        return Triple(ctx=ctx, pos=pos, neg=neg, env_pos=None, env_neg=None, pos_window=pos_win)

    # foreign env source: same series at a disjoint offset, or the other series
    use_same = bool(rng.integers(0, 2))
    env_neg = None
    if use_same:
        start = _disjoint_start(T, w, pos_win, rng)
        if start is not None:
            env_neg = series.env[:, start : start + w]
    if env_neg is None:
        if other.length < w:
            raise SamplingError("other series too short for a negative window")
        start = int(rng.integers(0, other.length - w + 1))
        env_neg = other.env[:, start : start + w]

    env_pos = series.env[:, pos_win.start : pos_win.stop]
    sys_pos = series.sys[:, pos_win.start : pos_win.stop]
    neg = np.concatenate([env_neg, sys_pos], axis=0)
    return Triple(
        ctx=ctx, pos=pos, neg=neg, env_pos=env_pos, env_neg=env_neg, pos_window=pos_win
    )


def sample_triple_matrix(
    mat: np.ndarray, other: np.ndarray, rng: np.random.Generator, window_frac: float
) -> Triple:
    """Plain contrastive triple over bare channel matrices (residual inputs)."""
    T = mat.shape[1]
    w = window_length(T, window_frac)
    if w < 2:
        raise SamplingError(f"window length {w} too short (T={T}, frac={window_frac})")
    if T < 2 * w:
        raise SamplingError(f"series length {T} must be at least twice the window {w}")
    if other.shape[1] < w:
        raise SamplingError("other matrix too short for a negative window")
    ctx_win, pos_win = _draw_windows(T, w, rng)
    start = int(rng.integers(0, other.shape[1] - w + 1))
    return Triple(
        ctx=mat[:, ctx_win.start : ctx_win.stop],
        pos=mat[:, pos_win.start : pos_win.stop],
        neg=other[:, start : start + w],
        env_pos=None,
        env_neg=None,
        pos_window=pos_win,
    )
