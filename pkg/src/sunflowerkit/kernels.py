"""Bit-parallel counting kernels over packed uint64 set matrices.

Two interchangeable backends:

  numba  - @njit(cache=True) loops, used when numba imports cleanly
  numpy  - chunked broadcasting fallback, always available

Selection: environment variable SUNFLOWERKIT_BACKEND in {auto, numba, numpy}
(read once at import, default auto). `IMPLEMENTATIONS` keeps both tables
alive so tests and the benchmark can compare them directly.

All kernels take (N, B) uint64 `blocks` (one row per member set) plus
candidate rows of the same width. Counting is exact; the *_i64 variants
exist so rational weights can be scaled to integers and summed without
floating-point error (callers must keep totals below 2**62).
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_CHUNK_ELEMS = 1 << 22  # cap on chunk * N * B intermediates (32 MiB of uint64)


def _chunk_rows(n_rows: int, inner: int) -> int:
    if n_rows == 0:
        return 1
    return max(1, _CHUNK_ELEMS // max(1, inner))


# ---------------------------------------------------------------- numpy ----

def _link_mat(blocks: np.ndarray, cands: np.ndarray, lo: int, hi: int) -> np.ndarray:
    c = cands[lo:hi, None, :]
    return ((blocks[None, :, :] & c) == c).all(axis=2)


def _subset_mat(blocks: np.ndarray, ys: np.ndarray, lo: int, hi: int) -> np.ndarray:
    y = ys[lo:hi, None, :]
    return ((blocks[None, :, :] & y) == blocks[None, :, :]).all(axis=2)


def _counts_np(blocks, cands, mat):
    out = np.zeros(cands.shape[0], dtype=np.int64)
    step = _chunk_rows(cands.shape[0], blocks.shape[0] * blocks.shape[1])
    for lo in range(0, cands.shape[0], step):
        hi = min(lo + step, cands.shape[0])
        out[lo:hi] = mat(blocks, cands, lo, hi).sum(axis=1)
    return out


def _norms_np(blocks, weights, cands, mat):
    out = np.zeros(cands.shape[0], dtype=weights.dtype)
    step = _chunk_rows(cands.shape[0], blocks.shape[0] * blocks.shape[1])
    for lo in range(0, cands.shape[0], step):
        hi = min(lo + step, cands.shape[0])
        out[lo:hi] = mat(blocks, cands, lo, hi) @ weights
    return out


def link_counts_np(blocks: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """For each candidate C: number of rows U with U >= C (as sets)."""
    return _counts_np(blocks, cands, _link_mat)


def link_norms_f64_np(blocks, weights, cands):
    return _norms_np(blocks, weights, cands, _link_mat)


def link_norms_i64_np(blocks, weights, cands):
    return _norms_np(blocks, weights, cands, _link_mat)


def subset_counts_np(blocks: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """For each candidate Y: number of rows U with U <= Y (as sets)."""
    return _counts_np(blocks, ys, _subset_mat)


def subset_norms_f64_np(blocks, weights, ys):
    return _norms_np(blocks, weights, ys, _subset_mat)


def subset_norms_i64_np(blocks, weights, ys):
    return _norms_np(blocks, weights, ys, _subset_mat)


def on_subsplit_mask_np(blocks: np.ndarray, strips: np.ndarray, union: np.ndarray) -> np.ndarray:
    """Row flags: set lies inside `union` and meets each strip in <= 1 element."""
    ok = ((blocks & union[None, :]) == blocks).all(axis=1)
    for s in range(strips.shape[0]):
        hits = blocks & strips[s][None, :]
        per_block = np.bitwise_count(hits).astype(np.int64)
        ok &= per_block.sum(axis=1) <= 1
    return ok


_NUMPY_IMPLS = {
    "link_counts": link_counts_np,
    "link_norms_f64": link_norms_f64_np,
    "link_norms_i64": link_norms_i64_np,
    "subset_counts": subset_counts_np,
    "subset_norms_f64": subset_norms_f64_np,
    "subset_norms_i64": subset_norms_i64_np,
    "on_subsplit_mask": on_subsplit_mask_np,
}


# ---------------------------------------------------------------- numba ----

def _build_numba_impls():
    from numba import njit

    @njit(cache=True)
    def link_counts_nb(blocks, cands):
        n, b = blocks.shape
        m = cands.shape[0]
        out = np.zeros(m, dtype=np.int64)
        for i in range(m):
            cnt = 0
            for r in range(n):
                ok = True
                for j in range(b):
                    c = cands[i, j]
                    if blocks[r, j] & c != c:
                        ok = False
                        break
                if ok:
                    cnt += 1
            out[i] = cnt
        return out

    @njit(cache=True)
    def link_norms_f64_nb(blocks, weights, cands):
        n, b = blocks.shape
        m = cands.shape[0]
        out = np.zeros(m, dtype=np.float64)
        for i in range(m):
            acc = 0.0
            for r in range(n):
                ok = True
                for j in range(b):
                    c = cands[i, j]
                    if blocks[r, j] & c != c:
                        ok = False
                        break
                if ok:
                    acc += weights[r]
            out[i] = acc
        return out

    @njit(cache=True)
    def link_norms_i64_nb(blocks, weights, cands):
        n, b = blocks.shape
        m = cands.shape[0]
        out = np.zeros(m, dtype=np.int64)
        for i in range(m):
            acc = 0
            for r in range(n):
                ok = True
                for j in range(b):
                    c = cands[i, j]
                    if blocks[r, j] & c != c:
                        ok = False
                        break
                if ok:
                    acc += weights[r]
            out[i] = acc
        return out

    @njit(cache=True)
    def subset_counts_nb(blocks, ys):
        n, b = blocks.shape
        m = ys.shape[0]
        out = np.zeros(m, dtype=np.int64)
        for i in range(m):
            cnt = 0
            for r in range(n):
                ok = True
                for j in range(b):
                    u = blocks[r, j]
                    if u & ys[i, j] != u:
                        ok = False
                        break
                if ok:
                    cnt += 1
            out[i] = cnt
        return out

    @njit(cache=True)
    def subset_norms_f64_nb(blocks, weights, ys):
        n, b = blocks.shape
        m = ys.shape[0]
        out = np.zeros(m, dtype=np.float64)
        for i in range(m):
            acc = 0.0
            for r in range(n):
                ok = True
                for j in range(b):
                    u = blocks[r, j]
                    if u & ys[i, j] != u:
                        ok = False
                        break
                if ok:
                    acc += weights[r]
            out[i] = acc
        return out

    @njit(cache=True)
    def subset_norms_i64_nb(blocks, weights, ys):
        n, b = blocks.shape
        m = ys.shape[0]
        out = np.zeros(m, dtype=np.int64)
        for i in range(m):
            acc = 0
            for r in range(n):
                ok = True
                for j in range(b):
                    u = blocks[r, j]
                    if u & ys[i, j] != u:
                        ok = False
                        break
                if ok:
                    acc += weights[r]
            out[i] = acc
        return out

    @njit(cache=True)
    def on_subsplit_mask_nb(blocks, strips, union):
        n, b = blocks.shape
        ns = strips.shape[0]
        out = np.zeros(n, dtype=np.bool_)
        for r in range(n):
            ok = True
            for j in range(b):
                u = blocks[r, j]
                if u & union[j] != u:
                    ok = False
                    break
            if ok:
                for s in range(ns):
                    hit = 0
                    for j in range(b):
                        v = blocks[r, j] & strips[s, j]
                        if v != 0:
                            if v & (v - np.uint64(1)) != 0:
                                hit = 2
                            else:
                                hit += 1
                            if hit > 1:
                                break
                    if hit > 1:
                        ok = False
                        break
            out[r] = ok
        return out

    return {
        "link_counts": link_counts_nb,
        "link_norms_f64": link_norms_f64_nb,
        "link_norms_i64": link_norms_i64_nb,
        "subset_counts": subset_counts_nb,
        "subset_norms_f64": subset_norms_f64_nb,
        "subset_norms_i64": subset_norms_i64_nb,
        "on_subsplit_mask": on_subsplit_mask_nb,
    }


def _select() -> tuple[str, dict]:
    requested = os.environ.get("SUNFLOWERKIT_BACKEND", "auto").strip().lower()
    if requested not in ("auto", "numba", "numpy"):
        raise RuntimeError(
            f"SUNFLOWERKIT_BACKEND must be auto, numba or numpy, got {requested!r}"
        )
    if requested == "numpy":
        return "numpy", _NUMPY_IMPLS
    try:
        impls = _build_numba_impls()
        return "numba", impls
    except ImportError as exc:
        if requested == "numba":
            raise RuntimeError(f"numba backend requested but unavailable: {exc}")
        warnings.warn(f"numba unavailable, using numpy kernels ({exc})")
        return "numpy", _NUMPY_IMPLS


BACKEND, _ACTIVE = _select()

IMPLEMENTATIONS = {"numpy": _NUMPY_IMPLS}
if BACKEND == "numba":
    IMPLEMENTATIONS["numba"] = _ACTIVE


def available_implementations() -> dict:
    """Both kernel tables when numba imports, else just numpy.

    Unlike IMPLEMENTATIONS this ignores the env override, so comparisons and
    benchmarks can always reach the compiled variants.
    """
    out = dict(IMPLEMENTATIONS)
    if "numba" not in out:
        try:
            out["numba"] = _build_numba_impls()
        except ImportError:
            pass
    return out

link_counts = _ACTIVE["link_counts"]
link_norms_f64 = _ACTIVE["link_norms_f64"]
link_norms_i64 = _ACTIVE["link_norms_i64"]
subset_counts = _ACTIVE["subset_counts"]
subset_norms_f64 = _ACTIVE["subset_norms_f64"]
subset_norms_i64 = _ACTIVE["subset_norms_i64"]
on_subsplit_mask = _ACTIVE["on_subsplit_mask"]


def warm_up() -> None:
    """Trigger jit compilation on tiny inputs so timings stay honest."""
    blocks = np.array([[3], [5]], dtype=np.uint64)
    cands = np.array([[1]], dtype=np.uint64)
    wf = np.ones(2, dtype=np.float64)
    wi = np.ones(2, dtype=np.int64)
    link_counts(blocks, cands)
    link_norms_f64(blocks, wf, cands)
    link_norms_i64(blocks, wi, cands)
    subset_counts(blocks, cands)
    subset_norms_f64(blocks, wf, cands)
    subset_norms_i64(blocks, wi, cands)
    on_subsplit_mask(blocks, np.array([[3]], dtype=np.uint64), np.array([7], dtype=np.uint64))
