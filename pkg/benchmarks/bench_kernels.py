"""Time every bitset kernel under each available backend.

Usage:
    python3 benchmarks/bench_kernels.py --members 4000 --cands 4000 --reps 5

The table reports the best wall time per (kernel, backend) pair and the
numba speedup over numpy when both are importable. Data is generated from
a fixed seed so runs are comparable across machines and commits.
"""

import argparse
import time

import numpy as np

from sunflowerkit.bitsets import mask_of, masks_to_blocks, n_blocks
from sunflowerkit.kernels import available_implementations


def random_blocks(rng, n, count, size):
    masks = []
    for _ in range(count):
        picks = rng.choice(n, size=size, replace=False)
        masks.append(mask_of(int(p) + 1 for p in picks))
    return masks_to_blocks(masks, n_blocks(n))


def build_inputs(args):
    rng = np.random.default_rng(args.seed)
    nb = n_blocks(args.n)
    blocks = random_blocks(rng, args.n, args.members, args.member_size)
    cands = random_blocks(rng, args.n, args.cands, 2)
    ys = random_blocks(rng, args.n, args.cands, args.n // 2)
    w_f64 = rng.uniform(0.5, 2.0, size=args.members)
    w_i64 = rng.integers(1, 100, size=args.members, dtype=np.int64)
    # contiguous strips covering the ground set
    strip_size = args.n // args.member_size
    strips = masks_to_blocks(
        [
            mask_of(range(i * strip_size + 1, (i + 1) * strip_size + 1))
            for i in range(args.member_size)
        ],
        nb,
    )
    union = np.zeros(nb, dtype=np.uint64)
    for s in strips:
        union |= s
    return {
        "link_counts": (blocks, cands),
        "link_norms_f64": (blocks, w_f64, cands),
        "link_norms_i64": (blocks, w_i64, cands),
        "subset_counts": (blocks, ys),
        "subset_norms_f64": (blocks, w_f64, ys),
        "subset_norms_i64": (blocks, w_i64, ys),
        "on_subsplit_mask": (blocks, strips, union),
    }


def best_time(fn, inputs, reps):
    fn(*inputs)  # warm-up; also triggers jit compilation
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*inputs)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64, help="ground set size")
    ap.add_argument("--members", type=int, default=4000, help="family rows")
    ap.add_argument("--member-size", type=int, default=8)
    ap.add_argument("--cands", type=int, default=4000, help="query rows")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if args.n % args.member_size:
        ap.error("--member-size must divide --n (the strip layout needs it)")

    impls = available_implementations()
    if "numba" not in impls:
        print("numba not importable; timing the numpy backend only")
    inputs = build_inputs(args)

    names = list(inputs)
    width = max(len(s) for s in names)
    header = f"{'kernel':<{width}} " + "".join(f"{b:>12}" for b in impls)
    if len(impls) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in names:
        times = {b: best_time(impls[b][name], inputs[name], args.reps) for b in impls}
        row = f"{name:<{width}} " + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in times)
        if "numba" in times and "numpy" in times:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
