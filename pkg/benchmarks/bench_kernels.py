"""Timing comparison of the two geometry kernel backends.

Runs the O(N^2) hot kernels (pairwise squared distances and the t-SNE
gradient step) on workloads shaped like the real pipeline (default
N=2000 points, D=64 dims) against both the compiled backend and the
numpy fallback, and reports wall times plus cross-backend agreement.

Usage: python3 benchmarks/bench_kernels.py [--n 2000] [--d 64] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ascprobe.geometry.kernels import load_backend


def best_of(repeats: int, fn, *args) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="points")
    ap.add_argument("--d", type=int, default=64, help="dimensions")
    ap.add_argument("--repeats", type=int, default=5, help="take the best of k runs")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    points = rng.normal(size=(args.n, args.d))
    embed = rng.normal(scale=1e-4, size=(args.n, 2))
    p = np.abs(rng.normal(size=(args.n, args.n)))
    p = (p + p.T) / p.sum()
    np.fill_diagonal(p, 0.0)

    backends = {}
    for name in ("c", "numpy"):
        try:
            backends[name] = load_backend(name)
        except RuntimeError:
            print(f"{name} backend unavailable; skipping")
    if not backends:
        return 1

    print(f"workload: N={args.n} D={args.d}, best of {args.repeats}\n")
    results: dict[str, dict[str, float]] = {}
    outputs: dict[str, dict[str, object]] = {}
    for name, mod in backends.items():
        times: dict[str, float] = {}
        outs: dict[str, object] = {}
        times["pairwise_sq_dists"], outs["pairwise_sq_dists"] = best_of(
            args.repeats, mod.pairwise_sq_dists, points
        )
        d2 = np.asarray(outs["pairwise_sq_dists"])
        times["tsne_grad"], outs["tsne_grad"] = best_of(
            args.repeats, mod.tsne_grad, embed, p, True
        )
        results[name] = times
        outputs[name] = outs
        _ = d2

    print(f"{'kernel':<22} " + " ".join(f"{n:>12}" for n in results))
    for kernel in ("pairwise_sq_dists", "tsne_grad"):
        row = f"{kernel:<22} "
        row += " ".join(f"{results[n][kernel] * 1e3:>10.2f}ms" for n in results)
        print(row)

    if len(results) == 2:
        fast = {
            k: results["numpy"][k] / results["c"][k]
            for k in ("pairwise_sq_dists", "tsne_grad")
        }
        print(
            "\nspeedup (numpy time / c time): "
            + ", ".join(f"{k} {v:.2f}x" for k, v in fast.items())
        )
        d2_gap = float(
            np.max(
                np.abs(
                    np.asarray(outputs["c"]["pairwise_sq_dists"])
                    - np.asarray(outputs["numpy"]["pairwise_sq_dists"])
                )
            )
        )
        gc, klc = outputs["c"]["tsne_grad"]
        gn, kln = outputs["numpy"]["tsne_grad"]
        grad_gap = float(np.max(np.abs(np.asarray(gc) - np.asarray(gn))))
        print(
            f"cross-backend agreement: d2 max abs diff {d2_gap:.3e}, "
            f"grad max abs diff {grad_gap:.3e}, kl diff {abs(klc - kln):.3e}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
