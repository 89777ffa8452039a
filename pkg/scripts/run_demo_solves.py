"""Solve the 1-d demo map x -> 100 - 2x at b = 3 from a batch of seeded starts.

Prints one line per start and drops the trace of the first run into --out
as trace.csv so the residual column can be eyeballed or plotted.
"""

import argparse
from pathlib import Path

import numpy as np

import fpkit as fp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/demo"))
    ap.add_argument("--seed", type=int, default=20260814)
    ap.add_argument("--starts", type=int, default=10)
    args = ap.parse_args()

    demo = fp.line_map(-2.0, 100.0)
    stop = fp.StopRule(eps_abs=1e-9)
    rng = np.random.default_rng(args.seed)
    starts = [0.0] + list(rng.uniform(-1e6, 1e6, args.starts))

    args.out.mkdir(parents=True, exist_ok=True)
    first_trace = None
    for x0 in starts:
        res = fp.solve_modified(demo, 3.0, np.array([x0]), stop=stop)
        ratio = fp.empirical_ratio(res.trace)
        print(
            f"x0={x0:+.6e}  x*={float(res.fixed_point[0]):.12f}  "
            f"iters={res.trace.iterations:3d}  ratio={ratio:.6f}  "
            f"residual_T={res.residual_T:.3e}"
        )
        if first_trace is None:
            first_trace = res.trace

    path = args.out / "trace.csv"
    fp.write_trace_csv(first_trace, path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
