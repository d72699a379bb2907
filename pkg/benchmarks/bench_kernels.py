"""Time the jitted inner-loop kernels against their numpy fallbacks.

Runs each kernel pair on realistically sized inputs, checks that the two
variants agree numerically, and prints a per-kernel timing table.  The
package itself picks one variant at import time (PROSOLAB_NUMBA=0 forces
numpy); this script imports both directly so a single run covers them.

    python3 benchmarks/bench_kernels.py --repeat 20
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from prosolab import _accel
from prosolab.conditioning import gaussian_kernel
from prosolab.prominence import ScaleGrid, ricker


def timeit(fn, args, repeat: int) -> float:
    """Median wall time of fn(*args) over repeat runs, in milliseconds."""
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times)) * 1e3


def first_array(result):
    if isinstance(result, tuple):
        return result[0]
    return result


def build_workloads(rng) -> list[tuple[str, object, object, tuple]]:
    # 10 s track at the 5 ms frame shift; narrow smoothing kernel and the
    # coarsest wavelet row, the two extremes mirror_correlate actually sees
    track = rng.standard_normal(2000)
    grid = ScaleGrid()
    coarse = grid.scales_s()[-1] / 0.005
    wide = ricker(coarse, max(1, int(np.ceil(5 * coarse))))
    narrow = gaussian_kernel(0.02, 0.005)

    # 1 s of 40 ms pitch frames at 16 kHz, lags down to 60 Hz
    frames = rng.standard_normal((200, 640))
    max_lag = 266

    # a 40-token sentence and a 500-position stress case, 4 states
    pot_s = rng.standard_normal((40, 4))
    pot_l = rng.standard_normal((500, 4))
    trans = rng.standard_normal((4, 4))

    return [
        ("mirror_correlate/narrow", _accel.mirror_correlate_numpy,
         _accel.mirror_correlate_numba, (track, narrow)),
        ("mirror_correlate/wide", _accel.mirror_correlate_numpy,
         _accel.mirror_correlate_numba, (track, wide)),
        ("frame_acf", _accel.frame_acf_numpy,
         _accel.frame_acf_numba, (frames, max_lag)),
        ("chain_forward/T=40", _accel.chain_forward_numpy,
         _accel.chain_forward_numba, (pot_s, trans)),
        ("chain_forward/T=500", _accel.chain_forward_numpy,
         _accel.chain_forward_numba, (pot_l, trans)),
        ("chain_backward/T=500", _accel.chain_backward_numpy,
         _accel.chain_backward_numba, (pot_l, trans)),
        ("chain_viterbi/T=500", _accel.chain_viterbi_numpy,
         _accel.chain_viterbi_numba, (pot_l, trans)),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="compare numba and numpy kernel backends")
    parser.add_argument("--repeat", type=int, default=20,
                        help="timing runs per kernel (median reported)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    rows = []
    for name, np_fn, nb_fn, fn_args in build_workloads(rng):
        ref = first_array(np_fn(*fn_args))
        got = first_array(nb_fn(*fn_args))  # first call also compiles
        np.testing.assert_allclose(np.asarray(got, dtype=float),
                                   np.asarray(ref, dtype=float),
                                   rtol=1e-10, atol=1e-10,
                                   err_msg=f"{name}: backends disagree")
        t_np = timeit(np_fn, fn_args, args.repeat)
        t_nb = timeit(nb_fn, fn_args, args.repeat)
        rows.append((name, t_np, t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy ms':>9}  {'numba ms':>9}  speedup")
    for name, t_np, t_nb in rows:
        print(f"{name:<{width}}  {t_np:>9.3f}  {t_nb:>9.3f}  "
              f"{t_np / t_nb:>6.1f}x")
    print(f"\npackage backend in this process: {_accel.BACKEND}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
