"""Time the hot kernels under the numba and pure-numpy implementations.

Run from the repository root after installing the package:

    python benchmarks/numba_vs_numpy.py --repeats 5

Set EQUIBOUND_NO_NUMBA=1 to confirm the fallback path is the one being
exercised by the library (this script always times both families when
numba is importable, regardless of the flag).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from equibound.kernels import (
    expand_coefficients_numpy,
    fill_circulant_numpy,
    project_coefficients_numpy,
    _expand_coefficients_loops,
    _fill_circulant_loops,
    _project_coefficients_loops,
)

try:
    from numba import njit
except ImportError:
    njit = None


def _cases():
    rng = np.random.default_rng(0)
    cases = []
    for n in (8, 64, 256):
        idx = rng.integers(0, n, size=(n, n))
        w = rng.standard_normal(n)
        cases.append((f"fill_circulant n={n}", "fill", (np.ascontiguousarray(idx), w)))
    for m_out, m_in, c, d in ((8, 8, 2, 2), (64, 64, 1, 2), (16, 16, 4, 4)):
        coeffs = rng.standard_normal((m_out, m_in, c))
        basis = rng.standard_normal((c, d, d))
        cases.append((f"expand m={m_out}x{m_in} c={c} d={d}", "expand", (coeffs, basis)))
        grad = rng.standard_normal((m_out * d, m_in * d))
        cases.append((f"project m={m_out}x{m_in} c={c} d={d}", "project", (grad, basis)))
    return cases


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--number", type=int, default=20, help="calls per repeat")
    args = parser.parse_args()

    numpy_fns = {
        "fill": fill_circulant_numpy,
        "expand": expand_coefficients_numpy,
        "project": project_coefficients_numpy,
    }
    numba_fns = None
    if njit is not None:
        numba_fns = {
            "fill": njit(cache=True)(_fill_circulant_loops),
            "expand": njit(cache=True)(_expand_coefficients_loops),
            "project": njit(cache=True)(_project_coefficients_loops),
        }

    header = f"{'case':<34}{'numpy (ms)':>12}"
    if numba_fns is not None:
        header += f"{'numba (ms)':>12}{'speedup':>10}"
    print(header)
    for name, family, arg_tuple in _cases():
        t_np = min(
            timeit.repeat(
                lambda: numpy_fns[family](*arg_tuple),
                number=args.number,
                repeat=args.repeats,
            )
        ) / args.number * 1e3
        line = f"{name:<34}{t_np:>12.4f}"
        if numba_fns is not None:
            fn = numba_fns[family]
            fn(*arg_tuple)  # trigger JIT compilation outside the timer
            t_nb = min(
                timeit.repeat(
                    lambda: fn(*arg_tuple),
                    number=args.number,
                    repeat=args.repeats,
                )
            ) / args.number * 1e3
            ratio = t_np / t_nb if t_nb > 0 else float("inf")
            line += f"{t_nb:>12.4f}{ratio:>10.2f}"
        print(line)

    out_np = numpy_fns["expand"](*_cases()[3][2])
    if numba_fns is not None:
        out_nb = numba_fns["expand"](*_cases()[3][2])
        print(f"max |numpy - numba| on expand: {np.max(np.abs(out_np - out_nb)):.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
