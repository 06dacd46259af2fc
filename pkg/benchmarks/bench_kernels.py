"""Compiled kernels vs the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--skip-scenarios]

Part one times each kernel in-process on random 4- and 8-qubit registers.
Part two times a few scenarios end to end in a subprocess, once per backend,
with ``WUHAN_QSDC_PURE=1`` forcing the fallback.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from wuhan_qsdc import _kernels_py

try:
    from wuhan_qsdc import _kernels as _compiled
except ImportError:
    _compiled = None

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

SCENARIOS = [
    ["--scenario", "honest-w", "--trials", "100", "--msg-len", "64"],
    ["--scenario", "honest-w", "--triples", "20000"],
    ["--scenario", "oca-w", "--msg-len", "10000"],
    ["--scenario", "eve-ir-bx", "--triples", "20000"],
]


def _cases(mod, psi, n):
    def one_q():
        mod.apply_1q(psi, n, 1, H)

    def cnot():
        mod.apply_cnot(psi, n, 0, n - 1)

    def probs():
        mod.pair_probs(psi, n, 0, n - 1)

    def prob1():
        mod.prob_one(psi, n, n // 2)

    return {"apply_1q": one_q, "apply_cnot": cnot, "pair_probs": probs, "prob_one": prob1}


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["compiled"] = _compiled
    print(f"{'kernel':<12}{'n':>3}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for n in (4, 8):
        base = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        base /= np.linalg.norm(base)
        timings = {}
        for name, mod in backends.items():
            psi = base.copy()
            for kernel, fn in _cases(mod, psi, n).items():
                best = min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat
                timings.setdefault(kernel, {})[name] = best
        for kernel, row in timings.items():
            cells = "".join(f"{row[b] * 1e6:>11.2f} us" for b in backends)
            speed = f"{row['python'] / row['compiled']:>9.1f}x" if "compiled" in row else ""
            print(f"{kernel:<12}{n:>3}{cells}{speed}")


def _time_cli(args, pure):
    env = dict(os.environ)
    env.pop("WUHAN_QSDC_PURE", None)
    if pure:
        env["WUHAN_QSDC_PURE"] = "1"
    code = (
        "import sys, time\n"
        "from wuhan_qsdc.cli import main\n"
        "t0 = time.perf_counter()\n"
        f"main(['run', *{args!r}, '--out', '/dev/null'])\n"
        "print(time.perf_counter() - t0)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip().splitlines()[-1])


def bench_scenarios():
    print(f"\n{'scenario':<50}{'compiled':>10}{'python':>10}")
    for args in SCENARIOS:
        fast = _time_cli(args, pure=False) if _compiled is not None else float("nan")
        slow = _time_cli(args, pure=True)
        print(f"{' '.join(args):<50}{fast:>9.2f}s{slow:>9.2f}s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=2000)
    parser.add_argument("--skip-scenarios", action="store_true")
    args = parser.parse_args()
    if _compiled is None:
        print("compiled kernels not built; timing the fallback only")
    bench_kernels(args.repeat)
    if not args.skip_scenarios:
        bench_scenarios()


if __name__ == "__main__":
    main()
