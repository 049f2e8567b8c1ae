"""Compare the compiled and numpy im2col/col2im kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times each kernel on the shapes met in a desk-scale training step, then a
whole forward/backward step with each backend (the numpy one in a
subprocess with MASKBENCH_PURE=1, since the backend is fixed at import).
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from maskbench.nn import _im2col_py

try:
    from maskbench.nn import _im2col as _compiled
except ImportError:
    _compiled = None

# (batch, channels, padded height, padded width, kernel, stride)
SHAPES = [
    (24, 1, 66, 50, 4, 2),
    (24, 16, 34, 26, 3, 1),
    (24, 32, 18, 14, 4, 2),
    (24, 128, 4, 4, 3, 1),
]

STEP_SNIPPET = """
import json, time, numpy as np
from maskbench.nn import BACKEND, SGD, Tensor, functional as F
from maskbench.separation.model import ResUNetConfig, SeparationModel
m = SeparationModel(ResUNetConfig(), ['a', 'b', 'c'], 'audio+visual+sign')
opt = SGD(m.parameters())
rng = np.random.default_rng(0)
x = Tensor(rng.random((24, 1, 64, 48)).astype(np.float32))
y = (rng.random((24, 2, 64, 48)) > 0.5).astype(np.float32)
times = []
for i in range({repeat} + 1):
    t = time.perf_counter()
    e = m.embed(['a', 'b'] * 24).reshape(24, 2, 32)
    loss = F.bce_loss(m.masks_from(m.features(x), e), y)
    opt.zero_grad(); loss.backward(); opt.step()
    times.append(time.perf_counter() - t)
print(json.dumps({{"backend": BACKEND, "step_s": min(times[1:])}}))
"""


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n, c, hp, wp, k, s in SHAPES:
        xp = rng.standard_normal((n, c, hp, wp)).astype(np.float32)
        cols = _im2col_py.im2col(xp, k, k, s)
        row = {"shape": f"{n}x{c}x{hp}x{wp} k{k} s{s}"}
        impls = {"python": _im2col_py}
        if _compiled is not None:
            impls["cython"] = _compiled
        for name, mod in impls.items():
            row[f"im2col_{name}_ms"] = 1e3 * min(timeit.repeat(
                lambda: mod.im2col(xp, k, k, s), number=1, repeat=repeat))
            row[f"col2im_{name}_ms"] = 1e3 * min(timeit.repeat(
                lambda: mod.col2im(cols, n, c, hp, wp, k, k, s), number=1, repeat=repeat))
        if _compiled is not None:
            same = np.array_equal(_compiled.im2col(xp, k, k, s), cols) and np.array_equal(
                _compiled.col2im(cols, n, c, hp, wp, k, k, s), _im2col_py.col2im(cols, n, c, hp, wp, k, k, s))
            row["bitwise_equal"] = bool(same)
        rows.append(row)
    return rows


def bench_step(repeat, pure):
    env = dict(os.environ, MASKBENCH_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(repeat=repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled kernels not built; only the numpy fallback is timed")
    for row in bench_kernels(args.repeat):
        print(row["shape"])
        for key, val in row.items():
            if key != "shape":
                print(f"  {key:22s} {val:.3f}" if isinstance(val, float) else f"  {key:22s} {val}")
    steps = [bench_step(args.repeat, pure=True)]
    if _compiled is not None:
        steps.append(bench_step(args.repeat, pure=False))
    for s in steps:
        print(f"training step (batch 24, 64x48, base 16) [{s['backend']}]: {1e3 * s['step_s']:.1f} ms")
    if len(steps) == 2:
        print(f"speedup: {steps[0]['step_s'] / steps[1]['step_s']:.2f}x")


if __name__ == "__main__":
    main()
