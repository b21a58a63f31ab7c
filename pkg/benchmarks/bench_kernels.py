"""Compiled vs numpy kernels on the workloads the library actually runs.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each case runs both backends on identical inputs and checks that they
agree (same simplex status and pivot count, Pfaffians to 1e-12) before
reporting timings. Without the compiled extension only the numpy column
is printed.
"""

import argparse
import time

import numpy as np

from conecontact.band_forms import ConstantOneForm
from conecontact.cone_structures import cone_from_acs
from conecontact.contact import ContactCandidate, ReebACSField, alpha_std, twisted_symplectization
from conecontact.duality import SeparationProblem, evaluation_matrix
from conecontact.kernels import backends
from conecontact.lp import PIVOT_TOL, l1_dual_tableau


def reeb_rows(seed=0x5EED):
    cand = ContactCandidate(alpha_std())
    beta = twisted_symplectization(cand)
    cone = cone_from_acs(ReebACSField(cand), beta.model, grid=(5, 5, 5, 5), seed=seed)
    prob = SeparationProblem.from_cone(cone, ConstantOneForm.dt(beta.model), 1, (),
                                       invariant_sector=True)
    return evaluation_matrix(prob)


def random_rows(rng, nrows, ncols):
    # feasible by construction: rows tilted towards a hidden direction
    y = rng.normal(size=ncols)
    R = rng.normal(size=(nrows, ncols))
    return R + np.outer(np.sign(R @ y) * 0.5, y / np.linalg.norm(y))


def simplex_case(mod, rows):
    T, basis = l1_dual_tableau(rows)
    start = time.perf_counter()
    status, iters, _ = mod.simplex_pivot_loop(T, basis, PIVOT_TOL, 10 * T.shape[1])
    return time.perf_counter() - start, (status, iters)


def pfaffian_case(mod, A):
    start = time.perf_counter()
    pf = mod.pfaffian_batch(A)
    return time.perf_counter() - start, pf


def antisymmetric_stack(rng, count, n):
    X = rng.normal(size=(count, n, n))
    return X - X.transpose(0, 2, 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    mods = backends()

    cases = [
        ("simplex, Reeb cone on 5^4 grid", simplex_case, reeb_rows()),
        ("simplex, random 400x40", simplex_case, random_rows(rng, 400, 40)),
        ("simplex, random 2000x60", simplex_case, random_rows(rng, 2000, 60)),
        ("pfaffian, 83521 x 4x4", pfaffian_case, antisymmetric_stack(rng, 17**4, 4)),
        ("pfaffian, 20000 x 8x8", pfaffian_case, antisymmetric_stack(rng, 20000, 8)),
    ]
    names = list(mods)
    print(f"{'case':34s}" + "".join(f"{n:>12s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, run, data in cases:
        best, outs = {}, {}
        for name, mod in mods.items():
            times = []
            for _ in range(args.repeat):
                t, out = run(mod, data)
                times.append(t)
            best[name], outs[name] = min(times), out
        if len(names) > 1:
            a, b = (outs[n] for n in names)
            same = a == b if isinstance(a, tuple) else np.allclose(a, b, rtol=1e-12, atol=1e-12)
            if not same:
                raise SystemExit(f"backends disagree on {label!r}: {a} vs {b}")
        line = f"{label:34s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            line += f"{best['python'] / best['compiled']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
