"""Compare the numba and numpy stiffness kernels on random element batches.

Run from an environment with the package installed:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --elements 2048 --degrees 2 3 4 --repeat 30

The numpy path is the semantics reference; the numba path must match it to
rounding error, so agreement is asserted before timing.
"""

import argparse
import time

import numpy as np

from elastowave.basis import diff_matrix, gll_rule, tensor_weights
from elastowave.kernels import _numpy

try:
    from elastowave.kernels import _numba
except ImportError:
    _numba = None


def make_inputs(n_elem, degree, seed=0):
    rng = np.random.default_rng(seed)
    rule = gll_rule(degree)
    d1 = diff_matrix(rule)
    w = tensor_weights(rule)
    nl = (degree + 1) ** 3
    # affine elements with a mild random anisotropy, constant Jacobian
    scale = rng.uniform(5.0, 15.0, size=(n_elem, 1, 3))
    jinv = np.zeros((n_elem, 1, 3, 3))
    jinv[:, :, [0, 1, 2], [0, 1, 2]] = scale
    detj = 1.0 / np.prod(scale, axis=-1)
    u = rng.standard_normal((n_elem, nl, 3))
    p = rng.standard_normal((n_elem, nl))
    lam = rng.uniform(1.0, 60.0, size=n_elem)
    mu = rng.uniform(1.0, 30.0, size=n_elem)
    rho = rng.uniform(0.5, 3.0, size=n_elem)
    return dict(u=u, p=p, d1=d1, jinv=jinv, detj=detj, w=w, lam=lam, mu=mu, rho=rho)


def best_time(fn, args, repeat):
    fn(*args)  # warm up (and trigger JIT compilation on the numba path)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_degree(n_elem, degree, repeat):
    data = make_inputs(n_elem, degree)
    cases = {
        "elastic": (
            "elastic_stiffness_apply",
            (data["u"], data["d1"], data["jinv"], data["detj"], data["w"],
             data["lam"], data["mu"]),
        ),
        "acoustic": (
            "acoustic_stiffness_apply",
            (data["p"], data["d1"], data["jinv"], data["detj"], data["w"],
             data["rho"]),
        ),
    }
    rows = []
    for label, (name, args) in cases.items():
        ref = getattr(_numpy, name)(*args)
        t_np = best_time(getattr(_numpy, name), args, repeat)
        if _numba is not None:
            got = getattr(_numba, name)(*args)
            err = np.abs(got - ref).max() / np.abs(ref).max()
            assert err < 1e-12, f"{name} backends disagree: rel {err:.2e}"
            t_nb = best_time(getattr(_numba, name), args, repeat)
        else:
            t_nb = None
        rows.append((degree, label, t_np, t_nb))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--elements", type=int, default=1024)
    ap.add_argument("--degrees", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    if _numba is None:
        print("numba not importable: timing the numpy path only")
    print(f"{args.elements} elements, best of {args.repeat} runs\n")
    header = f"{'N':>2} {'kernel':>9} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for degree in args.degrees:
        for deg, label, t_np, t_nb in bench_degree(args.elements, degree, args.repeat):
            if t_nb is None:
                print(f"{deg:>2} {label:>9} {1e3 * t_np:>11.3f} {'-':>11} {'-':>8}")
            else:
                print(
                    f"{deg:>2} {label:>9} {1e3 * t_np:>11.3f} "
                    f"{1e3 * t_nb:>11.3f} {t_np / t_nb:>8.2f}"
                )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
