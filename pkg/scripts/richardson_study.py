"""Finite-difference convergence of the closedness and exactness residuals.

Halving the step should divide the truncation error by about 4 (second-order
central differences) until roundoff takes over.

Usage: python scripts/richardson_study.py [--seed S]
"""

import argparse

import numpy as np

from isodrast import metrics as M
from isodrast import poisson
from isodrast import sampling as smp
from isodrast.numerics import richardson_ratio

STEPS = [0.04, 0.02, 0.01, 0.005, 0.0025]


def table(label, errors):
    ratios = richardson_ratio(errors)
    print(f"\n{label}")
    print(f"  {'step':>8s} {'residual':>12s} {'ratio':>8s}")
    for k, (h, e) in enumerate(zip(STEPS, errors)):
        ratio = f"{ratios[k - 1]:8.3f}" if k else " " * 8
        print(f"  {h:8.4f} {e:12.4e} {ratio}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    for label, g in smp.metric_configurations(rng):
        h = smp.random_momentum(rng, g)
        a, b, c = (smp.random_metric_tangent(rng, g) for _ in range(3))
        table(f"{label}: closedness of Omega", [abs(M.fd_omega_exterior(g, h, a, b, c, st)) for st in STEPS])
        table(f"{label}: d Theta + Omega", [M.exactness_defect(g, h, a, b, st) for st in STEPS])

    F = poisson.IntegralFunctional.from_spec({"outer": "y0*y1 + y0", "inner": ["q", "p**2"]})
    G = poisson.IntegralFunctional.from_spec({"outer": "y0**2", "inner": ["q*p"]})
    H = poisson.IntegralFunctional.from_spec({"outer": "sin(y0) + y1", "inner": ["q**2 + p", "cos(q)"]})
    loop = smp.random_loop(rng, 128)
    print("\nJacobi residual of loop functionals (fourth-order stencil, ratio ~16)")
    errors = [poisson.jacobi_residual(F, G, H, loop, st) for st in STEPS]
    for st, e in zip(STEPS, errors):
        print(f"  {st:8.4f} {e:12.4e}")


if __name__ == "__main__":
    main()
