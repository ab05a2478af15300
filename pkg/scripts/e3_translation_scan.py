"""Scan lambda for the E3 characteristic lambda^n (u^2 - 1).

Prints the symmetry-defect magnitude and the flow-test ratios for a grid of
lambda values plus the golden ratios and the real roots of lambda^4 = lambda + 1.
Only the quartic roots give a zero defect and flat flow ratios.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from odelie.catalog import get, translation_roots
from odelie.expr import N, mul, num, power
from odelie.numeric import ZeroTestConfig, is_zero
from odelie.parser import parse
from odelie.symmetry import flow_test, symmetry_defect


@dataclass
class Config:
    lo: float = -2.0
    hi: float = 2.0
    points: int = 17
    samples: int = 50
    seed: int = 0x5EED
    flow: bool = True


def characteristic(lam: float):
    return mul(power(num(lam), N), parse("u[0]^2-1"))


def main(cfg: Config) -> None:
    eq = get("E3").equation
    zt = ZeroTestConfig(samples=cfg.samples, seed=cfg.seed)
    golden = [(1 + 5**0.5) / 2, (1 - 5**0.5) / 2]
    named = [(f"{x:.6f}", x) for x in np.linspace(cfg.lo, cfg.hi, cfg.points) if abs(x) > 1e-12]
    named += [("golden+", golden[0]), ("golden-", golden[1])]
    named += [(f"root{i + 1}", float(r)) for i, r in enumerate(translation_roots())]
    print(f"{'lambda':>10} {'lam^4-lam-1':>12} {'verdict':>8} {'max defect':>11}  flow ratios")
    for name, lam in named:
        rep = is_zero(symmetry_defect(eq, characteristic(lam)), zt, eq.domain, width=4)
        line = f"{name:>10} {lam**4 - lam - 1:12.3e} {rep.verdict:>8} {rep.max_residual:11.3g}"
        if cfg.flow:
            fr = flow_test(eq, characteristic(lam), zt)
            line += "  " + " ".join(f"{r:.3g}" for r in fr["ratios"]) + ("  ok" if fr["passed"] else "")
        print(line)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=Config.points)
    ap.add_argument("--no-flow", action="store_true")
    a = ap.parse_args()
    main(Config(points=a.points, flow=not a.no_flow))
