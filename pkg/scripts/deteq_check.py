"""Compare the determining-equation residual with the full symmetry defect.

The determining equation is a necessary condition derived by differentiating
the symmetry condition along u[1].  When omega does not depend on u[1] it is
vacuous, so E1 accepts everything.  On u[4] = u[0] + u[1] and on E3 it
rules out some non-symmetries, but a ZERO residual is not sufficient: the
golden-ratio characteristic of E3 solves it and still has a nonzero defect.
"""

from dataclasses import dataclass, field

from odelie.catalog import get, translation_roots
from odelie.equations import DifferenceEquation
from odelie.numeric import ZeroTestConfig, is_zero
from odelie.parser import parse
from odelie.symmetry import deteq_residual, symmetry_defect

LOG = "log(abs((1-u[0])/(1+u[0])))"


@dataclass
class Config:
    samples: int = 50
    seed: int = 0x5EED
    cases: list = field(
        default_factory=lambda: [
            ("E1", "u[0]^2"),
            ("E1", "n"),
            ("fib", "3*u[0]+n^2+sin(n)"),
            ("fib", "u[0]^2"),
            ("E3", f"(u[0]^2-1)*{LOG}"),
            ("E3", f"(n^2+sin(n))*(u[0]^2-1)+3*(u[0]^2-1)*{LOG}"),
            ("E3", "((1+sqrt(5))/2)^n*(u[0]^2-1)"),
            ("E3", "u[0]"),
        ]
    )


def main(cfg: Config) -> None:
    zt = ZeroTestConfig(samples=cfg.samples, seed=cfg.seed)
    eqs = {k: get(k).equation for k in ("E1", "E3")}
    eqs["fib"] = DifferenceEquation.from_string("u[0]+u[1]", 4, name="fib")
    cases = list(cfg.cases) + [("E3", f"({float(r)!r})^n*(u[0]^2-1)") for r in translation_roots()]
    print(f"{'eq':>4} {'deteq':>9} {'defect':>9}  Q")
    for name, text in cases:
        eq, q = eqs[name], parse(text)
        d = is_zero(deteq_residual(eq, q), zt, eq.domain, width=4).verdict
        s = is_zero(symmetry_defect(eq, q), zt, eq.domain, width=4).verdict
        print(f"{name:>4} {d:>9} {s:>9}  {text}")


if __name__ == "__main__":
    main(Config())
