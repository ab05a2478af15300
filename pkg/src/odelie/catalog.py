"""The three fourth-order equations with their published symmetries and integrals.

E1: u[4] = u[0]
E2: u[4] = n/(n+4) u[0]
E3: u[4] = (u[1]+u[0])/(u[0]u[1]+1)
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from odelie.conslaw import (
    NotAMultiplier,
    association_value,
    classify_equivalence,
    verify_multiplier,
)
from odelie.equations import DifferenceEquation
from odelie.expr import Expr, N, U, mul, num, power, sub
from odelie.integrals import (
    FirstIntegral,
    LinearCoefficients,
    build_linear_integral,
    find_integrals_ansatz,
    p3_determining_residual,
    p_components,
    p_recursion_residuals,
    proportionality_residual,
    verify_first_integral,
)
from odelie.numeric import Domain, VerificationReport, ZeroTestConfig, is_zero
from odelie.parser import parse
from odelie.symmetry import Characteristic, find_symmetries_ansatz, verify_symmetry

PERIOD4 = ("1", "(-1)^n", "cos(n*pi/2)", "sin(n*pi/2)")
# marker for the Euler-operator row X phi = phi
SAME = "phi"


@dataclass
class CatalogEntry:
    equation: DifferenceEquation
    symmetries: list
    integrals: list
    multipliers: list  # Expr per integral, same order
    kernels: list = field(default_factory=list)  # K(n) per integral (linear equations)
    coefficients: LinearCoefficients | None = None  # a, b with K unset
    associations: list = field(default_factory=list)  # rows: Fraction or SAME
    symmetry_basis: list = field(default_factory=list)
    integral_basis: list = field(default_factory=list)
    expected_symmetry_dim: int | None = None
    expected_integral_dim: int | None = None
    notes: str = ""

    @property
    def name(self) -> str:
        return self.equation.name

    def symmetry(self, label: str) -> Characteristic:
        for c in self.symmetries:
            if c.label == label:
                return c
        raise KeyError(label)

    def integral(self, label: str) -> FirstIntegral:
        for p in self.integrals:
            if p.label == label:
                return p
        raise KeyError(label)

    def to_json(self) -> dict:
        return {
            **self.equation.to_json(),
            "symmetries": {c.label: str(c.Q) for c in self.symmetries},
            "integrals": {p.label: str(p.phi) for p in self.integrals},
            "multipliers": {p.label: str(m) for p, m in zip(self.integrals, self.multipliers)},
        }


def _syms(prefix: str, exprs) -> list[Characteristic]:
    return [Characteristic(parse(s), f"{prefix}{i + 1}") for i, s in enumerate(exprs)]


def _ints(exprs) -> list[FirstIntegral]:
    return [FirstIntegral(parse(s), f"phi{i + 1}") for i, s in enumerate(exprs)]


def _e1() -> CatalogEntry:
    eq = DifferenceEquation.from_string("u[0]", 4, name="E1")
    integrals = _ints(
        [
            "u[0]+u[1]+u[2]+u[3]",
            "(-1)^n*(-u[0]+u[1]-u[2]+u[3])",
            "sin(n*pi/2)*(u[2]-u[0])+cos(n*pi/2)*(u[3]-u[1])",
            "sin(n*pi/2)*(u[3]-u[1])-cos(n*pi/2)*(u[2]-u[0])",
        ]
    )
    F = Fraction
    return CatalogEntry(
        equation=eq,
        symmetries=_syms("X1", list(PERIOD4) + ["u[0]"]),
        integrals=integrals,
        multipliers=[parse(s) for s in ("1", "(-1)^(n+1)", "-sin(n*pi/2)", "cos(n*pi/2)")],
        kernels=[parse(s) for s in ("1", "(-1)^n", "cos(n*pi/2)", "sin(n*pi/2)")],
        coefficients=LinearCoefficients(num(1), num(0), num(0)),
        associations=[
            [F(4), F(0), F(0), F(0)],
            [F(0), F(-4), F(0), F(0)],
            [F(0), F(0), F(0), F(2)],
            [F(0), F(0), F(-2), F(0)],
            [SAME] * 4,
        ],
        symmetry_basis=[parse(s) for s in list(PERIOD4) + ["u[0]"]],
        integral_basis=[mul(parse(f), U(j)) for f in PERIOD4 for j in range(4)],
        expected_symmetry_dim=5,
        expected_integral_dim=4,
    )


def _e2() -> CatalogEntry:
    eq = DifferenceEquation.from_string("n/(n+4)*u[0]", 4, name="E2", domain=Domain(n_min=5), n0_min=1)
    integrals = _ints(
        [
            "(n*u[0]+(n+1)*u[1]+(n+2)*u[2]+(n+3)*u[3])/3",
            "(-1)^n/3*(-n*u[0]+(n+1)*u[1]-(n+2)*u[2]+(n+3)*u[3])",
            "(-n*sin(n*pi/2)*u[0]-(n+1)*cos(n*pi/2)*u[1]+(n+2)*sin(n*pi/2)*u[2]+(n+3)*cos(n*pi/2)*u[3])/3",
            "(n*cos(n*pi/2)*u[0]-(n+1)*sin(n*pi/2)*u[1]-(n+2)*cos(n*pi/2)*u[2]+(n+3)*sin(n*pi/2)*u[3])/3",
        ]
    )
    F = Fraction
    return CatalogEntry(
        equation=eq,
        symmetries=_syms("X2", ["4/n", "4*(-1)^n/n", "4/n*cos(n*pi/2)", "4/n*sin(n*pi/2)", "u[0]"]),
        integrals=integrals,
        multipliers=[
            parse(s)
            for s in (
                "(n+4)/3",
                "(-1)^(n+1)/3*(n+4)",
                "-((n+4)/3)*sin(n*pi/2)",
                "(n+4)/3*cos(n*pi/2)",
            )
        ],
        kernels=[parse(f"(n+3)/3*{k}") for k in ("1", "(-1)^n", "cos(n*pi/2)", "sin(n*pi/2)")],
        coefficients=LinearCoefficients(parse("n/(n+4)"), num(0), num(0)),
        associations=[
            [F(16, 3), F(0), F(0), F(0)],
            [F(0), F(-16, 3), F(0), F(0)],
            [F(0), F(0), F(0), F(8, 3)],
            [F(0), F(0), F(-8, 3), F(0)],
            [SAME] * 4,
        ],
        symmetry_basis=[parse(s) for s in ("4/n", "4*(-1)^n/n", "4/n*cos(n*pi/2)", "4/n*sin(n*pi/2)", "u[0]")],
        integral_basis=[mul(parse(f), N + j, U(j)) for f in PERIOD4 for j in range(4)],
        expected_symmetry_dim=5,
        expected_integral_dim=4,
    )


E3_SYMMETRIES = (
    "((1+sqrt(5))/2)^n*(u[0]^2-1)",
    "((1-sqrt(5))/2)^n*(u[0]^2-1)",
    "1/2*(u[0]^2-1)*log(abs((1-u[0])/(1+u[0])))",
)


def _e3() -> CatalogEntry:
    eq = DifferenceEquation.from_string("(u[1]+u[0])/(u[0]*u[1]+1)", 4, name="E3")
    monomials = [U(i) for i in range(4)] + [mul(U(i), U(j)) for i in range(4) for j in range(i, 4)]
    return CatalogEntry(
        equation=eq,
        symmetries=_syms("X3", E3_SYMMETRIES),
        integrals=[],
        multipliers=[],
        symmetry_basis=[parse(s) for s in E3_SYMMETRIES],
        integral_basis=monomials,
        expected_symmetry_dim=3,
        expected_integral_dim=0,
        notes=(
            "lambda^n (u[0]^2-1) is a symmetry iff lambda^4 = lambda + 1; "
            "the golden-ratio characteristics fail the symmetry condition. "
            "See translation_roots() / corrected_e3_symmetries()."
        ),
    )


def translation_roots() -> np.ndarray:
    """Real roots of lambda^4 - lambda - 1 (E3 translation characteristics)."""
    r = np.roots([1, 0, 0, -1, -1])
    return np.sort(r[np.abs(r.imag) < 1e-12].real)


def corrected_e3_symmetries() -> list[Characteristic]:
    """E3 characteristics lambda^n (u[0]^2-1) for the real roots of lambda^4 = lambda + 1."""
    out = []
    for i, lam in enumerate(translation_roots()):
        q = mul(power(num(float(lam)), N), sub(power(U(0), num(2)), num(1)))
        out.append(Characteristic(q, f"T{i + 1}"))
    return out


_CACHE: dict = {}


def catalog() -> dict[str, CatalogEntry]:
    if not _CACHE:
        for entry in (_e1(), _e2(), _e3()):
            _CACHE[entry.name] = entry
    return _CACHE


def get(name: str) -> CatalogEntry:
    return catalog()[name]


def resolve_expr(entry: CatalogEntry | None, text: str, kind: str) -> tuple[Expr, str]:
    """Catalog label (X11, phi2, ...) or a grammar string.

    Labels may also appear inside a grammar string, e.g. ``2*phi1+phi3``.
    """
    text = text.strip()
    if entry is None:
        return parse(text), text
    items = entry.symmetries if kind == "q" else entry.integrals
    table = {it.label: (it.Q if kind == "q" else it.phi) for it in items}
    if text in table:
        return table[text], text
    pattern = re.compile(r"\b(" + "|".join(map(re.escape, sorted(table, key=len, reverse=True))) + r")\b")
    return parse(pattern.sub(lambda m: f"({table[m.group(1)]})", text)), text


# ---------------------------------------------------------------------------


def _check(claim: str, ok: bool | None, details: dict, cfg: ZeroTestConfig, t0: float, residual: float = 0.0):
    verdict = "INCONCLUSIVE" if ok is None else ("PASS" if ok else "FAIL")
    return VerificationReport(
        claim=claim,
        verdict=verdict,
        max_residual=residual,
        samples=cfg.samples,
        seed=cfg.seed,
        provenance="catalog",
        elapsed=time.perf_counter() - t0,
        details=details,
    )


def verify_entry(entry: CatalogEntry, cfg: ZeroTestConfig | None = None, discovery: bool = True) -> list[VerificationReport]:
    cfg = cfg or ZeroTestConfig()
    eq = entry.equation
    out = []
    for c in entry.symmetries:
        out.append(verify_symmetry(eq, c, cfg))
    for p in entry.integrals:
        out.append(verify_first_integral(eq, p, cfg))
        t0 = time.perf_counter()
        verdicts = [is_zero(r, cfg, eq.domain, width=eq.order).verdict for r in p_recursion_residuals(eq, p_components(p, eq.order))]
        out.append(_check(f"P-recursion holds for {p.label} on {eq.name}", all(v == "ZERO" for v in verdicts), {"residuals": verdicts}, cfg, t0))
    for p, K in zip(entry.integrals, entry.kernels):
        t0 = time.perf_counter()
        rep = is_zero(p3_determining_residual(eq, K), cfg, eq.domain, width=eq.order)
        out.append(_check(f"P3 = {K} solves the P3 determining equation of {eq.name}", rep.verdict == "ZERO", {}, cfg, t0, rep.max_residual))
        t0 = time.perf_counter()
        built = build_linear_integral(replace(entry.coefficients, K=K), cfg, eq.domain)
        resid = proportionality_residual(p.phi, built.phi, eq.domain, eq.order, cfg.seed)
        out.append(
            _check(f"K = {K} builds {p.label} of {eq.name}", resid <= 1e-6, {"built": str(built.phi), "projection": resid}, cfg, t0, resid)
        )
    for p, lam in zip(entry.integrals, entry.multipliers):
        out.append(verify_multiplier(eq, p, lam, cfg))
    if entry.associations:
        for c, row in zip(entry.symmetries, entry.associations):
            for p, want in zip(entry.integrals, row):
                t0 = time.perf_counter()
                av = association_value(c, p, eq.order, eq, cfg)
                target = p.phi if want == SAME else num(want)
                rep = is_zero(sub(av.expr, target), cfg, eq.domain, width=eq.order)
                out.append(
                    _check(
                        f"{c.label} {p.label} = {want}",
                        rep.verdict == "ZERO",
                        {"value": str(av)},
                        cfg,
                        t0,
                        rep.max_residual,
                    )
                )
    if len(entry.integrals) > 1:
        t0 = time.perf_counter()
        try:
            cl = classify_equivalence(entry.integrals, eq, cfg)
            ok = cl.rank == len(entry.integrals) and len(cl.groups) == len(entry.integrals)
            out.append(_check(f"{eq.name} integrals pairwise non-equivalent", ok, {"rank": cl.rank, "groups": cl.groups}, cfg, t0))
        except NotAMultiplier as exc:
            out.append(_check(f"{eq.name} integrals pairwise non-equivalent", False, {"error": str(exc)}, cfg, t0))
    if discovery and entry.symmetry_basis:
        t0 = time.perf_counter()
        res = find_symmetries_ansatz(eq, entry.symmetry_basis, cfg)
        ok = res.dimension == entry.expected_symmetry_dim and res.all_verified()
        out.append(_check(f"{eq.name} symmetry ansatz dimension {entry.expected_symmetry_dim}", ok, {"dimension": res.dimension}, cfg, t0))
    if discovery and entry.integral_basis:
        t0 = time.perf_counter()
        res = find_integrals_ansatz(eq, entry.integral_basis, cfg)
        ok = res.dimension == entry.expected_integral_dim and res.all_verified()
        out.append(_check(f"{eq.name} integral ansatz dimension {entry.expected_integral_dim}", ok, {"dimension": res.dimension}, cfg, t0))
    return out


def run_catalog(entries=None, cfg: ZeroTestConfig | None = None, discovery: bool = True) -> list[VerificationReport]:
    """Verify every catalogued claim; ``entries`` defaults to E1, E2, E3."""
    if entries is None:
        entries = list(catalog().values())
    out = []
    for entry in entries:
        out.extend(verify_entry(entry, cfg, discovery))
    return out


