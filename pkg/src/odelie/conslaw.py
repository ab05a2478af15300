"""Multipliers, equivalence of first integrals, and symmetry/integral association.

A multiplier Lambda of a first integral phi satisfies, off-shell,

    phi(n+1, u[1], ..., u[N]) - phi(n, u[0], ..., u[N-1]) = Lambda * (u[N] - omega)

with u[N] a free variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fractions import Fraction

import numpy as np

from odelie.equations import DifferenceEquation
from odelie.expr import Expr, U, diff, mul, num, shift, sub
from odelie.integrals import FirstIntegral, integral_defect
from odelie.numeric import (
    VerificationReport,
    Domain,
    ZeroTestConfig,
    evaluate_batch,
    is_zero,
    sample_arrays,
)
from odelie.symmetry import apply_generator


class NotAMultiplier(ValueError):
    pass


@dataclass(frozen=True)
class Multiplier:
    lam: Expr
    for_integral: str = ""
    for_equation: str = ""


def _phi(phi) -> Expr:
    return phi.phi if isinstance(phi, FirstIntegral) else phi


def _label(phi) -> str:
    return phi.label if isinstance(phi, FirstIntegral) and phi.label else str(_phi(phi))


def offshell_difference(eq: DifferenceEquation, phi) -> Expr:
    """(S - id) phi with u[N] left free."""
    phi = _phi(phi)
    return sub(shift(phi, 1), phi)


def _quotient_values(eq, delta, ns, us):
    N = eq.order
    d = evaluate_batch(delta, ns, us)
    w = evaluate_batch(eq.omega, ns, us[:, :N])
    return d / (us[:, N] - w)


def extract_multiplier(eq: DifferenceEquation, phi, cfg: ZeroTestConfig | None = None) -> Multiplier:
    """Lambda = Delta(v) / (v - omega) for the free variable v = u[N].

    The symbolic form returned is dDelta/dv, which coincides with the quotient
    whenever the quotient is v-independent; independence is checked by
    evaluating the quotient at two v values per sample.
    """
    cfg = cfg or ZeroTestConfig()
    N = eq.order
    zr = is_zero(integral_defect(eq, phi), cfg, eq.domain, width=N)
    if zr.verdict != "ZERO":
        raise NotAMultiplier(f"{_label(phi)} is not a first integral ({zr.verdict})")
    delta = offshell_difference(eq, phi)
    lam = diff(delta, N)

    rng = np.random.default_rng(cfg.seed + 3)
    ns, us = sample_arrays(eq.domain, cfg.samples, N + 2, rng)
    us_a = us[:, : N + 1]
    us_b = np.concatenate([us[:, :N], us[:, N + 1 : N + 2]], axis=1)
    with np.errstate(all="ignore"):
        qa = _quotient_values(eq, delta, ns, us_a)
        qb = _quotient_values(eq, delta, ns, us_b)
        lv, lmag = evaluate_batch(lam, ns, us_a, with_magnitude=True)
    ok = np.isfinite(qa) & np.isfinite(qb) & np.isfinite(lv)
    if ok.sum() < cfg.min_finite:
        raise NotAMultiplier("too few finite samples to establish the multiplier")
    # quotients lose accuracy when v is close to omega; scale accordingly
    scale = 1.0 + np.abs(lv[ok]) + lmag[ok]
    spread = np.abs(qa[ok] - qb[ok]) / scale
    if spread.max() > 1e-6:
        raise NotAMultiplier(f"(S-id){_label(phi)} is not divisible by u[{N}] - omega (spread {spread.max():.3g})")
    mismatch = np.abs(qa[ok] - lv[ok]) / scale
    if mismatch.max() > 1e-6:
        raise NotAMultiplier(f"derivative and quotient disagree for {_label(phi)}")
    return Multiplier(lam=lam, for_integral=_label(phi), for_equation=eq.name)


def multiplier_identity(eq: DifferenceEquation, phi, lam: Expr) -> Expr:
    N = eq.order
    return sub(offshell_difference(eq, phi), mul(lam, sub(U(N), eq.omega)))


def verify_multiplier(eq: DifferenceEquation, phi, lam, cfg: ZeroTestConfig | None = None) -> VerificationReport:
    cfg = cfg or ZeroTestConfig()
    lam = lam.lam if isinstance(lam, Multiplier) else lam
    rep = is_zero(
        multiplier_identity(eq, phi, lam),
        cfg,
        eq.domain,
        claim=f"Lambda = {lam} is the multiplier of {_label(phi)}",
        width=eq.order + 1,
    )
    rep.verdict = {"ZERO": "PASS", "NONZERO": "FAIL"}.get(rep.verdict, rep.verdict)
    rep.provenance = "symbolic-offshell"
    return rep


# ---------------------------------------------------------------------------
# association X phi


@dataclass(frozen=True)
class AssociationValue:
    expr: Expr
    constant: float | None
    # X phi = phi identically
    same: bool = False

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def __str__(self):
        if self.constant is not None:
            return _nice(self.constant)
        if self.same:
            return "phi"
        return str(self.expr)


def _nice(c: float) -> str:
    f = Fraction(c).limit_denominator(1000)
    if abs(float(f) - c) <= 1e-9 * (1 + abs(c)):
        return str(f)
    return repr(c)


def association_value(Q, phi, N: int, eq: DifferenceEquation | None = None, cfg: ZeroTestConfig | None = None) -> AssociationValue:
    """X phi; reported as a constant c when X phi - c passes the zero test,
    or flagged ``same`` when X phi - phi does."""
    cfg = cfg or ZeroTestConfig()
    Q = Q.Q if hasattr(Q, "Q") else Q
    A = apply_generator(Q, _phi(phi), N)
    domain = eq.domain if eq is not None else None
    rng = np.random.default_rng(cfg.seed)
    ns, us = sample_arrays(domain or Domain(), 1, N, rng)
    c0 = float(evaluate_batch(A, ns, us)[0])
    if np.isfinite(c0) and is_zero(sub(A, num(c0)), cfg, domain, width=N).verdict == "ZERO":
        # snap to a tidy float when the sample is within rounding of 0
        return AssociationValue(A, 0.0 if abs(c0) < 1e-12 else c0)
    same = is_zero(sub(A, _phi(phi)), cfg, domain, width=N).verdict == "ZERO"
    return AssociationValue(A, None, same)


@dataclass
class AssociationTable:
    rows: list  # characteristic labels
    cols: list  # integral labels
    entries: list  # rows x cols AssociationValue

    def constants(self) -> list:
        return [[e.constant for e in row] for row in self.entries]

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "values": [[str(e) for e in row] for row in self.entries],
        }


def association_table(eq: DifferenceEquation, chars, integrals, cfg: ZeroTestConfig | None = None) -> AssociationTable:
    entries = [[association_value(c, p, eq.order, eq, cfg) for p in integrals] for c in chars]
    return AssociationTable(
        rows=[getattr(c, "label", str(c)) for c in chars],
        cols=[_label(p) for p in integrals],
        entries=entries,
    )


# ---------------------------------------------------------------------------
# equivalence classes via multipliers


@dataclass
class Classification:
    groups: list
    rank: int
    multipliers: list = field(default_factory=list)
    singular_values: list = field(default_factory=list)


def _rank(M: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    if M.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(M / np.sqrt(M.shape[0]), compute_uv=False)
    if s.max() == 0:
        return 0, s
    return int(np.sum(s > tol * s.max())), s


def classify_equivalence(integrals, eq: DifferenceEquation, cfg: ZeroTestConfig | None = None) -> Classification:
    """Group integrals whose multipliers are proportional over the constants."""
    cfg = cfg or ZeroTestConfig()
    mults = [extract_multiplier(eq, p, cfg) for p in integrals]
    rng = np.random.default_rng(cfg.seed + 4)
    ns, us = sample_arrays(eq.domain, cfg.samples, eq.order, rng)
    M = np.column_stack([evaluate_batch(m.lam, ns, us) for m in mults])
    M = M[np.all(np.isfinite(M), axis=1)]
    rank, s = _rank(M, cfg.rank_tol)

    labels = [_label(p) for p in integrals]
    parent = list(range(len(integrals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(integrals)):
        for j in range(i + 1, len(integrals)):
            r, _ = _rank(M[:, [i, j]], cfg.rank_tol)
            if r <= 1:
                parent[find(j)] = find(i)
    groups = {}
    for i in range(len(integrals)):
        groups.setdefault(find(i), []).append(labels[i])
    return Classification(groups=list(groups.values()), rank=rank, multipliers=mults, singular_values=s.tolist())
