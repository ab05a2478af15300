"""Lie point symmetries Q(n, u[0]) of difference equations.

A characteristic Q generates u -> u + eps*Q; it is a symmetry when the
linearized condition S^N Q - X omega = 0 holds on solutions, where
X = sum_k S^k Q d/du[k] is the prolonged generator.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from odelie.equations import DifferenceEquation, PreconditionViolated, close_onshell, random_orbits, iterate_orbits
from odelie.expr import (
    Expr,
    U,
    add,
    diff,
    div,
    free_indices,
    max_index,
    mul,
    shift,
    sub,
    substitute_many,
)
from odelie.nullspace import NullspaceResult, combine, sampled_nullspace
from odelie.numeric import (
    NonFinite,
    VerificationReport,
    ZeroTestConfig,
    evaluate_batch,
    is_zero,
    sample_arrays,
)

FLOW_EPSILONS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class Characteristic:
    Q: Expr
    label: str = ""
    # sl(3) characteristics of second-order equations also depend on u[1]
    generalized: bool = False

    def __post_init__(self):
        if not self.generalized and max_index(self.Q) > 0:
            raise ValueError(f"point characteristic may depend on n and u[0] only: {self.Q}")


def _q(Q) -> Expr:
    return Q.Q if isinstance(Q, Characteristic) else Q


def prolong(Q, N: int) -> list[Expr]:
    """[Q, SQ, ..., S^{N-1} Q]."""
    Q = _q(Q)
    return [shift(Q, k) for k in range(N)]


def apply_generator(Q, F: Expr, N: int) -> Expr:
    """X F = sum_k S^k Q * dF/du[k]."""
    Q = _q(Q)
    return add(*(mul(shift(Q, k), diff(F, k)) for k in range(N) if k in free_indices(F)))


def symmetry_defect(eq: DifferenceEquation, Q) -> Expr:
    Q = _q(Q)
    N = eq.order
    # close the whole difference: for generalized Q the prolongation reaches u[N] too
    return close_onshell(sub(shift(Q, N), apply_generator(Q, eq.omega, N)), eq)


def flow_test(eq: DifferenceEquation, Q, cfg: ZeroTestConfig | None = None, orbits: int = 3) -> dict:
    """Transport u -> u + eps*Q along random orbits.

    The initial data are perturbed by eps*Q (Q scaled to max |Q| = 1 along
    the orbits) and re-iterated; for a symmetry the
    perturbed orbit stays within O(eps^2) of u_k + eps*Q(n+k, u_k).  Returns the
    deviations per eps and a ``passed`` flag: every deviation must stay below
    ten times the eps^2-extrapolation of the largest-eps deviation (or the
    rounding floor).
    """
    cfg = cfg or ZeroTestConfig()
    Q = _q(Q)
    N = eq.order
    w = max(max_index(Q) + 1, 1)
    steps = N + w
    rng = np.random.default_rng(cfg.seed + 1)
    n0, base = random_orbits(eq, orbits, steps, rng)
    L = base.shape[1] - (w - 1)
    windows = np.lib.stride_tricks.sliding_window_view(base, w, axis=1)[:, :L, :]
    nn = n0[:, None] + np.arange(L)[None, :]
    qv = evaluate_batch(Q, nn.ravel(), windows.reshape(-1, w)).reshape(orbits, L)
    if not np.all(np.isfinite(qv)):
        return {"passed": None, "reason": "characteristic not finite along orbit"}
    # eps must be small relative to Q itself (Q may carry large factors like lambda^n)
    qmax = np.max(np.abs(qv))
    if qmax > 0:
        qv = qv / qmax
    floor = 1e-11 * (1.0 + np.max(np.abs(base)) + np.max(np.abs(qv)))
    devs = []
    for eps in FLOW_EPSILONS:
        try:
            pert = iterate_orbits(eq, base[:, :N] + eps * qv[:, :N], n0, steps)
        except NonFinite:
            return {"passed": None, "reason": "perturbed orbit left the domain"}
        devs.append(float(np.max(np.abs(pert[:, :L] - base[:, :L] - eps * qv))))
    e0, d0 = FLOW_EPSILONS[0], devs[0]
    ok = all(d <= max(10.0 * d0 * (e / e0) ** 2, floor) for e, d in zip(FLOW_EPSILONS, devs))
    ratios = [d / e**2 for e, d in zip(FLOW_EPSILONS, devs)]
    return {"passed": bool(ok), "epsilons": list(FLOW_EPSILONS), "deviations": devs, "ratios": ratios, "floor": floor}


def verify_symmetry(eq: DifferenceEquation, Q, cfg: ZeroTestConfig | None = None, *, flow: bool = True) -> VerificationReport:
    cfg = cfg or ZeroTestConfig()
    t0 = time.perf_counter()
    q = _q(Q)
    label = Q.label if isinstance(Q, Characteristic) and Q.label else str(q)
    zr = is_zero(symmetry_defect(eq, q), cfg, eq.domain, width=eq.order)
    details = {"characteristic": str(q), "defect": zr.verdict, "maxScaledResidual": zr.details.get("maxScaledResidual")}
    flow_ok = True
    if flow:
        fr = flow_test(eq, q, cfg)
        details["flow"] = fr
        flow_ok = fr["passed"]
    if zr.verdict == "INCONCLUSIVE" or flow_ok is None:
        verdict = "INCONCLUSIVE"
    elif zr.verdict == "ZERO" and flow_ok:
        verdict = "PASS"
    else:
        verdict = "FAIL"
    return VerificationReport(
        claim=f"{label} is a symmetry of {eq.name or eq.omega}",
        verdict=verdict,
        max_residual=zr.max_residual,
        mean_residual=zr.mean_residual,
        samples=zr.samples,
        finite=zr.finite,
        seed=cfg.seed,
        provenance="symbolic-onshell+orbit-numeric" if flow else "symbolic-onshell",
        elapsed=time.perf_counter() - t0,
        details=details,
    )


def deteq_residual(eq: DifferenceEquation, Q) -> Expr:
    """Determining equation for omega = omega(n, u[0], u[1]).

    Differentiating X omega = Q(n+N, omega) along a level set of omega (u[1]
    viewed as a function of u[0]) eliminates the left side; multiplied through
    by d(omega)/du[1] this reads

        w1*[(w0*Q)' + w01*SQ] - w0*[w01*Q + (w1*SQ)^.] = 0

    with ' = d/du[0], ^. = d/du[1].  The cleared form stays defined when w1 = 0.
    """
    Q = _q(Q)
    w = eq.omega
    extra = [k for k in free_indices(w) if k >= 2]
    if extra:
        raise PreconditionViolated(f"omega depends on u[{extra[0]}]; determining equation needs omega(n,u[0],u[1])")
    w0 = diff(w, 0)
    w1 = diff(w, 1)
    w01 = diff(w0, 1)
    SQ = shift(Q, 1)
    left = mul(w1, add(diff(mul(w0, Q), 0), mul(w01, SQ)))
    right = mul(w0, add(mul(w01, Q), diff(mul(w1, SQ), 1)))
    return sub(left, right)


def defect_matrix(eq: DifferenceEquation, exprs, cfg: ZeroTestConfig, residual, width: int):
    """Sample ``residual(eq, e)`` for each e at common random points."""
    rng = np.random.default_rng(cfg.seed)
    ns, us = sample_arrays(eq.domain, cfg.samples, width, rng)
    vals = np.empty((cfg.samples, len(exprs)))
    mags = np.empty_like(vals)
    for j, e in enumerate(exprs):
        vals[:, j], mags[:, j] = evaluate_batch(residual(eq, e), ns, us, with_magnitude=True)
    return vals, mags


def find_symmetries_ansatz(eq: DifferenceEquation, basis, cfg: ZeroTestConfig | None = None) -> NullspaceResult:
    """Characteristics sum c_j*basis_j with constant c_j, via the sampled defect nullspace."""
    cfg = cfg or ZeroTestConfig()
    basis = [_q(b) for b in basis]
    if not basis:
        raise ValueError("basis must be nonempty")
    for b in basis:
        if max_index(b) > 0:
            raise ValueError(f"basis element depends on u[k], k > 0: {b}")
    vals, mags = defect_matrix(eq, basis, cfg, symmetry_defect, eq.order)
    vectors, s = sampled_nullspace(vals, mags, cfg.rank_tol)
    res = NullspaceResult(basis=basis, vectors=vectors, singular_values=s)
    res.reports = [verify_symmetry(eq, combine(basis, v), cfg) for v in vectors]
    return res


# ---------------------------------------------------------------------------
# second-order linear equations: eight sl(3) characteristics


@dataclass(frozen=True)
class SL3Basis:
    U1: Expr
    U2: Expr
    phi1: Expr
    phi2: Expr
    wronskian: Expr


def _is_solution(eq: DifferenceEquation, Un: Expr, cfg: ZeroTestConfig) -> bool:
    sols = {U(k): shift(Un, k) for k in range(eq.order)}
    resid = sub(shift(Un, eq.order), substitute_many(eq.omega, sols))
    return is_zero(resid, cfg, eq.domain).verdict == "ZERO"


def sl3_basis(U1: Expr, U2: Expr, eq: DifferenceEquation, cfg: ZeroTestConfig | None = None) -> SL3Basis:
    cfg = cfg or ZeroTestConfig()
    if eq.order != 2:
        raise PreconditionViolated("sl(3) characteristics need a second-order equation")
    for name, Ui in (("U1", U1), ("U2", U2)):
        if free_indices(Ui):
            raise PreconditionViolated(f"{name} must be a function of n only")
        if not _is_solution(eq, Ui, cfg):
            raise PreconditionViolated(f"{name} = {Ui} does not solve {eq.omega}")
    SU1, SU2 = shift(U1, 1), shift(U2, 1)
    W = sub(mul(U1, SU2), mul(U2, SU1))
    if is_zero(W, cfg, eq.domain).verdict != "NONZERO":
        raise PreconditionViolated("U1, U2 are not independent (vanishing denominator)")
    u0, u1 = U(0), U(1)
    phi1 = div(sub(mul(u0, SU2), mul(U2, u1)), W)
    phi2 = div(sub(mul(u1, U1), mul(u0, SU1)), W)
    return SL3Basis(U1=U1, U2=U2, phi1=phi1, phi2=phi2, wronskian=W)


def sl3_characteristics(U1: Expr, U2: Expr, eq: DifferenceEquation, cfg: ZeroTestConfig | None = None):
    """Q1..Q8 for u[2] = a(n) u[0] + b(n) u[1] from two independent solutions.

    Returns ``(characteristics, reports)``; each report is the zero test of the
    second-order linearized symmetry condition.
    """
    cfg = cfg or ZeroTestConfig()
    B = sl3_basis(U1, U2, eq, cfg)
    p1, p2, u0 = B.phi1, B.phi2, U(0)
    qs = [
        U1,
        U2,
        mul(p1, U1),
        mul(p2, U1),
        mul(p1, U2),
        mul(p2, U2),
        mul(p1, u0),
        mul(p2, u0),
    ]
    chars = [Characteristic(q, f"Q{i + 1}", generalized=True) for i, q in enumerate(qs)]
    reports = [is_zero(symmetry_defect(eq, c), cfg, eq.domain, claim=f"{c.label} symmetry condition", width=2) for c in chars]
    return chars, reports

