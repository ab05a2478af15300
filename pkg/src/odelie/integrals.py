"""First integrals phi(n, u[0..N-1]) with S phi = phi on solutions."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from odelie.equations import DifferenceEquation, PreconditionViolated, close_onshell, random_orbits
from odelie.expr import (
    Expr,
    U,
    add,
    diff,
    free_indices,
    is_constant,
    max_index,
    mul,
    shift,
    shift_n,
    sub,
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
from odelie.symmetry import defect_matrix

ORBIT_STEPS = 1000
ORBIT_COUNT = 3
DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class FirstIntegral:
    phi: Expr
    label: str = ""


@dataclass(frozen=True)
class PComponents:
    """Partial derivatives P_k = d phi / d u[k]."""

    P: tuple

    def __getitem__(self, k):
        return self.P[k]

    def __len__(self):
        return len(self.P)

    def __iter__(self):
        return iter(self.P)


@dataclass(frozen=True)
class LinearCoefficients:
    """u[4] = a(n) u[0] + b(n) u[1] together with a candidate K(n)."""

    a: Expr
    b: Expr
    K: Expr

    def __post_init__(self):
        for name in ("a", "b", "K"):
            if free_indices(getattr(self, name)):
                raise ValueError(f"{name} must be a function of n only")


def _phi(phi) -> Expr:
    return phi.phi if isinstance(phi, FirstIntegral) else phi


def p_components(phi, N: int = 4) -> PComponents:
    phi = _phi(phi)
    return PComponents(tuple(diff(phi, k) for k in range(N)))


def _shift_onshell(e: Expr, eq: DifferenceEquation, k: int = 1) -> Expr:
    return close_onshell(shift(e, k), eq)


def p_recursion_residuals(eq: DifferenceEquation, pc: PComponents) -> list[Expr]:
    """P_0 - w_0 S P_last and P_k - (S P_{k-1} + w_k S P_last), closed on-shell."""
    N = eq.order
    if len(pc) != N:
        raise ValueError(f"need {N} P-components")
    w = eq.omega
    SP_last = _shift_onshell(pc[N - 1], eq)
    out = [close_onshell(sub(pc[0], mul(diff(w, 0), SP_last)), eq)]
    for k in range(1, N):
        rhs = add(_shift_onshell(pc[k - 1], eq), mul(diff(w, k), SP_last))
        out.append(close_onshell(sub(pc[k], rhs), eq))
    return out


def p3_determining_residual(eq: DifferenceEquation, P3: Expr, reduced: bool = False) -> Expr:
    """sum_k S^{N-1-k}(w_k) S^{N-k} P - P for the last P-component P.

    With ``reduced=True`` only the u[0] and u[1] terms are kept, which needs
    omega to be free of u[2], ..., u[N-1].
    """
    N = eq.order
    w = eq.omega
    ks = range(N)
    if reduced:
        extra = [k for k in free_indices(w) if k >= 2]
        if extra:
            raise PreconditionViolated(f"reduced form needs omega free of u[{extra[0]}]")
        ks = range(min(2, N))
    terms = []
    for k in ks:
        wk = diff(w, k)
        terms.append(mul(_shift_onshell(wk, eq, N - 1 - k), _shift_onshell(P3, eq, N - k)))
    return close_onshell(sub(add(*terms), P3), eq)


def integral_defect(eq: DifferenceEquation, phi) -> Expr:
    phi = _phi(phi)
    return sub(close_onshell(shift(phi, 1), eq), phi)


def orbit_drift(eq: DifferenceEquation, phi, seed: int, orbits: int = ORBIT_COUNT, steps: int = ORBIT_STEPS):
    """Largest relative change max_k |phi(k) - phi(0)| / (1 + |phi(0)|) over random orbits."""
    phi = _phi(phi)
    N = eq.order
    rng = np.random.default_rng(seed + 2)
    n0, vals = random_orbits(eq, orbits, steps, rng)
    K = steps + 1
    windows = np.lib.stride_tricks.sliding_window_view(vals, N, axis=1)[:, :K, :]
    nn = n0[:, None] + np.arange(K)[None, :]
    pv = evaluate_batch(phi, nn.ravel(), windows.reshape(-1, N)).reshape(orbits, K)
    if not np.all(np.isfinite(pv)):
        raise NonFinite("first integral not finite along orbit")
    drift = np.abs(pv - pv[:, :1]) / (1.0 + np.abs(pv[:, :1]))
    return float(drift.max())


def verify_first_integral(
    eq: DifferenceEquation, phi, cfg: ZeroTestConfig | None = None, *, orbits: bool = True
) -> VerificationReport:
    cfg = cfg or ZeroTestConfig()
    t0 = time.perf_counter()
    label = phi.label if isinstance(phi, FirstIntegral) and phi.label else str(_phi(phi))
    zr = is_zero(integral_defect(eq, phi), cfg, eq.domain, width=eq.order)
    details = {"integral": str(_phi(phi)), "defect": zr.verdict}
    orbit_ok = True
    if orbits:
        try:
            drift = orbit_drift(eq, phi, cfg.seed)
            details["orbitDrift"] = drift
            details["orbitSteps"] = ORBIT_STEPS
            orbit_ok = drift <= DRIFT_TOL
        except NonFinite as exc:
            details["orbitError"] = str(exc)
            orbit_ok = None
    if zr.verdict == "INCONCLUSIVE" or orbit_ok is None:
        verdict = "INCONCLUSIVE"
    elif zr.verdict == "ZERO" and orbit_ok:
        verdict = "PASS"
    else:
        verdict = "FAIL"
    return VerificationReport(
        claim=f"{label} is a first integral of {eq.name or eq.omega}",
        verdict=verdict,
        max_residual=zr.max_residual,
        mean_residual=zr.mean_residual,
        samples=zr.samples,
        finite=zr.finite,
        seed=cfg.seed,
        provenance="symbolic-onshell+orbit-numeric" if orbits else "symbolic-onshell",
        elapsed=time.perf_counter() - t0,
        details=details,
    )


def linear_K_residual(lc: LinearCoefficients) -> Expr:
    """K(n) - a(n+3) K(n+4) - b(n+2) K(n+3)."""
    a3 = shift_n(lc.a, 3)
    b2 = shift_n(lc.b, 2)
    return sub(lc.K, add(mul(a3, shift_n(lc.K, 4)), mul(b2, shift_n(lc.K, 3))))


def linear_equation(lc: LinearCoefficients, name: str = "", **kw) -> DifferenceEquation:
    return DifferenceEquation(order=4, omega=add(mul(lc.a, U(0)), mul(lc.b, U(1))), name=name, **kw)


def build_linear_integral(lc: LinearCoefficients, cfg: ZeroTestConfig | None = None, domain=None) -> FirstIntegral:
    """a(n)K(n+1) u[0] + K(n-2) u[1] + K(n-1) u[2] + K(n) u[3] (integration function set to 0)."""
    cfg = cfg or ZeroTestConfig()
    rep = is_zero(linear_K_residual(lc), cfg, domain)
    if rep.verdict != "ZERO":
        raise PreconditionViolated(f"K = {lc.K} does not satisfy the adjoint recursion ({rep.verdict})")
    K = lc.K
    phi = add(
        mul(lc.a, shift_n(K, 1), U(0)),
        mul(shift_n(K, -2), U(1)),
        mul(shift_n(K, -1), U(2)),
        mul(K, U(3)),
    )
    return FirstIntegral(phi, label=f"K={K}")


def find_integrals_ansatz(eq: DifferenceEquation, basis, cfg: ZeroTestConfig | None = None) -> NullspaceResult:
    """First integrals sum c_j*basis_j via the sampled nullspace of the integral defect.

    Constant basis functions are dropped first since they are trivially conserved.
    """
    cfg = cfg or ZeroTestConfig()
    basis = [_phi(b) for b in basis]
    basis = [b for b in basis if not is_constant(b)]
    if not basis:
        raise ValueError("basis must contain a non-constant function")
    for b in basis:
        if max_index(b) >= eq.order:
            raise ValueError(f"basis element involves u[{max_index(b)}]")
    vals, mags = defect_matrix(eq, basis, cfg, integral_defect, eq.order)
    vectors, s = sampled_nullspace(vals, mags, cfg.rank_tol)
    res = NullspaceResult(basis=basis, vectors=vectors, singular_values=s)
    res.reports = [verify_first_integral(eq, combine(basis, v), cfg) for v in vectors]
    return res


def basis_coordinates(target: Expr, basis, domain, width: int, seed: int, samples: int = 80) -> tuple[np.ndarray, float]:
    """Least-squares coordinates of ``target`` in ``basis`` from sampled values.

    Returns ``(coeffs, fit_residual)``; a large residual means the target is
    not in the linear span of the basis at all.
    """
    rng = np.random.default_rng(seed)
    ns, us = sample_arrays(domain, samples, width, rng)
    A = np.column_stack([evaluate_batch(b, ns, us) for b in basis])
    y = evaluate_batch(target, ns, us)
    c, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ c - y) / max(np.linalg.norm(y), 1e-300))
    return c, resid


def proportionality_residual(a: Expr, b: Expr, domain, width: int, seed: int, samples: int = 50) -> float:
    """min_c ||a - c b|| / ||a|| over sampled values (projection residual)."""
    c, resid = basis_coordinates(a, [b], domain, width, seed, samples)
    return resid
