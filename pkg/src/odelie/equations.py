"""Difference equations u[N] = omega(n, u[0..N-1]), orbits and on-shell closure."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from odelie.expr import Expr, U, diff, max_index, shift, substitute
from odelie.numeric import (
    DEFAULT_SEED,
    Domain,
    NonFinite,
    Point,
    ZeroTestConfig,
    evaluate_batch,
    is_zero,
    sample_arrays,
    sample_points,
)
from odelie.parser import parse
from odelie.printing import format_expr


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class DifferenceEquation:
    order: int
    omega: Expr
    name: str = ""
    domain: Domain = field(default_factory=Domain)
    # smallest admissible starting index for orbits (poles below it)
    n0_min: int | None = None

    def __post_init__(self):
        if self.order not in (2, 3, 4):
            raise ValueError(f"order must be 2, 3 or 4, got {self.order}")
        if max_index(self.omega) >= self.order:
            raise ValueError(f"omega may only involve u[0..{self.order - 1}]")
        rep = is_zero(diff(self.omega, 0), ZeroTestConfig(samples=20, min_finite=10), self.domain, width=self.order)
        if rep.verdict != "NONZERO":
            raise PreconditionViolated("omega must depend on u[0]")

    @classmethod
    def from_string(cls, omega: str, order: int, name: str = "", **kw) -> "DifferenceEquation":
        return cls(order=order, omega=parse(omega), name=name, **kw)

    def to_json(self) -> dict:
        d = {"name": self.name, "order": self.order, "omega": format_expr(self.omega), "domain": self.domain.to_json()}
        if self.n0_min is not None:
            d["n0Min"] = self.n0_min
        return d

    @classmethod
    def from_json(cls, d: dict) -> "DifferenceEquation":
        return cls(
            order=int(d["order"]),
            omega=parse(d["omega"]),
            name=d.get("name", ""),
            domain=Domain.from_json(d.get("domain", {})),
            n0_min=d.get("n0Min"),
        )

    @classmethod
    def load(cls, path: str | Path) -> "DifferenceEquation":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class Orbit:
    n0: int
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def close_onshell(e: Expr, eq: DifferenceEquation) -> Expr:
    """Eliminate every u[k] with k >= N using shifted copies of the equation."""
    N = eq.order
    k = max_index(e)
    while k >= N:
        e = substitute(e, U(k), shift(eq.omega, k - N))
        k = max_index(e)
    return e


def iterate_orbits(eq: DifferenceEquation, init, n0, steps: int) -> np.ndarray:
    """Iterate several orbits at once; ``init`` has shape (m, N), ``n0`` shape (m,)."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    init = np.atleast_2d(np.asarray(init, dtype=float))
    m, N = init.shape
    if N != eq.order:
        raise ValueError(f"need {eq.order} initial values, got {N}")
    n0 = np.broadcast_to(np.asarray(n0, dtype=float), (m,))
    vals = np.empty((m, N + steps))
    vals[:, :N] = init
    for k in range(steps):
        nxt = evaluate_batch(eq.omega, n0 + k, vals[:, k : k + N])
        if not np.all(np.isfinite(nxt)):
            raise NonFinite(f"non-finite value at step {k} (n = {n0[~np.isfinite(nxt)][0] + k:g})")
        vals[:, k + N] = nxt
    return vals


def iterate_orbit(eq: DifferenceEquation, init, n0: int = 0, steps: int = 0) -> Orbit:
    vals = iterate_orbits(eq, [list(init)], [n0], steps)
    return Orbit(n0=int(n0), values=vals[0])


def orbit_residual(eq: DifferenceEquation, orbit: Orbit) -> float:
    """max_k |v[k+N] - omega(v[k..k+N-1])| / (1 + |v[k+N]|)."""
    N = eq.order
    v = orbit.values
    K = len(v) - N
    if K <= 0:
        return 0.0
    windows = np.lib.stride_tricks.sliding_window_view(v, N)[:K]
    pred = evaluate_batch(eq.omega, orbit.n0 + np.arange(K, dtype=float), windows)
    return float(np.max(np.abs(v[N:] - pred) / (1.0 + np.abs(v[N:]))))


def sample_onshell(eq: DifferenceEquation, count: int, seed: int = DEFAULT_SEED) -> list[Point]:
    return sample_points(eq.domain, count, eq.order, seed)


def random_orbits(eq: DifferenceEquation, count: int, steps: int, rng: np.random.Generator):
    """Orbits started at random points of the equation's sampling domain."""
    n0, init = sample_arrays(eq.domain, count, eq.order, rng)
    return n0, iterate_orbits(eq, init, n0, steps)
