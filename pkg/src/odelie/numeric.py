"""Floating-point evaluation and probabilistic zero testing.

``evaluate_batch`` walks the tree once over numpy arrays of sample points and
returns, next to the value, a first-order bound on the accumulated rounding
error (in units of machine epsilon, ``magnitude``).  The zero test compares
each sampled value against ``tol * (1 + magnitude)`` so that large terms that
cancel exactly are not mistaken for a nonzero residual.
"""

from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from odelie.expr import Add, Div, Expr, Func, IndexN, Mul, Neg, Num, Pi, Pow, U, max_index

DEFAULT_SEED = 0x5EED


class NonFinite(ArithmeticError):
    """An evaluation produced inf or nan (pole, log of nonpositive, ...)."""


def default_seed() -> int:
    env = os.environ.get("ODELIE_SEED")
    if env:
        return int(env, 0)
    return DEFAULT_SEED


@dataclass(frozen=True)
class Domain:
    n_min: int = 5
    n_max: int = 60
    u_intervals: tuple = ((-0.9, -0.1), (0.1, 0.9))

    def to_json(self) -> dict:
        return {"nMin": self.n_min, "nMax": self.n_max, "uIntervals": [list(iv) for iv in self.u_intervals]}

    @classmethod
    def from_json(cls, d: dict) -> "Domain":
        return cls(
            n_min=int(d.get("nMin", 5)),
            n_max=int(d.get("nMax", 60)),
            u_intervals=tuple(tuple(float(x) for x in iv) for iv in d.get("uIntervals", cls.u_intervals)),
        )


@dataclass(frozen=True)
class Point:
    n: int
    u: tuple

    def __post_init__(self):
        if not all(np.isfinite(self.u)):
            raise ValueError("point coordinates must be finite")


@dataclass(frozen=True)
class ZeroTestConfig:
    samples: int = 50
    tol: float = 1e-9
    min_finite: int = 30
    seed: int = field(default_factory=default_seed)
    rank_tol: float = 1e-8

    def __post_init__(self):
        if self.samples < 1 or not 1 <= self.min_finite <= self.samples:
            raise ValueError(f"need 1 <= min_finite <= samples, got {self.min_finite} and {self.samples}")
        if not (self.tol > 0 and self.rank_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class VerificationReport:
    claim: str
    verdict: str
    max_residual: float = 0.0
    mean_residual: float = 0.0
    samples: int = 0
    finite: int = 0
    seed: int = DEFAULT_SEED
    provenance: str = "symbolic-onshell"
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in ("PASS", "ZERO")

    @property
    def is_zero(self) -> bool:
        return self.verdict == "ZERO"

    def to_json(self) -> dict:
        """Serialize to the report schema (zero-test verdicts map to PASS/FAIL)."""
        verdict = {"ZERO": "PASS", "NONZERO": "FAIL"}.get(self.verdict, self.verdict)
        details = dict(self.details)
        details.setdefault("provenance", self.provenance)
        details.setdefault("meanResidual", self.mean_residual)
        details.setdefault("finiteSamples", self.finite)
        details.setdefault("elapsed", self.elapsed)
        if self.verdict in ("ZERO", "NONZERO"):
            details.setdefault("zeroTest", self.verdict)
        return {
            "claim": self.claim,
            "verdict": verdict,
            "maxResidual": float(self.max_residual),
            "samples": int(self.samples),
            "seed": hex(self.seed),
            "details": _jsonable(details),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


# ---------------------------------------------------------------------------
# evaluation


def _ev(e: Expr, n, U_):
    if isinstance(e, Num):
        v = float(e.value)
        return v, abs(v)
    if isinstance(e, IndexN):
        return n, np.abs(n)
    if isinstance(e, Pi):
        return np.pi, np.pi
    if isinstance(e, U):
        if e.k >= U_.shape[-1]:
            raise IndexError(f"point does not cover u[{e.k}]")
        v = U_[..., e.k]
        return v, np.abs(v)
    if isinstance(e, Add):
        val, mag = _ev(e.args[0], n, U_)
        for a in e.args[1:]:
            v, m = _ev(a, n, U_)
            val = val + v
            mag = mag + m
        return val, mag
    if isinstance(e, Mul):
        val, mag = _ev(e.args[0], n, U_)
        for a in e.args[1:]:
            v, m = _ev(a, n, U_)
            val = val * v
            mag = mag * m
        return val, mag
    if isinstance(e, Neg):
        v, m = _ev(e.arg, n, U_)
        return -v, m
    if isinstance(e, Div):
        a, ma = _ev(e.num, n, U_)
        b, mb = _ev(e.den, n, U_)
        val = a / b
        ab = np.abs(b)
        return val, ma / ab + np.abs(val) * mb / ab
    if isinstance(e, Pow):
        b, mb = _ev(e.base, n, U_)
        x, mx = _ev(e.exp, n, U_)
        val = np.power(b, x)
        av = np.abs(val)
        ab = np.abs(b)
        rel_b = np.where(ab > 0, mb / np.where(ab > 0, ab, 1.0), 0.0)
        logb = np.log(np.where(ab > 0, ab, 1.0))
        return val, av * (1.0 + np.abs(x) * rel_b + np.abs(logb) * mx)
    if isinstance(e, Func):
        a, ma = _ev(e.arg, n, U_)
        name = e.name
        if name == "sin":
            val = np.sin(a)
            return val, np.abs(val) + np.abs(np.cos(a)) * ma
        if name == "cos":
            val = np.cos(a)
            return val, np.abs(val) + np.abs(np.sin(a)) * ma
        if name == "log":
            val = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
            return val, np.abs(val) + ma / np.abs(a)
        if name == "exp":
            val = np.exp(a)
            return val, np.abs(val) * (1.0 + ma)
        if name == "sqrt":
            val = np.where(a >= 0, np.sqrt(np.where(a >= 0, a, 0.0)), np.nan)
            return val, np.abs(val) + ma / (2.0 * val)
        if name == "abs":
            return np.abs(a), ma
    raise TypeError(f"cannot evaluate {e!r}")


def evaluate_batch(e: Expr, n, U_, with_magnitude: bool = False):
    """Evaluate over arrays: ``n`` shape (m,), ``U_`` shape (m, width)."""
    n = np.asarray(n, dtype=float)
    U_ = np.atleast_2d(np.asarray(U_, dtype=float))
    with np.errstate(all="ignore"):
        val, mag = _ev(e, n, U_)
        val = np.broadcast_to(np.asarray(val, dtype=float), n.shape).copy()
        mag = np.broadcast_to(np.asarray(mag, dtype=float), n.shape).copy()
    if with_magnitude:
        return val, mag
    return val


def evaluate(e: Expr, p: Point | None = None, *, n: int = 0, u: Sequence[float] = ()) -> float:
    """Scalar IEEE evaluation; raises NonFinite on inf/nan."""
    if p is not None:
        n, u = p.n, p.u
    width = max(len(u), max_index(e) + 1, 1)
    row = np.zeros((1, width))
    row[0, : len(u)] = u
    if max_index(e) >= len(u):
        raise IndexError(f"point does not cover u[{max_index(e)}]")
    val = evaluate_batch(e, np.array([n], dtype=float), row)[0]
    if not np.isfinite(val):
        raise NonFinite(f"non-finite value {val} at n={n}, u={tuple(u)}")
    return float(val)


# ---------------------------------------------------------------------------
# sampling


def sample_arrays(domain: Domain, count: int, width: int, rng: np.random.Generator):
    """Draw ``count`` points: n uniform on integers, u uniform on the interval union."""
    ns = rng.integers(domain.n_min, domain.n_max + 1, size=count).astype(float)
    ivs = np.asarray(domain.u_intervals, dtype=float)
    lengths = ivs[:, 1] - ivs[:, 0]
    which = rng.choice(len(ivs), size=(count, width), p=lengths / lengths.sum())
    frac = rng.random((count, width))
    us = ivs[which, 0] + frac * lengths[which]
    return ns, us


def sample_points(domain: Domain, count: int, width: int, seed: int = DEFAULT_SEED) -> list[Point]:
    rng = np.random.default_rng(seed)
    ns, us = sample_arrays(domain, count, width, rng)
    return [Point(int(a), tuple(float(x) for x in row)) for a, row in zip(ns, us)]


# ---------------------------------------------------------------------------
# zero test


def zero_test_values(values, mags, tol: float):
    finite = np.isfinite(values) & np.isfinite(mags)
    scaled = np.abs(values[finite]) / (1.0 + mags[finite])
    return finite, scaled


def is_zero(
    e: Expr,
    cfg: ZeroTestConfig | None = None,
    domain: Domain | None = None,
    *,
    claim: str = "",
    width: int | None = None,
) -> VerificationReport:
    """Probabilistic identity test of ``e == 0`` on random points of ``domain``."""
    cfg = cfg or ZeroTestConfig()
    domain = domain or Domain()
    t0 = time.perf_counter()
    width = max(width or 0, max_index(e) + 1, 1)
    rng = np.random.default_rng(cfg.seed)
    ns, us = sample_arrays(domain, cfg.samples, width, rng)
    vals, mags = evaluate_batch(e, ns, us, with_magnitude=True)
    return _zero_report(vals, mags, cfg, claim or f"{e} == 0", t0)


def _zero_report(vals, mags, cfg: ZeroTestConfig, claim: str, t0: float, provenance="symbolic-onshell"):
    finite, scaled = zero_test_values(vals, mags, cfg.tol)
    nfin = int(finite.sum())
    absvals = np.abs(vals[finite])
    if nfin and scaled.max() > cfg.tol:
        verdict = "NONZERO"
    elif nfin < cfg.min_finite:
        verdict = "INCONCLUSIVE"
    else:
        verdict = "ZERO"
    return VerificationReport(
        claim=claim,
        verdict=verdict,
        max_residual=float(absvals.max()) if nfin else float("nan"),
        mean_residual=float(absvals.mean()) if nfin else float("nan"),
        samples=len(vals),
        finite=nfin,
        seed=cfg.seed,
        provenance=provenance,
        elapsed=time.perf_counter() - t0,
        details={"maxScaledResidual": float(scaled.max()) if nfin else None, "tol": cfg.tol},
    )


def report_asdict(r: VerificationReport) -> dict:
    return asdict(r)
