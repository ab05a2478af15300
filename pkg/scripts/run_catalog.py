"""Verify every catalog claim and print one line per report."""

import argparse
import json
from dataclasses import dataclass

from odelie.catalog import get, run_catalog
from odelie.numeric import ZeroTestConfig


@dataclass
class Config:
    equations: tuple[str, ...] = ("E1", "E2", "E3")
    samples: int = 50
    tol: float = 1e-9
    seed: int = 0x5EED
    discovery: bool = True
    out: str | None = None


def main(cfg: Config) -> int:
    zt = ZeroTestConfig(samples=cfg.samples, tol=cfg.tol, seed=cfg.seed)
    reports = run_catalog([get(e) for e in cfg.equations], zt, discovery=cfg.discovery)
    for r in reports:
        print(f"{r.verdict:<12} {r.max_residual:10.3g}  {r.claim}")
    passed = sum(r.verdict == "PASS" for r in reports)
    print(f"{passed}/{len(reports)} passed")
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump([r.to_json() for r in reports], fh, indent=2)
    return 0 if passed == len(reports) else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eq", nargs="*", default=list(Config.equations))
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=lambda s: int(s, 0), default=Config.seed)
    ap.add_argument("--no-discovery", action="store_true")
    ap.add_argument("--out")
    a = ap.parse_args()
    raise SystemExit(main(Config(tuple(a.eq), a.samples, Config.tol, a.seed, not a.no_discovery, a.out)))
