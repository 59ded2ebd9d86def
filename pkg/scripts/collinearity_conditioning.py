"""Conditioning of the C^2 local solver as a frame approaches collinearity.

Uses the frame {(1,0), (1,1), (-1,1), (i eps, 1)}: its ratios 1, -1, i eps
become collinear as eps -> 0.  For each eps the relative triangle area and
the worst up-to-phase recovery error over random vectors are reported.

    python scripts/collinearity_conditioning.py > conditioning.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from phaseless.errors import PhaselessError
from phaseless.frames_c2 import cor15_frame, does_phase_retrieval, local_solve
from phaseless.stft_oracle import phase_distance


@dataclass
class ConditioningConfig:
    eps: list[float] = field(default_factory=lambda: [10.0 ** -k for k in range(0, 11)])
    trials: int = 200
    seed: int = 0
    noise: float = 0.0


def run(cfg: ConditioningConfig, out=sys.stdout):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["eps", "area_ratio", "decision", "max_error", "failures"])
    rng = np.random.default_rng(cfg.seed)
    for eps in cfg.eps:
        frame = cor15_frame(1, -1, 1j * eps)
        decision = does_phase_retrieval(frame)
        worst, failures = float("nan"), 0
        if decision:
            for _ in range(cfg.trials):
                z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                m = frame.magnitudes(z) * (1 + cfg.noise * rng.standard_normal(4))
                try:
                    zh = local_solve(frame, np.abs(m), tol=max(1e-9, 10 * cfg.noise)).vector
                except PhaselessError:
                    failures += 1
                    continue
                err = phase_distance(z, zh) / np.linalg.norm(z)
                worst = err if np.isnan(worst) else max(worst, err)
        writer.writerow([f"{eps:.0e}", f"{decision.area_ratio:.3e}", decision.yes,
                         f"{worst:.3e}", failures])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="relative magnitude noise")
    a = p.parse_args(argv)
    run(ConditioningConfig(trials=a.trials, seed=a.seed, noise=a.noise))


if __name__ == "__main__":
    main()
