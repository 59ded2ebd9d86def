"""Reconstruction statistics as the lattice density varies.

For each density d the lattice sqrt(1/d) Z^2 is windowed to hold more than
4N + 8 points, random degree-N signals are sampled with the "fig1-frame" preset, and
the status, nullspace gap and up-to-phase error are summarised as CSV.

    python scripts/density_sweep.py --degree 6 --trials 20 > sweep.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from phaseless.frames_c2 import FIG1_FRAME, FrameC2
from phaseless.hermite_bargmann import HermiteSignal
from phaseless.lattices import ShiftedLattice, enumerate_points, min_radius_for_count
from phaseless.reconstruction import reconstruct, sample, up_to_phase_error


@dataclass
class SweepConfig:
    densities: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    degree: int = 6
    trials: int = 20
    seed: int = 0


def run(cfg: SweepConfig, out=sys.stdout):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["density", "radius", "points", "unique", "median_gap", "max_error"])
    frame = FrameC2(FIG1_FRAME)
    rng = np.random.default_rng(cfg.seed)
    for d in cfg.densities:
        lattice = ShiftedLattice((0, 0), np.eye(2) / np.sqrt(d))
        radius = min_radius_for_count(lattice, 4 * cfg.degree + 8)
        points = enumerate_points(lattice, radius)
        gaps, errors, unique = [], [], 0
        for _ in range(cfg.trials):
            f = HermiteSignal.random(cfg.degree, rng)
            r = reconstruct(sample(f, frame, points), cfg.degree)
            gaps.append(r.nullspace_gap)
            if r.status == "unique":
                unique += 1
                errors.append(up_to_phase_error(f, r.recovered))
        writer.writerow([f"{d:g}", f"{radius:g}", len(points), unique,
                         f"{np.median(gaps):.3e}", f"{max(errors):.3e}" if errors else "nan"])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--densities", type=float, nargs="+")
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    cfg = SweepConfig(degree=a.degree, trials=a.trials, seed=a.seed)
    if a.densities:
        cfg.densities = a.densities
    run(cfg)


if __name__ == "__main__":
    main()
