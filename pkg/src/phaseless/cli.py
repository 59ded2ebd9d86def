"""Command-line front end.

    phaseless check-frame  --config cfg.json
    phaseless sample       --config cfg.json --out samples.csv
    phaseless reconstruct  --input samples.csv [--degree N] [--mode real]
    phaseless lattice-info --config cfg.json
    phaseless demo         [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 too few points, 4 ambiguous,
5 infeasible (including real-mode data that are not from a real signal).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field, replace
from math import pi
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FrameError, PhaselessError, RealityViolated, SizingError, ZeroAnchor
from .frames_c2 import (FIG1_FRAME, FrameC2, ambiguity_pair, canonicalize, cor15_frame,
                        does_phase_retrieval)
from .hermite_bargmann import HermiteSignal
from .lattices import (PointSet, ShiftedLattice, conjugate, decomposition_parameters, density,
                       enumerate_points, gamma_decompositions, perelomov_uniqueness,
                       separation_and_density_window, verify_decomposition)
from .reconstruction import (SampleSet, reconstruct, reconstruct_real, sample,
                             up_to_phase_error)

EXIT_OK, EXIT_CONFIG, EXIT_SIZING, EXIT_AMBIGUOUS, EXIT_INFEASIBLE = 0, 2, 3, 4, 5
STATUS_EXIT = {"unique": EXIT_OK, "zero_signal": EXIT_OK, "ambiguous": EXIT_AMBIGUOUS,
               "infeasible": EXIT_INFEASIBLE}


class ConfigError(PhaselessError):
    pass


# ---------------------------------------------------------------- presets

LATTICE_PRESETS = {
    # (0, 1/4) + (1/2) Z^2, density 4
    "fig2-lattice": ShiftedLattice((0.0, 0.25), [[0.5, 0.0], [0.0, 0.5]]),
    # Gamma_2 of the decomposition with alpha = beta = 1/2, density 2
    "fig2-gamma": gamma_decompositions(0.5, 0.5)[2],
    "half-integer": ShiftedLattice((0.0, 0.0), [[0.5, 0.0], [0.0, 0.5]]),
}

_COR15 = re.compile(r"^cor15\((.*)\)$")


def parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex pair must have two entries: {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"not a complex number: {value!r}") from exc
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ConfigError(f"not a complex number: {value!r}")


def parse_frame(spec) -> FrameC2:
    if isinstance(spec, str):
        if spec == "fig1-frame":
            return FrameC2(FIG1_FRAME)
        m = _COR15.match(spec.replace(" ", ""))
        if m:
            parts = m.group(1).split(",")
            if len(parts) != 3:
                raise ConfigError("cor15 preset takes three numbers")
            return cor15_frame(*(parse_complex(p) for p in parts))
        raise ConfigError(f"unknown frame preset {spec!r}")
    if not isinstance(spec, list) or not spec:
        raise ConfigError("frame must be a preset name or a list of (lambda, mu) pairs")
    rows = []
    for p in spec:
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ConfigError(f"frame entry must be a (lambda, mu) pair: {p!r}")
        rows.append((parse_complex(p[0]), parse_complex(p[1])))
    return FrameC2(rows)


def parse_lattice(spec) -> ShiftedLattice:
    if isinstance(spec, str):
        if spec not in LATTICE_PRESETS:
            raise ConfigError(f"unknown lattice preset {spec!r}")
        return LATTICE_PRESETS[spec]
    try:
        return ShiftedLattice.from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid lattice: {exc}") from exc


def complex_pair(c: complex) -> list:
    return [float(c.real), float(c.imag)]


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    frame: FrameC2 = field(default_factory=lambda: FrameC2(FIG1_FRAME))
    lattice: ShiftedLattice = field(default_factory=lambda: LATTICE_PRESETS["half-integer"])
    window_radius: float = 3.0
    degree_bound: int = 8
    signal: Optional[HermiteSignal] = None
    signal_spec: dict = field(default_factory=dict)
    mode: str = "complex"
    tol: float = 1e-8

    @property
    def points(self) -> PointSet:
        return enumerate_points(self.lattice, self.window_radius)

    def effective_points(self) -> int:
        """Points the solver sees: the window, or the window plus its mirror in real mode."""
        pts = self.points
        if self.mode == "real":
            return len(pts.union(conjugate(pts)))
        return len(pts)

    def check_sizing(self):
        n = self.effective_points()
        need = 4 * self.degree_bound + 8
        if n <= need:
            raise SizingError(
                f"window radius {self.window_radius:g} gives {n} effective points; "
                f"degree {self.degree_bound} needs more than {need}")

    def density_warning(self) -> Optional[str]:
        d = density(self.lattice) * (2 if self.mode == "real" else 1)
        if d < 4 * (1 - 1e-12):
            what = "lattice" if self.mode == "complex" else "lattice united with its mirror image"
            return (f"density of the {what} is {d:.6g} < 4; "
                    f"uniqueness is not guaranteed")
        return None


def build_signal(spec, seed_override: Optional[int], mode: str) -> Optional[HermiteSignal]:
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError("signal must be an object with 'coeffs' or 'random'")
    if "coeffs" in spec:
        return HermiteSignal([parse_complex(c) for c in spec["coeffs"]])
    if "random" in spec:
        r = spec["random"] or {}
        seed = seed_override if seed_override is not None else int(r.get("seed", 0))
        real = bool(r.get("real", mode == "real"))
        return HermiteSignal.random(int(r.get("degree", 8)), np.random.default_rng(seed), real=real)
    raise ConfigError("signal must contain 'coeffs' or 'random'")


def load_config(path: Optional[str], args) -> ExperimentConfig:
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    cfg = ExperimentConfig()
    try:
        if "frame" in raw:
            cfg.frame = parse_frame(raw["frame"])
        if "lattice" in raw:
            cfg.lattice = parse_lattice(raw["lattice"])
        cfg.window_radius = float(raw.get("window_radius", cfg.window_radius))
        cfg.degree_bound = int(raw.get("degree_bound", cfg.degree_bound))
        cfg.mode = str(raw.get("mode", cfg.mode))
        tols = raw.get("tolerances", {}) or {}
        cfg.tol = float(tols.get("tol", cfg.tol))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    if getattr(args, "radius", None) is not None:
        cfg.window_radius = args.radius
    if getattr(args, "degree", None) is not None:
        cfg.degree_bound = args.degree
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if cfg.mode not in ("complex", "real"):
        raise ConfigError(f"mode must be 'complex' or 'real', not {cfg.mode!r}")
    if len(cfg.frame) < 4:
        raise ConfigError("frame needs at least four vectors")
    if cfg.window_radius <= 0 or cfg.degree_bound < 0:
        raise ConfigError("window_radius must be positive and degree_bound nonnegative")
    cfg.signal_spec = raw.get("signal") or {}
    cfg.signal = build_signal(raw.get("signal"), getattr(args, "seed", None), cfg.mode)
    return cfg


# ---------------------------------------------------------------- CSV

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_samples_csv(samples: SampleSet, meta: dict) -> str:
    buf = io.StringIO()
    buf.write("# phaseless samples\n")
    frame_json = [[complex_pair(v) for v in row] for row in samples.frame.vectors]
    buf.write("# frame: " + json.dumps(frame_json) + "\n")
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    m = samples.magnitudes.shape[1]
    writer.writerow(["x", "omega"] + [f"m_{k}" for k in range(m)])
    for (x, om), mags in zip(samples.points.points, samples.magnitudes):
        writer.writerow([_fmt(x), _fmt(om)] + [_fmt(v) for v in mags])
    return buf.getvalue()


def read_samples_csv(text: str) -> tuple[SampleSet, dict]:
    meta: dict = {}
    rows = []
    header = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, value = body.split(":", 1)
                try:
                    meta[key.strip()] = json.loads(value)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"bad metadata line {line!r}") from exc
            continue
        if header is None:
            header = next(csv.reader([line]))
            continue
        rows.append(next(csv.reader([line])))
    if "frame" not in meta:
        raise ConfigError("sample file lacks the '# frame:' metadata line")
    frame = FrameC2([[complex(*v) for v in row] for row in meta["frame"]])
    expected = ["x", "omega"] + [f"m_{k}" for k in range(len(frame))]
    if header != expected:
        raise ConfigError(f"CSV header {header} does not match {expected}")
    try:
        data = np.array(rows, dtype=float).reshape(-1, len(expected))
    except ValueError as exc:
        raise ConfigError(f"malformed CSV rows: {exc}") from exc
    radius = float(meta.get("window_radius", np.max(np.linalg.norm(data[:, :2], axis=1),
                                                     initial=0.0)))
    points = PointSet(data[:, :2], radius)
    return SampleSet(frame, points, data[:, 2:], meta), meta


# ---------------------------------------------------------------- commands

def _emit(obj, out: Optional[str], stream=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    (stream or sys.stdout).write(text)


def frame_report(frame: FrameC2) -> dict:
    report: dict = {"frame": [[complex_pair(v) for v in row] for row in frame.vectors]}
    try:
        decision = does_phase_retrieval(frame)
    except ZeroAnchor as exc:
        report.update(does_phase_retrieval=False, reason=str(exc))
        decision = None
    if decision is not None:
        canon = canonicalize(frame)
        report.update(
            does_phase_retrieval=decision.yes,
            reason=decision.reason,
            betas=[None if np.isnan(b) else complex_pair(b) for b in canon.betas],
            mus=[complex_pair(m) for m in canon.mus],
            triangle_area_ratio=float(decision.area_ratio),
        )
    if not report["does_phase_retrieval"]:
        z, w = ambiguity_pair(frame)
        report["ambiguity_pair"] = {
            "z": [complex_pair(c) for c in z], "w": [complex_pair(c) for c in w],
            "magnitudes_z": frame.magnitudes(z).tolist(),
            "magnitudes_w": frame.magnitudes(w).tolist(),
        }
    return report


def cmd_check_frame(args) -> int:
    cfg = load_config(args.config, args)
    _emit(frame_report(cfg.frame), args.out)
    return EXIT_OK


def _sample_meta(cfg: ExperimentConfig) -> dict:
    meta = {
        "mode": cfg.mode,
        "lattice": cfg.lattice.to_dict(),
        "window_radius": cfg.window_radius,
        "degree_bound": cfg.degree_bound,
        "density": density(cfg.lattice),
    }
    warning = cfg.density_warning()
    if warning:
        meta["warning"] = warning
    return meta


def make_samples(cfg: ExperimentConfig) -> SampleSet:
    if cfg.signal is None:
        raise ConfigError("config has no signal to sample")
    cfg.check_sizing()
    return sample(cfg.signal, cfg.frame, cfg.points, _sample_meta(cfg))


def cmd_sample(args) -> int:
    cfg = load_config(args.config, args)
    samples = make_samples(cfg)
    text = write_samples_csv(samples, samples.meta)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if "warning" in samples.meta:
        print(f"warning: {samples.meta['warning']}", file=sys.stderr)
    return EXIT_OK


def run_reconstruction(samples: SampleSet, degree: int, mode: str, tol: float,
                       reference: Optional[HermiteSignal] = None) -> tuple[dict, int]:
    n_eff = len(samples) if mode == "complex" else len(samples.points.union(
        conjugate(samples.points)))
    if n_eff <= 4 * degree + 8:
        raise SizingError(f"{n_eff} effective points are too few for degree {degree} "
                          f"(need more than {4 * degree + 8})")
    solver = reconstruct if mode == "complex" else reconstruct_real
    report = solver(samples, degree, tol)
    out = report.to_dict()
    out["mode"] = mode
    out["degree_bound"] = degree
    out["points"] = len(samples)
    if reference is not None and report.recovered is not None:
        out["reference_error"] = up_to_phase_error(reference, report.recovered)
    return out, STATUS_EXIT[report.status]


def cmd_reconstruct(args) -> int:
    if args.input:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.input}: {exc}") from exc
        samples, meta = read_samples_csv(text)
        cfg = load_config(args.config, args) if args.config else None
        degree = args.degree if args.degree is not None else int(
            meta.get("degree_bound", cfg.degree_bound if cfg else 8))
        mode = args.mode or meta.get("mode", cfg.mode if cfg else "complex")
        tol = args.tol if args.tol is not None else (cfg.tol if cfg else 1e-8)
        reference = cfg.signal if cfg else None
    else:
        cfg = load_config(args.config, args)
        samples = make_samples(cfg)
        degree, mode, tol, reference = cfg.degree_bound, cfg.mode, cfg.tol, cfg.signal
    out, code = run_reconstruction(samples, degree, mode, tol, reference)
    _emit(out, args.out)
    return code


def lattice_report(lattice: ShiftedLattice, radius: float = 10.0) -> dict:
    pts = enumerate_points(lattice, radius)
    out: dict = {
        "lattice": lattice.to_dict(),
        "density": density(lattice),
        "perelomov_uniqueness": {
            name: perelomov_uniqueness(lattice, a)
            for name, a in (("pi", pi), ("2pi", 2 * pi), ("4pi", 4 * pi))},
    }
    if len(pts) >= 2:
        gap, est = separation_and_density_window(pts)
        out["window"] = {"radius": radius, "points": len(pts), "min_gap": gap,
                         "density_estimate": est}
    params = decomposition_parameters(lattice)
    if params is not None:
        lam, g1, g2 = gamma_decompositions(*params)
        out["decomposition"] = {
            "alpha": params[0], "beta": params[1],
            "gamma_1": {"lattice": g1.to_dict(), "density": density(g1),
                        **verify_decomposition(lam, g1, radius)},
            "gamma_2": {"lattice": g2.to_dict(), "density": density(g2),
                        **verify_decomposition(lam, g2, radius)},
        }
    else:
        out["decomposition"] = None
    return out


def cmd_lattice_info(args) -> int:
    cfg = load_config(args.config, args)
    radius = args.radius if args.radius is not None else 10.0
    _emit(lattice_report(cfg.lattice, radius), args.out)
    return EXIT_OK


def demo_configs(seed: int) -> dict:
    base = ExperimentConfig(degree_bound=8, window_radius=3.0)
    rng_signal = {"random": {"degree": 8, "seed": seed}}
    complex_cfg = replace(base, lattice=LATTICE_PRESETS["half-integer"], signal_spec=rng_signal,
                          signal=build_signal(rng_signal, None, "complex"))
    real_spec = {"random": {"degree": 8, "seed": seed, "real": True}}
    real_cfg = replace(base, lattice=LATTICE_PRESETS["fig2-gamma"], mode="real",
                       signal_spec=real_spec, signal=build_signal(real_spec, None, "real"))
    return {"complex": complex_cfg, "real": real_cfg}


def cmd_demo(args) -> int:
    seed = args.seed if args.seed is not None else 0
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "fig1_frame": frame_report(FrameC2(FIG1_FRAME)),
        "collinear_frame": frame_report(cor15_frame(1, 2, 3)),
        "fig2_lattice": lattice_report(LATTICE_PRESETS["fig2-lattice"], 10.0),
    }
    code = EXIT_OK
    for name, cfg in demo_configs(seed).items():
        samples = make_samples(cfg)
        result, rc = run_reconstruction(samples, cfg.degree_bound, cfg.mode, cfg.tol, cfg.signal)
        summary[f"reconstruct_{name}"] = result
        code = max(code, rc)
        if out_dir:
            (out_dir / f"samples_{name}.csv").write_text(write_samples_csv(samples, samples.meta))
    _emit(summary, str(out_dir / "demo.json") if out_dir else None)
    return code


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseless", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="seed for random signals")
    common.add_argument("--out", help="output file (directory for demo)")
    common.add_argument("--mode", choices=("complex", "real"))
    common.add_argument("--radius", type=float, help="window radius")
    common.add_argument("--degree", type=int, help="degree bound N")
    common.add_argument("--tol", type=float, help="solver tolerance")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check-frame", parents=[common]).set_defaults(func=cmd_check_frame)
    sub.add_parser("sample", parents=[common]).set_defaults(func=cmd_sample)
    rec = sub.add_parser("reconstruct", parents=[common])
    rec.add_argument("--input", help="sample CSV written by 'sample'")
    rec.set_defaults(func=cmd_reconstruct)
    sub.add_parser("lattice-info", parents=[common]).set_defaults(func=cmd_lattice_info)
    sub.add_parser("demo", parents=[common]).set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FrameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizingError as exc:
        print(f"sizing: {exc}", file=sys.stderr)
        return EXIT_SIZING
    except RealityViolated as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
