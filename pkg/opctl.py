#!/usr/bin/env python3
"""
Command-line front door for opspectra

Every experiment is a subcommand. Each one prints (or writes) a JSON document
{experiment, config, results, verdict, tolerances} and, in CSV mode, writes
its tables under the output directory. Exit codes: 0 pass, 1 numerical
failure, 2 rejected input or failed verdict.
"""

import argparse
import asyncio
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, is_dataclass, asdict
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import aiofiles
import aiofiles.os
import numpy as np

import bernstein
import ccr
import finitevn
import quanta
import spectral
import waveline
from config import (
    OUTPUT_PATH, CSV_DIGITS, DEFAULT_SEED, SEED_ENV_VAR, DEFAULT_DRAWS, LOG_LEVEL, LOG_FORMAT, HBAR
)
from numkernel import (
    RejectedInputError, NumericalFailure, SingularityError, commutator, trace, operator_norm,
    frobenius_norm, random_cmat, random_hermitian
)

logger = logging.getLogger(__name__)

Table = Tuple[List[str], List[Sequence]]


@dataclass
class Experiment:
    """Outcome of one subcommand."""
    name: str
    config: Dict
    results: Dict
    passed: bool
    tolerances: Dict
    tables: Dict[str, Table] = field(default_factory=dict)

    def document(self) -> Dict:
        return {
            "experiment": self.name,
            "config": self.config,
            "results": self.results,
            "verdict": "pass" if self.passed else "fail",
            "tolerances": self.tolerances,
        }


def jsonable(value):
    """Convert results into plain JSON types (complex as {re, im})."""
    if is_dataclass(value) and not isinstance(value, type):
        return jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": jsonable(float(value.real)), "im": jsonable(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{CSV_DIGITS}g")
    return str(value)


def render_csv(header: List[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def render_json(experiment: Experiment) -> str:
    return json.dumps(jsonable(experiment.document()), sort_keys=True, indent=2) + "\n"


async def write_atomic(path: str, text: str):
    """Write text to path through a temporary file and an atomic rename."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    temporary = f"{path}.tmp"
    async with aiofiles.open(temporary, "w", encoding="utf-8", newline="") as f:
        await f.write(text)
    await aiofiles.os.replace(temporary, path)


async def write_artifacts(files: Dict[str, str]):
    await asyncio.gather(*(write_atomic(path, text) for path, text in files.items()))


def resolve_seed(seed: Optional[int]) -> int:
    """--seed, then $OPSPECTRA_SEED, then the configured default."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise RejectedInputError(f"{SEED_ENV_VAR} must be an integer, got '{env}'")
    return DEFAULT_SEED


def make_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent Philox streams split from one seed."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


def _draws(args, default: int = DEFAULT_DRAWS) -> int:
    return default if args.draws is None else args.draws


# Old quantum theory

def cmd_balmer(args, seed: int) -> Experiment:
    tol_r = _tol(args, 0.05)
    lines = quanta.balmer_series(args.k, args.l_max)
    r = quanta.rydberg()
    rows = [(line.k, line.l, line.wave_number,
             line.rounded() if args.paper_compat else line.wavelength_angstrom) for line in lines]
    increasing = all(a.wave_number < b.wave_number for a, b in zip(lines, lines[1:]))
    golden = {}
    if args.k == 2:
        for line in lines:
            if line.l in quanta.PRINTED_BALMER_ANGSTROM:
                golden[str(line.l)] = abs(line.wavelength_angstrom - quanta.PRINTED_BALMER_ANGSTROM[line.l]) <= 1.0
    passed = abs(r - quanta.PRINTED_RYDBERG) <= tol_r and increasing and all(golden.values())
    logger.info(f"🔭 Rydberg {r:.4f}/cm, {len(lines)} lines")
    return Experiment(
        name="balmer",
        config={"k": args.k, "l_max": args.l_max, "paper_compat": args.paper_compat},
        results={
            "rydberg_per_cm": r,
            "lines": [{"k": k, "l": l, "wave_number_per_cm": w, "wavelength_angstrom": a} for k, l, w, a in rows],
            "observed_angstrom": list(quanta.OBSERVED_BALMER_ANGSTROM),
            "golden_within_1_angstrom": golden,
            "wave_numbers_increasing": increasing,
        },
        passed=passed,
        tolerances={"rydberg_per_cm": tol_r, "wavelength_angstrom": 1.0},
        tables={"balmer": (["k", "l", "wave_number_per_cm", "wavelength_angstrom"], rows)},
    )


def cmd_planck(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-6)
    t = args.temperature
    peak = quanta.planck_peak_wavelength(t)
    lam = np.geomspace(peak.wavelength / 20.0, peak.wavelength * 2000.0, args.points)
    planck = quanta.planck_density(lam, t)
    rj = quanta.rayleigh_jeans_density(lam, t)
    k = quanta.DEFAULT_CONSTANTS
    x = k.h * k.c / (k.k_B * lam * t)
    classical = x < 0.02
    ratio_gap = float(np.max(np.abs(planck[classical] / rj[classical] - 1.0))) if np.any(classical) else 0.0
    dominated = bool(np.all(planck <= rj * (1.0 + 1e-12)))
    lambda_min = peak.wavelength
    r = 100.0 * peak.wavelength
    closed = quanta.uv_catastrophe_integral(lambda_min, r, t)
    quadrature = quanta.uv_catastrophe_quadrature(lambda_min, r, t)
    quad_gap = abs(quadrature - closed) / closed
    halving = quanta.uv_catastrophe_integral(lambda_min / 2.0, r, t) / closed
    passed = peak.unimodal and ratio_gap <= 0.01 and dominated and quad_gap <= tol
    return Experiment(
        name="planck",
        config={"temperature": t, "points": args.points},
        results={
            "peak_wavelength_cm": peak.wavelength,
            "unimodal": peak.unimodal,
            "classical_ratio_gap": ratio_gap,
            "planck_below_rayleigh_jeans": dominated,
            "uv_integral_closed_form": closed,
            "uv_integral_quadrature": quadrature,
            "uv_quadrature_relative_gap": quad_gap,
            "uv_halving_growth": halving,
        },
        passed=passed,
        tolerances={"classical_ratio": 0.01, "quadrature_relative": tol},
        tables={"planck": (["wavelength_cm", "planck", "rayleigh_jeans"], list(zip(lam, planck, rj)))},
    )


def cmd_debroglie(args, seed: int) -> Experiment:
    tol = _tol(args, 0.0005)
    k = quanta.DEFAULT_CONSTANTS
    v = k.c * args.speed_fraction
    lam = quanta.de_broglie_wavelength(k.m_e, v) * quanta.ANGSTROM_PER_CM
    halved = quanta.de_broglie_wavelength(k.m_e, 2.0 * v) * quanta.ANGSTROM_PER_CM
    passed = math.isclose(halved, lam / 2.0, rel_tol=1e-12)
    if math.isclose(args.speed_fraction, 1.0 / 3.0):
        passed = passed and abs(lam - quanta.PRINTED_DE_BROGLIE_ANGSTROM) <= tol
    return Experiment(
        name="debroglie",
        config={"speed_fraction": args.speed_fraction},
        results={"wavelength_angstrom": lam, "wavelength_at_double_speed_angstrom": halved},
        passed=passed,
        tolerances={"wavelength_angstrom": tol},
    )


def cmd_bohr(args, seed: int) -> Experiment:
    orbits = [quanta.bohr_orbit(k) for k in range(1, args.k_max + 1)]
    h = quanta.DEFAULT_CONSTANTS.h
    m = quanta.DEFAULT_CONSTANTS.m_e
    first = orbits[0]
    radius_law = max(abs(o.radius / first.radius - o.k ** 2) for o in orbits)
    energy_law = max(abs(o.energy * o.k ** 2 / first.energy - 1.0) for o in orbits)
    standing_wave = max(abs(2 * math.pi * o.radius - o.k * h / (m * o.speed)) / o.radius for o in orbits)
    passed = radius_law <= 1e-9 and energy_law <= 1e-12 and standing_wave <= 1e-12
    rows = [(o.k, o.radius, o.energy, o.speed) for o in orbits]
    return Experiment(
        name="bohr",
        config={"k_max": args.k_max},
        results={
            "orbits": [asdict(o) for o in orbits],
            "radius_k_squared_gap": radius_law,
            "energy_k_squared_gap": energy_law,
            "standing_wave_gap": standing_wave,
        },
        passed=passed,
        tolerances={"scaling": 1e-9},
        tables={"bohr": (["k", "radius_cm", "energy_erg", "speed_cm_per_sec"], rows)},
    )


# Bounded obstructions

def cmd_ccr_obstruction(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args)
    rows = []
    for n, rng in zip(args.sizes, make_streams(seed, len(args.sizes))):
        worst = 0.0
        for _ in range(draws):
            a = random_cmat(rng, n)
            b = random_cmat(rng, n)
            ratio = abs(trace(commutator(a, b))) / (n * operator_norm(a) * operator_norm(b))
            worst = max(worst, ratio)
        rows.append((n, draws, worst))
        logger.info(f"✅ n={n}: largest |tr[A,B]| / (n ||A|| ||B||) = {worst:.3e}")
    hbar = ccr.physical_hbar() if args.physical_units else HBAR
    pair = ccr.truncated_canonical_pair(args.n, hbar)
    example = ccr.trace_obstruction(pair.q, pair.p, hbar)
    return Experiment(
        name="ccr-obstruction",
        config={"sizes": args.sizes, "draws": draws, "seed": seed, "n": args.n, "hbar": hbar},
        results={
            "per_size": [{"n": n, "draws": d, "max_trace_ratio": w} for n, d, w in rows],
            "oscillator_example": example.as_dict(),
        },
        passed=all(w <= tol for _, _, w in rows),
        tolerances={"trace_ratio": tol},
        tables={"ccr-obstruction": (["n", "draws", "max_trace_ratio"], rows)},
    )


def cmd_spectrum_symmetry(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args)
    rows = []
    for n, rng in zip(args.sizes, make_streams(seed, len(args.sizes))):
        worst = 0.0
        worst_roots = 0.0
        for _ in range(draws):
            report = ccr.spectrum_symmetry_check(random_cmat(rng, n), random_cmat(rng, n), tol=tol)
            worst = max(worst, report.max_coeff_gap)
            if report.root_gap is not None:
                worst_roots = max(worst_roots, report.root_gap)
        rows.append((n, draws, worst, worst_roots))
    return Experiment(
        name="spectrum-symmetry",
        config={"sizes": args.sizes, "draws": draws, "seed": seed},
        results={"per_size": [{"n": n, "draws": d, "max_coeff_gap": g, "max_root_gap": r} for n, d, g, r in rows]},
        passed=all(g <= tol for _, _, g, _ in rows),
        tolerances={"coefficient_gap": tol},
        tables={"spectrum-symmetry": (["n", "draws", "max_coeff_gap", "max_root_gap"], rows)},
    )


def cmd_wielandt(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args)
    rows = []
    for n, rng in zip(args.sizes, make_streams(seed, len(args.sizes))):
        worst = 0.0
        singular = 0
        for _ in range(draws):
            a = random_cmat(rng, n)
            b = random_cmat(rng, n)
            try:
                c = ccr.wielandt_inverse(a, b)
            except SingularityError:
                singular += 1
                continue
            res = ccr.wielandt_residuals(a, b, c)
            worst = max(worst, max(res.left, res.right) / res.condition)
        rows.append((n, draws, singular, worst))
    example = np.asarray(ccr.wielandt_inverse(np.diag([0.0, 0.5]), np.diag([0.0, 0.5])))
    return Experiment(
        name="wielandt",
        config={"sizes": args.sizes, "draws": draws, "seed": seed},
        results={
            "per_size": [{"n": n, "draws": d, "singular_skipped": s, "max_residual_over_condition": w}
                         for n, d, s, w in rows],
            "diagonal_example_inverse": np.real(np.diag(example)).tolist(),
        },
        passed=all(w <= tol for _, _, _, w in rows),
        tolerances={"residual_over_condition": tol},
        tables={"wielandt": (["n", "draws", "singular_skipped", "max_residual_over_condition"], rows)},
    )


def cmd_oscillator_truncation(args, seed: int) -> Experiment:
    hbar = args.hbar
    tol = _tol(args, 1e-12)
    rows = []
    for n in range(2, args.n_max + 1):
        pair = ccr.truncated_canonical_pair(n, hbar)
        c = np.asarray(commutator(pair.q, pair.p))
        defect = c - 1j * hbar * np.eye(n)
        corner = abs(defect[n - 1, n - 1] - (-1j * hbar * n))
        rest = defect.copy()
        rest[n - 1, n - 1] = 0.0
        elsewhere = float(np.max(np.abs(rest)))
        tr = abs(trace(c))
        rows.append((n, corner, elsewhere, tr))
    scale = max(hbar, 1e-300)
    passed = all(corner <= tol * scale * n and other <= tol * scale and tr <= tol * scale * n
                 for n, corner, other, tr in rows)
    return Experiment(
        name="oscillator-truncation",
        config={"n_max": args.n_max, "hbar": hbar},
        results={"rows": [{"n": n, "corner_gap": c, "max_elsewhere": e, "abs_trace": t} for n, c, e, t in rows]},
        passed=passed,
        tolerances={"entry": tol, "scaled_by": "hbar (times n for the corner and trace)"},
        tables={"oscillator-truncation": (["n", "corner_gap", "max_elsewhere", "abs_trace"], rows)},
    )


def cmd_truncation_identity(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-8)
    left, right = -math.pi, math.pi
    q = waveline.position_matrix(left, right, args.n)
    p = waveline.momentum_matrix(left, right, args.n, waveline.SPECTRAL)
    report = ccr.truncation_identity_check(p, q, args.cutoffs)
    passed = all(row.residual <= tol * report.scale and abs(row.truncated_trace) <= 1e-9 * report.scale
                 for row in report.rows)
    rows = [(r.cutoff, r.rank, r.residual, abs(r.truncated_trace)) for r in report.rows]
    return Experiment(
        name="truncation-identity",
        config={"n": args.n, "cutoffs": args.cutoffs, "interval": [left, right]},
        results={
            "scale": report.scale,
            "full_trace": report.full_trace,
            "rows": [{"cutoff": c, "rank": k, "residual": r, "abs_truncated_trace": t} for c, k, r, t in rows],
        },
        passed=passed,
        tolerances={"residual": tol, "truncated_trace": 1e-9, "scaled_by": "(||P|| + 1)(||A|| + 1)"},
        tables={"truncation-identity": (["cutoff", "rank", "residual", "abs_truncated_trace"], rows)},
    )


def cmd_preclosed_demo(args, seed: int) -> Experiment:
    rows = ccr.preclosed_failure_demo(args.m_max, args.dim)
    passed = all(r.residual == 0.0 and math.isclose(r.u_norm, 1.0 / r.m) for r in rows)
    return Experiment(
        name="preclosed-demo",
        config={"m_max": args.m_max, "dim": args.dim},
        results={"rows": [{"m": r.m, "u_norm": r.u_norm, "residual": r.residual, "coefficient": r.coefficient}
                          for r in rows]},
        passed=passed,
        tolerances={"residual": 0.0},
        tables={"preclosed-demo": (["m", "u_norm", "residual"], [(r.m, r.u_norm, r.residual) for r in rows])},
    )


# Grid experiments

def _gaussian(s):
    return np.exp(-s ** 2)


def _gaussian_prime(s):
    return -2.0 * s * np.exp(-s ** 2)


def _mode(name: str) -> str:
    return waveline.CENTRAL if name in ("central", waveline.CENTRAL) else waveline.SPECTRAL


def cmd_grid_heisenberg(args, seed: int) -> Experiment:
    mode = _mode(args.mode)
    if mode == waveline.SPECTRAL:
        tol = _tol(args, 1e-8)
        f = waveline.grid_function(_gaussian, args.left, args.right, args.n)
        residual = waveline.heisenberg_residual(f, mode)
        return Experiment(
            name="grid-heisenberg",
            config={"n": args.n, "mode": mode, "interval": [args.left, args.right]},
            results={"residual": residual},
            passed=residual <= tol,
            tolerances={"residual": tol},
        )
    tol = _tol(args, 0.1)
    sizes = [args.n, 2 * args.n, 4 * args.n]
    residuals = [waveline.heisenberg_residual(waveline.grid_function(_gaussian, args.left, args.right, n), mode)
                 for n in sizes]
    ratios = [a / b for a, b in zip(residuals, residuals[1:])]
    return Experiment(
        name="grid-heisenberg",
        config={"n": args.n, "mode": mode, "interval": [args.left, args.right]},
        results={"sizes": sizes, "residuals": residuals, "refinement_ratios": ratios},
        passed=all(abs(r - 4.0) <= 4.0 * tol for r in ratios),
        tolerances={"ratio_relative": tol},
        tables={"grid-heisenberg": (["n", "residual"], list(zip(sizes, residuals)))},
    )


def _step(s):
    return (s >= 0.0).astype(float)


def cmd_jump_profile(args, seed: int) -> Experiment:
    f = waveline.grid_function(_step, args.left, args.right, args.n_grid)
    rows = waveline.jump_blowup_profile(f, 0.0)
    passed = bool(rows) and all(r.holds for r in rows)
    table = [(r.n, r.t, r.squared_norm, r.bound, r.holds) for r in rows]
    return Experiment(
        name="jump-profile",
        config={"n_grid": args.n_grid, "interval": [args.left, args.right]},
        results={
            "rows_checked": len(rows),
            "min_margin": min((r.squared_norm - r.bound for r in rows), default=None),
            "first_rows": [asdict(r) for r in rows[:12]],
        },
        passed=passed,
        tolerances={"bound": "squared_norm >= n - 2 + 1/n"},
        tables={"jump-profile": (["n", "t", "squared_norm", "bound", "holds"], table)},
    )


DIAGNOSTIC_EXPECTATIONS = {"gaussian": "converging", "step": "blowing_up", "zero": "converging"}


def cmd_domain_diagnostic(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-3)
    functions = {"gaussian": _gaussian, "step": _step, "zero": lambda s: np.zeros_like(s)}
    f = waveline.grid_function(functions[args.function], args.left, args.right, args.n)
    g = waveline.grid_function(_gaussian_prime, args.left, args.right, args.n) if args.function == "gaussian" else None
    diagnostic = waveline.difference_quotient_diagnostic(f, g)
    passed = diagnostic.verdict == DIAGNOSTIC_EXPECTATIONS[args.function]
    if args.function == "gaussian":
        passed = passed and diagnostic.residuals[-1] <= tol
    rows = list(zip(diagnostic.t_samples, diagnostic.residuals, diagnostic.quotient_norms))
    return Experiment(
        name="domain-diagnostic",
        config={"function": args.function, "n": args.n, "interval": [args.left, args.right]},
        results={**asdict(diagnostic), "samples": f.to_dict()},
        passed=passed,
        tolerances={"final_residual": tol, "expected_verdict": DIAGNOSTIC_EXPECTATIONS[args.function]},
        tables={
            "domain-diagnostic": (["t", "residual", "quotient_norm"], rows),
            "domain-diagnostic-samples": (["s", "re", "im"], f.to_rows()),
        },
    )


def cmd_volterra(args, seed: int) -> Experiment:
    draws = _draws(args, 100)
    (rng,) = make_streams(seed, 1)
    h = 1.0 / args.n
    worst = 0.0
    for _ in range(draws):
        values = rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n)
        f = waveline.GridFunction(0.0, 1.0, values)
        worst = max(worst, waveline.volterra_apply(f).norm() / f.norm())
    one = waveline.grid_function(np.ones_like, 0.0, 1.0, args.n)
    ramp = waveline.grid_function(lambda s: 2.0 * s, 0.0, 1.0, args.n)
    constant_gap = float(np.max(np.abs(waveline.volterra_apply(one).values - one.points)))
    ramp_gap = float(np.max(np.abs(waveline.volterra_apply(ramp).values - ramp.points ** 2)))
    bound = 1.0 + 5.0 * h
    passed = worst <= bound and constant_gap <= 1e-12 and ramp_gap <= h * h
    return Experiment(
        name="volterra",
        config={"n": args.n, "draws": draws, "seed": seed},
        results={"max_norm_ratio": worst, "constant_gap": constant_gap, "ramp_gap": ramp_gap},
        passed=passed,
        tolerances={"norm_ratio": bound, "constant": 1e-12, "ramp": h * h},
    )


def _trig_polynomial(rng: np.random.Generator, n: int, harmonics: int) -> waveline.GridFunction:
    def fn(s):
        total = np.zeros_like(s, dtype=np.complex128)
        for m in range(1, harmonics + 1):
            a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            total += a * np.cos(2 * np.pi * m * s) + b * np.sin(2 * np.pi * m * s)
        return total
    return waveline.remove_mean(waveline.grid_function(fn, 0.0, 1.0, n))


def cmd_d3_skew(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-6)
    draws = _draws(args, 100)
    (rng,) = make_streams(seed, 1)
    worst = 0.0
    for _ in range(draws):
        f1 = _trig_polynomial(rng, args.n, args.harmonics)
        f2 = _trig_polynomial(rng, args.n, args.harmonics)
        a1, a2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        value = waveline.d3_skewness_check(f1, f2, a1, a2)
        scale = (f1.norm() + abs(a1)) * (f2.norm() + abs(a2))
        worst = max(worst, abs(value) / scale)
    return Experiment(
        name="d3-skew",
        config={"n": args.n, "draws": draws, "harmonics": args.harmonics, "seed": seed},
        results={"max_scaled_skewness": worst},
        passed=worst <= tol,
        tolerances={"scaled_skewness": tol},
    )


def cmd_averaging(args, seed: int) -> Experiment:
    tol = _tol(args, 0.1)
    functions = {"gaussian": (_gaussian, -10.0, 10.0), "step": (_step, -1.0, 1.0),
                 "constant": (np.ones_like, -1.0, 1.0)}
    fn, left, right = functions[args.function]
    f = waveline.grid_function(fn, left, right, args.n)
    steps = [256, 128, 64, 32, 16]
    ts = [k * f.h for k in steps]
    residuals = waveline.averaging_convergence(f, ts)
    if args.function == "constant":
        passed = max(residuals) <= 1e-12
    elif args.function == "step":
        passed = all(abs(r / math.sqrt(t / 3.0) - 1.0) <= tol for r, t in zip(residuals, ts))
    else:
        passed = all(b < a for a, b in zip(residuals, residuals[1:]))
    return Experiment(
        name="averaging",
        config={"function": args.function, "n": args.n, "interval": [left, right]},
        results={"t": ts, "residuals": residuals, "sqrt_t_over_3": [math.sqrt(t / 3.0) for t in ts]},
        passed=passed,
        tolerances={"step_relative": tol, "constant": 1e-12},
        tables={"averaging": (["t", "residual"], list(zip(ts, residuals)))},
    )


# Bernstein

BERNSTEIN_FUNCTIONS: Dict[str, Tuple[Callable, Callable]] = {
    "square": (lambda x: x ** 2, lambda x: 2.0 * x),
    "cube": (lambda x: x ** 3, lambda x: 3.0 * x ** 2),
    "sine": (lambda x: np.sin(np.pi * x) / np.pi, lambda x: np.cos(np.pi * x)),
}


def cmd_bernstein_approx(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-10)
    f, fprime = BERNSTEIN_FUNCTIONS[args.function]
    rows = [(n,) + bernstein.uniform_error(f, fprime, n) for n in args.n_values]
    decreasing = all(b[1] < a[1] and b[2] < a[2] for a, b in zip(rows, rows[1:]))
    passed = decreasing
    if args.function == "square":
        passed = passed and all(abs(err - 1.0 / (4 * n)) <= tol for n, err, _ in rows)
    model = bernstein.BernsteinModel.from_function(f, args.n_values[-1])
    table = bernstein.approximant_table(model, f, fprime, np.linspace(0.0, 1.0, 101))
    return Experiment(
        name="bernstein-approx",
        config={"function": args.function, "n_values": args.n_values},
        results={
            "rows": [{"n": n, "sup_err": e, "sup_deriv_err": d} for n, e, d in rows],
            "strictly_decreasing": decreasing,
        },
        passed=passed,
        tolerances={"quarter_n_gap": tol},
        tables={
            "bernstein-approx": (["n", "sup_err", "sup_deriv_err"], rows),
            "bernstein-approximant": (["x", "f", "Bn", "f_prime", "Bn_prime"], table),
        },
    )


def cmd_bernstein_identities(args, seed: int) -> Experiment:
    results = {}
    rows = []
    passed = True
    for n in args.n:
        report = bernstein.moment_identities_check(n, args.x)
        results[str(n)] = report
        for name, entry in report.items():
            rows.append((n, name, entry["max_gap"], entry["passed"]))
            passed = passed and entry["passed"]
    return Experiment(
        name="bernstein-identities",
        config={"n": args.n, "x": args.x},
        results=results,
        passed=passed,
        tolerances={"max_gap": "1e-10 * n"},
        tables={"bernstein-identities": (["n", "identity", "max_gap", "passed"], rows)},
    )


# Spectral theory

def cmd_spectral_decompose(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args, 10)
    rows = []
    for n, rng in zip(args.sizes, make_streams(seed, len(args.sizes))):
        worst = {"reconstruction": 0.0, "i": 0.0, "ii": 0.0, "iv": 0.0, "v": 0.0}
        for _ in range(draws):
            a = random_hermitian(rng, n)
            eig = spectral.hermitian_eigen(a)
            scale = max(operator_norm(a), 1e-300)
            worst["reconstruction"] = max(worst["reconstruction"],
                                          frobenius_norm(np.asarray(eig.reconstruct()) - a) / scale)
            for key, gap in spectral.resolution_report(a).items():
                worst[key] = max(worst[key], gap)
        rows.append((n, draws, worst))
    return Experiment(
        name="spectral-decompose",
        config={"sizes": args.sizes, "draws": draws, "seed": seed},
        results={"per_size": [dict(n=n, draws=d, **w) for n, d, w in rows]},
        passed=all(v <= tol for _, _, w in rows for v in w.values()),
        tolerances={"all_gaps": tol},
        tables={"spectral-decompose": (["n", "draws", "reconstruction", "i", "ii", "iv", "v"],
                                       [(n, d, w["reconstruction"], w["i"], w["ii"], w["iv"], w["v"])
                                        for n, d, w in rows])},
    )


def _random_rank_deficient(rng: np.random.Generator, n: int) -> np.ndarray:
    rank = int(rng.integers(1, n + 1))
    mask = np.zeros(n)
    mask[rng.permutation(n)[:rank]] = 1.0
    return np.asarray(random_cmat(rng, n)) * mask


def cmd_polar(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args, 20)
    rows = []
    for n, rng in zip(args.sizes, make_streams(seed, len(args.sizes))):
        worst_polar = 0.0
        worst_rn = 0.0
        for _ in range(draws):
            t = _random_rank_deficient(rng, n)
            worst_polar = max(worst_polar, max(spectral.polar_report(t).values()))
            worst_rn = max(worst_rn, max(spectral.rn_identity_gaps(t).values()))
        rows.append((n, draws, worst_polar, worst_rn))
    return Experiment(
        name="polar",
        config={"sizes": args.sizes, "draws": draws, "seed": seed},
        results={"per_size": [{"n": n, "draws": d, "max_polar_gap": p, "max_range_null_gap": r}
                              for n, d, p, r in rows]},
        passed=all(p <= tol and r <= tol for _, _, p, r in rows),
        tolerances={"polar": tol, "range_null": tol},
        tables={"polar": (["n", "draws", "max_polar_gap", "max_range_null_gap"], rows)},
    )


# Finite von Neumann algebras

def cmd_vn_lattice(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-8)
    draws = _draws(args)
    algebra = finitevn.BlockAlgebra(tuple(args.blocks))
    (rng,) = make_streams(seed, 1)
    worst_gap = 0.0
    worst_witness = 0.0
    dominated = True
    for _ in range(draws):
        e = algebra.random_projection(rng)
        f = algebra.random_projection(rng)
        worst_gap = max(worst_gap, finitevn.lattice_dimension_gap(e, f))
        ranks = [int(round(d.real * n)) for d, n in zip(finitevn.dimension_function(e).scalars, algebra.block_dims)]
        twin = algebra.random_projection(rng, ranks)
        v = finitevn.equivalence_witness(e, twin)
        w = finitevn.complement_equivalence(e, twin)
        one = algebra.identity()
        worst_witness = max(worst_witness, *finitevn.witness_residuals(v, e, twin),
                            *finitevn.witness_residuals(w, one - e, one - twin))
        report = finitevn.domain_pullback_projection(algebra.random_element(rng), e)
        dominated = dominated and report.dominated
    passed = worst_gap <= tol and worst_witness <= 1e-9 and dominated
    return Experiment(
        name="vn-lattice",
        config={"blocks": args.blocks, "draws": draws, "seed": seed},
        results={"max_dimension_gap": worst_gap, "max_witness_residual": worst_witness,
                 "pullback_dominated": dominated},
        passed=passed,
        tolerances={"dimension_gap": tol, "witness": 1e-9},
    )


def cmd_vn_trace(args, seed: int) -> Experiment:
    tol = _tol(args, 1e-9)
    draws = _draws(args)
    algebra = finitevn.BlockAlgebra(tuple(args.blocks))
    (rng,) = make_streams(seed, 1)
    worst_commutator = 0.0
    worst_normal = 0.0
    worst_cyclic = 0.0
    separated = True
    for _ in range(draws):
        p = algebra.random_hermitian(rng)
        q = algebra.random_hermitian(rng)
        report = finitevn.commutator_center_report(p, q, 1.0)
        worst_commutator = max(worst_commutator, report["center_trace_max"])
        separated = separated and report["holds"]
        a = algebra.random_element(rng)
        worst_normal = max(worst_normal, finitevn.center_valued_trace(a.adjoint() @ a - a @ a.adjoint()).max_abs())
        worst_cyclic = max(worst_cyclic, (finitevn.center_valued_trace(p @ a)
                                          - finitevn.center_valued_trace(a @ p)).max_abs())
    passed = worst_commutator <= tol and worst_normal <= 1e-10 and worst_cyclic <= tol and separated
    return Experiment(
        name="vn-trace",
        config={"blocks": args.blocks, "draws": draws, "seed": seed},
        results={"max_center_trace_commutator": worst_commutator, "max_center_trace_self_commutator": worst_normal,
                 "max_cyclicity_gap": worst_cyclic, "commutator_never_scalar": separated},
        passed=passed,
        tolerances={"commutator": tol, "self_commutator": 1e-10},
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help=f'Seed for random suites (fallback ${SEED_ENV_VAR})')
    common.add_argument('--out', '-o', default=None, help='JSON file, or CSV directory (default stdout / ./out)')
    common.add_argument('--format', '-f', choices=['json', 'csv'], default='json', help='Output format')
    common.add_argument('--paper-compat', '--whole-angstroms', dest='paper_compat', action='store_true',
                        help='Round wavelengths to whole angstroms, as in the printed table')
    common.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')
    common.add_argument('--draws', type=int, default=None, help='Random draws per size')
    common.add_argument('--tol', type=float, default=None, help='Override the experiment tolerance')

    parser = argparse.ArgumentParser(prog='opspectra', description='Operator-theory numerics workbench')
    sub = parser.add_subparsers(dest='command', metavar='<experiment>')
    sub.required = True

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add('balmer', cmd_balmer, 'Rydberg constant and Balmer wavelengths')
    p.add_argument('--k', type=int, default=2)
    p.add_argument('--l-max', type=int, default=7)
    p = add('planck', cmd_planck, 'Planck vs Rayleigh-Jeans and the ultraviolet catastrophe')
    p.add_argument('--temperature', type=float, default=5000.0)
    p.add_argument('--points', type=int, default=200)
    p = add('debroglie', cmd_debroglie, 'de Broglie wavelength of an electron')
    p.add_argument('--speed-fraction', type=float, default=1.0 / 3.0, help='Speed as a fraction of c')
    p = add('bohr', cmd_bohr, 'Bohr orbit radii, energies and speeds')
    p.add_argument('--k-max', type=int, default=5)

    p = add('ccr-obstruction', cmd_ccr_obstruction, 'Trace obstruction on random pairs')
    p.add_argument('--sizes', type=_int_list, default=[2, 4, 8, 16])
    p.add_argument('--n', type=int, default=4, help='Oscillator example size')
    p.add_argument('--physical-units', action='store_true',
                   help='Oscillator example with hbar = h/2pi in erg*sec')
    p = add('spectrum-symmetry', cmd_spectrum_symmetry, 'char_poly(AB) = char_poly(BA)')
    p.add_argument('--sizes', type=_int_list, default=[2, 4, 8, 16])
    p = add('wielandt', cmd_wielandt, 'Inverse of I - BA from the inverse of I - AB')
    p.add_argument('--sizes', type=_int_list, default=[2, 4, 8, 16])
    p = add('oscillator-truncation', cmd_oscillator_truncation, 'Commutator defect of truncated Q, P')
    p.add_argument('--n-max', type=int, default=64)
    p.add_argument('--hbar', type=float, default=HBAR)
    p = add('truncation-identity', cmd_truncation_identity, 'Spectral truncation of the grid momentum')
    p.add_argument('--n', type=int, default=64)
    p.add_argument('--cutoffs', type=_float_list, default=[5.0, 10.0, 20.0])
    p = add('preclosed-demo', cmd_preclosed_demo, 'A product that is not preclosed')
    p.add_argument('--m-max', type=int, default=10)
    p.add_argument('--dim', type=int, default=20)

    p = add('grid-heisenberg', cmd_grid_heisenberg, 'Heisenberg residual of the grid Q, P')
    p.add_argument('--n', type=int, default=128)
    p.add_argument('--mode', choices=['central', waveline.CENTRAL, waveline.SPECTRAL], default='central')
    p.add_argument('--left', type=float, default=-10.0)
    p.add_argument('--right', type=float, default=10.0)
    p = add('jump-profile', cmd_jump_profile, 'Difference-quotient blow-up at a jump')
    p.add_argument('--n-grid', type=int, default=4096)
    p.add_argument('--left', type=float, default=-2.0)
    p.add_argument('--right', type=float, default=2.0)
    p = add('domain-diagnostic', cmd_domain_diagnostic, 'Is f in the domain of the generator?')
    p.add_argument('--function', choices=sorted(DIAGNOSTIC_EXPECTATIONS), default='gaussian')
    p.add_argument('--n', type=int, default=1024)
    p.add_argument('--left', type=float, default=-10.0)
    p.add_argument('--right', type=float, default=10.0)
    p = add('volterra', cmd_volterra, 'Volterra operator norm and exactness')
    p.add_argument('--n', type=int, default=512)
    p = add('d3-skew', cmd_d3_skew, 'Skew-adjointness of D3 on trigonometric draws')
    p.add_argument('--n', type=int, default=512)
    p.add_argument('--harmonics', type=int, default=5)
    p = add('averaging', cmd_averaging, 'Convergence of the averaging operators')
    p.add_argument('--function', choices=['gaussian', 'step', 'constant'], default='step')
    p.add_argument('--n', type=int, default=2048)

    p = add('bernstein-approx', cmd_bernstein_approx, 'Uniform errors of B_n(f) and B_n\'(f)')
    p.add_argument('--function', choices=sorted(BERNSTEIN_FUNCTIONS), default='cube')
    p.add_argument('--n-values', type=_int_list, default=[10, 20, 40, 80, 160, 320])
    p = add('bernstein-identities', cmd_bernstein_identities, 'Bernstein moment identities')
    p.add_argument('--n', type=_int_list, default=[5, 10, 50, 200])
    p.add_argument('--x', type=_float_list, default=list(np.linspace(0.0, 1.0, 21)))

    p = add('spectral-decompose', cmd_spectral_decompose, 'Spectral resolutions of random Hermitian matrices')
    p.add_argument('--sizes', type=_int_list, default=[2, 4, 8, 16, 32])
    p = add('polar', cmd_polar, 'Polar decomposition and range/null identities')
    p.add_argument('--sizes', type=_int_list, default=[2, 4, 8, 16])

    p = add('vn-lattice', cmd_vn_lattice, 'Projection lattice of a block algebra')
    p.add_argument('--blocks', type=_int_list, default=[2, 3, 4])
    p = add('vn-trace', cmd_vn_trace, 'Center-valued trace of commutators')
    p.add_argument('--blocks', type=_int_list, default=[2, 3, 4])
    return parser


def emit(experiment: Experiment, args) -> List[str]:
    """Write the experiment's artifacts; returns the paths written."""
    files = {}
    if args.format == 'csv':
        directory = args.out or OUTPUT_PATH
        for table, (header, rows) in experiment.tables.items():
            files[os.path.join(directory, f"{table}.csv")] = render_csv(header, rows)
        files[os.path.join(directory, f"{experiment.name}.json")] = render_json(experiment)
    elif args.out:
        files[args.out] = render_json(experiment)
    else:
        sys.stdout.write(render_json(experiment))
    if files:
        asyncio.run(write_artifacts(files))
        for path in sorted(files):
            logger.info(f"📁 Wrote {path}")
    return sorted(files)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one experiment and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        seed = resolve_seed(args.seed)
        logger.info(f"🚀 Running {args.command}")
        experiment = args.handler(args, seed)
        emit(experiment, args)
    except RejectedInputError as e:
        logger.error(f"❌ Rejected input: {e}", exc_info=args.verbose)
        return 2
    except NumericalFailure as e:
        logger.error(f"❌ Numerical failure: {e} {jsonable(e.diagnostics)}", exc_info=args.verbose)
        return 1

    if experiment.passed:
        logger.info(f"✅ {args.command}: pass")
        return 0
    logger.warning(f"⚠️  {args.command}: fail")
    return 2


def main():
    logging.basicConfig(level=getattr(logging, LOG_LEVEL), format=LOG_FORMAT)
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\n\n👋 Cancelled!", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
