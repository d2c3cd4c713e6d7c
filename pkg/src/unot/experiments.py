"""Experiment drivers behind the command-line interface.

Each runner takes an ExperimentConfig and returns an ExperimentResult with
plot-ready rows.  Every randomized quantity derives from the config seed,
so reruns with an identical config reproduce output files byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import (
    bloch_from_density,
    compensated_four_gate_map,
    density_from_bloch,
    misaligned_three_gate_map,
    simulate_full,
    stochastic_map_from_circuit,
)
from .evolve import (
    DeConfig,
    NoiseModel,
    apply_noise,
    gell_mann_basis,
    optimal_controls,
    run_feedback,
)
from .evolve import _control_stats_batch
from .fidelity import (
    DEVIATION_SLOPE,
    MAX_AVG_FIDELITY,
    one_qubit_stats,
    pair_covariance,
    region_membership,
    rotation_pair_second_moment,
    stochastic_map_stats,
    three_qubit_avg_fidelity,
)
from .oracle import (
    RNG_ALGORITHM,
    SeededSampler,
    bloch_map_from_three_qubit_unitary,
    mc_stats,
    sample_bloch,
    sample_gate,
    sample_ladder_circuit,
    sample_unitary,
)
from .rotation import OneQubitGate, rotation_from_gate, rotation_trace, unit_axis

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "EXPERIMENT_NAMES",
    "run_experiment",
    "write_rows",
    "write_config_echo",
]

EXPERIMENT_NAMES = ("verify", "tradeoff", "noise-sweep", "optimize", "recover", "compensate")

_DEFAULT_TRIALS = {
    "verify": 1000,
    "tradeoff": 1000,
    "noise-sweep": 1000,
    "optimize": 20,
    "recover": 20,
    "compensate": 1,
}
_DEFAULT_STRIDE = {"optimize": 20, "recover": 1}

_FORMATS = ("csv", "jsonl")


@dataclass
class ExperimentConfig:
    """Effective settings of one experiment run.

    `trials` and `stride` default per experiment when left as None; `eta`
    and `period` default to the experiment's own noise protocol.
    """

    name: str
    seed: int = 0
    trials: int | None = None
    samples: int = 100_000
    npop: int = 10
    dweight: float = 0.1
    cr: float = 0.03
    iters: int = 1000
    eta: float | None = None
    period: int | None = None
    out: str | None = None
    fmt: str = "csv"
    stride: int | None = None
    tol_scale: float = 1.0
    eta_grid: tuple[float, ...] | None = None
    alpha_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.name!r}")
        if self.fmt not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.fmt!r}")
        if self.trials is None:
            self.trials = _DEFAULT_TRIALS[self.name]
        if self.stride is None:
            self.stride = _DEFAULT_STRIDE.get(self.name, 1)
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        for label, value, low in (
            ("trials", self.trials, 1),
            ("samples", self.samples, 2),
            ("npop", self.npop, 4),
            ("iters", self.iters, 1),
            ("stride", self.stride, 1),
        ):
            if int(value) < low:
                raise ValueError(f"{label} must be at least {low}")
        if not 0.0 < self.dweight <= 2.0:
            raise ValueError("dweight must lie in (0, 2]")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.period is not None and self.period < 0:
            raise ValueError("period must be nonnegative")
        if self.tol_scale <= 0.0:
            raise ValueError("tol_scale must be positive")
        if self.eta_grid is not None:
            self.eta_grid = tuple(float(e) for e in self.eta_grid)
            if not self.eta_grid or any(not 0.0 <= e <= 1.0 for e in self.eta_grid):
                raise ValueError("eta_grid values must lie in [0, 1]")
        if self.alpha_grid is not None:
            self.alpha_grid = tuple(float(a) for a in self.alpha_grid)
            if not self.alpha_grid or any(
                not 0.0 < a < 0.3 for a in self.alpha_grid
            ):
                raise ValueError("alpha_grid values must lie in (0, 0.3)")

    def output_path(self) -> Path:
        ext = "csv" if self.fmt == "csv" else "jsonl"
        return Path(self.out) if self.out else Path(f"{self.name}.{ext}")

    def echo_dict(self) -> dict:
        return {
            "experiment": self.name,
            "seed": int(self.seed),
            "trials": int(self.trials),
            "samples": int(self.samples),
            "npop": int(self.npop),
            "dweight": self.dweight,
            "cr": self.cr,
            "iters": int(self.iters),
            "eta": self.eta,
            "period": self.period,
            "out": str(self.output_path()),
            "format": self.fmt,
            "stride": int(self.stride),
            "tol_scale": self.tol_scale,
            "eta_grid": list(self.eta_grid) if self.eta_grid else None,
            "alpha_grid": list(self.alpha_grid) if self.alpha_grid else None,
            "rng_algorithm": RNG_ALGORITHM,
        }


@dataclass
class ExperimentResult:
    fieldnames: list[str]
    rows: list[dict]
    report: list[str] = field(default_factory=list)
    ok: bool = True


def _sig12(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.12g}")
    return value


def write_rows(path: Path, fieldnames: list[str], rows: list[dict], fmt: str) -> None:
    """Write rows as CSV (one-line header) or JSON-lines, 12 significant digits."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            for row in rows:
                writer.writerow(
                    {
                        k: (f"{v:.12g}" if isinstance(v, (float, np.floating)) else v)
                        for k, v in row.items()
                    }
                )
    else:
        with path.open("w") as fh:
            for row in rows:
                fh.write(json.dumps({k: _sig12(v) for k, v in row.items()}))
                fh.write("\n")


def write_config_echo(config: ExperimentConfig) -> Path:
    """Write the effective config next to the output file, for audit."""
    echo_path = Path(str(config.output_path()) + ".config.json")
    with echo_path.open("w") as fh:
        json.dump(config.echo_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return echo_path


def _sample_weights(sampler: SeededSampler, count: int) -> np.ndarray:
    w = sampler.uniform(0.0, 1.0, count)
    return w / w.sum()


def _region_residual(f: float, d: float, qubit_count: int) -> float:
    """Distance outside the attainable region (0 when inside)."""
    upper = f * DEVIATION_SLOPE
    out = max(0.0, -f, f - MAX_AVG_FIDELITY)
    if qubit_count == 1:
        return max(out, abs(d - upper))
    if qubit_count == 2:
        return max(out, 0.5 * upper - d, d - upper, 0.0)
    return max(out, -d, d - upper, 0.0)


def _verify_families(config: ExperimentConfig):
    scale = config.tol_scale
    n = config.trials
    sub = SeededSampler(config.seed).split(8)

    # Trace identities of the rotation representation.
    s = sub[0]
    worst = 0.0
    for _ in range(n):
        g = sample_gate(s)
        r = rotation_from_gate(g)
        tr = float(np.trace(r))
        tr_sq = float(np.trace(r @ r))
        worst = max(
            worst,
            abs(tr - rotation_trace(g)),
            abs(tr * tr - tr_sq - 2.0 * tr),
        )
    yield "rotation-trace-identities", worst, 1e-12 * scale

    # Single gates sit on the line Delta = F / sqrt(5).
    s = sub[1]
    worst = 0.0
    for _ in range(n):
        st = one_qubit_stats(sample_gate(s))
        worst = max(worst, abs(st.deviation - st.avg_fidelity * DEVIATION_SLOPE))
    yield "one-qubit-line", worst, 1e-12 * scale

    # Pairwise covariance bounds, including the equality cases.
    s = sub[2]
    worst = 0.0
    for _ in range(n):
        g_k, g_l = sample_gate(s), sample_gate(s)
        c = pair_covariance(g_k, g_l)
        d_k = one_qubit_stats(g_k).deviation
        d_l = one_qubit_stats(g_l).deviation
        worst = max(worst, c - d_k * d_l, -0.5 * d_k * d_l - c, 0.0)
    for _ in range(50):
        g_k = sample_gate(s)
        d_k = one_qubit_stats(g_k).deviation
        parallel = OneQubitGate(g_k.angle, g_k.axis)
        ortho_axis = np.cross(g_k.axis, [1.0, 0.0, 0.0])
        if np.linalg.norm(ortho_axis) < 0.5:
            ortho_axis = np.cross(g_k.axis, [0.0, 1.0, 0.0])
        ortho = OneQubitGate(g_k.angle, ortho_axis / np.linalg.norm(ortho_axis))
        worst = max(
            worst,
            abs(pair_covariance(g_k, parallel) - d_k * d_k),
            abs(pair_covariance(g_k, ortho) + 0.5 * d_k * one_qubit_stats(ortho).deviation),
        )
    yield "covariance-bounds", worst, 1e-12 * scale

    # Mixtures never exceed the one-qubit line.
    s = sub[3]
    worst = 0.0
    for i in range(n):
        count = 2 + i % 4
        gates = tuple(sample_gate(s) for _ in range(count))
        smap_stats = stochastic_map_stats(
            _map_from_parts(_sample_weights(s, count), gates)
        )
        worst = max(
            worst, smap_stats.deviation - smap_stats.avg_fidelity * DEVIATION_SLOPE, 0.0
        )
    yield "mixture-upper-bound", worst, 1e-12 * scale

    # Two-gate mixtures cannot fall below half the line.
    s = sub[4]
    worst = 0.0
    for _ in range(n):
        gates = (sample_gate(s), sample_gate(s))
        st = stochastic_map_stats(_map_from_parts(_sample_weights(s, 2), gates))
        worst = max(worst, 0.5 * st.avg_fidelity * DEVIATION_SLOPE - st.deviation, 0.0)
    yield "two-qubit-lower-bound", worst, 1e-12 * scale

    # Random ladder circuits land inside their qubit-count region.
    s = sub[5]
    worst = 0.0
    per_count = max(1, n // 3)
    for qubit_count in (1, 2, 3):
        for _ in range(per_count):
            st = stochastic_map_stats(
                stochastic_map_from_circuit(sample_ladder_circuit(s, qubit_count))
            )
            worst = max(
                worst, _region_residual(st.avg_fidelity, st.deviation, qubit_count)
            )
    yield "region-membership", worst, 1e-9 * scale

    # Three-qubit ceiling and oracle agreement for Haar unitaries.
    s = sub[6]
    unitary_count = 20
    worst_excess = 0.0
    worst_sigma = 0.0
    for child in s.split(unitary_count):
        u = sample_unitary(child, 8)
        closed = three_qubit_avg_fidelity(u)
        worst_excess = max(worst_excess, closed - MAX_AVG_FIDELITY, -closed, 0.0)
        est_f, _ = mc_stats(
            bloch_map_from_three_qubit_unitary(u), child, config.samples
        )
        worst_sigma = max(
            worst_sigma, abs(closed - est_f.value) / max(est_f.std_error, 1e-15)
        )
    yield "three-qubit-ceiling", worst_excess, 1e-10 * scale
    yield "three-qubit-oracle-agreement", worst_sigma, 5.0 * scale

    # Full-space simulation agrees with the reduced stochastic map.
    s = sub[7]
    worst = 0.0
    for i in range(50):
        circuit = sample_ladder_circuit(s, 1 + i % 4)
        smap = stochastic_map_from_circuit(circuit)
        for _ in range(10):
            radius = float(s.uniform(0.0, 1.0, 1)[0]) ** (1.0 / 3.0)
            rho = density_from_bloch(radius * sample_bloch(s))
            diff = simulate_full(circuit, rho) - smap.apply_density(rho)
            worst = max(worst, float(np.max(np.abs(diff))))
    yield "circuit-map-equivalence", worst, 1e-10 * scale


def _map_from_parts(weights, gates):
    from .circuit import StochasticMap

    return StochasticMap(weights, gates)


def run_verify(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = ["family", "passed", "worst_residual", "budget"]
    rows, report = [], []
    ok = True
    for family, worst, budget in _verify_families(config):
        passed = worst <= budget
        ok = ok and passed
        rows.append(
            {
                "family": family,
                "passed": passed,
                "worst_residual": float(worst),
                "budget": float(budget),
            }
        )
        report.append(
            f"{'PASS' if passed else 'FAIL'} {family}: worst residual "
            f"{worst:.3e} (budget {budget:.1e})"
        )
    report.append(
        f"verify: {sum(r['passed'] for r in rows)}/{len(rows)} families passed"
    )
    return ExperimentResult(fieldnames, rows, report, ok)


def run_tradeoff(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = ["qubit_count", "avg_fidelity", "deviation", "in_region", "seed"]
    sampler = SeededSampler(config.seed)
    rows = []
    violations = 0
    for qubit_count in (1, 2, 3):
        for _ in range(config.trials):
            circuit = sample_ladder_circuit(sampler, qubit_count)
            st = stochastic_map_stats(stochastic_map_from_circuit(circuit))
            inside = region_membership(st, qubit_count)
            violations += 0 if inside else 1
            rows.append(
                {
                    "qubit_count": qubit_count,
                    "avg_fidelity": st.avg_fidelity,
                    "deviation": st.deviation,
                    "in_region": inside,
                    "seed": int(config.seed),
                }
            )
    report = [
        f"tradeoff: {len(rows)} circuits, {violations} region violations"
    ]
    return ExperimentResult(fieldnames, rows, report, violations == 0)


def run_noise_sweep(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = ["eta", "mean_f", "std_f", "mean_delta", "std_delta", "trials"]
    basis = gell_mann_basis(8)
    p_star = optimal_controls(basis)
    if config.eta_grid is not None:
        grid = config.eta_grid
    elif config.eta is not None:
        grid = (config.eta,)
    else:
        grid = tuple(np.arange(0.0, 1.0 + 1e-9, 0.05))
    rows = []
    for eta, child in zip(grid, SeededSampler(config.seed).split(len(grid))):
        pop = np.tile(p_star, (config.trials, 1))
        pop = apply_noise(pop, NoiseModel(eta, period=None), child)
        f, d = _control_stats_batch(pop, basis)
        ddof = 1 if config.trials > 1 else 0
        rows.append(
            {
                "eta": float(eta),
                "mean_f": float(f.mean()),
                "std_f": float(f.std(ddof=ddof)),
                "mean_delta": float(d.mean()),
                "std_delta": float(d.std(ddof=ddof)),
                "trials": int(config.trials),
            }
        )
    report = [
        "noise-sweep: eta={:.2f} -> F={:.4f}+-{:.4f} Delta={:.4f}+-{:.4f}".format(
            r["eta"], r["mean_f"], r["std_f"], r["mean_delta"], r["std_delta"]
        )
        for r in rows
    ]
    return ExperimentResult(fieldnames, rows, report)


def _feedback_traces(config: ExperimentConfig, noise: NoiseModel):
    basis = gell_mann_basis(8)
    traces = []
    for child in SeededSampler(config.seed).split(config.trials):
        de_config = DeConfig(
            population_size=config.npop,
            differential_weight=config.dweight,
            crossover_rate=config.cr,
            max_iterations=config.iters,
            seed=child.seed,
        )
        _, trace = run_feedback(de_config, noise, basis)
        traces.append(trace)
    return traces


def _trace_rows(traces, iterations, extra: dict | None = None):
    rows = []
    for it in iterations:
        f = np.array([t[it].avg_fidelity for t in traces])
        d = np.array([t[it].deviation for t in traces])
        xi = np.array([t[it].fitness for t in traces])
        ddof = 1 if len(traces) > 1 else 0
        row = dict(extra or {})
        row.update(
            {
                "iteration": int(it),
                "mean_f": float(f.mean()),
                "std_f": float(f.std(ddof=ddof)),
                "mean_delta": float(d.mean()),
                "std_delta": float(d.std(ddof=ddof)),
                "mean_fitness": float(xi.mean()),
                "noise_injected": bool(traces[0][it].noise_injected),
                "trials": len(traces),
            }
        )
        rows.append(row)
    return rows


def _strided(last: int, stride: int) -> list[int]:
    its = list(range(0, last + 1, stride))
    if its[-1] != last:
        its.append(last)
    return its


def run_optimize(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = [
        "iteration",
        "mean_f",
        "std_f",
        "mean_delta",
        "std_delta",
        "mean_fitness",
        "noise_injected",
        "trials",
    ]
    traces = _feedback_traces(config, NoiseModel(0.0, period=None))
    rows = _trace_rows(traces, _strided(config.iters, config.stride))
    final_f = np.median([t[-1].avg_fidelity for t in traces])
    final_d = np.median([t[-1].deviation for t in traces])
    report = [
        f"optimize: {config.trials} runs x {config.iters} iterations; "
        f"final median F={final_f:.4f}, median Delta={final_d:.4f}"
    ]
    return ExperimentResult(fieldnames, rows, report)


def run_recover(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = [
        "schedule",
        "iteration",
        "mean_f",
        "std_f",
        "mean_delta",
        "std_delta",
        "mean_fitness",
        "noise_injected",
        "trials",
    ]
    eta = 0.5 if config.eta is None else config.eta
    schedules = (config.period,) if config.period is not None else (50, 100)
    rows, report = [], []
    for schedule in schedules:
        noise = NoiseModel(eta, period=schedule)
        traces = _feedback_traces(config, noise)
        rows.extend(
            _trace_rows(
                traces,
                _strided(config.iters, config.stride),
                extra={"schedule": int(schedule)},
            )
        )
        med_final = np.median([t[-1].avg_fidelity for t in traces])
        report.append(
            f"recover: eta={eta} every {schedule} iterations over "
            f"{config.trials} runs; final median F={med_final:.4f}"
        )
    return ExperimentResult(fieldnames, rows, report)


def run_compensate(config: ExperimentConfig) -> ExperimentResult:
    fieldnames = ["alpha", "deviation_three_gate", "deviation_four_gate", "avg_fidelity"]
    grid = config.alpha_grid or tuple(np.linspace(0.01, 0.25, 25))
    rows = []
    for alpha in grid:
        three = stochastic_map_stats(misaligned_three_gate_map(alpha))
        four = stochastic_map_stats(compensated_four_gate_map(alpha))
        rows.append(
            {
                "alpha": float(alpha),
                "deviation_three_gate": three.deviation,
                "deviation_four_gate": four.deviation,
                "avg_fidelity": four.avg_fidelity,
            }
        )
    report = [
        f"compensate: {len(rows)} tilt values; worst four-gate deviation "
        f"{max(r['deviation_four_gate'] for r in rows):.3e}"
    ]
    return ExperimentResult(fieldnames, rows, report)


_RUNNERS = {
    "verify": run_verify,
    "tradeoff": run_tradeoff,
    "noise-sweep": run_noise_sweep,
    "optimize": run_optimize,
    "recover": run_recover,
    "compensate": run_compensate,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return _RUNNERS[config.name](config)
