"""The five experiment commands.

Each command takes a validated run config and an output directory, writes
its artifacts through an ``ArtifactStore`` and finishes with a manifest.
Column orders of every CSV are fixed by the ``*_COLUMNS`` constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel

from src.cli.config import (
    EpsilonRunConfig,
    FlowRunConfig,
    PerturbRunConfig,
    SpectrumRunConfig,
    TrainRunConfig,
)
from src.cli.manifest import RunManifest
from src.client.gan.evaluation import kde_grid
from src.client.gan.trainer import instability_indicators, train
from src.framework.core.flow import (
    FlowConfig,
    GridPerturbation,
    ParticleSystem,
    Trajectory,
    linearized_sim,
    simulate,
)
from src.framework.core.metrics import RunClock, Stage
from src.framework.core.spectral import (
    SpectrumReport,
    default_xi_grid,
    minimal_epsilon,
    reference_table,
    spectrum_report,
)
from src.infrastructure.artifacts import plots
from src.infrastructure.artifacts.store import ArtifactStore

logger = structlog.get_logger(__name__)

SPECTRUM_COLUMNS = ["xi", "analytic_ft", "oracle_ft", "growth_gen", "growth_disc"]
TABLE_COLUMNS = [
    "name",
    "kernel",
    "printed_gen",
    "printed_disc",
    "verdict_gen",
    "verdict_disc",
    "oracle_verdict_gen",
    "oracle_verdict_disc",
    "matches_printed",
    "discrepancy_count",
    "sign_flips",
    "printed_formula",
]
TRAJECTORY_COLUMNS = ["step", "t", "energy"]
PERTURB_COLUMNS = [
    "xi_cycles",
    "xi",
    "predicted",
    "recursion",
    "measured",
    "rel_err",
    "resolved",
]
METRICS_COLUMNS = [
    "epoch",
    "loss_G",
    "loss_D",
    "feature_distance",
    "mode_coverage",
    "high_quality_fraction",
]
MARGIN_COLUMNS = ["xi", "base_ft", "stabilizer_ft", "ratio", "margin"]

MONOTONE_SLACK = 1e-9


@dataclass
class CommandResult:
    """Outcome of one command, for the entry point to report."""

    command: str
    out_dir: Path
    summary: dict[str, Any]
    manifest_path: Path
    lines: list[str] = field(default_factory=list)


def _xi_grid(cfg: SpectrumRunConfig | EpsilonRunConfig) -> np.ndarray:
    return default_xi_grid(cfg.xi_min, cfg.xi_max, cfg.xi_points)


def _finish(
    stage: Stage,
    cfg: BaseModel,
    seed: int,
    store: ArtifactStore,
    clock: RunClock,
    summary: dict[str, Any],
    lines: list[str],
) -> CommandResult:
    clock.record(stage, clock.elapsed_seconds() * 1000, files=len(store.written))
    manifest = RunManifest.from_store(
        stage.value, cfg, seed, store, clock.elapsed_seconds(), summary
    )
    path = manifest.write(store.out_dir)
    return CommandResult(stage.value, store.out_dir, summary, path, lines)


# --- spectrum -------------------------------------------------------------------------


def _report_lines(name: str, report: SpectrumReport) -> list[str]:
    line = f"{name}: gen={report.verdict_gen.value} disc={report.verdict_disc.value}"
    if report.oracle_verdict_gen is not None and report.oracle_verdict_disc is not None:
        line += (
            f"  oracle gen={report.oracle_verdict_gen.value}"
            f" disc={report.oracle_verdict_disc.value}"
        )
    lines = [line]
    if report.sign_flips.size:
        flips = ", ".join(f"{x:.4g}" for x in report.sign_flips)
        lines.append(f"  sign flips at xi = {flips}")
    if report.has_discrepancy:
        lines.append(
            f"  oracle disagrees with analytic sign on {report.discrepancies.size} modes"
            f" in [{report.discrepancies.min():.4g}, {report.discrepancies.max():.4g}]"
        )
    return lines


def _spectrum_table(
    cfg: SpectrumRunConfig, store: ArtifactStore
) -> tuple[dict[str, Any], list[str]]:
    grid = _xi_grid(cfg)
    rows: list[dict[str, Any]] = []
    reports: dict[str, Any] = {}
    lines: list[str] = []
    for ref in reference_table():
        report = spectrum_report(
            ref.kernel,
            dim=1,
            c=cfg.c,
            xi_grid=grid,
            with_oracle=cfg.oracle,
            grid_points=cfg.grid_points,
        )
        gen = report.oracle_verdict_gen or report.verdict_gen
        disc = report.oracle_verdict_disc or report.verdict_disc
        rows.append(
            {
                "name": ref.name,
                "kernel": ref.kernel.label(),
                "printed_gen": ref.printed_gen.value,
                "printed_disc": ref.printed_disc.value,
                "verdict_gen": report.verdict_gen.value,
                "verdict_disc": report.verdict_disc.value,
                "oracle_verdict_gen": getattr(report.oracle_verdict_gen, "value", ""),
                "oracle_verdict_disc": getattr(report.oracle_verdict_disc, "value", ""),
                "matches_printed": gen == ref.printed_gen and disc == ref.printed_disc,
                "discrepancy_count": int(report.discrepancies.size),
                "sign_flips": "|".join(f"{x:.6g}" for x in report.sign_flips),
                "printed_formula": ref.printed_formula,
            }
        )
        reports[ref.name] = report.summary()
        lines.extend(_report_lines(ref.name, report))
        store.write_csv(f"spectrum_{ref.name}.csv", report.rows(), SPECTRUM_COLUMNS)
        if cfg.svg:
            store.adopt(
                plots.spectrum_curves(
                    report.xi_grid,
                    report.analytic_ft,
                    report.oracle_ft,
                    store.path(f"spectrum_{ref.name}.svg"),
                    ref.kernel.label(),
                )
            )
    store.write_csv("table.csv", rows, TABLE_COLUMNS)
    store.write_json("table.json", {"rows": rows, "reports": reports})
    summary = {
        "rows": len(rows),
        "matching_printed": sum(1 for r in rows if r["matches_printed"]),
        "flagged": [r["name"] for r in rows if not r["matches_printed"] or r["discrepancy_count"]],
    }
    return summary, lines


def cmd_spectrum(cfg: SpectrumRunConfig, out_dir: Path) -> CommandResult:
    """Fourier verdicts of one kernel, or of every reference row with ``table``."""
    clock = RunClock(run_id=out_dir.name)
    store = ArtifactStore(out_dir)
    if cfg.table:
        summary, lines = _spectrum_table(cfg, store)
    else:
        assert cfg.kernel is not None
        report = spectrum_report(
            cfg.kernel,
            dim=cfg.dim,
            c=cfg.c,
            xi_grid=_xi_grid(cfg),
            with_oracle=cfg.oracle,
            half_width=cfg.half_width,
            grid_points=cfg.grid_points,
        )
        store.write_csv("spectrum.csv", report.rows(), SPECTRUM_COLUMNS)
        summary = report.summary()
        store.write_json("summary.json", summary)
        lines = _report_lines(report.kernel, report)
        if cfg.svg:
            store.adopt(
                plots.spectrum_curves(
                    report.xi_grid,
                    report.analytic_ft,
                    report.oracle_ft,
                    store.path("spectrum.svg"),
                    report.kernel,
                )
            )
            store.adopt(plots.radial_profiles([cfg.kernel], store.path("profile.svg"), dim=cfg.dim))
    return _finish(Stage.SPECTRUM, cfg, cfg.seed, store, clock, summary, lines)


# --- flow -----------------------------------------------------------------------------


def initial_clouds(cfg: FlowRunConfig) -> ParticleSystem:
    """Real cloud ~ N(0, I); generated cloud narrower and shifted along the first axis."""
    rng = np.random.default_rng(cfg.seed)
    real = rng.standard_normal((cfg.n_real, cfg.dim))
    gen = cfg.gen_scale * rng.standard_normal((cfg.n_gen, cfg.dim))
    gen[:, 0] += cfg.gen_shift
    return ParticleSystem(real, gen)


def _flow_summary(traj: Trajectory) -> dict[str, Any]:
    summary = traj.summary()
    energies = traj.energies[np.isfinite(traj.energies)]
    slack = MONOTONE_SLACK * max(1.0, float(np.max(np.abs(energies)))) if energies.size else 0.0
    steps = np.diff(energies)
    summary["non_increasing"] = bool(np.all(steps <= slack))
    summary["non_decreasing"] = bool(np.all(steps >= -slack))
    summary["growth_flagged"] = traj.diverged or bool(energies.size and energies[-1] > energies[0])
    return summary


def cmd_flow(cfg: FlowRunConfig, out_dir: Path) -> CommandResult:
    """Explicit particle flow; energy trace plus particle frames."""
    clock = RunClock(run_id=out_dir.name)
    store = ArtifactStore(out_dir)
    system = initial_clouds(cfg)
    flow_cfg = FlowConfig(
        kernel=cfg.kernel,
        direction=cfg.direction,
        dt=cfg.dt,
        steps=cfg.steps,
        record_every=cfg.record_every,
    )
    traj = simulate(system, flow_cfg)
    store.write_csv(
        "trajectory.csv",
        [{"step": s.step, "t": s.t, "energy": s.energy} for s in traj.snapshots],
        TRAJECTORY_COLUMNS,
    )
    frames = [s for s in traj.snapshots if s.step % cfg.frame_every == 0 or s is traj.final]
    coord_columns = [f"x{i}" for i in range(system.dim)]
    frame_rows = [
        {"step": s.step, "particle": i, **dict(zip(coord_columns, point))}
        for s in frames
        for i, point in enumerate(s.gen_points)
    ]
    store.write_csv("frames.csv", frame_rows, ["step", "particle", *coord_columns])
    summary = _flow_summary(traj)
    store.write_json("summary.json", summary)
    if cfg.svg:
        store.adopt(
            plots.energy_curve(
                traj.times, traj.energies, store.path("energy.svg"), cfg.kernel.label()
            )
        )
        if system.dim >= 2:
            for s in frames:
                store.adopt(
                    plots.scatter_overlay(
                        system.real_points,
                        s.gen_points,
                        store.path(f"frame_{s.step:06d}.svg"),
                        f"step {s.step}",
                    )
                )
    lines = [
        f"direction={cfg.direction.value} dt={traj.dt:.4g} records={len(traj.snapshots)}",
        f"energy {summary['initial_energy']:.6g} -> {summary['final_energy']:.6g}",
        f"non_increasing={summary['non_increasing']} diverged={traj.diverged}",
    ]
    return _finish(Stage.FLOW, cfg, cfg.seed, store, clock, summary, lines)


# --- perturb --------------------------------------------------------------------------


def cmd_perturb(cfg: PerturbRunConfig, out_dir: Path) -> CommandResult:
    """Linearized grid run; predicted against measured growth per mode."""
    clock = RunClock(run_id=out_dir.name)
    store = ArtifactStore(out_dir)
    kernel = cfg.effective_kernel()
    if cfg.initial == "single":
        p = GridPerturbation.single_mode(
            kernel, cfg.mode, cfg.amplitude, cfg.c0, cfg.grid_points, cfg.half_width
        )
    else:
        rng = np.random.default_rng(cfg.seed)
        p = GridPerturbation.white_noise(
            kernel, rng, cfg.amplitude, cfg.c0, cfg.grid_points, cfg.half_width
        )
    run = linearized_sim(p, cfg.direction, cfg.dt, cfg.steps, cfg.record_every)
    fit = run.fit
    resolved = fit.resolved
    rel_err = fit.rel_err
    rows = [
        {
            "xi_cycles": fit.xi_cycles[i],
            "xi": fit.xi_table[i],
            "predicted": fit.predicted[i],
            "recursion": fit.recursion[i],
            "measured": fit.measured[i],
            "rel_err": rel_err[i],
            "resolved": bool(resolved[i]),
        }
        for i in range(fit.xi_cycles.size)
    ]
    store.write_csv("growth.csv", rows, PERTURB_COLUMNS)

    measured = fit.measured[resolved]
    first = int(np.argmax(resolved)) if np.any(resolved) else None
    summary: dict[str, Any] = {
        "kernel": kernel.label(),
        "direction": cfg.direction.value,
        "dt": fit.dt,
        "resolved_modes": int(resolved.sum()),
        "max_rel_err": fit.max_rel_err(),
        "growing_modes": int(np.count_nonzero(measured > 0)),
        "all_decaying": bool(measured.size and np.all(measured < 0)),
        "smallest_resolved_xi": float(fit.xi_table[first]) if first is not None else None,
        "smallest_resolved_grows": bool(fit.measured[first] > 0) if first is not None else None,
    }
    store.write_json("summary.json", summary)
    if cfg.svg:
        store.adopt(
            plots.growth_fit(
                fit.xi_table[resolved],
                fit.predicted[resolved],
                measured,
                store.path("growth.svg"),
                kernel.label(),
            )
        )
    lines = [
        f"{kernel.label()} ({cfg.direction.value}): {summary['resolved_modes']} resolved modes",
        f"max rel err {summary['max_rel_err']:.3e}, growing modes {summary['growing_modes']}",
    ]
    return _finish(Stage.PERTURB, cfg, cfg.seed, store, clock, summary, lines)


# --- train ----------------------------------------------------------------------------


def cmd_train(cfg: TrainRunConfig, out_dir: Path) -> CommandResult:
    """Mixture experiment. A diverged run is a result, not a failure."""
    clock = RunClock(run_id=out_dir.name)
    store = ArtifactStore(out_dir)
    spec = cfg.mixture()
    run = train(cfg.to_train_config(), spec)
    store.write_csv("metrics.csv", run.rows(), METRICS_COLUMNS)
    summary = run.summary()
    summary["stabilized"] = run.config.stabilized
    summary["instability_indicators"] = instability_indicators(run)
    store.write_json("summary.json", summary)

    if cfg.checkpoints and run.generator is not None and run.discriminator is not None:
        store.write_checkpoint("generator.json", run.generator)
        store.write_checkpoint("discriminator.json", run.discriminator)
    if cfg.svg and run.final_samples is not None and run.eval_real is not None:
        grid = kde_grid(run.final_samples, cfg.kde_bandwidth)
        title = "stabilized" if run.config.stabilized else "unstabilized"
        store.adopt(plots.kde_heatmap(grid, store.path("kde_generated.svg"), title))
        store.adopt(
            plots.kde_heatmap(
                kde_grid(run.eval_real, cfg.kde_bandwidth), store.path("kde_data.svg"), "data"
            )
        )
        store.adopt(
            plots.scatter_overlay(
                run.eval_real, run.final_samples, store.path("samples.svg"), title
            )
        )
    lines = [
        f"epochs={summary['epochs_completed']} coverage={summary['final_mode_coverage']}/{spec.k}"
        f" high_quality={summary['final_high_quality_fraction']:.3f}",
        "instability: " + (", ".join(summary["instability_indicators"]) or "none"),
    ]
    return _finish(Stage.TRAIN, cfg, cfg.seed, store, clock, summary, lines)


# --- epsilon --------------------------------------------------------------------------


def cmd_epsilon(cfg: EpsilonRunConfig, out_dir: Path) -> CommandResult:
    """Minimal stabilizing weight and its margin table."""
    clock = RunClock(run_id=out_dir.name)
    store = ArtifactStore(out_dir)
    solution = minimal_epsilon(cfg.base, cfg.stabilizer, _xi_grid(cfg), cfg.dim)
    ratio = solution.ratio
    margin = solution.margin_table()
    rows = [
        {
            "xi": solution.certified_grid[i],
            "base_ft": solution.base_ft[i],
            "stabilizer_ft": solution.stabilizer_ft[i],
            "ratio": ratio[i],
            "margin": margin[i],
        }
        for i in range(solution.certified_grid.size)
    ]
    store.write_csv("margin.csv", rows, MARGIN_COLUMNS)
    summary: dict[str, Any] = {
        "base": cfg.base.label(),
        "stabilizer": cfg.stabilizer.label(),
        "epsilon_min": solution.epsilon_min,
        "attained_at": float(solution.certified_grid[int(np.argmax(ratio))]),
        "probe_epsilon": solution.probe_epsilon,
        "margin": solution.margin,
        "probes": [
            {
                "epsilon": eps,
                "margin": solution.margin_at(eps),
                "certified": solution.certifies(eps),
            }
            for eps in cfg.probes
        ],
    }
    store.write_json("epsilon.json", summary)
    if cfg.svg:
        store.adopt(
            plots.spectrum_curves(
                solution.certified_grid,
                margin,
                None,
                store.path("margin.svg"),
                f"eps*F(s) - F(e) at eps={solution.probe_epsilon:.6g}",
            )
        )

    lines = [f"epsilon_min = {solution.epsilon_min:.10g}", "      xi        ratio       margin"]
    picks = np.unique(np.linspace(0, solution.certified_grid.size - 1, 10).astype(int))
    lines.extend(
        f"{rows[i]['xi']:8.4g}  {rows[i]['ratio']:11.6g}  {rows[i]['margin']:11.4e}"
        for i in picks
    )
    for probe in summary["probes"]:
        verdict = "certified" if probe["certified"] else "not certified"
        lines.append(f"eps={probe['epsilon']:g}: margin {probe['margin']:.4e} ({verdict})")
    return _finish(Stage.EPSILON, cfg, cfg.seed, store, clock, summary, lines)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "flow": cmd_flow,
    "perturb": cmd_perturb,
    "train": cmd_train,
    "epsilon": cmd_epsilon,
}
