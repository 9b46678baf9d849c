"""
Trajectory CSV and plain-text convergence report.
"""

import csv
import logging
import os
from typing import Dict, List, Optional


from .simulation import Scenario, SimulationResult, Validation

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["t", "agent_id", "x", "v", "u", "alpha", "beta", "err_pos", "err_vel", "s", "V1", "V_obs"]
PER_AGENT = ["x", "v", "u", "alpha", "beta", "err_pos", "err_vel", "s", "V1"]


def _fmt(value: float, precision: int) -> str:
    return f"{float(value):.{precision}g}"


def write_trajectory_csv(result: SimulationResult, path: str, precision: int = 17) -> str:
    """
    One row per (time, agent) in the fixed column order.

    V_obs is a network-wide value repeated on every agent row.
    """
    log = result.log
    per_agent = {name: log.channel(name).reshape(len(log), -1) for name in PER_AGENT}
    v_obs = log.channel("V_obs").reshape(-1)
    n = per_agent["x"].shape[1]
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for k, t in enumerate(log.t):
            for i in range(n):
                row = [_fmt(t, precision), str(i + 1)]
                row.extend(_fmt(per_agent[name][k, i], precision) for name in PER_AGENT)
                row.append(_fmt(v_obs[k], precision))
                writer.writerow(row)
    return path


def _optional(value: Optional[float], unit: str = "") -> str:
    return "never" if value is None else f"{value:.6g}{unit}"


def validation_lines(scenario: Scenario, validation: Validation) -> List[str]:
    """Spectral data and every checked inequality."""
    lines = [f"Scenario {scenario.name} ({scenario.mode.value})"]
    spectral = validation.gains.spectral
    if spectral:
        lines.append("Spectral data")
        for key in ("lambda1_Q", "lambda2_L", "p_max", "d_bar"):
            if spectral.get(key) is not None:
                lines.append(f"  {key} = {spectral[key]:.10g}")
        if spectral.get("p") is not None:
            lines.append("  p = [" + ", ".join(f"{x:.10g}" for x in spectral["p"]) + "]")
    if validation.assumptions is not None:
        lines.extend(validation.assumptions.lines())
    lines.extend(validation.gains.lines())
    lines.append("Verdict: " + ("all conditions hold" if validation.is_valid else "conditions violated"))
    return lines


def report_lines(result: SimulationResult) -> List[str]:
    sc, conv = result.scenario, result.convergence
    lines = [
        "=" * 60,
        f"  {sc.name}: {sc.description}" if sc.description else f"  {sc.name}",
        "=" * 60,
        f"mode={sc.mode.value} agents={sc.n} dt={sc.sim.dt:g} horizon={sc.sim.horizon:g} "
        f"integrator={sc.sim.integrator.value} seed={sc.sim.seed}",
        "",
    ]
    lines.extend(validation_lines(sc, result.validation))
    lines.extend([
        "",
        "Convergence",
        f"  deadline = {conv.deadline:g} s, tolerance = {conv.tolerance:.6g}",
        f"  tracking metric at deadline = {conv.metric_at_deadline:.6g}",
        f"  worst metric after deadline = {conv.worst_after_deadline:.6g}",
        f"  settling time = {_optional(conv.settling_time, ' s')}",
        f"  first crossing = {_optional(conv.crossing_time, ' s')}",
    ])
    if result.observer is not None:
        obs = result.observer
        lines.extend([
            "Observer",
            f"  |beta error| at t_b1 = {obs.beta_error_at_tb1:.6g}",
            f"  |alpha error| at T_b = {obs.alpha_error_at_tb:.6g}",
            f"  tolerance = {obs.tolerance:.6g} -> {'converged' if obs.converged else 'NOT converged'}",
        ])
    if result.arrival is not None:
        arr = result.arrival
        lines.extend([
            "Surface arrival",
            f"  |s(t_a1)| = {arr.surface_at_ta1:.6g} (bound {arr.predicted_bound:.6g})",
            f"  remaining reaching time bound = {_optional(arr.reaching_bound, ' s')}",
        ])
    if result.conservation is not None:
        lines.append("Conservation")
        for key, gap in result.conservation.items():
            lines.append(f"  max |sum {key} - reference sum| = {gap:.3g}")
    if result.lyapunov:
        lines.append("Lyapunov diagnostics")
        lines.extend(f"  {check.describe()}" for check in result.lyapunov)
    if result.notes:
        lines.append("Notes")
        lines.extend(f"  {note}" for note in result.notes)
    lines.extend(["", "RESULT: " + ("CONVERGED" if result.converged else "NOT CONVERGED")])
    return lines


def write_outputs(result: SimulationResult, out_dir: str, precision: int = 17) -> Dict[str, str]:
    """
    Write <name>.csv and <name>_report.txt.

    Returns:
        Dict with 'csv' and 'report' paths
    """
    os.makedirs(out_dir, exist_ok=True)
    name = result.scenario.name
    csv_path = write_trajectory_csv(result, os.path.join(out_dir, f"{name}.csv"), precision)
    report_path = os.path.join(out_dir, f"{name}_report.txt")
    with open(report_path, 'w') as f:
        f.write("\n".join(report_lines(result)) + "\n")
    logger.info("Wrote %s and %s", csv_path, report_path)
    return {"csv": csv_path, "report": report_path}
