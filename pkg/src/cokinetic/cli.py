"""Command line entry point: run scenario files, validate them, or execute
the packaged verification suites.

Exit codes: 0 all tasks pass, 1 at least one task fails, 2 scenario error.
Reports are deterministic for a fixed scenario and seed; the environment
stamp is excluded from the determinism contract.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import CokineticError, ScenarioError
from .isotopy import (
    Translation,
    check_cosymplectic,
    compose_isotopies,
    conjugate_isotopy,
    flux_identity_residual,
    inverse_isotopy,
    orbit_energy_report,
    verify_generator_identity,
)
from .conformal import (
    verify_composed_conformal_factor,
    verify_conjugated_conformal_factor,
    verify_inverse_conformal_factor,
    verify_reeb_pairing_composition,
    verify_reeb_pairing_inverse,
)
from .lift import check_symplectic, lift_isotopy
from .fixpoints import (
    basis_forms,
    check_fix_lower_bound,
    mean_winding_integral,
    winding_at_fixed_points,
)
from .norms import almost_length, distance_AH, distance_CH, length_L1inf, length_Linf
from .reparam import boundary_flatten, verify_rl2
from .reports import RunReport, TaskResult, VerificationReport
from .scenario import Scenario, load_scenario


def _thread_cap():
    cap = os.environ.get("COKINETIC_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMBA_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _task_rng(scenario: Scenario, task: dict):
    # zlib.crc32 is stable across processes, unlike hash() on strings
    import zlib

    return np.random.default_rng(scenario.seed
                                 + zlib.crc32(task["name"].encode()) % (2 ** 16))


def _scalar_result(task, value: float, extra=None) -> TaskResult:
    """Wrap a scalar (length, distance) with the optional expect/tol check."""
    details = dict(extra or {})
    expect = task.get("expect")
    tol = task.get("tol", task.get("tolerances", {}).get("value", None))
    if expect is not None:
        tol = tol if tol is not None else 1e-6
        gap = abs(value - float(expect))
        report = VerificationReport(
            name=task["name"], residuals={"value_gap": gap, "value": value},
            tolerances={"value_gap": float(tol)}, passed=gap <= tol,
            details=details)
        status = "pass" if report.passed else "fail"
        return TaskResult(name=task["name"], command=task["command"],
                          status=status, report=report)
    report = VerificationReport(
        name=task["name"], residuals={"value": value}, tolerances={},
        passed=True, details=details)
    return TaskResult(name=task["name"], command=task["command"],
                      status="pass", report=report)


def _report_result(task, report) -> TaskResult:
    status = "pass" if getattr(report, "passed", True) else "fail"
    return TaskResult(name=task["name"], command=task["command"],
                      status=status, report=report)


def execute_task(scenario: Scenario, task: dict) -> TaskResult:
    command = task["command"]
    tol = dict(scenario.defaults)
    tol.update(task.get("tolerances", {}))
    rng = _task_rng(scenario, task)
    try:
        if command == "length":
            iso = scenario.isotopy(task["isotopy"])
            flavor = task.get("flavor", "L1inf")
            fn = length_L1inf if flavor == "L1inf" else length_Linf
            rep = fn(iso, resolution=int(tol["osc_resolution"]))
            result = _scalar_result(task, rep.value,
                                    {"enclosure": list(rep.enclosure),
                                     "flavor": flavor})
            result.report = rep if task.get("expect") is None else result.report
            return result
        if command == "almost_length":
            iso = scenario.isotopy(task["isotopy"])
            rep = almost_length(iso, task.get("flavor", "L1inf"),
                                resolution=int(tol["osc_resolution"]))
            return _scalar_result(task, rep.value, {"enclosure": list(rep.enclosure)})
        if command == "distance":
            a = scenario.isotopy(task["a"])
            b = scenario.isotopy(task["b"])
            metric = task.get("metric", "CH")
            flavor = task.get("flavor", "L1inf")
            fn = distance_CH if metric == "CH" else distance_AH
            return _scalar_result(task, fn(a, b, flavor), {"metric": metric})
        if command == "verify_generator":
            iso = scenario.isotopy(task["isotopy"])
            return _report_result(task, verify_generator_identity(
                iso, rng=rng, tol=tol["tol_quad"] * 10))
        if command == "verify_inverse":
            iso = scenario.isotopy(task["isotopy"])
            return _report_result(task, verify_generator_identity(
                inverse_isotopy(iso), rng=rng, tol=tol["tol_quad"] * 10))
        if command == "verify_composition":
            a = scenario.isotopy(task["a"])
            b = scenario.isotopy(task["b"])
            return _report_result(task, verify_generator_identity(
                compose_isotopies(a, b), rng=rng, tol=tol["tol_quad"] * 10))
        if command == "verify_conjugation":
            iso = scenario.isotopy(task["isotopy"])
            offset = np.asarray(task.get("offset",
                                         [0.5] * iso.model.dim), float)
            return _report_result(task, verify_generator_identity(
                conjugate_isotopy(iso, Translation(offset=offset)),
                rng=rng, tol=tol["tol_quad"] * 10))
        if command == "check_cosymplectic":
            iso = scenario.isotopy(task["isotopy"])
            return _report_result(task, check_cosymplectic(iso))
        if command == "conformal_fact":
            return _conformal_task(scenario, task, rng, tol)
        if command == "lift_check":
            iso = scenario.isotopy(task["isotopy"])
            rep = check_symplectic(lift_isotopy(iso),
                                   samples=int(task.get("samples", 32)),
                                   rng=rng, tol=tol["tol_quad"] * 10)
            return _report_result(task, rep)
        if command == "fixed_points":
            iso = scenario.isotopy(task["isotopy"])
            rep = check_fix_lower_bound(
                iso, grid_resolution=int(task.get("grid", 32)),
                newton_tol=float(task.get("newton_tol", 1e-10)))
            return _report_result(task, rep)
        if command == "mean_winding":
            iso = scenario.isotopy(task["isotopy"])
            form = basis_forms(iso.model)[int(task.get("form", 0))]
            rep = mean_winding_integral(
                iso, form, resolution=int(task.get("grid", 32)),
                tol_quad=tol["tol_quad"], loop=bool(task.get("loop", False)))
            return _report_result(task, rep)
        if command == "winding_at_fixed_points":
            iso = scenario.isotopy(task["isotopy"])
            return _report_result(task, winding_at_fixed_points(
                iso, tol=tol["tol_quad"]))
        if command == "boundary_flatten":
            iso = scenario.isotopy(task["isotopy"])
            _, rep = boundary_flatten(iso, float(task.get("epsilon", 0.1)))
            return _report_result(task, rep)
        if command == "verify_rl2":
            iso = scenario.isotopy(task["isotopy"])
            xi1 = scenario.curve(task["curve_a"])
            xi2 = scenario.curve(task["curve_b"])
            return _report_result(task, verify_rl2(
                iso, xi1, xi2, task.get("flavor", "L1inf")))
        if command == "orbit_energy":
            iso = scenario.isotopy(task["isotopy"])
            p = np.asarray(task.get("point", [0.5] * iso.model.dim), float)
            grid = np.linspace(0.0, 1.0, int(task.get("nodes", 11)))
            return _report_result(task, orbit_energy_report(
                iso, p, grid, tol=tol["tol_flow"]))
        if command == "flux_identity":
            iso = scenario.isotopy(task["isotopy"])
            form = basis_forms(iso.model)[int(task.get("form", 0))]
            res = flux_identity_residual(iso, form,
                                         resolution=int(task.get("grid", 32)))
            rep = VerificationReport(
                name=task["name"], residuals={"flux_residual": res},
                tolerances={"flux_residual": tol["tol_quad"]},
                passed=res <= tol["tol_quad"])
            return _report_result(task, rep)
        raise ScenarioError(f"unhandled command {command!r}")
    except ScenarioError:
        raise
    except CokineticError as exc:
        return TaskResult(name=task["name"], command=command, status="error",
                          error=f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # numerical blowups should not kill siblings
        return TaskResult(name=task["name"], command=command, status="error",
                          error=f"{type(exc).__name__}: {exc}")


def _conformal_task(scenario: Scenario, task, rng, tol) -> TaskResult:
    fact = int(task.get("fact", 6))
    kw = {"rng": rng, "tol": tol["tol_quad"] * 10,
          "samples": int(task.get("samples", 16))}
    if fact == 6:
        rep = verify_inverse_conformal_factor(scenario.isotopy(task["isotopy"]), **kw)
    elif fact == 7:
        rep = verify_composed_conformal_factor(
            scenario.isotopy(task["a"]), scenario.isotopy(task["b"]), **kw)
    elif fact == 8:
        iso = scenario.isotopy(task["isotopy"])
        offset = np.asarray(task.get("offset", [0.4] * iso.model.dim), float)
        rep = verify_conjugated_conformal_factor(iso, Translation(offset=offset), **kw)
    elif fact == 9:
        rep = verify_reeb_pairing_composition(
            scenario.isotopy(task["a"]), scenario.isotopy(task["b"]), **kw)
    elif fact == 10:
        rep = verify_reeb_pairing_inverse(scenario.isotopy(task["isotopy"]), **kw)
    else:
        raise ScenarioError(f"conformal_fact supports facts 6-10, got {fact}")
    return _report_result(task, rep)


def run(scenario: Scenario, only: str | None = None) -> RunReport:
    """Execute the scenario's tasks in declaration order."""
    tasks = scenario.tasks
    if only is not None:
        tasks = [t for t in tasks if t["name"] == only]
        if not tasks:
            raise ScenarioError(f"--only matched no task named {only!r}")
    results = [execute_task(scenario, t) for t in tasks]
    env = {
        "package": "cokinetic",
        "version": __version__,
        "numpy": np.__version__,
        "seed": scenario.seed,
        "defaults": scenario.defaults,
    }
    return RunReport(tasks=results, environment=env)


def _emit(report: RunReport, out, csv_dir, figures_dir) -> None:
    doc = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    if csv_dir:
        report.write_csv_dir(csv_dir)
    if figures_dir:
        from .figures import render_report_figures

        render_report_figures(report, figures_dir)


def main(argv=None) -> int:
    _thread_cap()
    parser = argparse.ArgumentParser(
        prog="cokinetic",
        description="verification toolkit for co-Hamiltonian isotopies on "
                    "flat cosymplectic models")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--only", help="run a single named task")
    p_run.add_argument("--out", help="write the JSON report here")
    p_run.add_argument("--csv", help="write per-task CSV files to this directory")
    p_run.add_argument("--figures", help="render per-task figures to this directory")

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario")

    p_suite = sub.add_parser("suite", help="run a packaged verification suite")
    p_suite.add_argument("name", choices=("algebra", "lengths", "reparam",
                                          "lift", "fixpoints"))
    p_suite.add_argument("--out", help="write the JSON report here")
    p_suite.add_argument("--csv", help="write per-task CSV files to this directory")
    p_suite.add_argument("--figures", help="render per-task figures to this directory")

    args = parser.parse_args(argv)
    try:
        if args.cmd == "validate":
            load_scenario(args.scenario)
            print(f"{args.scenario}: valid")
            return 0
        if args.cmd == "run":
            scenario = load_scenario(args.scenario)
            report = run(scenario, only=args.only)
        else:
            from .suites import built_in_suite

            report = run(built_in_suite(args.name))
        _emit(report, args.out, args.csv, args.figures)
        return 0 if report.passed else 1
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
