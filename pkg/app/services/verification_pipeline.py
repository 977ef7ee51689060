from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple
import json
import logging
import sys

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.config import resolve_tolerances
from app.services.domains import GAUGE_TEST_PAIRS, midpoint_gauge_excess, phi_lambda, rho
from app.services.geodesic_factory import (
    random_inside_t_spec,
    random_nontriangular_spec,
    random_triangular_spec,
    random_trivial_spec,
)
from app.services.sampling import (
    generator,
    planted_nu_disc,
    random_disc_points,
    sample_tetrablock,
    spawn_seeds,
)
from app.services.transforms import TetraAutParams
from app.services.verification_service import (
    check_equality_on_pairs,
    check_invariance,
    find_nonconvexity_witness,
    psh_spot_check,
    rho_radial_monotone,
)
from app.utils.formatting import atomic_write, to_jsonable

logger = logging.getLogger(__name__)

SUITES = ("equality", "invariance", "psh", "nonconvex")
EQUALITY_FAMILIES = (
    "trivial",
    "inside_t",
    "triangular_identity",
    "triangular_contracted",
    "nontriangular",
)
HOMOGENEITY_TOL = 1e-12
GAUGE_EXCESS_TOL = 1e-12
EQUALITY_PAIRS = 3

Task = Tuple[str, int, np.random.SeedSequence, Dict[str, Any]]


def random_spec_for_family(family: str, rng: np.random.Generator):
    if family == "trivial":
        return random_trivial_spec(rng)
    if family == "inside_t":
        return random_inside_t_spec(rng)
    if family == "triangular_identity":
        return random_triangular_spec(rng, "identity")
    if family == "triangular_contracted":
        return random_triangular_spec(rng, "contracted")
    if family == "nontriangular":
        return random_nontriangular_spec(rng, feasible=True)
    raise ValueError(f"Unknown geodesic family {family!r}")


def _equality_task(index: int, rng: np.random.Generator, params: Dict[str, Any]) -> Dict[str, Any]:
    family = EQUALITY_FAMILIES[index % len(EQUALITY_FAMILIES)]
    spec = random_spec_for_family(family, rng)
    lam = random_disc_points(rng, 2 * EQUALITY_PAIRS, 0.9).reshape(EQUALITY_PAIRS, 2)
    record = check_equality_on_pairs(spec, lam, params["tolerances"], f"{family}-{index:05d}")
    record["family"] = family
    return record


def _invariance_task(index: int, rng: np.random.Generator, params: Dict[str, Any]) -> Dict[str, Any]:
    p = TetraAutParams.random(rng)
    f, expected = planted_nu_disc(rng)
    spec = random_triangular_spec(rng, "identity")
    lam = random_disc_points(rng, 2, 0.9)
    return check_invariance(p, f, expected, spec, lam[0], lam[1], f"invariance-{index:05d}")


def _psh_task(index: int, rng: np.random.Generator, params: Dict[str, Any]) -> Dict[str, Any]:
    z0 = sample_tetrablock(rng, 1)[0]
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v /= np.linalg.norm(v)
    r = float(rng.uniform(0.01, 0.3))
    lam = complex(random_disc_points(rng, 1, 1.0)[0])
    sub_mean = psh_spot_check(z0, v, r, n_nodes=params.get("samples", 512))
    base = float(rho(z0))
    homogeneity = abs(float(rho(phi_lambda(z0, lam))) - abs(lam) * base)
    monotone = rho_radial_monotone(z0)
    passed = sub_mean and monotone and homogeneity <= HOMOGENEITY_TOL * max(1.0, base)
    return {
        "spec_id": f"psh-{index:05d}",
        "z0": z0,
        "direction": v,
        "radius": r,
        "sub_mean_value": sub_mean,
        "homogeneity_error": homogeneity,
        "radial_monotone": monotone,
        "status": "pass" if passed else "fail",
    }


def _nonconvex_task(index: int, rng: np.random.Generator, params: Dict[str, Any]) -> Dict[str, Any]:
    seed = int(rng.integers(0, 2 ** 63 - 1))
    report = find_nonconvexity_witness(seed, params.get("budget", 100_000))
    record = report.to_dict()
    record["spec_id"] = f"witness-{index:05d}"
    if not report.found:
        record["status"] = "inconclusive"
    else:
        confirmed = report.alt_midpoint_margin is not None and report.alt_midpoint_margin < 0
        record["status"] = "pass" if confirmed else "fail"
    return record


TASK_RUNNERS = {
    "equality": _equality_task,
    "invariance": _invariance_task,
    "psh": _psh_task,
    "nonconvex": _nonconvex_task,
}


def run_task(task: Task) -> Dict[str, Any]:
    """Run one seeded task; errors become failed records"""
    suite, index, seed_sequence, params = task
    rng = generator(seed_sequence)
    try:
        record = TASK_RUNNERS[suite](index, rng, params)
    except Exception as e:
        logger.error(f"Task {suite}#{index} raised {type(e).__name__}: {e}")
        record = {"spec_id": f"{suite}-{index:05d}", "status": "fail", "note": f"{type(e).__name__}: {e}"}
    record["task_index"] = index
    return record


class VerificationPipeline:
    """Seeded verification suites with ordered, reproducible reports"""

    def __init__(
        self,
        seed: int,
        tolerances: Optional[Dict[str, float]] = None,
        workers: int = 1,
        progress: bool = True,
        samples: int = 512,
        budget: int = 100_000,
    ):
        self.seed = int(seed)
        self.tolerances = resolve_tolerances(tolerances)
        self.workers = max(1, int(workers))
        self.progress = progress
        self.samples = samples
        self.budget = budget

    def _tasks(self, suite: str, n: int) -> List[Task]:
        params = {"tolerances": self.tolerances, "samples": self.samples, "budget": self.budget}
        return [(suite, i, seq, params) for i, seq in enumerate(spawn_seeds(self.seed, n))]

    def run_suite(self, suite: str, n: int) -> Dict[str, Any]:
        """Run n tasks of a suite and assemble the report"""
        if suite not in SUITES:
            raise ValueError(f"Unknown suite {suite!r}; choose from {', '.join(SUITES)}")
        if n < 1:
            raise ValueError("A suite needs at least one task")
        logger.info(f"Starting {suite} suite: {n} tasks, seed {self.seed}, {self.workers} worker(s)")
        tasks = self._tasks(suite, n)
        show = self.progress and sys.stderr.isatty()

        records = []
        if self.workers > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                for record in tqdm(pool.map(run_task, tasks), total=n, desc=suite, disable=not show):
                    records.append(record)
                    logger.info(f"Completed task {record['task_index']} ({record['status']})")
        else:
            for task in tqdm(tasks, desc=suite, disable=not show):
                record = run_task(task)
                records.append(record)
                logger.info(f"Completed task {record['task_index']} ({record['status']})")

        if suite == "nonconvex":
            records.extend(self._nonconvex_controls(n))

        report = self._generate_report(suite, records)
        logger.info(f"{suite} suite completed")
        return report

    def _nonconvex_controls(self, start: int) -> List[Dict[str, Any]]:
        control = find_nonconvexity_witness(self.seed, self.budget, domain="polydisc").to_dict()
        control.update(spec_id="polydisc-control", task_index=start, status="fail" if control["found"] else "pass")
        records = [control]
        for k, (w, z) in enumerate(GAUGE_TEST_PAIRS):
            excess = float(midpoint_gauge_excess(w, z))
            records.append({
                "spec_id": f"gauge-pair-{k}",
                "task_index": start + 1 + k,
                "w": list(map(complex, w)),
                "z": list(map(complex, z)),
                "rho_w": float(rho(w)),
                "rho_z": float(rho(z)),
                "gauge_excess": excess,
                "status": "pass" if excess <= GAUGE_EXCESS_TOL else "fail",
            })
        return records

    def _generate_report(self, suite: str, records: List[Dict[str, Any]]) -> Dict[str, Any]:
        statuses = [r["status"] for r in records]
        summary = {
            "n_tasks": len(records),
            "n_pass": statuses.count("pass"),
            "n_fail": statuses.count("fail"),
            "n_inconclusive": statuses.count("inconclusive"),
        }
        gaps = [r["gap"] for r in records if isinstance(r.get("gap"), float)]
        if gaps:
            summary["max_gap"] = max(gaps)
        return {
            "suite": suite,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "summary": summary,
            "reports": records,
        }

    @staticmethod
    def all_passed(report: Dict[str, Any]) -> bool:
        summary = report["summary"]
        return summary["n_fail"] == 0 and summary["n_inconclusive"] == 0

    def save_reports(self, report: Dict[str, Any], filepath: str, fmt: str = "json") -> None:
        """JSON lines (one record per line) or a CSV table; written atomically"""
        records = to_jsonable(report["reports"])
        if fmt == "json":
            text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
        elif fmt == "csv":
            text = pd.json_normalize(records).to_csv(index=False, float_format="%.17g")
        else:
            raise ValueError(f"Unknown output format {fmt!r}")
        atomic_write(filepath, text)
        logger.info(f"Reports saved to {filepath}")

    def archive_run(self, report: Dict[str, Any], db) -> int:
        """Store the run and its reports; returns the run id"""
        from app.database.models import ReportRecord, VerificationRun

        summary = report["summary"]
        run = VerificationRun(
            suite=report["suite"],
            seed=report["seed"],
            n_tasks=summary["n_tasks"],
            n_pass=summary["n_pass"],
            n_fail=summary["n_fail"],
            n_inconclusive=summary["n_inconclusive"],
            config_json=json.dumps({"tolerances": report["tolerances"], "samples": self.samples,
                                    "budget": self.budget, "workers": self.workers}, sort_keys=True),
        )
        for record in to_jsonable(report["reports"]):
            run.reports.append(ReportRecord(
                task_index=record["task_index"],
                status=record["status"],
                payload=json.dumps(record, sort_keys=True),
            ))
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info(f"Archived {report['suite']} run as #{run.id}")
        return run.id

    def print_summary(self, report: Dict[str, Any]) -> None:
        summary = report["summary"]
        print("\n" + "=" * 60)
        print(f"VERIFICATION SUITE: {report['suite'].upper()}")
        print("=" * 60)
        print(f"Seed: {report['seed']}")
        print(f"Tasks: {summary['n_tasks']}")
        print(f"Passed: {summary['n_pass']}")
        print(f"Failed: {summary['n_fail']}")
        print(f"Inconclusive: {summary['n_inconclusive']}")
        if "max_gap" in summary:
            print(f"Largest gap: {summary['max_gap']:.3e}")

        failures = [r for r in report["reports"] if r["status"] != "pass"]
        if failures:
            print("\nNOT PASSED:")
            print("-" * 40)
            for record in failures[:20]:
                print(f"  {record.get('spec_id')}: {record['status']} {record.get('note', '')}")
        print("\n" + "=" * 60)
