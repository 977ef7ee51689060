#!/usr/bin/env python3
"""
Verification Suite Runner
Runs the equality, invariance, psh and nonconvex suites and archives the results
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse
import logging

from app.config import OUTPUT_DIR, default_seed
from app.services.verification_pipeline import SUITES, VerificationPipeline
from app.database.database import SessionLocal, create_tables

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

DEFAULT_TASKS = {"equality": 50, "invariance": 20, "psh": 100, "nonconvex": 1}


def parse_args(argv=None):
    p = argparse.ArgumentParser(description="Run every verification suite and archive the runs.")
    p.add_argument("--suites", nargs="+", choices=SUITES, default=list(SUITES))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--no-archive", action="store_true")
    return p.parse_args(argv)


def main(argv=None) -> int:
    """Run the selected suites one after another"""
    args = parse_args(argv)
    seed = default_seed() if args.seed is None else args.seed

    print("Starting Tetrablock Verification Suites")
    print("=" * 50)

    create_tables()
    db = SessionLocal()
    all_passed = True

    try:
        pipeline = VerificationPipeline(seed, workers=args.workers, budget=args.budget)
        for suite in args.suites:
            print(f"Running {suite} suite ({DEFAULT_TASKS[suite]} tasks, seed {seed})...")
            report = pipeline.run_suite(suite, DEFAULT_TASKS[suite])
            pipeline.print_summary(report)

            path = os.path.join(OUTPUT_DIR, f"{suite}_reports.jsonl")
            pipeline.save_reports(report, path)
            print(f"\nDetailed results saved to: {path}")
            if not args.no_archive:
                run_id = pipeline.archive_run(report, db)
                print(f"Archived as run #{run_id}")
            all_passed = all_passed and pipeline.all_passed(report)

    except Exception as e:
        logger.error(f"Verification failed: {e}")
        print(f"Error: {e}")
        return 1

    finally:
        db.close()

    print("All suites passed." if all_passed else "Some tasks did not pass; see the reports.")
    return 0 if all_passed else 1

if __name__ == "__main__":
    sys.exit(main())
