"""
Runs every bundled suite concurrently and writes one combined report.

    python -m batch.suite_workflow [--truncate N] [--output report.json]

Each pipeline is sequential; pipelines share nothing, so they run on a
thread pool of SUITE_WORKERS threads.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Optional

from geops.config import LOG_FORMAT, LOG_LEVEL, SUITE_WORKERS
from geops.errors import GeopsError
from geops.models import Report
from geops.suites import SUITE_NAMES, load_suites, run_suite

logging.basicConfig(level=LOG_LEVEL if LOG_LEVEL else "INFO", format=LOG_FORMAT)


def run_all(truncation: Optional[int] = None, names=SUITE_NAMES, workers: int = SUITE_WORKERS) -> Report:
    """
    Runs the named suites and collects them into a single report whose
    results are keyed by suite name, in a fixed order.
    """
    definitions = load_suites()
    report = Report(command="suite-batch", inputs={"suites": list(names), "truncation": truncation})
    results: dict = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(run_suite, name, truncation, definitions): name for name in names}
        for future in as_completed(futures):
            name = futures[future]
            try:
                results[name] = future.result()
                logging.info("suite %s finished: all_pass=%s", name, results[name]["all_pass"])
            except GeopsError as e:
                logging.error("suite %s failed: %s", name, e)
                results[name] = {"suite": name, "all_pass": False, "error": str(e)}
            except Exception as e:
                logging.error("suite %s crashed: %s", name, e, exc_info=True)
                results[name] = {"suite": name, "all_pass": False, "error": repr(e)}
    report.results = {name: results[name] for name in names}
    failed = [name for name in names if not results[name]["all_pass"]]
    if failed:
        report.add_warning("failing suites: " + ", ".join(failed), deficient=True)
    return report


def main():
    """
    Main function to run the suite workflow.
    """
    ap = argparse.ArgumentParser(description="Run all bundled example suites.")
    ap.add_argument("--truncate", type=int, default=None)
    ap.add_argument("--output", default=None, help="write the JSON report here instead of stdout")
    args = ap.parse_args()

    logging.info("Starting suite workflow with %d workers...", SUITE_WORKERS)
    report = run_all(args.truncate)
    text = report.to_json()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logging.info("Report written to %s", args.output)
    else:
        print(text)
    sys.exit(1 if report.deficient else 0)


if __name__ == "__main__":
    main()
