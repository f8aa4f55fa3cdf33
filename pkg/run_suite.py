import logging
import sys

from dotenv import load_dotenv

# This script runs one bundled example suite and prints its report.
#
# Settings (truncation, Gevrey window thresholds, log level, suites file)
# can be placed in a .env file in the project root; see geops/config.py.
#
# To run the script, execute this command from the project root directory:
#   python run_suite.py airy


def main():
    """
    Loads environment variables, runs the named suite and prints the report.
    """
    load_dotenv()
    # config reads the environment at import time, so import after load_dotenv
    from geops.config import LOG_FORMAT, LOG_LEVEL
    from geops.models import Report
    from geops.suites import SUITE_NAMES, run_suite

    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
    name = sys.argv[1] if len(sys.argv) > 1 else "airy"
    if name not in SUITE_NAMES:
        print(f"Unknown suite {name!r}; choose from: {', '.join(SUITE_NAMES)}")
        sys.exit(2)

    try:
        result = run_suite(name)
        report = Report(command="suite", inputs={"suite": name}, results=result)
        print(report.to_json())
        sys.exit(0 if result["all_pass"] else 1)
    except Exception as e:
        logging.error("Suite %s failed: %s", name, e, exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
