"""Run the acceptance suite and print one PASS/FAIL line per criterion."""
import argparse
import sys

from igdyn.acceptance import CRITERIA


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    args = parser.parse_args()
    ok = True
    for number, fn in enumerate(CRITERIA, 1):
        if args.only and number not in args.only:
            continue
        result = fn()
        print(result.line(), flush=True)
        ok &= result.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
