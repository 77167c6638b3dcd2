#!/usr/bin/env python3
"""Run the reproduction manifest and write a CSV report.

Desk profile: reduced episode counts, heaviest Monte-Carlo entries skipped
(exact chain analysis covers those numbers); intended to finish on a
workstation. Full profile: complete 20000-episode batches.
"""

import argparse
import sys
from pathlib import Path

from ifdiv.repro import run_repro, write_report

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", type=Path, default=ROOT / "repro" / "manifest.json")
    parser.add_argument("--profile", choices=("desk", "full"), default="desk")
    parser.add_argument("--out", type=Path, default=ROOT / "repro_out")
    args = parser.parse_args()

    results = run_repro(args.manifest, args.profile, args.out)
    report_path = args.out / f"report_{args.profile}.csv"
    write_report(results, report_path)
    ran = [r for r in results if r.status != "skipped"]
    failed = [r for r in ran if r.status != "pass"]
    print(f"\n{len(ran) - len(failed)}/{len(ran)} entries passed; report at {report_path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
