#!/usr/bin/env python3
"""
PHC Facility Assignment - Complete Experiment Pipeline
Baseline, Sim-ML dataset and training, three assignment scenarios,
compliance sweep and the merged report
"""

import os
import sys
import time

import main as cli

STEPS = [
    ("Baseline operational outcomes", ["simulate", "--config", "configs/baseline.yaml"]),
    ("Sim-ML dataset", ["dataset", "--config", "configs/baseline.yaml"]),
    ("KNN training and MAPE tables", ["train-eval", "--config", "configs/baseline.yaml",
                                      "--dataset", "{out}/baseline/dataset.csv"]),
    ("Assignment with actual LOS", ["assign", "--config", "configs/rthfa_actual.yaml"]),
    ("Assignment with the AQT predictor", ["assign", "--config", "configs/rthfa_aqt.yaml"]),
    ("Assignment with the Sim-ML predictor", ["assign", "--config", "configs/rthfa_simml.yaml"]),
    ("Compliance sweep", ["sweep", "--config", "configs/rthfa_actual.yaml",
                          "--out", "{out}/compliance_sweep"]),
    ("Merged report", ["report", "--results", "{out}"]),
]


def print_banner():
    """Print pipeline banner"""
    print("=" * 70)
    print("🏥  PHC NETWORK SIMULATION & REAL-TIME FACILITY ASSIGNMENT")
    print("=" * 70)
    print("🎯 Complete experiment pipeline")
    print("📊 Results go to $PHC_OUTPUT_DIR (default: results/)")
    print("=" * 70)
    print()


def check_dependencies():
    """Check the interpreter and the scientific stack"""
    print("🔍 Checking system dependencies...")
    if sys.version_info < (3, 8):
        print("❌ Python 3.8+ required")
        return False
    print(f"✅ Python {sys.version_info.major}.{sys.version_info.minor}")
    try:
        import numpy, pandas, pydantic, scipy, sklearn, yaml  # noqa: F401,E401
    except ImportError as e:
        print(f"❌ Missing package: {e.name}. Run: python setup.py")
        return False
    print("✅ Scientific stack available")
    return True


def main():
    """Run every pipeline step in order; stop at the first failure"""
    print_banner()
    if not check_dependencies():
        return 1

    out = os.getenv("PHC_OUTPUT_DIR", "results")
    extra = sys.argv[1:]
    started = time.time()
    for number, (title, argv) in enumerate(STEPS, start=1):
        print(f"\n▶️  [{number}/{len(STEPS)}] {title}")
        argv = [part.format(out=out) for part in argv]
        if argv[0] != "report":
            argv += extra
        step_started = time.time()
        code = cli.main(argv)
        if code != cli.EXIT_OK:
            print(f"❌ {title} failed (exit code {code})")
            return code
        print(f"✅ {title} done in {time.time() - step_started:.1f}s")

    print(f"\n🏁 Pipeline finished in {(time.time() - started) / 60:.1f} minutes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
