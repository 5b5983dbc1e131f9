"""
Runs every experiment preset in parallel processes and prints a pass/fail summary.

Usage:
  - python scripts/run_presets.py
  - python scripts/run_presets.py --only count --workers 2
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Dict, List, Tuple

from tqdm import tqdm

try:
    from hypcircle.config import Experiment
    from hypcircle.errors import HypCircleError
    from hypcircle.registry import ExperimentRegistry
    from hypcircle.runner import run_experiment
    from hypcircle.schema import ExperimentConfig
except ImportError as e:
    print(f"FATAL: Could not import hypcircle. Ensure you have run 'pip install -e .'. Error: {e}")
    sys.exit(1)

EXPERIMENTS_DIR = "experiments"


# Top-level so it can be pickled by multiprocessing.
def run_single_preset(config_dict: Dict) -> Tuple[str, List[str]]:
    """Rebuild the preset from its JSON dump, run it, and return the names of failed checks."""
    name = config_dict.get("name", "unknown_preset")
    try:
        experiment = Experiment.from_schema(ExperimentConfig(**config_dict))
        manifest = run_experiment(experiment)
        failures = [f"{c.name}: {c.details}" for c in manifest.checks if not c.passed]
        return name, failures + manifest.errors
    except HypCircleError as e:
        return name, [f"{type(e).__name__}: {e}"]


def main():
    parser = argparse.ArgumentParser(description="Run all hypcircle experiment presets.")
    parser.add_argument("--experiments-dir", default=EXPERIMENTS_DIR)
    parser.add_argument("--only", help="Run only presets of this subcommand")
    parser.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))
    parser.add_argument("--out", help="Override the output directory of every preset")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                        stream=sys.stderr)
    print("=" * 80)
    print("🚀 Starting hypcircle preset run 🚀")
    print("=" * 80)

    try:
        registry = ExperimentRegistry(args.experiments_dir)
    except FileNotFoundError as e:
        print(f"FATAL: {e}")
        sys.exit(1)

    configs = [c for c in registry if args.only is None or c.subcommand == args.only]
    if not configs:
        print("No presets found to run.")
        return
    dumps = []
    for config in configs:
        data = config.model_dump(mode="json")
        if args.out:
            data["out"] = args.out
        dumps.append(data)

    failed: Dict[str, List[str]] = {}
    passed_count = 0
    print(f"Found {len(dumps)} presets. Running with {args.workers} workers...")
    with ProcessPoolExecutor(max_workers=args.workers) as executor:
        futures = [executor.submit(run_single_preset, d) for d in dumps]
        for future in tqdm(as_completed(futures), total=len(futures), desc="Presets", file=sys.stderr):
            name, errors = future.result()
            if errors:
                failed[name] = errors
            else:
                passed_count += 1

    print("\n" + "=" * 80)
    print("📊 Preset Run Summary")
    print("=" * 80)
    if not failed:
        print(f"🎉 All {passed_count} presets passed their checks.")
    else:
        print(f"✅ {passed_count} presets passed.")
        print(f"❌ {len(failed)} presets failed:")
        for name in sorted(failed):
            print(f"  - ❌ {name}:")
            for error in failed[name]:
                print(f"    - {error}")
    print("=" * 80)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
