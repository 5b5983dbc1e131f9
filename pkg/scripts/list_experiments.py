"""
Catalogs the YAML experiment presets by category.

The category of a preset is its sub-directory under 'experiments'.

Usage:
  - python scripts/list_experiments.py (Prints to console)
  - python scripts/list_experiments.py --output-markdown (Generates AVAILABLE_EXPERIMENTS.md)
"""

import argparse
import os
from collections import defaultdict

try:
    from hypcircle.registry import ExperimentRegistry
except ImportError as e:
    raise SystemExit(f"FATAL: Could not import hypcircle. Ensure you have run 'pip install -e .'. Error: {e}")

EXPERIMENTS_DIR = "experiments"
OUTPUT_FILENAME = "AVAILABLE_EXPERIMENTS.md"


def discover_experiments(experiments_dir: str = EXPERIMENTS_DIR):
    """Valid presets grouped by sub-directory, each group sorted by name."""
    try:
        registry = ExperimentRegistry(experiments_dir)
    except FileNotFoundError as e:
        print(f"Error: {e}")
        return None

    categorized = defaultdict(list)
    for config in registry:
        relative = os.path.relpath(os.path.dirname(registry.sources[config.name]), experiments_dir)
        category = relative if relative != "." else "general"
        description = config.description.strip().split("\n")[0] if config.description else "No description."
        categorized[category].append({
            "name": config.name,
            "subcommand": config.subcommand,
            "observable": config.observable.label(),
            "description": description,
        })
    for category in categorized:
        categorized[category].sort(key=lambda e: e["name"])
    return categorized


def print_to_console(categorized):
    print("=" * 80)
    print("✅ AVAILABLE HYPCIRCLE EXPERIMENTS")
    print("=" * 80)
    for category, experiments in sorted(categorized.items()):
        print(f"\n📁 Category: {category}")
        print("-" * (len(category) + 12))
        for e in experiments:
            print(f"  - {e['name']} [{e['subcommand']}, {e['observable']}]: {e['description']}")
    print("\n")


def write_to_markdown(categorized, output_file):
    print(f"Generating Markdown catalog at '{output_file}'...")
    with open(output_file, "w", encoding="utf-8") as f:
        f.write("# hypcircle Experiment Presets\n\n")
        f.write("This file is auto-generated by `scripts/list_experiments.py`. Do not edit manually.\n\n")
        for category, experiments in sorted(categorized.items()):
            f.write(f"## 📁 {category.replace('_', ' ').title()}\n\n")
            for e in experiments:
                f.write(f"- **`{e['name']}`** (`{e['subcommand']}`, `{e['observable']}`): {e['description']}\n")
            f.write("\n")
    print(f"✅ Successfully generated '{output_file}'.")


def main():
    parser = argparse.ArgumentParser(description="Discover and catalog hypcircle experiment presets.")
    parser.add_argument("--experiments-dir", default=EXPERIMENTS_DIR)
    parser.add_argument(
        "--output-markdown",
        action="store_true",
        help=f"Generate a '{OUTPUT_FILENAME}' file instead of printing to the console.",
    )
    args = parser.parse_args()

    experiments = discover_experiments(args.experiments_dir)
    if not experiments:
        return
    if args.output_markdown:
        write_to_markdown(experiments, OUTPUT_FILENAME)
    else:
        print_to_console(experiments)


if __name__ == "__main__":
    main()
