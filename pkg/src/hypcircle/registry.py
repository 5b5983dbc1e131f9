"""
Discovers and validates experiment presets from a directory tree.
"""

import logging
import os
from typing import Dict, List, Optional

import yaml
from pydantic import ValidationError

from .schema import ExperimentConfig

logger = logging.getLogger(__name__)


class ExperimentRegistry:
    """
    Scans a directory recursively, validates YAML files against
    ExperimentConfig and keeps the valid presets by name.
    """
    def __init__(self, experiments_dir: str):
        if not os.path.isdir(experiments_dir):
            raise FileNotFoundError(f"The specified experiments directory does not exist: {experiments_dir}")
        self.experiments_dir = experiments_dir
        self.presets: Dict[str, ExperimentConfig] = {}
        self.sources: Dict[str, str] = {}
        self.error_count = 0
        self._load_presets()

    def _load_presets(self) -> None:
        logger.info("🔍 Scanning for experiment presets in '%s' and its subdirectories...", self.experiments_dir)
        for root, dirs, files in os.walk(self.experiments_dir):
            dirs.sort()
            for filename in sorted(files):
                if not filename.endswith((".yaml", ".yml")):
                    continue
                file_path = os.path.join(root, filename)
                try:
                    with open(file_path, "r", encoding="utf-8") as f:
                        raw_data = yaml.safe_load(f)
                    if not isinstance(raw_data, dict):
                        continue
                    raw_data.setdefault("name", os.path.splitext(filename)[0])
                    config = ExperimentConfig(**raw_data)
                    if config.name in self.presets:
                        logger.warning("Duplicate preset name '%s' in %s; keeping %s",
                                       config.name, file_path, self.sources[config.name])
                        self.error_count += 1
                        continue
                    self.presets[config.name] = config
                    self.sources[config.name] = file_path
                except ValidationError as e:
                    logger.warning("Invalid preset %s: %d validation errors", file_path, e.error_count())
                    self.error_count += 1
                except (OSError, yaml.YAMLError) as e:
                    logger.warning("Could not read preset %s: %s", file_path, e)
                    self.error_count += 1

        logger.info("✅ Scan complete. Loaded %d presets.", len(self.presets))
        if self.error_count > 0:
            logger.warning("⚠️ Encountered %d errors during loading.", self.error_count)

    def get(self, name: str) -> Optional[ExperimentConfig]:
        return self.presets.get(name)

    def names(self) -> List[str]:
        return sorted(self.presets)

    def __len__(self) -> int:
        return len(self.presets)

    def __iter__(self):
        return iter(self.presets[name] for name in self.names())

    def __contains__(self, name: str) -> bool:
        return name in self.presets
