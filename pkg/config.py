"""
Configuration module for the fixed-time tracking simulator.

Loads environment variables and YAML project defaults.
"""

import logging
import os
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Config:
    """Environment configuration from .env file."""

    OUTPUT_DIR: str = os.getenv('FXTRACK_OUTPUT_DIR', 'output')
    LOG_LEVEL: str = os.getenv('FXTRACK_LOG_LEVEL', 'INFO').upper()
    JOBS: str = os.getenv('FXTRACK_JOBS', '1')  # parsed by validate()
    PROJECT_CONFIG: str = os.getenv('FXTRACK_PROJECT_CONFIG', 'project_config.yaml')

    @classmethod
    def validate(cls) -> bool:
        """Validate environment settings."""
        if cls.LOG_LEVEL not in LOG_LEVELS:
            raise ValueError(f"FXTRACK_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {cls.LOG_LEVEL}")
        cls.jobs()
        return True

    @classmethod
    def jobs(cls) -> int:
        """FXTRACK_JOBS as a positive integer."""
        try:
            jobs = int(cls.JOBS)
        except (TypeError, ValueError):
            raise ValueError(f"FXTRACK_JOBS must be an integer, got {cls.JOBS!r}") from None
        if jobs < 1:
            raise ValueError(f"FXTRACK_JOBS must be at least 1, got {jobs}")
        return jobs


class ProjectConfig:
    """Simulation defaults from YAML file."""

    def __init__(self, config_path: str = 'project_config.yaml'):
        self.config_path = config_path
        self._config = self._load_config()

    def _load_config(self) -> dict:
        """Load configuration from YAML file."""
        try:
            with open(self.config_path, 'r') as f:
                config = yaml.safe_load(f)
                return config if config else {}
        except FileNotFoundError:
            logging.getLogger(__name__).warning("%s not found. Using defaults.", self.config_path)
            return self._default_config()

    def _default_config(self) -> dict:
        """Return default configuration."""
        return {
            'project': {
                'name': 'fxtrack',
                'description': 'Fixed-time cooperative tracking simulator'
            },
            'simulation': {
                'dt': 1e-4,
                'decimation': 100,
                'integrator': 'euler',
                'seed': 0
            },
            'initial_state': {
                'low': -10.0,
                'high': 10.0
            },
            'report': {
                'smc_floor': 1e-2,
                'smc_factor': 10.0,
                'network_floor': 5e-2,
                'network_factor': 20.0
            },
            'csv': {
                'precision': 17
            }
        }

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key: Dot-separated path (e.g., 'simulation.dt')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default

            if value is None:
                return default

        return value

    def scenario_defaults(self) -> Dict[str, Any]:
        """Fallbacks for settings a scenario file leaves out."""
        return {
            'dt': float(self.get('simulation.dt', 1e-4)),
            'decimation': int(self.get('simulation.decimation', 100)),
            'integrator': self.get('simulation.integrator', 'euler'),
            'seed': int(self.get('simulation.seed', 0)),
            'init_low': float(self.get('initial_state.low', -10.0)),
            'init_high': float(self.get('initial_state.high', 10.0)),
        }

    def tolerances(self) -> Dict[str, float]:
        """Convergence tolerance floors and rho*dt factors."""
        return {
            'smc_floor': float(self.get('report.smc_floor', 1e-2)),
            'smc_factor': float(self.get('report.smc_factor', 10.0)),
            'network_floor': float(self.get('report.network_floor', 5e-2)),
            'network_factor': float(self.get('report.network_factor', 20.0)),
        }

    def csv_precision(self) -> int:
        return int(self.get('csv.precision', 17))

    def reload(self) -> None:
        """Reload configuration from file."""
        self._config = self._load_config()

