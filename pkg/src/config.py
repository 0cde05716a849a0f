# src/config.py

import copy
import os
import re
import yaml
from dotenv import load_dotenv

load_dotenv()

DEFAULT_CONFIG_PATH = os.path.normpath(os.path.join(os.path.dirname(__file__), '..', 'config', 'config.yaml'))

# Fallback for keys a config file leaves out; mirrors config/config.yaml
DEFAULT_CONFIG = {
    'tolerances': {
        'comparison': 1.0e-9,
        'zero_sum': 1.0e-12,
        'decomposition_identity': 1.0e-10,
        'residual_zero': 1.0e-12,
    },
    'marttree': {
        'enumeration_cap': 10_000_000,
        'bootstrap_resamples': 200,
        'mc_chunk_size': 10_000,
        'workers': 1,
    },
    'gridapprox': {
        'default_p': 2.0,
        'gamma_fraction': 0.9,
    },
    'output': {
        'format': 'json',
    },
    'logging': {
        'level': 'WARNING',
        'file': '',
    },
}

_ENV_PATTERN = re.compile(r'^\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-(.*))?\}$')


class Config:
    def __init__(self, config_path=None, config_dict=None):
        if config_path:
            loaded = self.load_config(config_path)
        elif config_dict is not None:
            loaded = self._process_config(config_dict)
        else:
            raise ValueError("Either config_path or config_dict must be provided")

        self.config_data = self._merge(DEFAULT_CONFIG, loaded or {})
        self.tolerances = self.config_data['tolerances']
        self.marttree_config = self.config_data['marttree']
        self.gridapprox_config = self.config_data['gridapprox']
        self.output_config = self.config_data['output']
        self.logging_config = self.config_data['logging']

    @property
    def tolerance(self):
        return float(self.tolerances['comparison'])

    @property
    def zero_sum_tolerance(self):
        return float(self.tolerances['zero_sum'])

    @property
    def identity_tolerance(self):
        return float(self.tolerances['decomposition_identity'])

    @property
    def residual_zero_tolerance(self):
        return float(self.tolerances['residual_zero'])

    @property
    def enumeration_cap(self):
        return int(self.marttree_config['enumeration_cap'])

    @property
    def bootstrap_resamples(self):
        return int(self.marttree_config['bootstrap_resamples'])

    @property
    def mc_chunk_size(self):
        return int(self.marttree_config['mc_chunk_size'])

    @property
    def workers(self):
        return int(self.marttree_config['workers'])

    @property
    def output_format(self):
        return str(self.output_config['format']).lower()

    def override(self, section, key, value):
        """Apply a command line override; None leaves the configured value."""
        if value is not None:
            self.config_data[section][key] = value

    @staticmethod
    def load_config(config_path):
        with open(config_path, 'r') as config_file:
            config = yaml.safe_load(config_file)

        # Process the config to replace environment variables
        return Config._process_config(config)

    @staticmethod
    def _process_config(config):
        if isinstance(config, dict):
            return {k: Config._process_config(v) for k, v in config.items()}
        elif isinstance(config, list):
            return [Config._process_config(v) for v in config]
        elif isinstance(config, str) and config.startswith('${') and config.endswith('}'):
            match = _ENV_PATTERN.match(config)
            if match is None:
                raise ValueError(f"Malformed environment reference {config}")
            env_var, default = match.group(1), match.group(2)
            value = os.environ.get(env_var)
            if value is None:
                if default is None:
                    raise ValueError(f"Environment variable {env_var} is not set")
                return default
            return value
        else:
            return config

    @staticmethod
    def _merge(defaults, overrides):
        merged = copy.deepcopy(defaults)
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = Config._merge(merged[key], value)
            else:
                merged[key] = value
        return merged

    @classmethod
    def from_dict(cls, config_dict):
        return cls(config_dict=config_dict)

    @classmethod
    def default(cls):
        """The repository config/config.yaml, or the built-in defaults when it is absent."""
        if os.path.exists(DEFAULT_CONFIG_PATH):
            return cls(config_path=DEFAULT_CONFIG_PATH)
        return cls(config_dict={})
