"""INI experiment configuration.

Each section names one experiment (``shape_sweep``, ``pfa``, ``pd`` or
``estimate``); a file may hold several. Every key is parsed and range
checked before any work starts, and all problems are reported together.

Example::

    [pfa]
    p = 8
    n_list = 8, 16, 32
    pfa_targets = 0.01, 0.05
    trials = 2000
    estimators = TYL, RegTYL
    master_seed = 7
"""

import configparser
import hashlib
import os
from dataclasses import dataclass, field

from .detection import ESTIMATORS, PdConfig, PfaConfig
from .errors import ConfigError
from .shape_experiment import ShapeSweepConfig

__all__ = ["ExperimentConfig", "load_config", "parse_config", "SEED_ENV", "FULL_FIDELITY_TRIALS"]

SEED_ENV = "SCATTERSHRINK_SEED"
FULL_FIDELITY_TRIALS = {"shape_sweep": 1000, "pfa": 10000, "pd": 5000}


def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _ints(s):
    return tuple(int(x) for x in s.split(",") if x.strip())


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _names(s):
    return tuple(x.strip() for x in s.split(",") if x.strip())


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _str(s):
    return s.strip()


def _pos(v):
    return v > 0


def _all(pred):
    return lambda vs: len(vs) > 0 and all(pred(v) for v in vs)


def _open01(v):
    return 0 < v < 1


SHAPE_ESTIMATORS = ("TYL", "RegTYL", "CWH", "RegTYL-oracle", "RegTYL-plugin")

# key -> (parser, validity predicate, description of the valid range)
SCHEMAS = {
    "shape_sweep": {
        "p": (_int, lambda v: v >= 2, "integer >= 2"),
        "n_list": (_ints, _all(_pos), "positive integers"),
        "rho_list": (_floats, _all(_open01), "values in (0, 1)"),
        "alpha_grid": (_floats, _all(_open01), "values in (0, 1)"),
        "trials": (_int, lambda v: v >= 0, "integer >= 0"),
        "estimators": (_names, _all(lambda e: e in SHAPE_ESTIMATORS), f"subset of {SHAPE_ESTIMATORS}"),
        "master_seed": (_int, lambda v: v >= 0, "integer >= 0"),
        "tol": (_float, _pos, "positive"),
        "max_iter": (_int, _pos, "positive integer"),
        "output_path": (_str, bool, "file name"),
    },
    "pfa": {
        "p": (_int, lambda v: v >= 2, "integer >= 2"),
        "n_list": (_ints, _all(_pos), "positive integers"),
        "nu": (_float, _pos, "positive"),
        "pfa_targets": (_floats, _all(_open01), "values in (0, 1)"),
        "trials": (_int, lambda v: v >= 0, "integer >= 0"),
        "estimators": (_names, _all(lambda e: e in ESTIMATORS), f"subset of {ESTIMATORS}"),
        "master_seed": (_int, lambda v: v >= 0, "integer >= 0"),
        "clutter": (_str, lambda v: v in ("k", "normal"), "'k' or 'normal'"),
        "include_known": (_bool, lambda v: True, "boolean"),
        "tol": (_float, _pos, "positive"),
        "max_iter": (_int, _pos, "positive integer"),
        "output_path": (_str, bool, "file name"),
    },
    "pd": {
        "p": (_int, lambda v: v >= 2, "integer >= 2"),
        "n": (_int, _pos, "positive integer"),
        "nu": (_float, _pos, "positive"),
        "sigma2": (_float, _pos, "positive"),
        "pfa": (_float, _open01, "value in (0, 1)"),
        "scr_grid_db": (_floats, lambda vs: len(vs) > 0, "list of dB values"),
        "trials": (_int, lambda v: v >= 0, "integer >= 0"),
        "estimators": (_names, _all(lambda e: e in ESTIMATORS), f"subset of {ESTIMATORS}"),
        "master_seed": (_int, lambda v: v >= 0, "integer >= 0"),
        "clutter": (_str, lambda v: v in ("k", "normal"), "'k' or 'normal'"),
        "include_known": (_bool, lambda v: True, "boolean"),
        "tol": (_float, _pos, "positive"),
        "max_iter": (_int, _pos, "positive integer"),
        "output_path": (_str, bool, "file name"),
    },
    "estimate": {
        "input": (_str, bool, "path to a data file"),
        "estimator": (_str, lambda v: v in ("scm", "glc", "gaussian", "huber", "tyler", "reg-tyler", "cwh"),
                      "one of scm, glc, gaussian, huber, tyler, reg-tyler, cwh"),
        "alpha": (_float, lambda v: v >= 0, "nonnegative"),
        "beta": (_float, _pos, "positive"),
        "q": (_float, _open01, "value in (0, 1)"),
        "tol": (_float, _pos, "positive"),
        "max_iter": (_int, _pos, "positive integer"),
        "oracle": (_bool, lambda v: True, "boolean"),
        "output_path": (_str, bool, "file name"),
    },
}

_FACTORIES = {"shape_sweep": ShapeSweepConfig, "pfa": PfaConfig, "pd": PdConfig}


@dataclass
class ExperimentConfig:
    """One parsed section. ``params`` holds the typed keys given in the file."""

    experiment: str
    params: dict = field(default_factory=dict)

    def build(self, master_seed=None, trials=None):
        """Instantiate the experiment's run configuration."""
        kw = {k: v for k, v in self.params.items() if k != "output_path"}
        if master_seed is not None:
            kw["master_seed"] = master_seed
        if trials is not None:
            kw["trials"] = trials
        return _FACTORIES[self.experiment](**kw)

    @property
    def output_name(self):
        return self.params.get("output_path", f"{self.experiment}.csv")


def parse_config(text):
    """Parse INI text into a list of :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    problems = []
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from None

    configs = []
    for section in parser.sections():
        if section not in SCHEMAS:
            problems.append(f"[{section}]: unknown experiment (expected one of {sorted(SCHEMAS)})")
            continue
        schema = SCHEMAS[section]
        params = {}
        for key, raw in parser.items(section):
            if key not in schema:
                problems.append(f"[{section}] {key}: unknown key")
                continue
            parse, valid, desc = schema[key]
            try:
                value = parse(raw)
            except ValueError:
                problems.append(f"[{section}] {key} = {raw!r}: expected {desc}")
                continue
            if not valid(value):
                problems.append(f"[{section}] {key} = {raw!r}: expected {desc}")
                continue
            params[key] = value
        if section == "estimate" and "input" not in params:
            problems.append("[estimate] input: required")
        if section == "estimate" and "estimator" not in params:
            problems.append("[estimate] estimator: required")
        configs.append(ExperimentConfig(section, params))
    if not configs and not problems:
        problems.append("no experiment sections found")
    if problems:
        raise ConfigError(problems)
    return configs


def load_config(path):
    """Read and parse a configuration file; returns ``(configs, sha256)``."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from None
    return parse_config(raw.decode("utf-8")), hashlib.sha256(raw).hexdigest()


def env_seed():
    value = os.environ.get(SEED_ENV)
    if value is None or value.strip() == "":
        return None
    try:
        seed = int(value)
    except ValueError:
        raise ConfigError([f"{SEED_ENV}={value!r}: expected a nonnegative integer"]) from None
    if seed < 0:
        raise ConfigError([f"{SEED_ENV}={value!r}: expected a nonnegative integer"])
    return seed
