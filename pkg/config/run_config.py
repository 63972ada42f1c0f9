"""
Run configuration for the command-line front end

Values come from three layers: built-in defaults < a flat key=value config
file < command-line flags. Exclusive pairs (alpha/M, c/c_rule,
kappa/kappa_rule) are checked before any work starts.
"""
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from config import settings
from src.model import ModelParams, as_fraction, resolve_c, resolve_kappa

logger = logging.getLogger(__name__)

EXCLUSIVE_PAIRS: List[Tuple[str, str]] = [
    ('alpha', 'M'),
    ('c', 'c_rule'),
    ('kappa', 'kappa_rule'),
]


class ConfigError(ValueError):
    """Invalid configuration file or parameter combination"""


@dataclass
class RunConfig:
    """Fully merged parameters of one command-line run"""

    subcommand: str = ''
    # instance
    l: int = settings.DEFAULT_L
    c: Optional[int] = None
    c_rule: Optional[str] = None
    alpha: Optional[float] = None
    M: Optional[int] = None
    kappa: Optional[str] = None
    kappa_rule: Optional[str] = None
    gamma: str = str(settings.DEFAULT_GAMMA)
    # experiments
    r: int = 1
    trials: int = settings.DEFAULT_TRIALS
    seed: int = settings.MASTER_SEED
    workers: Optional[int] = None
    step_cap: int = settings.DEFAULT_STEP_CAP
    scope: str = 'single-message'
    dynamics: str = 'parallel'
    start: str = 'stored'
    radius: int = 1
    multi_step: bool = False
    adversarial: bool = False
    enforce_regime: bool = True
    l_list: str = '64,128,256'
    alpha_grid: str = str(settings.DEFAULT_ALPHA)
    distinct: bool = False
    messages: Optional[str] = None
    # output
    output: Optional[str] = None
    summary: Optional[str] = None
    timing: bool = False

    def instance_params(self) -> ModelParams:
        """Resolve rules and loads into concrete instance parameters"""
        c = self.resolved_c()
        kappa = self.resolved_kappa(c)
        if self.M is not None:
            M = self.M
        else:
            alpha = settings.DEFAULT_ALPHA if self.alpha is None else self.alpha
            M = max(1, int(round(alpha * self.l * self.l)))
        try:
            return ModelParams(l=self.l, c=c, M=M, kappa=kappa)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def resolved_c(self) -> int:
        if self.c is not None:
            return self.c
        return resolve_c(self.c_rule or 'ln', self.l)

    def resolved_kappa(self, c: int):
        if self.kappa is not None:
            return as_fraction(self.kappa)
        default_rule = 'gamma' if self.subcommand == 'retrieval' else 'max'
        return resolve_kappa(self.kappa_rule or default_rule, c, self.gamma)

    def to_dict(self) -> Dict[str, Any]:
        """All fields plus the resolved instance, for the JSON echo"""
        data = asdict(self)
        try:
            params = self.instance_params()
            data['resolved'] = {
                'l': params.l,
                'c': params.c,
                'M': params.M,
                'kappa': str(params.kappa),
                'alpha': params.alpha,
            }
        except ValueError:
            data['resolved'] = None
        return data


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_WORDS = {'true': True, 'yes': True, 'on': True, '1': True,
               'false': False, 'no': False, 'off': False, '0': False}


def _convert(key: str, raw: str) -> Any:
    kind = _FIELD_TYPES[key]
    if kind in (int, Optional[int]):
        return int(raw)
    if kind in (float, Optional[float]):
        return float(raw)
    if kind is bool:
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"expected true or false, got {raw!r}")
        return _BOOL_WORDS[word]
    return raw


def parse_config_text(text: str, origin: str = '<config>') -> Dict[str, Any]:
    """
    Parse flat key=value lines

    Blank lines and lines starting with # are skipped; keys may use - or _.

    Raises:
        ConfigError: with the line number of the first bad line
    """
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        if '=' not in stripped:
            raise ConfigError(f"{origin}:{number}: expected key=value, got {stripped!r}")

        key, raw = (part.strip() for part in stripped.split('=', 1))
        key = key.replace('-', '_')
        if key == 'subcommand' or key not in _FIELD_TYPES:
            raise ConfigError(f"{origin}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{origin}:{number}: key {key!r} set twice")
        try:
            values[key] = _convert(key, raw)
        except ValueError as e:
            raise ConfigError(f"{origin}:{number}: bad value for {key}: {e}") from None
    return values


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}") from None
    return parse_config_text(text, str(path))


def _check_exclusive(values: Dict[str, Any], source: str) -> None:
    for first, second in EXCLUSIVE_PAIRS:
        if values.get(first) is not None and values.get(second) is not None:
            raise ConfigError(f"{first} and {second} are mutually exclusive ({source} sets both)")


def merge_config(subcommand: str, file_values: Optional[Dict[str, Any]] = None,
                 flag_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Merge defaults < file < flags and validate the result

    A flag setting one member of an exclusive pair drops the file value of
    the other member.
    """
    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}
    _check_exclusive(file_values, 'the config file')
    _check_exclusive(flag_values, 'the command line')

    for first, second in EXCLUSIVE_PAIRS:
        if first in flag_values:
            file_values.pop(second, None)
        if second in flag_values:
            file_values.pop(first, None)

    unknown = sorted(set(flag_values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"Unknown parameter(s): {', '.join(unknown)}")

    config = RunConfig(subcommand=subcommand, **{**file_values, **flag_values})
    validate_run_config(config)
    return config


def load_config(path: Union[str, Path], subcommand: str = '') -> RunConfig:
    """Config file values over the defaults"""
    return merge_config(subcommand, read_config_file(path))


def validate_run_config(config: RunConfig) -> None:
    """Collect every problem and raise one ConfigError"""
    errors = []

    if config.l < 2:
        errors.append(f"l must be >= 2 (got {config.l})")
    if config.c is not None and config.c < 2:
        errors.append(f"c must be >= 2 (got {config.c})")
    if config.alpha is not None and not config.alpha > 0:
        errors.append(f"alpha must be > 0 (got {config.alpha})")
    if config.M is not None and config.M < 1:
        errors.append(f"M must be >= 1 (got {config.M})")
    if config.trials < 1:
        errors.append(f"trials must be >= 1 (got {config.trials})")
    if config.workers is not None and config.workers < 1:
        errors.append(f"workers must be >= 1 (got {config.workers})")
    if config.step_cap < 1:
        errors.append(f"step_cap must be >= 1 (got {config.step_cap})")
    if config.seed < 0:
        errors.append(f"seed must be a nonnegative integer (got {config.seed})")
    if config.r < 0:
        errors.append(f"r must be nonnegative (got {config.r})")

    try:
        gamma = as_fraction(config.gamma)
        if not 0 < gamma < 1:
            errors.append(f"gamma must lie in (0, 1) (got {config.gamma})")
    except (ValueError, ZeroDivisionError):
        errors.append(f"gamma must be a number (got {config.gamma!r})")

    if config.kappa is not None:
        try:
            as_fraction(config.kappa)
        except (ValueError, ZeroDivisionError):
            errors.append(f"kappa must be a number (got {config.kappa!r})")

    if config.c_rule is not None:
        try:
            resolve_c(config.c_rule, max(config.l, 2))
        except ValueError:
            errors.append(f"c_rule must be 'ln' or an integer >= 2 (got {config.c_rule!r})")

    if config.kappa_rule is not None and config.kappa_rule.strip().lower() not in ('max', 'gamma'):
        errors.append(f"kappa_rule must be 'max' or 'gamma' (got {config.kappa_rule!r})")

    if errors:
        raise ConfigError("; ".join(errors))


def parse_grid(text: str) -> List[float]:
    """
    Grid from "lo:hi:step" (both ends included) or "a,b,c"

    Raises:
        ConfigError: for malformed or empty grids
    """
    try:
        if ':' in text:
            lo, hi, step = (float(part) for part in text.split(':'))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            grid = [round(lo + k * step, 12) for k in range(count)]
        else:
            grid = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"Bad grid {text!r}: use lo:hi:step or a comma-separated list") from None
    if not grid:
        raise ConfigError(f"Grid {text!r} is empty")
    return grid


def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"Bad integer list {text!r}") from None
    if not values:
        raise ConfigError(f"List {text!r} is empty")
    return values
