"""Environment configuration presets A-D for the three environments."""

from typing import Dict, List, Tuple

from ..environments import EnvConfig, EnvId
from ..utils.error_handler import ConfigurationError

PRESET_LETTERS = ("A", "B", "C", "D")

# knob values per environment, indexed by preset letter
_PRESET_VALUES: Dict[EnvId, Dict[str, Dict[str, float]]] = {
    EnvId.CARTPOLE: {
        "A": {"pole_length": 0.5},
        "B": {"pole_length": 0.6},
        "C": {"pole_length": 0.7},
        "D": {"pole_length": 0.4},
    },
    EnvId.ACROBOT: {
        "A": {"joint_length": 1.0},
        "B": {"joint_length": 1.2},
        "C": {"joint_length": 1.4},
        "D": {"joint_length": 1.6},
    },
    EnvId.PENDULUM: {
        "A": {"max_speed": 8.0, "max_torque": 2.0},
        "B": {"max_speed": 6.0, "max_torque": 2.0},
        "C": {"max_speed": 10.0, "max_torque": 2.0},
        "D": {"max_speed": 8.0, "max_torque": 2.5},
    },
}


def parse_preset(name: str) -> Tuple[EnvId, str]:
    """Split ``"<env>:<letter>"`` (case-insensitive) into its parts."""
    env_part, sep, letter = name.strip().partition(":")
    letter = letter.upper()
    try:
        env_id = EnvId(env_part.lower())
    except ValueError:
        env_id = None
    if not sep or env_id is None or letter not in PRESET_LETTERS:
        raise ConfigurationError(
            f"unknown preset '{name}'",
            suggestion="use '<cartpole|acrobot|pendulum>:<A|B|C|D>', see `mfea-rl presets`",
        )
    return env_id, letter


def canonical_name(name: str) -> str:
    env_id, letter = parse_preset(name)
    return f"{env_id.value}:{letter}"


def preset_values(name: str) -> Dict[str, float]:
    env_id, letter = parse_preset(name)
    return dict(_PRESET_VALUES[env_id][letter])


def resolve_preset(name: str, **overrides) -> EnvConfig:
    """EnvConfig for a preset; ``overrides`` (e.g. max_steps, torque_bins) win."""
    env_id, letter = parse_preset(name)
    values = {**_PRESET_VALUES[env_id][letter], **overrides}
    return EnvConfig(env_id=env_id, **values)


def list_presets() -> List[Tuple[str, EnvConfig]]:
    """Every preset in environment then letter order."""
    return [
        (f"{env_id.value}:{letter}", resolve_preset(f"{env_id.value}:{letter}"))
        for env_id in _PRESET_VALUES
        for letter in PRESET_LETTERS
    ]
