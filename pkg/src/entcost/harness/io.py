"""JSON files for states and channels."""

from __future__ import annotations

import json

from ..channels import NamedChannel, channel_from_json
from ..qcore import (BipartiteState, KrausChannel, ValidationError, channel_to_dict, state_from_dict,
                     state_to_dict)


class FormatError(ValidationError):
    """File is not valid JSON or not a JSON object."""


def _load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def read_state(path) -> BipartiteState:
    return state_from_dict(_load(path))


def read_channel(path):
    """Kraus record or named-channel shorthand such as ``{"name": "werner_holevo", "params": {"d": 5}}``."""
    return channel_from_json(_load(path))


def write_state(state: BipartiteState, path):
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh)


def write_channel(channel, path, shorthand: bool = False):
    """Write Kraus operators, or the named shorthand when ``shorthand`` is set."""
    if shorthand:
        if not isinstance(channel, NamedChannel):
            raise ValidationError("shorthand output needs a NamedChannel")
        data = channel.to_dict()
    else:
        data = channel_to_dict(channel.realized if isinstance(channel, NamedChannel) else channel)
    with open(path, "w") as fh:
        json.dump(data, fh)


__all__ = ["FormatError", "read_state", "read_channel", "write_state", "write_channel", "KrausChannel"]
