"""Common io helper functions."""

import json
import os
from typing import TextIO

import toml
import yaml

from .typing import DictStrAny


def open_read_text(filepath: str) -> TextIO:
    """Open a text file for reading and return a file object."""
    return open(filepath, mode="r", encoding="utf-8")


def open_write_text(filepath: str) -> TextIO:
    """Open a text file for writing and return a file object."""
    return open(filepath, mode="w", encoding="utf-8")


def load_config(filepath: str) -> DictStrAny:
    """Read a settings file.

    The file can be in yaml, json or toml.
    """
    ext = os.path.splitext(filepath)[1]
    if ext in (".yaml", ".yml"):
        with open_read_text(filepath) as fp:
            config_dict = yaml.safe_load(fp.read())
    elif ext == ".toml":
        config_dict = toml.load(filepath)
    elif ext == ".json":
        with open_read_text(filepath) as fp:
            config_dict = json.load(fp)
    else:
        raise NotImplementedError(f"Config extention {ext} not supported")
    assert isinstance(config_dict, dict)
    return config_dict


def load_json(filepath: str) -> DictStrAny:
    """Read a JSON object from a file."""
    with open_read_text(filepath) as fp:
        content = json.load(fp)
    if not isinstance(content, dict):
        raise ValueError(f"{filepath} does not hold a JSON object")
    return content


def dumps_json(content: DictStrAny) -> str:
    """Serialize with insertion-ordered keys and a trailing newline."""
    return json.dumps(content, indent=2, allow_nan=False) + "\n"


def dump_json(filepath: str, content: DictStrAny) -> None:
    """Write a JSON object to a file."""
    with open_write_text(filepath) as fp:
        fp.write(dumps_json(content))
