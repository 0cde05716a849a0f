# src/utils/io.py

import json
import os
import tempfile
import pandas as pd
from ..errors import FormatError


def read_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as json_file:
            return json.load(json_file)
    except FileNotFoundError:
        raise FileNotFoundError(f"Input file not found at {path}")
    except json.JSONDecodeError as e:
        raise FormatError(f"Error reading JSON file {path}: {e}")


def require_keys(payload, keys, what):
    if not isinstance(payload, dict):
        raise FormatError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in payload]
    if missing:
        raise FormatError(f"{what} is missing the key(s): {', '.join(missing)}")


def dumps_json(payload):
    # sorted keys and fixed separators keep reports byte-identical between runs
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def dumps_csv(rows, columns=None):
    frame = pd.DataFrame(rows, columns=columns)
    return frame.to_csv(index=False, lineterminator="\n")


def write_text_atomic(path, text):
    """Writes the whole text to a temporary sibling and renames it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".strongdom-", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as tmp_file:
            tmp_file.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
