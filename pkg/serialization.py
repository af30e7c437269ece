"""
CSV and JSON output documents shared by the CLI and the HTTP API,
plus Gaussian-state files
"""

import csv
import io
import json
import math
import logging
from enum import Enum

import numpy as np

import config
from errors import InvalidParameterError
from netsim import GaussianState

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')

# ============================================================================
# Values
# ============================================================================

def _plain(value):
    """Convert numpy scalars and enums to JSON-ready Python values; non-finite floats become None"""
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, Enum):
        return value.value
    return value


def format_cell(value):
    """CSV text for one value: floats use the shortest round-trip repr"""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return repr(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)

# ============================================================================
# Documents
# ============================================================================

def build_document(command, params, rows):
    """
    {"meta": {...}, "rows": [...]} with the full parameter echo

    Args:
        command: Command name
        params: Parameters the rows were computed with
        rows: List of dicts
    """
    return {
        'meta': {
            'tool': config.TOOL_NAME,
            'version': config.TOOL_VERSION,
            'command': command,
            'params': _plain(params),
            'config': config.as_dict(),
        },
        'rows': [_plain(row) for row in rows],
    }


def to_json(document):
    return json.dumps(_plain(document), indent=2, allow_nan=False) + '\n'


def to_csv(rows, columns):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render(document, columns, fmt):
    if fmt not in FORMATS:
        raise InvalidParameterError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    if fmt == 'json':
        return to_json(document)
    return to_csv(document['rows'], columns)


def write_text(text, out_path=None, stream=None):
    """Write to out_path (UTF-8, LF) or to `stream`"""
    if out_path:
        with open(out_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        logger.info("wrote %d bytes to %s", len(text), out_path)
    elif stream is not None:
        stream.write(text)

# ============================================================================
# Gaussian States
# ============================================================================

def load_state(path):
    """Read a GaussianState JSON file; malformed files raise InvalidParameterError"""
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise InvalidParameterError(f"cannot read state file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidParameterError(f"state file {path} is not valid JSON: {e}") from e
    return GaussianState.from_dict(data).validate()


def state_to_json(state):
    return json.dumps(state.to_dict(), indent=2) + '\n'


if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Serialization module loaded")
    print(to_csv([{'j': 1, 'eta': 0.1}], ('j', 'eta')), end='')
