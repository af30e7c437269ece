"""
Runtime configuration loaded from the environment (.env supported)
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Numerics
DIM_TOLERANCE = float(os.getenv('DIM_TOLERANCE', '1e-9'))
DIM_MAX_QUAD_POINTS = int(os.getenv('DIM_MAX_QUAD_POINTS', '200000'))
DIM_BRACKET_BLOCKS = int(os.getenv('DIM_BRACKET_BLOCKS', '4096'))

# Sweeps
DIM_WORKERS = int(os.getenv('DIM_WORKERS', '1'))

# Logging
DIM_LOG_LEVEL = os.getenv('DIM_LOG_LEVEL', 'WARNING')

# HTTP API
DIM_API_HOST = os.getenv('DIM_API_HOST', '0.0.0.0')
DIM_API_PORT = int(os.getenv('DIM_API_PORT', '5001'))
CORS_ORIGINS = [
    origin.strip()
    for origin in os.getenv('CORS_ORIGINS', 'http://localhost:3000').split(',')
    if origin.strip()
]

TOOL_NAME = 'dimfibre'
TOOL_VERSION = '0.1.0'

_logging_configured = False

def configure_logging(level=None):
    """Install a single stderr handler on the root logger (idempotent)"""
    global _logging_configured
    level_name = (level or DIM_LOG_LEVEL).upper()
    root = logging.getLogger()
    root.setLevel(getattr(logging, level_name, logging.WARNING))
    if not _logging_configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(
            '%(asctime)s %(levelname)s %(name)s: %(message)s'
        ))
        root.addHandler(handler)
        _logging_configured = True
    return root

def as_dict():
    """Snapshot of the effective configuration (echoed in output metadata)"""
    return {
        'tolerance': DIM_TOLERANCE,
        'max_quad_points': DIM_MAX_QUAD_POINTS,
        'bracket_blocks': DIM_BRACKET_BLOCKS,
        'workers': DIM_WORKERS,
    }

if __name__ == "__main__":
    # Can be run as a script or imported as a module
    print("Config module loaded")
    for key, value in as_dict().items():
        print(f"  {key}: {value}")
