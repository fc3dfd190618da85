""" Configuration for the server. """

import os

MAX_ROWS: int = 20_000
MAX_COLS: int = 4_096
RATE_LIMIT: str = os.getenv("TTAD_RATE_LIMIT", "30/minute")

DEFAULT_ALLOWED_HOSTS: list[str] = [
    "localhost",
    "127.0.0.1",
    "0.0.0.0",
    "testserver",
]
