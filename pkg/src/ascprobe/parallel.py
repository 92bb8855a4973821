"""Worker-count policy.

ASCPROBE_THREADS caps worker parallelism everywhere the package fans out
(probe extraction chunks). Defaults to the machine's core count.
"""

import os


def max_workers() -> int:
    raw = os.environ.get("ASCPROBE_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"ASCPROBE_THREADS must be an integer, got {raw!r}")
        if n < 1:
            raise ValueError(f"ASCPROBE_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1
