from __future__ import annotations

import json
import os
import threading
import time
from collections.abc import Callable

import numpy as np

# (m, normalization) -> (stiffness, mass); arrays are read-only once stored.
OPERATORS: dict[tuple[int, str], tuple[np.ndarray, np.ndarray]] = {}
_LOCK = threading.Lock()


def reset() -> None:
    """Drop every cached operator pair WITHOUT rebinding the dict object."""
    with _LOCK:
        OPERATORS.clear()


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def cached_operators(
    m: int, norm: str, build: Callable[[int, str], tuple[np.ndarray, np.ndarray]]
) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``(S, M)`` pair for ``(m, norm)``, building it at most once per key.

    A cached pair for a larger dimension is sliced instead of rebuilt, since basis order
    follows the Haar index. Concurrent first fills may both build; the first stored wins
    and the results are identical.
    """
    with _LOCK:
        hit = OPERATORS.get((m, norm))
        if hit is None:
            larger = [key for key in OPERATORS if key[1] == norm and key[0] > m]
            if larger:
                big_s, big_m = OPERATORS[min(larger)]
                hit = (big_s[:m, :m], big_m[:m, :m])
    if hit is not None:
        return hit
    stiff, mass = build(m, norm)
    with _LOCK:
        return OPERATORS.setdefault((m, norm), (_freeze(stiff), _freeze(mass)))


def write_manifest(path: str, command: str, config_text: str, rows: int) -> None:
    """
    Persist a small JSON snapshot describing one CLI run.
    Called by the CLI after the CSV has been written.
    """
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    payload = {
        "updated_at": int(time.time()),
        "command": command,
        "config": [line for line in config_text.splitlines() if line],
        "rows": rows,
        "cached_operators": sorted(f"{m}:{norm}" for m, norm in OPERATORS),
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
