"""Element budget shared by ball search and convolution supports.

The default guards memory, not correctness: any support or ball whose size
would pass the budget raises ``BudgetExceededError`` instead of thrashing.
``COCYCLE_LAB_BUDGET`` overrides the default process-wide.
"""

from __future__ import annotations

import os

DEFAULT_BUDGET = 10_000_000


def resolve_budget(explicit: int | None = None) -> int:
    if explicit is not None:
        if explicit <= 0:
            raise ValueError(f"element budget must be positive, got {explicit}")
        return int(explicit)
    env = os.environ.get("COCYCLE_LAB_BUDGET")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"COCYCLE_LAB_BUDGET is not an integer: {env!r}") from exc
        if value <= 0:
            raise ValueError(f"COCYCLE_LAB_BUDGET must be positive, got {value}")
        return value
    return DEFAULT_BUDGET
