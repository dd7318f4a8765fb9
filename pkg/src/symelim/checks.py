"""Switch for expensive self-checks (set ``SYMELIM_CHECKS=1``)."""

import os


def enabled() -> bool:
    return os.environ.get("SYMELIM_CHECKS", "") not in ("", "0")
