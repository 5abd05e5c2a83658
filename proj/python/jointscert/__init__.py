"""Python access to the jointscert library.

Instances and certificates travel as JSON text, the same format the
command line tool reads and writes.
"""

import json

from ._core import Error, InputError, MathError, grid_instance, joints, run, verify, zhang
from ._core import factor as _factor


def factor(instance: str) -> dict:
    """Factorisation certificate for the instance's point masses, as a dict."""
    return json.loads(_factor(instance))


def command(*args: str) -> dict:
    """Run a subcommand and return its JSON report; raises on input errors."""
    code, out, err = run(list(args))
    if code == 2:
        raise InputError(err.strip())
    report = json.loads(out)
    report["exit_code"] = code
    return report


__all__ = [
    "Error",
    "InputError",
    "MathError",
    "command",
    "factor",
    "grid_instance",
    "joints",
    "run",
    "verify",
    "zhang",
]
