"""Reading two-qubit states from JSON.

Accepted layouts (exactly one key)::

    {"matrix": [[[re, im], ...], ...]}                      # 4x4
    {"pauli": {"a": [3], "b": [3], "T": [[3], [3], [3]]}}
"""
import json
import sys

import numpy as np

from steerlab.convex import matrix_from_json, matrix_to_json
from steerlab.qubit import TOL, PauliForm, pauli_compose, require_state


class MalformedInput(ValueError):
    """The input could not be read or does not follow the schema."""


def read_text(path):
    """File contents, with ``-`` meaning stdin."""
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise MalformedInput(f"cannot read {path}: {err.strerror}") from None


def load_json(text, what="input"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedInput(f"{what} is not valid JSON: {err}") from None


def parse_state(obj, tol=TOL):
    """Return the 4x4 density matrix described by ``obj``; validates positivity and trace."""
    if not isinstance(obj, dict):
        raise MalformedInput("state must be a JSON object")
    keys = {"matrix", "pauli"} & set(obj)
    if len(keys) != 1:
        raise MalformedInput("state needs exactly one of 'matrix' or 'pauli'")
    try:
        if "matrix" in obj:
            rho = matrix_from_json(obj["matrix"])
            if rho.shape != (4, 4):
                raise MalformedInput(f"matrix must be 4x4, got {rho.shape[0]}x{rho.shape[1]}")
        else:
            pauli = obj["pauli"]
            rho = pauli_compose(PauliForm(pauli["a"], pauli["b"], pauli["T"]))
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, MalformedInput):
            raise
        raise MalformedInput(f"bad state layout: {err}") from None
    return require_state(rho, tol)


def load_state(path, tol=TOL):
    return parse_state(load_json(read_text(path), f"state file {path}"), tol)


def state_to_json(rho):
    return {"matrix": matrix_to_json(rho)}


def parse_directions(obj):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise MalformedInput("directions must be a list of [x, y, z]") from None
    if arr.ndim != 2 or arr.shape[1] != 3 or not len(arr):
        raise MalformedInput("directions must be a non-empty list of [x, y, z]")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms == 0):
        raise MalformedInput("directions must be non-zero")
    return arr / norms[:, None]
