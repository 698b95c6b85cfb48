"""JSON family files.

Document shape:

    {
      "n": 6,
      "m": 2,
      "sets": [[1, 2], [3, 4], ...],
      "weights": [1, 0.5, "2/3", ...],   # optional; "p/q" strings stay exact
      "split": [[1, 2, 3], [4, 5, 6]]    # optional sidecar
    }

Unknown keys are ignored so structured CLI outputs reload directly.
Weights round-trip losslessly: ints as ints, floats as floats, Fractions
as "p/q" strings. Malformed input raises FamilyFormatError naming the
offending field (and JSON position for syntax errors).
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Union

from .family import SetFamily, Weight
from .splits import Split


class FamilyFormatError(Exception):
    """A family document that does not match the expected shape."""


def weight_to_json(w: Weight) -> Union[int, float, str]:
    if isinstance(w, Fraction):
        if w.denominator == 1:
            return int(w)
        return f"{w.numerator}/{w.denominator}"
    return w


def weight_from_json(value: Any, where: str) -> Weight:
    if isinstance(value, bool):
        raise FamilyFormatError(f"{where}: boolean is not a weight")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FamilyFormatError(f"{where}: bad fraction string {value!r} ({exc})")
    raise FamilyFormatError(f"{where}: weight must be a number or 'p/q' string")


def _require_int(doc: dict, key: str) -> int:
    if key not in doc:
        raise FamilyFormatError(f"missing required field {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise FamilyFormatError(f"field {key!r} must be an integer, got {v!r}")
    return v


def family_from_doc(doc: Any) -> tuple[SetFamily, Optional[Split]]:
    if not isinstance(doc, dict):
        raise FamilyFormatError(f"top level must be an object, got {type(doc).__name__}")
    n = _require_int(doc, "n")
    m = _require_int(doc, "m")
    sets = doc.get("sets")
    if not isinstance(sets, list):
        raise FamilyFormatError("field 'sets' must be a list of element lists")
    parsed = []
    for i, s in enumerate(sets):
        if not isinstance(s, list) or any(isinstance(e, bool) or not isinstance(e, int) for e in s):
            raise FamilyFormatError(f"sets[{i}] must be a list of integers, got {s!r}")
        parsed.append(s)
    weights = None
    if doc.get("weights") is not None:
        raw = doc["weights"]
        if not isinstance(raw, list):
            raise FamilyFormatError("field 'weights' must be a list")
        weights = [weight_from_json(v, f"weights[{i}]") for i, v in enumerate(raw)]
    try:
        family = SetFamily.from_elements(n, m, parsed, weights)
    except ValueError as exc:
        raise FamilyFormatError(str(exc))

    split = None
    if doc.get("split") is not None:
        raw = doc["split"]
        if not isinstance(raw, list) or not all(isinstance(s, list) for s in raw):
            raise FamilyFormatError("field 'split' must be a list of element lists")
        try:
            split = Split.from_strip_lists(n, raw)
        except ValueError as exc:
            raise FamilyFormatError(f"bad split: {exc}")
    return family, split


def family_to_doc(family: SetFamily, split: Optional[Split] = None) -> dict:
    doc: dict[str, Any] = {
        "n": family.ground.n,
        "m": family.m,
        "sets": family.element_lists(),
    }
    if family.weights is not None:
        doc["weights"] = [weight_to_json(w) for w in family.weights]
    if split is not None:
        doc["split"] = split.strip_lists()
    return doc


def load_family(path: Union[str, Path]) -> tuple[SetFamily, Optional[Split]]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FamilyFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return family_from_doc(doc)


def save_family(family: SetFamily, path: Union[str, Path], split: Optional[Split] = None) -> None:
    Path(path).write_text(json.dumps(family_to_doc(family, split), sort_keys=True) + "\n")
