"""JSON schemas for input files and emitted reports."""

from functools import lru_cache
from importlib import resources
import json

import jsonschema

from ..errors import InputError

NAMES = (
    "model", "decomposition", "sod_report", "glue_report", "curve_path_report",
    "qde_report", "contour_report", "validation_report", "sweep_report",
)


@lru_cache(maxsize=None)
def load_schema(name):
    """Parsed schema ``<name>.schema.json``."""
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    text = resources.files(__name__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_document(doc, name):
    """Validate ``doc`` against schema ``name``.

    Raises
    ------
    InputError
        With the path of the first offending element.
    """
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{name} document invalid at {where}: {exc.message}") from exc
