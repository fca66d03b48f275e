"""Access to the packaged LifeWell questionnaire schema and sentence mapping."""
from __future__ import annotations

from importlib import resources

from .data import Schema
from .textgen import MappingTable


def _asset_text(name: str) -> str:
    return resources.files("lifesat").joinpath("assets", name).read_text(
        encoding="utf-8"
    )


def lifewell_schema() -> Schema:
    """The 27-question LifeWell schema plus its binary satisfaction target."""
    import json

    return Schema.from_dict(json.loads(_asset_text("lifewell_schema.json")))


def lifewell_mapping() -> MappingTable:
    """Shipped sentence templates and phrase maps for the LifeWell questions."""
    import json

    return MappingTable.from_dict(json.loads(_asset_text("lifewell_mapping.json")))
