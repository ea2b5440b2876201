"""Configuration: nested JSON with defaults and ``KBQA_`` environment overrides.

Keys are addressed with dots (``relation_weights.rel``). The environment
variable for a key is ``KBQA_`` plus the upper-cased key with dots replaced by
underscores (``KBQA_RELATION_WEIGHTS_REL``). Values from the environment are
parsed as JSON when possible and taken as plain strings otherwise.
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional

from .entity_ranker import DEFAULT_LABEL_BONUS
from .store import DEFAULT_INTERROGATIVES

DEFAULTS: dict[str, Any] = {
    "taggers": ["lexicon", "date"],
    "similarity_scorer": "lcs",
    "interrogatives": list(DEFAULT_INTERROGATIVES),
    "entity_weights": {f"s{i}": 1.0 for i in range(1, 8)},
    "label_bonus": dict(DEFAULT_LABEL_BONUS),
    "path": {"max_fanout": 200, "max_paths": 10_000, "max_witnesses": 5},
    "relation_weights": {"rel": 0.6, "obj": 0.2, "char": 0.2},
    "relation": {"separator": " "},
    "classifier": {"name": "margin", "tau": 0.15},
    "gender": {"predicate": "性别", "male": "男", "female": "女"},
    "pipeline": {"top_k": 10},
    "training": {"pos_oversample": 5, "neg_per_question": 5, "seed": 0},
}


def _flatten(tree: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def _merge(base: dict[str, Any], override: Mapping[str, Any]) -> None:
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)


def env_name(key: str) -> str:
    return "KBQA_" + key.replace(".", "_").upper()


class Config:
    def __init__(self, data: Optional[Mapping[str, Any]] = None):
        self.data: dict[str, Any] = copy.deepcopy(DEFAULTS)
        if data:
            _merge(self.data, data)

    @classmethod
    def load(cls, path: Optional[str | Path] = None,
             environ: Optional[Mapping[str, str]] = None) -> "Config":
        data = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        config = cls(data)
        config.apply_env(os.environ if environ is None else environ)
        return config

    def apply_env(self, environ: Mapping[str, str]) -> None:
        for key in _flatten(self.data):
            name = env_name(key)
            if name in environ:
                raw = environ[name]
                try:
                    value = json.loads(raw)
                except json.JSONDecodeError:
                    value = raw
                self.set(key, value)

    def get(self, key: str, default: Any = None) -> Any:
        node: Any = self.data
        for part in key.split("."):
            if not isinstance(node, Mapping) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        parts = key.split(".")
        node = self.data
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def copy(self) -> "Config":
        return Config(self.data)

    def entity_weights(self) -> tuple[float, ...]:
        weights = self.data["entity_weights"]
        return tuple(float(weights[f"s{i}"]) for i in range(1, 8))

    def relation_weights(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.data["relation_weights"].items()}
