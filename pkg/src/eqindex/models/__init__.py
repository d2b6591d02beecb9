"""Finite matrix models of the operators studied by the package."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from .base import (
    IsotypicBlockOperator,
    add_perturbation,
    compose,
    jsonable,
    off_block_norm,
    random_finite_rank_perturbation,
)
from .discrete import (
    build_circle_model,
    build_derham_circle_model,
    build_product_model,
    build_shift_model,
    build_toeplitz_model,
    derham_full_operator,
    swap_pairs_action,
    swap_pairs_basis,
    symbol_values,
)
from .plane import (
    CollarWarp,
    angular_mode,
    build_glued_plane_models,
    build_plane_weight_model,
    glued_piece_geometry,
    label_offset,
    plane_grid,
    radial_block,
)

__all__ = [
    "IsotypicBlockOperator",
    "ModelSpec",
    "MODEL_KINDS",
    "add_perturbation",
    "angular_mode",
    "build_circle_model",
    "build_derham_circle_model",
    "build_glued_plane_models",
    "build_plane_weight_model",
    "build_product_model",
    "build_shift_model",
    "build_toeplitz_model",
    "CollarWarp",
    "compose",
    "derham_full_operator",
    "glued_piece_geometry",
    "jsonable",
    "label_offset",
    "off_block_norm",
    "plane_grid",
    "radial_block",
    "random_finite_rank_perturbation",
    "swap_pairs_action",
    "swap_pairs_basis",
    "symbol_values",
]

MODEL_KINDS = ("shift", "toeplitz", "circle", "derham_circle", "product", "plane_weight")


def _harmonics(table) -> dict[int, complex]:
    """Accept ``{k: c}``, ``{k: [re, im]}`` or ``{"k": "expr"}`` style coefficient tables."""
    out = {}
    for k, v in dict(table).items():
        if isinstance(v, (list, tuple)):
            v = complex(v[0], v[1])
        elif isinstance(v, str):
            v = complex(v.replace("i", "j").replace(" ", ""))
        out[int(k)] = complex(v)
    return out


@dataclass(frozen=True)
class ModelSpec:
    """A model kind plus its parameters, as read from a config file."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelSpec":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind is None:
            raise ValueError("model spec needs a 'kind'")
        return cls(kind, d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **jsonable(dict(self.params))}

    def with_params(self, **updates) -> "ModelSpec":
        p = dict(self.params)
        p.update({k: v for k, v in updates.items() if v is not None})
        return ModelSpec(self.kind, p)

    def build(self, **overrides) -> IsotypicBlockOperator:
        """Build the model; for ``plane_weight`` the weight ``m`` may be overridden."""
        p = dict(self.params)
        p.update(overrides)
        k = self.kind
        if k == "shift":
            return build_shift_model(int(p.get("n", 64)), bool(p.get("labeled", False)))
        if k == "toeplitz":
            return build_toeplitz_model(_harmonics(p.get("symbol", {-2: 1})), int(p.get("n", 64)))
        if k == "circle":
            pot = p.get("potential")
            return build_circle_model(None if pot is None else _harmonics(pot), int(p.get("k_max", 32)))
        if k == "derham_circle":
            return build_derham_circle_model(int(p.get("k_max", 16)), bool(p.get("deformed", False)))
        if k == "product":
            base = ModelSpec.from_dict(p.get("base", {"kind": "shift", "n": 20}))
            if base.kind in ("product", "plane_weight", "derham_circle"):
                raise ValueError("product base must be an unlabelled model")
            return build_product_model(base.build(), int(p.get("k_max", 4)))
        return build_plane_weight_model(
            int(p.get("m", 0)),
            int(p.get("n_r", 400)),
            float(p.get("R", 8.0)),
            str(p.get("f_choice", "one")),
            str(p.get("lift", "spinor")),
        )
