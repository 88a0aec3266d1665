"""Local illumination of volume samples: Phong, Cel, and unshaded variants.

A sample's emitted color combines its transfer-function color with ambient,
diffuse, and specular light terms. Normals come from the negated, normalized
intensity gradient so that the outside of a bright object on a dark background
faces the viewer; samples with no gradient are lit by the ambient term alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigError

MODELS = ("phong", "cel", "none")

# Gradients shorter than this are treated as undefined normals.
ZERO_NORMAL_EPS = 1e-12


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n < 1e-9:
        raise ConfigError(f"{what} must be a non-zero vector")
    return v / n


@dataclass(frozen=True)
class ShadingConfig:
    """Light components and model selection.

    ``light_dir`` is the unit vector from a sample toward the light source,
    in world space; None means a headlight that follows the eye. The default
    shininess of 60 gives tight, realistic highlights on bone-like surfaces.
    """

    model: str = "phong"
    ambient: float = 0.1
    diffuse: float = 0.6
    specular: float = 0.3
    light_dir: Optional[tuple[float, float, float]] = None
    shininess: float = 60.0
    cel_bands: int = 3

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        for name in ("ambient", "diffuse", "specular"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.shininess <= 0.0:
            raise ConfigError(f"shininess must be > 0, got {self.shininess}")
        if self.cel_bands < 2:
            raise ConfigError(f"cel_bands must be >= 2, got {self.cel_bands}")
        if self.light_dir is not None:
            unit = _unit(np.asarray(self.light_dir, dtype=np.float64), "light_dir")
            object.__setattr__(self, "light_dir", tuple(float(c) for c in unit))

    def to_obj(self) -> dict:
        return {
            "model": self.model,
            "ambient": self.ambient,
            "diffuse": self.diffuse,
            "specular": self.specular,
            "light_dir": list(self.light_dir) if self.light_dir else None,
            "shininess": self.shininess,
            "cel_bands": self.cel_bands,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ShadingConfig":
        if not isinstance(obj, dict):
            raise ConfigError("shading document must be a JSON object")
        known = {
            "model", "ambient", "diffuse", "specular",
            "light_dir", "shininess", "cel_bands",
        }
        kwargs = {k: v for k, v in obj.items() if k in known}
        if kwargs.get("light_dir") is not None:
            kwargs["light_dir"] = tuple(kwargs["light_dir"])
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ShadingConfig":
        return cls.from_obj(json.loads(text))

    def with_terms(self, ambient=None, diffuse=None, specular=None) -> "ShadingConfig":
        """Copy with individual light components replaced (for ablations)."""
        return replace(
            self,
            ambient=self.ambient if ambient is None else ambient,
            diffuse=self.diffuse if diffuse is None else diffuse,
            specular=self.specular if specular is None else specular,
        )


@dataclass(frozen=True)
class ShadingInputs:
    """Per-sample geometry for the lighting equation.

    ``normal`` may be the zero vector, meaning the normal is undefined
    (flat gradient); the other vectors must be unit length.
    """

    base_color: np.ndarray
    normal: np.ndarray
    view: np.ndarray
    light: np.ndarray

    @classmethod
    def make(cls, base_color, normal, view, light) -> "ShadingInputs":
        n = np.asarray(normal, dtype=np.float64)
        if float(np.linalg.norm(n)) >= ZERO_NORMAL_EPS:
            n = n / np.linalg.norm(n)
        else:
            n = np.zeros(3)
        return cls(
            base_color=np.asarray(base_color, dtype=np.float64),
            normal=n,
            view=_unit(np.asarray(view, dtype=np.float64), "view"),
            light=_unit(np.asarray(light, dtype=np.float64), "light"),
        )


def reflect(light: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Mirror the sample-to-light vector about the normal: R = 2(N.L)N - L."""
    light = np.asarray(light, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    return 2.0 * float(np.dot(normal, light)) * normal - light


def _diffuse_factor(normal: np.ndarray, light: np.ndarray) -> float:
    return max(float(np.dot(normal, light)), 0.0)


def quantize_diffuse(d: float, bands: int) -> float:
    """Snap a diffuse factor to the midpoint of its band; 0 stays dark."""
    if d <= 0.0:
        return 0.0
    b = min(int(d * bands), bands - 1)
    return (b + 0.5) / bands


def phong_shade(inputs: ShadingInputs, cfg: ShadingConfig) -> np.ndarray:
    """Ambient + diffuse + specular shading of one sample, clamped to [0, 1].

    Back-facing diffuse and specular terms are clamped at zero rather than
    subtracting light; a zero normal yields the ambient term only.
    """
    c = inputs.base_color
    if float(np.linalg.norm(inputs.normal)) < ZERO_NORMAL_EPS:
        return np.clip(c * cfg.ambient, 0.0, 1.0)
    n_dot_l = _diffuse_factor(inputs.normal, inputs.light)
    r = reflect(inputs.light, inputs.normal)
    r_dot_v = max(float(np.dot(r, inputs.view)), 0.0)
    g = c * cfg.ambient + c * cfg.diffuse * n_dot_l + c * cfg.specular * (
        r_dot_v ** cfg.shininess
    )
    return np.clip(g, 0.0, 1.0)


def cel_shade(inputs: ShadingInputs, cfg: ShadingConfig) -> np.ndarray:
    """Cartoon-style shading: banded diffuse, no specular term."""
    c = inputs.base_color
    if float(np.linalg.norm(inputs.normal)) < ZERO_NORMAL_EPS:
        return np.clip(c * cfg.ambient, 0.0, 1.0)
    q = quantize_diffuse(_diffuse_factor(inputs.normal, inputs.light), cfg.cel_bands)
    return np.clip(c * cfg.ambient + c * cfg.diffuse * q, 0.0, 1.0)


def shade(inputs: ShadingInputs, cfg: ShadingConfig) -> np.ndarray:
    """Dispatch on the configured model; 'none' passes the base color through."""
    if cfg.model == "phong":
        return phong_shade(inputs, cfg)
    if cfg.model == "cel":
        return cel_shade(inputs, cfg)
    return np.clip(inputs.base_color, 0.0, 1.0)
