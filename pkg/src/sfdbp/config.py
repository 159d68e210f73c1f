"""JSON run configuration: parsing, dotted overrides, validation."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .bp import PriorParams, Schedule
from .cost import build_label_set
from .defocus import CameraConfig
from .scenes import SHAPES, TEXTURES


class ConfigError(ValueError):
    pass


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply ``a.b.0.c=value`` in place; value parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not key=value")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        if isinstance(node, list):
            node = node[int(p)]
        else:
            node = node.setdefault(p, {})
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def _camera(d: dict) -> CameraConfig:
    d = dict(d)
    try:
        if "focus_distance" in d and "lens_to_image" not in d:
            return CameraConfig.focused_at(
                d["focus_distance"], d["focal_length"], d["aperture_radius"], d["pixel_scale"]
            )
        return CameraConfig(
            d["aperture_radius"], d["lens_to_image"], d["focal_length"], d["pixel_scale"]
        )
    except KeyError as e:
        raise ConfigError(f"camera is missing {e.args[0]!r}") from None


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path
    cameras: list[CameraConfig]
    reference_index: int = 0
    depth_min: float = 0.0
    depth_max: float = 0.0
    num_labels: int = 16
    prior: PriorParams = field(default_factory=lambda: PriorParams(2.0, 1.0))
    aggregation_radius: int = 2
    schedule: Schedule = Schedule.REDBLACK
    max_iters: int = 50
    convergence_eps: float = 1e-6

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def section(self, name) -> dict:
        return self.raw.get(name) or {}

    def label_set(self):
        return build_label_set(
            self.depth_min, self.depth_max, self.num_labels, self.cameras, self.reference_index
        )


def load_config(path, overrides=(), command: str | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    raw = copy.deepcopy(raw)
    for ov in overrides:
        try:
            apply_override(raw, ov)
        except (IndexError, ValueError, TypeError) as e:
            raise ConfigError(f"bad override {ov!r}: {e}") from None
    return parse_config(raw, path.parent, command)


def parse_config(raw: dict, base_dir=".", command: str | None = None) -> RunConfig:
    """Validate every module precondition up front.

    The ``oracle`` command works on a stored tiny instance and needs no optics.
    """
    try:
        cams = [_camera(c) for c in raw.get("cameras", [])]
        labels = raw.get("labels", {})
        prior = raw.get("prior", {})
        bp = raw.get("bp", {})
        cfg = RunConfig(
            raw=raw,
            base_dir=Path(base_dir),
            cameras=cams,
            reference_index=int(raw.get("reference_index", 0)),
            depth_min=float(labels.get("depth_min", 0.0)),
            depth_max=float(labels.get("depth_max", 0.0)),
            num_labels=int(labels.get("count", 16)),
            prior=PriorParams(
                float(prior.get("truncation", 2.0)), float(prior.get("smoothness_weight", 1.0))
            ),
            aggregation_radius=int(raw.get("aggregation_radius", 2)),
            schedule=Schedule(bp.get("schedule", "redblack")),
            max_iters=int(bp.get("max_iters", 50)),
            convergence_eps=float(bp.get("convergence_eps", 1e-6)),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from None
    if cfg.max_iters < 1:
        raise ConfigError("bp.max_iters must be >= 1")
    if cfg.aggregation_radius < 0:
        raise ConfigError("aggregation_radius must be >= 0")
    if command == "oracle":
        return cfg
    if len(cams) < 2:
        raise ConfigError(f"need at least 2 cameras, got {len(cams)}")
    try:
        cfg.label_set()
    except ValueError as e:
        raise ConfigError(f"label set: {e}") from None
    synth = raw.get("synth")
    if synth:
        if synth.get("scene", "sphere_cap") not in SHAPES and "depth_file" not in synth:
            raise ConfigError(f"unknown scene {synth.get('scene')!r}; choose from {SHAPES}")
        tex = synth.get("texture", "noise")
        if tex not in TEXTURES and not str(tex).endswith((".pgm", ".pfm")):
            raise ConfigError(f"texture must be one of {TEXTURES} or a .pgm/.pfm path")
        if float(synth.get("noise_sigma", 0.0)) < 0:
            raise ConfigError("synth.noise_sigma must be >= 0")
    obs = raw.get("observations")
    if obs is not None and len(obs) != len(cams):
        raise ConfigError(f"{len(obs)} observations but {len(cams)} cameras")
    return cfg
