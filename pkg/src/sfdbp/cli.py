"""``sfdbp synth|estimate|eval|oracle --config <file> [--override key=value ...]``

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bp import PriorParams, run_bp
from .config import ConfigError, RunConfig, load_config
from .cost import build_cost_volume
from .imaging import render_observation_stack
from .io import (
    dump_cost_volume,
    read_image,
    read_json,
    read_pfm,
    read_pgm,
    write_json,
    write_pfm,
    write_pgm,
)
from .metrics import evaluate
from .oracle import TinyInstance, chain_dp, exhaustive_map
from .scenes import make_depth, make_texture, texture_mask

log = logging.getLogger("sfdbp")

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _workers() -> int:
    raw = os.environ.get("SFDBP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SFDBP_THREADS must be an integer, got {raw!r}") from None


def _manifest(cfg: RunConfig, command: str, **extra) -> dict:
    return {"command": command, "version": __version__, "config": cfg.raw, **extra}


def _outdir(cfg: RunConfig, section: str, default: str) -> Path:
    out = cfg.path(cfg.section(section).get("output_dir", cfg.raw.get("output_dir", default)))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(cfg: RunConfig) -> dict:
    s = cfg.section("synth")
    h, w = int(s.get("height", 128)), int(s.get("width", 128))
    tex = s.get("texture", "noise")
    if str(tex).endswith((".pgm", ".pfm")):
        texture = read_image(cfg.path(tex))
        h, w = texture.shape
    else:
        texture = make_texture(tex, h, w, seed=int(s.get("texture_seed", 0)))
    d_min = float(s.get("depth_min", cfg.depth_min))
    d_max = float(s.get("depth_max", cfg.depth_max))
    if "depth_file" in s:
        depth = read_pfm(cfg.path(s["depth_file"])).astype(np.float64)
        if depth.shape != texture.shape:
            raise ConfigError(f"depth_file shape {depth.shape} != texture shape {texture.shape}")
    else:
        depth = make_depth(s.get("scene", "sphere_cap"), h, w, d_min, d_max, **s.get("scene_args", {}))
    seed = int(s.get("seed", 0))
    noise = float(s.get("noise_sigma", 0.0))
    obs = render_observation_stack(texture, depth, cfg.cameras, noise_sigma=noise, seed=seed)

    out = _outdir(cfg, "synth", "synth")
    files = []
    for i, g in enumerate(obs):
        write_pfm(out / f"obs_{i}.pfm", g)
        write_pgm(out / f"obs_{i}.pgm", g)
        files += [f"obs_{i}.pfm", f"obs_{i}.pgm"]
    write_pfm(out / "texture.pfm", texture)
    write_pfm(out / "depth_gt.pfm", depth)
    files += ["texture.pfm", "depth_gt.pfm"]
    manifest = _manifest(
        cfg,
        "synth",
        seed=seed,
        noise_sigma=noise,
        depth_range=[float(depth.min()), float(depth.max())],
        files=files,
    )
    write_json(out / "manifest.json", manifest)
    return manifest


def cmd_estimate(cfg: RunConfig) -> dict:
    paths = cfg.raw.get("observations")
    if not paths:
        raise ConfigError("estimate needs 'observations'")
    obs = [read_image(cfg.path(p)) for p in paths]
    labels = cfg.label_set()
    volume = build_cost_volume(
        obs, labels, cfg.reference_index, cfg.aggregation_radius, workers=_workers()
    )
    dm, diag = run_bp(
        volume,
        cfg.prior,
        schedule=cfg.schedule,
        max_iters=cfg.max_iters,
        convergence_eps=cfg.convergence_eps,
    )
    log.info("bp: %d iterations, delta %.3g, energy %.6g", diag.iterations, diag.final_delta, diag.energy)

    out = _outdir(cfg, "estimate", "estimate")
    write_pgm(out / "labels.pgm", dm.labels.astype(np.int64), maxval=65535)
    write_pfm(out / "depth.pfm", dm.depth())
    n = len(labels)
    write_pgm(out / "preview.pgm", dm.labels / max(n - 1, 1))
    files = ["labels.pgm", "depth.pfm", "preview.pgm", "diagnostics.json"]
    if cfg.section("estimate").get("dump_cost_volume", False):
        dump_cost_volume(out / "cost_volume.f32", volume)
        files += ["cost_volume.f32", "cost_volume.f32.json"]
    diagnostics = {
        "iterations": diag.iterations,
        "final_delta": diag.final_delta,
        "energy": diag.energy,
        "wall_time_ms": diag.wall_time_ms,
    }
    write_json(out / "diagnostics.json", diagnostics)
    manifest = _manifest(
        cfg, "estimate", label_depths=[float(d) for d in labels.depths], files=files
    )
    write_json(out / "manifest.json", manifest)
    return diagnostics


def cmd_eval(cfg: RunConfig) -> dict:
    e = cfg.section("eval")
    try:
        est = read_pfm(cfg.path(e["estimate"])).astype(np.float64)
        gt = read_pfm(cfg.path(e["ground_truth"])).astype(np.float64)
    except KeyError as err:
        raise ConfigError(f"eval is missing {err.args[0]!r}") from None
    mask_spec = e.get("mask")
    mask = None
    if mask_spec == "texture":
        ref = e.get("mask_image") or cfg.raw["observations"][cfg.reference_index]
        mask = texture_mask(
            read_image(cfg.path(ref)),
            threshold=float(e.get("mask_threshold", 1e-4)),
            border=int(e.get("border", 0)),
        )
    elif mask_spec:
        mask = read_pgm(cfg.path(mask_spec), normalize=False) > 0
    labels = cfg.label_set()
    report = evaluate(
        est, gt, labels.depth_min, labels.depth_step, len(labels), mask=mask, k=int(e.get("k", 1))
    )
    result = report.to_dict()
    if "output" in e:
        out = cfg.path(e["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        write_json(out, result)
    return result


def load_tiny_instance(path) -> TinyInstance:
    d = read_json(path)
    try:
        costs = np.asarray(d["costs"], dtype=np.float64)
        prior = PriorParams(float(d["truncation"]), float(d.get("smoothness_weight", 1.0)))
    except KeyError as err:
        raise ConfigError(f"instance {path} is missing {err.args[0]!r}") from None
    if costs.ndim == 2:
        costs = costs[None]
    try:
        return TinyInstance(costs, prior)
    except ValueError as err:
        raise ConfigError(f"instance {path}: {err}") from None


def cmd_oracle(cfg: RunConfig) -> dict:
    o = cfg.section("oracle")
    if "instance" not in o:
        raise ConfigError("oracle needs 'oracle.instance'")
    inst = load_tiny_instance(cfg.path(o["instance"]))
    labels, energy = exhaustive_map(inst)
    dm, diag = run_bp(
        inst.costs,
        inst.prior,
        schedule=cfg.schedule,
        max_iters=cfg.max_iters,
        convergence_eps=cfg.convergence_eps,
    )
    tol = 1e-9 * max(1.0, abs(energy))
    result = {
        "oracle_labels": labels.tolist(),
        "oracle_energy": energy,
        "bp_labels": dm.labels.tolist(),
        "bp_energy": diag.energy,
        "bp_iterations": diag.iterations,
        "gap": diag.energy - energy,
        "match": bool(abs(diag.energy - energy) <= tol),
    }
    h, w, _ = inst.costs.shape
    if min(h, w) == 1:
        result["chain_dp_energy"] = chain_dp(inst.costs, inst.prior)[1]
    if "output" in o:
        out = cfg.path(o["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        write_json(out, result)
    return result


COMMANDS = {"synth": cmd_synth, "estimate": cmd_estimate, "eval": cmd_eval, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfdbp", description="Shape from defocus with loopy BP.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="dotted config override, e.g. prior.smoothness_weight=0.01 (repeatable)",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, args.override, args.command)
        result = COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"sfdbp: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - surfaced as exit code 3
        print(f"sfdbp: {args.command} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.command in ("eval", "oracle"):
        print(json.dumps(result, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
