"""synth -> estimate -> eval for one config, printing the eval report.

    python3 scripts/run_pipeline.py configs/sphere_cap.json [--override k=v ...]
"""
import argparse
import sys

from sfdbp.cli import main


def run(config, overrides):
    extra = [a for o in overrides for a in ("--override", o)]
    for cmd in ("synth", "estimate", "eval"):
        code = main([cmd, "--config", config, *extra])
        if code:
            return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--override", action="append", default=[])
    args = ap.parse_args()
    sys.exit(run(args.config, args.override))
