"""creodrift command line: run one manifest-described experiment.

Exit codes: 0 success, 2 validation error (bad manifest, bad arguments,
missing inputs), 1 runtime failure inside a stage.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .errors import CreodriftError, ManifestError, StageInputError
from .manifest import EXPERIMENTS, RunManifest
from .pipeline import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="creodrift",
        description="Language-drift analyses over persistent homology, plus an "
                    "echo-chamber simulator.")
    parser.add_argument("experiment", choices=EXPERIMENTS,
                        help="which experiment the manifest describes")
    parser.add_argument("--manifest", required=True, help="path to the run manifest (JSON)")
    parser.add_argument("--out", default=None, help="override the manifest output_dir")
    parser.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker hint; stages currently run sequentially "
                             "for determinism")
    parser.add_argument("--from-stage", default=None,
                        help="resume at this stage; fails fast if its declared "
                             "inputs are missing")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = RunManifest.load(args.manifest, out_override=args.out,
                                    seed_override=args.seed)
        if manifest.experiment != args.experiment:
            raise ManifestError(
                f"manifest describes {manifest.experiment!r}, "
                f"but {args.experiment!r} was requested")
    except ManifestError as err:
        print(f"creodrift: validation error: {err}", file=sys.stderr)
        return 2
    try:
        record = run_experiment(manifest, from_stage=args.from_stage)
    except (ManifestError, StageInputError) as err:
        print(f"creodrift: validation error: {err}", file=sys.stderr)
        return 2
    except CreodriftError as err:
        print(f"creodrift: error: {err}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 1
    for stage in record.stages:
        print(f"[{stage['name']}] {stage['wall_clock_s']:.2f}s "
              f"{len(stage['outputs'])} artifact(s)")
    print(f"provenance: {manifest.output_dir / 'provenance.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
