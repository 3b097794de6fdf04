"""Command line entry point.

    embexport export --model hash-64 --dataset corpus.jsonl --split train --out outdir

Exit codes: 0 success, 1 bad usage, 2 the model/dataset could not be
retrieved or the corpus was malformed.
"""

from __future__ import annotations

import argparse
import sys

from surprisim import SurprisimError

from . import __version__
from .errors import DataError, ExportError, UnavailableError, UsageError
from .export import DEFAULT_TEMPLATE, ExportJob, run_export


class _Parser(argparse.ArgumentParser):
    # argparse wants to sys.exit(2); route through our error taxonomy instead
    def error(self, message: str):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="embexport", description="Export text corpora as embedding JSONL files.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    export = sub.add_parser("export", help="embed a corpus and write docs/labels/manifest files")
    export.add_argument("--model", required=True, help="checkpoint name or hash-<dim> test backend")
    export.add_argument("--dataset", required=True, help="benchmark name or local .txt/.jsonl path")
    export.add_argument("--split", required=True, help="dataset split, e.g. test")
    export.add_argument("--out", required=True, help="output directory")
    export.add_argument(
        "--template",
        default=DEFAULT_TEMPLATE,
        help="label query phrase containing '{label}' (default: %(default)r)",
    )
    export.add_argument("--batch-size", type=int, default=64, help="encoder batch size")
    export.add_argument("--limit", type=int, default=None, help="only export the first N documents")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        job = ExportJob(
            model=args.model,
            dataset=args.dataset,
            split=args.split,
            out_dir=args.out,
            template=args.template,
            batch_size=args.batch_size,
            limit=args.limit,
        )
        manifest = run_export(job)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except UnavailableError as exc:
        print(f"error: unavailable: {exc}", file=sys.stderr)
        return 2
    except (DataError, ExportError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    except (SurprisimError, OSError) as exc:
        # downstream loader rejections and filesystem failures during writes
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    n = manifest["dataset"]["records"]
    print(f"exported {n} records to {args.out} (manifest.json written)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
