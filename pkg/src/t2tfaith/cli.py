"""``t2tfaith`` command line interface.

Exit status: 0 on success, 1 when a line is rejected under ``--on-error
strict``, 2 on usage errors (bad flags, unreadable input).
"""

from __future__ import annotations

import argparse
import sys

from .errors import UsageError
from .pipeline import PipelineConfig, resolve_workers, run


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("must be in [0, 1]")
    return value


def _percent(text: str) -> float:
    value = float(text)
    if not 0 < value <= 100:
        raise argparse.ArgumentTypeError("must be in (0, 100]")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-i", "--input", default="-", help="JSON Lines input (default: stdin)")
    p.add_argument("-o", "--output", default="-", help="output path (default: stdout)")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--workers", type=_positive, default=None,
                   help="worker processes (default: $T2TFAITH_WORKERS or 1)")
    p.add_argument("--on-error", choices=("strict", "skip"), default="skip")
    p.add_argument("--strict", dest="on_error", action="store_const", const="strict",
                   help="same as --on-error strict")
    p.add_argument("--report", choices=("json",), default=None,
                   help="print the run report as one JSON object on stderr")


def _plan_opts(p: argparse.ArgumentParser, attach=True) -> None:
    if attach:
        p.add_argument("--attach-values", action="store_true",
                       help="render plan items as 'attribute : value'")
    p.add_argument("--text-out", action="store_true",
                   help="write one rendered line per instance instead of JSON Lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t2tfaith",
        description="Entity-centric faithfulness metrics and corpus tools for table-to-text data.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    _common(sub.add_parser("align", help="emit the alignment audit sidecar"))

    p = sub.add_parser("metrics", help="per-instance TSV plus corpus summary")
    _common(p)
    p.add_argument("--summary-out", default=None,
                   help="write the corpus summary here instead of after the TSV rows")

    p = sub.add_parser("filter", help="randomly drop uncovered table records")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=_unit, required=True)

    p = sub.add_parser("truncate", help="keep the first N sentences of every text")
    _common(p)
    p.add_argument("--n-keep", type=_positive, required=True)

    p = sub.add_parser("select", help="keep the top or a random n%% of instances")
    _common(p)
    p.add_argument("--top-percent", type=_percent, required=True)
    p.add_argument("--mode", dest="select_mode", choices=("ranked", "random"), default="ranked")

    plan_cmds = {
        "extract": "gold plan from the reference text",
        "augment": "gold plan plus hallucinated entity literals",
        "postedit": "clean a learned plan found in --raw-field",
    }
    plan = sub.add_parser("plan", help="plan extraction and post-editing")
    plan_sub = plan.add_subparsers(dest="plan_command", required=True, metavar="ACTION")
    for name, help_text in plan_cmds.items():
        for p in (plan_sub.add_parser(name, help=help_text),
                  sub.add_parser(f"plan-{name}", help=help_text)):
            _common(p)
            _plan_opts(p, attach=name != "augment")
            if name == "postedit":
                p.add_argument("--raw-field", default="raw_plan")

    p = sub.add_parser("serialize", help="render model inputs")
    _common(p)
    p.add_argument("--mode", dest="render_mode", choices=("r", "rp", "rep", "e", "val"),
                   required=True)
    _plan_opts(p)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    command = args.command
    if command == "plan":
        command = f"plan-{args.plan_command}"
    return PipelineConfig(
        command=command,
        input=args.input,
        output=args.output,
        seed=args.seed,
        lam=getattr(args, "lam", None),
        n_keep=getattr(args, "n_keep", None),
        top_percent=getattr(args, "top_percent", None),
        select_mode=getattr(args, "select_mode", "ranked"),
        render_mode=getattr(args, "render_mode", None),
        attach_values=getattr(args, "attach_values", False),
        text_out=getattr(args, "text_out", False),
        raw_field=getattr(args, "raw_field", "raw_plan"),
        summary_out=getattr(args, "summary_out", None),
        workers=resolve_workers(args.workers),
        on_error=args.on_error,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except UsageError as exc:
        print(f"t2tfaith: error: {exc}", file=sys.stderr)
        return 2
    if args.report == "json":
        print(report.to_json(), file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
