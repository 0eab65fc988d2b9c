"""Streaming, order-preserving corpus pipelines behind the command line."""

from __future__ import annotations

import json
import os
import shutil
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from typing import Any, BinaryIO, Callable, Iterable, Iterator

from .alignment import align_instance, alignment_to_json
from .corpus import Instance, parse_instance, serialize_instance
from .errors import T2TFaithError, UsageError, ValidationError
from .hashing import MASK64
from .metrics import (
    TSV_HEADER,
    CorpusAccumulator,
    format_summary,
    format_tsv_row,
    instance_metrics,
)
from .planning import (
    EntityLiteral,
    Plan,
    RecordRef,
    RenderMode,
    augment_plan,
    extract_gold_plan,
    postedit_plan,
    render_input,
    render_plan,
)
from .transforms import (
    FilterConfig,
    TruncateConfig,
    filter_uncovered_records,
    sample_random_fraction,
    select_top_fraction,
    truncate_reference,
)

COMMANDS = (
    "align", "metrics", "filter", "truncate", "select",
    "plan-extract", "plan-augment", "plan-postedit", "serialize",
)
WORKERS_ENV = "T2TFAITH_WORKERS"
BATCH_PER_WORKER = 256


@dataclass(frozen=True)
class PipelineConfig:
    command: str
    input: str = "-"
    output: str = "-"
    seed: int = 0
    lam: float | None = None
    n_keep: int | None = None
    top_percent: float | None = None
    select_mode: str = "ranked"
    render_mode: str | None = None
    attach_values: bool = False
    text_out: bool = False
    raw_field: str = "raw_plan"
    summary_out: str | None = None
    workers: int = 1
    on_error: str = "skip"

    def validate(self) -> None:
        """Check parameters before any input is read; raises UsageError."""
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 0 <= self.seed <= MASK64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise UsageError("worker count must be >= 1")
        if self.on_error not in ("strict", "skip"):
            raise UsageError("--on-error must be strict or skip")
        if self.command == "filter":
            if self.lam is None or not 0 <= self.lam <= 1:
                raise UsageError("filter needs --lambda in [0, 1]")
        if self.command == "truncate":
            if self.n_keep is None or self.n_keep < 1:
                raise UsageError("truncate needs --n-keep >= 1")
        if self.command == "select":
            if self.top_percent is None or not 0 < self.top_percent <= 100:
                raise UsageError("select needs --top-percent in (0, 100]")
            if self.select_mode not in ("ranked", "random"):
                raise UsageError("--mode must be ranked or random")
        if self.command == "serialize":
            try:
                RenderMode(self.render_mode)
            except ValueError:
                raise UsageError("serialize needs --mode in {r,rp,rep,e,val}") from None


@dataclass
class RunReport:
    command: str
    read: int = 0
    emitted: int = 0
    rejected: int = 0
    dropped: int = 0
    corpus: dict[str, Any] | None = None
    wall_time: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    aborted: bool = False

    @property
    def exit_code(self) -> int:
        return 1 if self.aborted else 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


# --- plan <-> JSON -----------------------------------------------------------

def plan_to_json(plan: Plan) -> list:
    return [
        [it.index if isinstance(it, RecordRef) else {"ent": it.text} for it in sent]
        for sent in plan.sentences
    ]


def plan_from_json(obj: Any, n_records: int) -> Plan:
    if not isinstance(obj, list) or not all(isinstance(s, list) for s in obj):
        raise ValidationError("plan must be an array of arrays")
    sentences = []
    for sent in obj:
        items = []
        for it in sent:
            if isinstance(it, int) and not isinstance(it, bool) and 0 <= it < n_records:
                items.append(RecordRef(it))
            elif isinstance(it, dict) and isinstance(it.get("ent"), str) and it["ent"].strip():
                items.append(EntityLiteral(it["ent"]))
            else:
                raise ValidationError(f"invalid plan item {it!r}")
        sentences.append(tuple(items))
    return Plan(tuple(sentences))


# --- per-line workers --------------------------------------------------------
# Each returns ("ok", text_line | payload), ("drop", None) or ("error", message).
# They are module-level so that process pools can pickle them.

def _load(raw: bytes) -> Instance:
    return parse_instance(raw.decode("utf-8"))


def _with_plan(instance: Instance, plan: Plan, cfg: PipelineConfig, attach: bool) -> str:
    rendered = render_plan(plan, instance.table, attach_values=attach)
    if cfg.text_out:
        return rendered
    extra = dict(instance.extra)
    extra["plan"] = plan_to_json(plan)
    extra["rendered"] = rendered
    return serialize_instance(instance.replace(extra=extra))


def _plan_for(instance: Instance, mode: RenderMode) -> Plan:
    if "plan" in instance.extra:
        return plan_from_json(instance.extra["plan"], len(instance.table))
    alignment = align_instance(instance)
    plan = extract_gold_plan(instance, alignment)
    if mode is RenderMode.R_AUGPLAN:
        plan = augment_plan(plan, instance, alignment)
    return plan


def process_line(cfg: PipelineConfig, item: tuple[int, int, bytes]):
    line_no, offset, raw = item
    try:
        instance = _load(raw)
        cmd = cfg.command
        if cmd == "align":
            return "ok", alignment_to_json(instance, align_instance(instance))
        if cmd == "metrics":
            return "ok", instance_metrics(instance, align_instance(instance))
        if cmd == "select":
            return "ok", (line_no, offset, instance_metrics(instance, align_instance(instance)))
        if cmd == "filter":
            out = filter_uncovered_records(
                instance, align_instance(instance), FilterConfig(cfg.lam, cfg.seed)
            )
            if out.table_empty:
                return "drop", None
            return "ok", serialize_instance(out)
        if cmd == "truncate":
            return "ok", serialize_instance(truncate_reference(instance, TruncateConfig(cfg.n_keep)))
        if cmd == "plan-extract":
            plan = extract_gold_plan(instance, align_instance(instance))
            return "ok", _with_plan(instance, plan, cfg, cfg.attach_values)
        if cmd == "plan-augment":
            alignment = align_instance(instance)
            plan = augment_plan(extract_gold_plan(instance, alignment), instance, alignment)
            return "ok", _with_plan(instance, plan, cfg, True)
        if cmd == "plan-postedit":
            raw_plan = instance.extra.get(cfg.raw_field)
            if not isinstance(raw_plan, str):
                raise ValidationError(f"field {cfg.raw_field!r} missing or not a string")
            plan = postedit_plan(raw_plan, instance.table)
            return "ok", _with_plan(instance, plan, cfg, cfg.attach_values)
        if cmd == "serialize":
            mode = RenderMode(cfg.render_mode)
            plan = _plan_for(instance, mode) if mode in (RenderMode.R_PLAN, RenderMode.R_AUGPLAN) else None
            rendered = render_input(instance, mode, plan, attach_values=cfg.attach_values)
            if cfg.text_out:
                return "ok", rendered
            extra = dict(instance.extra)
            extra["rendered"] = rendered
            return "ok", serialize_instance(instance.replace(extra=extra))
        raise UsageError(f"unknown command {cmd!r}")
    except (T2TFaithError, UnicodeDecodeError) as exc:
        return "error", f"line {line_no}: {exc}"


# --- streaming machinery -----------------------------------------------------

def read_lines(stream: BinaryIO) -> Iterator[tuple[int, int, bytes]]:
    """(line number, byte offset, raw line) for every non-blank input line."""
    offset = 0
    for line_no, raw in enumerate(stream, 1):
        start = offset
        offset += len(raw)
        if raw.strip():
            yield line_no, start, raw.rstrip(b"\r\n")


def ordered_map(func: Callable, items: Iterable, workers: int) -> Iterator:
    """Map ``func`` over ``items`` keeping input order, with bounded look-ahead."""
    if workers <= 1:
        yield from map(func, items)
        return
    batch_size = workers * BATCH_PER_WORKER
    with ProcessPoolExecutor(max_workers=workers) as pool:
        batch = []
        for item in items:
            batch.append(item)
            if len(batch) >= batch_size:
                yield from pool.map(func, batch, chunksize=BATCH_PER_WORKER // 4)
                batch = []
        if batch:
            yield from pool.map(func, batch, chunksize=max(1, len(batch) // (workers * 4)))


def resolve_workers(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


def _open_in(path: str) -> BinaryIO:
    if path == "-":
        return sys.stdin.buffer
    try:
        return open(path, "rb")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _open_out(path: str):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _reject(report: RunReport, cfg: PipelineConfig, message: str, log) -> bool:
    """Record a rejected line; returns True when the run must stop."""
    report.rejected += 1
    if len(report.errors) < 100:
        report.errors.append(message)
    if log is not None:
        print(f"t2tfaith: {message}", file=log)
    if cfg.on_error == "strict":
        report.aborted = True
        return True
    return False


def _run_streaming(cfg, src, out, report, log):
    acc = CorpusAccumulator() if cfg.command == "metrics" else None
    if acc is not None:
        out.write(TSV_HEADER + "\n")
    for status, payload in ordered_map(partial(process_line, cfg), read_lines(src), cfg.workers):
        report.read += 1
        if status == "error":
            if _reject(report, cfg, payload, log):
                return
        elif status == "drop":
            report.dropped += 1
        elif acc is not None:
            acc.add(payload)
            out.write(format_tsv_row(payload) + "\n")
            report.emitted += 1
        else:
            out.write(payload + "\n")
            report.emitted += 1
    if acc is not None and acc.n:
        summary = acc.result()
        report.corpus = {
            "N": summary.n, "P_cover": summary.P_cover, "R_hallu": summary.R_hallu,
            "L": summary.L, "mean_sentences": summary.mean_sentences,
        }
        if cfg.summary_out:
            with open(cfg.summary_out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(format_summary(summary))
        else:
            out.write(format_summary(summary))


def _run_select(cfg, src, out, report, log):
    # buffers only (id, metrics, offset); instances are re-read from disk
    if not hasattr(src, "seek") or src is sys.stdin.buffer:
        spool = tempfile.TemporaryFile()
        shutil.copyfileobj(src, spool)
        spool.seek(0)
        src = spool
    metrics, offsets = [], {}
    for status, payload in ordered_map(partial(process_line, cfg), read_lines(src), cfg.workers):
        report.read += 1
        if status == "ok" and payload[2].id in offsets:
            status, payload = "error", f"line {payload[0]}: duplicate id {payload[2].id!r}"
        if status == "error":
            if _reject(report, cfg, payload, log):
                return
            continue
        _, offset, m = payload
        metrics.append(m)
        offsets[m.id] = offset
    if not metrics:
        return
    fraction = _count_fraction(cfg.top_percent)
    if cfg.select_mode == "ranked":
        chosen = select_top_fraction(metrics, fraction)
    else:
        chosen = sample_random_fraction([m.id for m in metrics], fraction, cfg.seed)
    for iid in chosen:
        src.seek(offsets[iid])
        out.write(src.readline().rstrip(b"\r\n").decode("utf-8") + "\n")
    report.emitted = len(chosen)
    report.dropped = len(metrics) - len(chosen)


def _count_fraction(top_percent: float) -> Fraction:
    exact = Fraction(repr(top_percent)) if isinstance(top_percent, float) else Fraction(top_percent)
    return exact / 100


def run(cfg: PipelineConfig, log=sys.stderr) -> RunReport:
    """Execute one pipeline command from ``cfg.input`` to ``cfg.output``."""
    cfg.validate()
    started = time.perf_counter()
    report = RunReport(cfg.command, config=asdict(cfg))
    src = _open_in(cfg.input)
    out = _open_out(cfg.output)
    try:
        if cfg.command == "select":
            _run_select(cfg, src, out, report, log)
        else:
            _run_streaming(cfg, src, out, report, log)
    finally:
        if src is not sys.stdin.buffer:
            src.close()
        if out is not sys.stdout:
            out.close()
        else:
            out.flush()
    report.wall_time = time.perf_counter() - started
    return report
