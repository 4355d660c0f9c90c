"""Pipelines of subcommands joined by bare ``/`` tokens.

Every stage runs in its own thread. Stages hand row batches to their
successor through bounded queues, so downstream work starts before upstream
work ends and memory stays bounded. The first failure cancels the others.
"""
from __future__ import annotations

import argparse
import logging
import queue
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence

from .edges import EdgeStream, resolve_header
from .errors import BadStageArgs, EmptyStage, KgtkError, StageFailure, UnknownSubcommand

log = logging.getLogger(__name__)

PIPE_TOKEN = "/"
CHANNEL_BATCHES = 1   # one batch of up to 1024 rows in flight per channel
_POLL = 0.05


class ArgError(Exception):
    pass


class StageParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing and exiting."""

    def error(self, message):
        raise ArgError(message)

    def exit(self, status=0, message=None):
        if status:
            raise ArgError(message or "invalid arguments")
        raise ArgError("__exit__")


@dataclass
class Command:
    """One subcommand.

    ``kind`` is ``source`` (reads a non-KGTK input, first stage only),
    ``transform`` (KGTK in, KGTK out), ``multi`` (KGTK in plus files of its
    own) or ``sink`` (KGTK in, other output, last stage only).
    """
    name: str
    kind: str
    configure: Callable[[argparse.ArgumentParser], None]
    run: Callable
    help: str = ""
    aliases: tuple = ()
    writes_stdout: bool = True
    check: Optional[Callable[[argparse.Namespace], None]] = None   # extra validation before running

    def parser(self) -> StageParser:
        p = StageParser(prog=f"kgtk {self.name}", description=self.help, add_help=True)
        if self.kind in ("source", "transform", "sink"):
            p.add_argument("-i", "--input", dest="input", default=None, help="input file (default stdin)")
            p.add_argument("input_file", nargs="?", default=None, help="input file (alternative to -i)")
        if self.writes_stdout:
            p.add_argument("-o", "--output", dest="output", default=None, help="output file (default stdout)")
        self.configure(p)
        return p


@dataclass
class StageSpec:
    index: int
    command: Command
    argv: List[str]
    args: argparse.Namespace

    @property
    def name(self) -> str:
        return self.command.name


@dataclass
class PipelinePlan:
    stages: List[StageSpec]

    def __len__(self):
        return len(self.stages)


def split_stages(argv: Sequence[str]) -> List[List[str]]:
    stages: List[List[str]] = [[]]
    for tok in argv:
        if tok == PIPE_TOKEN:
            stages.append([])
        else:
            stages[-1].append(tok)
    for i, s in enumerate(stages):
        if not s:
            raise EmptyStage(f"stage {i + 1} is empty (adjacent or trailing '/')")
    return stages


def parse_pipeline(argv: Sequence[str], registry: Dict[str, Command]) -> PipelinePlan:
    """Split on ``/`` and validate every stage before anything runs."""
    if not argv:
        raise UnknownSubcommand("no subcommand given")
    stages = []
    raw = split_stages(argv)
    for i, tokens in enumerate(raw):
        name, rest = tokens[0], tokens[1:]
        cmd = registry.get(name)
        if cmd is None:
            raise UnknownSubcommand(f"unknown subcommand {name!r}")
        try:
            args = cmd.parser().parse_args(rest)
            if cmd.check is not None:
                cmd.check(args)
        except ArgError as e:
            raise BadStageArgs(i, f"{name}: {e}") from None
        except KgtkError as e:
            raise BadStageArgs(i, f"{name}: {e}") from None
        if hasattr(args, "input_file"):
            if args.input and args.input_file:
                raise BadStageArgs(i, f"{name}: input given both with -i and as a positional argument")
            args.input = args.input or args.input_file
            del args.input_file
        stages.append(StageSpec(i, cmd, list(rest), args))
    _check_shape(stages)
    return PipelinePlan(stages)


def _check_shape(stages: List[StageSpec]):
    last = len(stages) - 1
    for st in stages:
        kind = st.command.kind
        if kind == "source" and st.index > 0:
            raise BadStageArgs(st.index, f"{st.name} reads its own input and must be the first stage")
        if kind == "sink" and st.index < last:
            raise BadStageArgs(st.index, f"{st.name} does not produce KGTK output and must be the last stage")
        if getattr(st.args, "output", None) and st.index < last:
            raise BadStageArgs(st.index, "only the last stage may redirect its output")
    # an input file named on a later stage binds to the first stage
    first = stages[0]
    for st in stages[1:]:
        path = getattr(st.args, "input", None)
        if not path:
            continue
        if first.command.kind not in ("transform", "sink") or first.args.input:
            raise BadStageArgs(st.index, "only the first stage may name an input file")
        first.args.input = path
        st.args.input = None


# -- execution ----------------------------------------------------------------------

class _Cancelled(Exception):
    pass


class _UpstreamFailed(Exception):
    pass


_END = object()


@dataclass
class _Failure:
    index: int
    name: str
    error: BaseException


@dataclass
class StageStats:
    name: str
    rows_out: int = 0
    started: float = 0.0
    finished: float = 0.0


class _Channel:
    def __init__(self, cancel: threading.Event):
        self.q: "queue.Queue" = queue.Queue(maxsize=CHANNEL_BATCHES)
        self.cancel = cancel

    def put(self, item):
        while True:
            if self.cancel.is_set():
                raise _Cancelled()
            try:
                self.q.put(item, timeout=_POLL)
                return
            except queue.Full:
                continue

    def put_nowait_best_effort(self, item):
        deadline = time.monotonic() + 1.0
        while time.monotonic() < deadline:
            try:
                self.q.put(item, timeout=_POLL)
                return
            except queue.Full:
                if self.cancel.is_set():
                    try:
                        self.q.get_nowait()
                    except queue.Empty:
                        pass

    def get(self):
        while True:
            try:
                return self.q.get(timeout=_POLL)
            except queue.Empty:
                if self.cancel.is_set():
                    raise _Cancelled() from None


def _channel_stream(ch: _Channel) -> EdgeStream:
    first = ch.get()
    if isinstance(first, _Failure):
        raise _UpstreamFailed()
    header = resolve_header(first)

    def gen():
        while True:
            item = ch.get()
            if item is _END:
                return
            if isinstance(item, _Failure):
                raise _UpstreamFailed()
            yield item
    return EdgeStream(header, gen(), "<pipe>")


@dataclass
class StageContext:
    """What a stage needs besides its arguments."""
    index: int
    stderr: object
    is_first: bool
    is_last: bool
    stats: Dict[str, int] = field(default_factory=dict)


def _counted(stream: EdgeStream, stats: StageStats) -> EdgeStream:
    def gen():
        for batch in stream.batches():
            stats.rows_out += len(batch)
            yield batch
    return EdgeStream(stream.header, gen(), stream.source)


def run_pipeline(plan: PipelinePlan, open_upstream: Callable, write_output: Callable,
                 stderr=None, progress: bool = False) -> int:
    """Run all stages; the last one runs in the calling thread.

    ``open_upstream(stage)`` opens the KGTK input of a first stage;
    ``write_output(stage, result)`` writes the last stage's result.
    Raises StageFailure for the first stage that failed.
    """
    stderr = stderr or sys.stderr
    n = len(plan)
    cancel = threading.Event()
    channels = [_Channel(cancel) for _ in range(n - 1)]
    failures: List[_Failure] = []
    lock = threading.Lock()
    stats = [StageStats(st.name) for st in plan.stages]

    def record(st, err):
        with lock:
            failures.append(_Failure(st.index, st.name, err))
        cancel.set()

    opened: List[EdgeStream] = []   # first-stage inputs, closed once the run ends

    def build(st: StageSpec):
        ctx = StageContext(st.index, stderr, st.index == 0, st.index == n - 1)
        upstream = None
        if st.index > 0:
            upstream = _channel_stream(channels[st.index - 1])
        elif st.command.kind in ("transform", "sink"):
            upstream = open_upstream(st)
            opened.append(upstream)
        try:
            return st.command.run(st.args, upstream, ctx)
        except BaseException:
            if upstream is not None:
                upstream.close()
            raise

    def worker(st: StageSpec):
        out = channels[st.index]
        s = stats[st.index]
        s.started = time.monotonic()
        try:
            result = build(st)
            if not isinstance(result, EdgeStream):
                raise TypeError(f"{st.name} produced no KGTK stream")
            out.put(list(result.header.columns))
            for batch in result.batches():
                s.rows_out += len(batch)
                out.put(batch)
            out.put(_END)
        except (_Cancelled, _UpstreamFailed):
            out.put_nowait_best_effort(_Failure(st.index, st.name, RuntimeError("cancelled")))
        except BaseException as e:  # noqa: BLE001 - reported through StageFailure
            record(st, e)
            out.put_nowait_best_effort(_Failure(st.index, st.name, e))
        finally:
            s.finished = time.monotonic()

    threads = []
    for st in plan.stages[:-1]:
        t = threading.Thread(target=worker, args=(st,), name=f"kgtk-stage-{st.index + 1}", daemon=True)
        t.start()
        threads.append(t)

    last = plan.stages[-1]
    s = stats[-1]
    s.started = time.monotonic()
    try:
        result = build(last)
        if isinstance(result, EdgeStream):
            result = _counted(result, s)
        write_output(last, result)
    except (_Cancelled, _UpstreamFailed):
        pass
    except BrokenPipeError:
        cancel.set()
        raise
    except BaseException as e:  # noqa: BLE001
        record(last, e)
    finally:
        s.finished = time.monotonic()
        if failures:
            cancel.set()
        for t in threads:
            t.join(timeout=5.0)
        for up in opened:
            up.close()

    if progress:
        for i, st in enumerate(stats):
            rows_in = stats[i - 1].rows_out if i > 0 else None
            stderr.write(f"stage {i + 1} {st.name}: rows in {rows_in if rows_in is not None else '-'}, "
                         f"rows out {st.rows_out}, {st.finished - st.started:.3f}s\n")
    if failures:
        first = failures[0]   # earliest in time
        raise StageFailure(first.index, first.name, first.error)
    return 0
