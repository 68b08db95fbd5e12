"""Predictor backed by a child process speaking a line protocol.

Protocol (UTF-8, newline-terminated lines):

* classification children announce ``CLASSES a,b,c`` as their first line;
* the parent sends ``PREDICT <m>`` followed by ``m`` CSV rows (no header,
  training-schema column order, categoricals as level labels);
* the child answers with ``m`` lines: one float per line for regression, or
  comma-separated class probabilities in the announced class order.
"""

from __future__ import annotations

import csv
import io
import queue
import subprocess
import threading

import numpy as np

from ..tabular import NUMERIC, FeatureSchema
from .base import CLASSIFICATION, REGRESSION, Predictor


class ExternalModelError(RuntimeError):
    """The child process died, timed out or replied with malformed output."""


_EOF = object()


class ExternalPredictor(Predictor):
    """Forward predictions to a long-running child process.

    Unlike the built-in models this predictor is not trained by ``fit``: its
    schema and task are declared up front. Access to the child is serialized
    with a lock so concurrent ``predict`` calls are safe.

    Parameters
    ----------
    command : list of str
        argv of the child process.
    schema : FeatureSchema
        Feature columns the child expects, in order.
    task : {'regression', 'classification'}
    timeout : float, default=60
        Seconds to wait for each reply line.
    """

    def __init__(self, command, schema: FeatureSchema, task=REGRESSION, timeout=60.0):
        self.command = command
        self.schema = schema
        self.task = task
        self.timeout = timeout
        self.schema_ = schema
        self.task_ = task
        self.response_ = None
        self.classes_ = None
        self._proc = None
        self._lines: queue.Queue | None = None
        self._lock = threading.Lock()
        if task not in (REGRESSION, CLASSIFICATION):
            raise ValueError(f"unknown task {task!r}")

    def fit(self, X=None, y=None):
        self._ensure_started()
        return self

    def __getstate__(self):
        state = self.__dict__.copy()
        state.update(_proc=None, _lines=None, _lock=None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def _reader(self, stream, sink):
        for line in stream:
            sink.put(line)
        sink.put(_EOF)

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                list(self.command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1,
            )
        except OSError as exc:
            raise ExternalModelError(f"cannot start {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._reader, args=(self._proc.stdout, self._lines),
                         daemon=True).start()
        if self.task_ == CLASSIFICATION:
            try:
                header = self._read_line()
            except ExternalModelError as exc:
                self.close()
                raise ExternalModelError(f"no CLASSES header from child: {exc}") from exc
            if not header.startswith("CLASSES "):
                raise ExternalModelError(f"expected CLASSES header, got {header!r}")
            self.classes_ = tuple(c.strip() for c in header[len("CLASSES "):].split(","))
            if len(self.classes_) < 2:
                raise ExternalModelError("classification child must declare >= 2 classes")

    def _read_line(self) -> str:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise ExternalModelError(f"child timed out after {self.timeout}s") from None
        if line is _EOF:
            code = self._proc.wait()
            raise ExternalModelError(f"child exited (code {code}) before replying")
        return line.rstrip("\r\n")

    def _encode(self, X: np.ndarray) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in X:
            cells = []
            for v, kind, levels in zip(row, self.schema_.kinds, self.schema_.levels):
                cells.append(repr(float(v)) if kind == NUMERIC else levels[int(v)])
            writer.writerow(cells)
        return buf.getvalue()

    def _predict_coded(self, X):
        m = X.shape[0]
        payload = f"PREDICT {m}\n" + self._encode(X)
        with self._lock:
            self._ensure_started()
            if not self._lines.empty():
                stray = self._lines.get_nowait()
                if stray is not _EOF:
                    raise ExternalModelError(
                        f"row-count mismatch: child sent an extra line {stray!r}")
            try:
                self._proc.stdin.write(payload)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ExternalModelError(f"child closed its input: {exc}") from exc
            replies = []
            for i in range(m):
                try:
                    replies.append(self._read_line())
                except ExternalModelError as exc:
                    raise ExternalModelError(
                        f"row-count mismatch: expected {m} lines, got {i} ({exc})") from exc
        return self._parse(replies)

    def _parse(self, replies):
        try:
            if self.task_ == REGRESSION:
                out = np.array([float(r) for r in replies], dtype=np.float64)
            else:
                out = np.array([[float(c) for c in r.split(",")] for r in replies],
                               dtype=np.float64)
        except ValueError as exc:
            raise ExternalModelError(f"malformed reply: {exc}") from exc
        if self.task_ == CLASSIFICATION and out.shape[1] != len(self.classes_):
            raise ExternalModelError(
                f"expected {len(self.classes_)} probabilities per row, got {out.shape[1]}")
        if not np.all(np.isfinite(out)):
            raise ExternalModelError("child returned non-finite predictions")
        return out

    def predict_output(self, X):
        if self.task_ == CLASSIFICATION:
            with self._lock:
                self._ensure_started()
        return super().predict_output(X)

    def close(self):
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def external_predictor(command, schema: FeatureSchema, task=REGRESSION,
                       timeout: float = 60.0) -> ExternalPredictor:
    return ExternalPredictor(command, schema, task, timeout).fit()
