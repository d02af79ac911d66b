"""Line protocol client for external pair scorers.

The scorer is a child process speaking UTF-8 lines over stdin/stdout:

    client: HELLO bitext-sieve/1 score=<semantics>
    server: OK <name>/<version>
    client: <id>\\t<source>\\t<target>
    server: <id>\\t<float>          (any order, one line per request)
    client: BYE                     (server then exits 0)

Semantics "parallelism" promises scores in [0, 1]; "perplexity"
promises positive floats, unbounded above. Responses may arrive out of
order; the client matches them by id and re-emits results in input
order with a bounded number of requests in flight.
"""

from __future__ import annotations

import queue
import shlex
import subprocess
import threading
from collections import deque
from collections.abc import Iterable, Iterator, Sequence

from .core import SentencePair
from .errors import ConfigError, ProtocolError, TransportError

PROTOCOL_NAME = "bitext-sieve/1"
PARALLELISM = "parallelism"
PERPLEXITY = "perplexity"
SEMANTICS = (PARALLELISM, PERPLEXITY)

DEFAULT_WINDOW = 256
DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 2

_EOF = object()


class ScorerClient:
    """One scorer subprocess with handshake, windowing and validation."""

    def __init__(
        self,
        command: str | Sequence[str],
        semantics: str = PARALLELISM,
        *,
        window: int = DEFAULT_WINDOW,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> None:
        if semantics not in SEMANTICS:
            raise ConfigError(f"unknown score semantics {semantics!r}, expected one of {SEMANTICS}")
        if window < 1:
            raise ConfigError(f"window must be >= 1, got {window}")
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.semantics = semantics
        self.window = window
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self.peer = ""
        self.exit_code: int | None = None

    def __enter__(self) -> "ScorerClient":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _pump(self, stream) -> None:
        for line in stream:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(_EOF)

    def _read_line(self) -> str:
        try:
            item = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise TransportError(
                f"scorer {self.command[0]!r} sent nothing for {self.timeout}s"
            ) from None
        if item is _EOF:
            raise TransportError(f"scorer {self.command[0]!r} closed its output stream")
        return item

    def _send(self, line: str) -> None:
        proc = self._proc
        if proc is None or proc.stdin is None:
            raise TransportError("scorer process is not running")
        try:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"scorer pipe failed: {exc}") from exc

    def start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start scorer {self.command!r}: {exc}") from exc
        threading.Thread(
            target=self._pump, args=(self._proc.stdout,), daemon=True
        ).start()
        self._send(f"HELLO {PROTOCOL_NAME} score={self.semantics}")
        reply = self._read_line()
        if not reply.startswith("OK ") or "/" not in reply[3:]:
            raise ProtocolError(f"bad handshake reply: {reply!r}")
        self.peer = reply[3:]

    def close(self) -> None:
        proc = self._proc
        if proc is None:
            return
        self._proc = None
        try:
            if proc.stdin is not None and proc.poll() is None:
                proc.stdin.write("BYE\n")
                proc.stdin.flush()
                proc.stdin.close()
            proc.wait(timeout=self.timeout)
        except (BrokenPipeError, OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()
        self.exit_code = proc.returncode

    def _validate(self, score: float, record_id: int) -> float:
        if self.semantics == PARALLELISM:
            if not 0.0 <= score <= 1.0:
                raise ProtocolError(
                    f"parallelism score for id {record_id} out of [0, 1]: {score!r}"
                )
        elif not score > 0.0:
            raise ProtocolError(f"perplexity for id {record_id} must be positive: {score!r}")
        return score

    def _parse_response(self, line: str, in_flight: dict) -> tuple[int, float]:
        if line.startswith("ERR"):
            raise ProtocolError(f"scorer reported an error: {line!r}")
        parts = line.split("\t")
        if len(parts) != 2:
            raise ProtocolError(f"malformed response line: {line!r}")
        try:
            record_id = int(parts[0])
            score = float(parts[1])
        except ValueError:
            raise ProtocolError(f"malformed response line: {line!r}") from None
        if record_id not in in_flight:
            raise ProtocolError(f"response for unknown or duplicate id {record_id}")
        return record_id, self._validate(score, record_id)

    def score_batch(self, pairs: Iterable[SentencePair]) -> Iterator[tuple[int, float]]:
        """Yield (id, score) in input order, keeping <= window requests open."""
        it = iter(pairs)
        exhausted = False
        seen: set[int] = set()
        in_flight: set[int] = set()
        order: deque[int] = deque()
        ready: dict[int, float] = {}
        while True:
            while not exhausted and len(in_flight) < self.window:
                try:
                    pair = next(it)
                except StopIteration:
                    exhausted = True
                    break
                if pair.id in seen:
                    raise ConfigError(f"duplicate record id {pair.id} in scorer batch")
                seen.add(pair.id)
                self._send(f"{pair.id}\t{pair.source}\t{pair.target}")
                in_flight.add(pair.id)
                order.append(pair.id)
            if exhausted and not in_flight:
                # every response arrived, so the ordered buffer has drained
                return
            record_id, score = self._parse_response(self._read_line(), in_flight)
            in_flight.discard(record_id)
            ready[record_id] = score
            while order and order[0] in ready:
                head = order.popleft()
                yield head, ready.pop(head)


def score_pairs_external(
    command: str | Sequence[str],
    semantics: str,
    pairs: Sequence[SentencePair],
    *,
    window: int = DEFAULT_WINDOW,
    timeout: float = DEFAULT_TIMEOUT,
    retries: int = DEFAULT_RETRIES,
) -> list[float]:
    """Score pairs via a fresh scorer process, retrying transport failures.

    After ``retries`` additional attempts a TransportError is re-raised as
    the hard ProtocolError it already is.
    """
    last: TransportError | None = None
    for _ in range(retries + 1):
        try:
            with ScorerClient(command, semantics, window=window, timeout=timeout) as client:
                results = dict(client.score_batch(pairs))
            return [results[p.id] for p in pairs]
        except TransportError as exc:
            last = exc
    assert last is not None
    raise last
