"""Local annotation service: dispenses questions, persists answers durably,
reports live progress and agreement.

The store is an append-only JSON-lines log replayed on startup; every
acknowledged answer is flushed and fsynced first. A single lock serializes
writes and batch assignment, so concurrent workers never hold the same
question until a serve times out.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import threading
import time
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import annotation
from .annotation import AnnotationQuestion, AnnotationResponse
from .jsonio import dumps

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "SENSCOMMON_DATA_DIR"
DEFAULT_SERVE_TIMEOUT = 600.0  # seconds before an unanswered serve is reclaimed

QUESTIONS_FILE = "questions.jsonl"
RESPONSES_LOG = "responses.log.jsonl"


class ServiceError(Exception):
    pass


class UnknownQuestionError(ServiceError):
    pass


class InvalidChoiceError(ServiceError):
    def __init__(self, choice: str, allowed: Sequence[str]):
        super().__init__(f"choice {choice!r} not in {list(allowed)}")
        self.allowed = list(allowed)


class AnnotationStore:
    """Durable question/response store with soft serve assignment."""

    def __init__(
        self,
        data_dir: str | Path | None = None,
        n_raters: int = annotation.DEFAULT_RATERS,
        serve_timeout: float = DEFAULT_SERVE_TIMEOUT,
        clock: Callable[[], float] = time.time,
    ):
        if data_dir is None:
            data_dir = os.environ.get(DATA_DIR_ENV, "senscommon-data")
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.n_raters = n_raters
        self.serve_timeout = serve_timeout
        self.clock = clock
        self._lock = threading.RLock()
        self._questions: dict[str, AnnotationQuestion] = {}
        self._responses: list[AnnotationResponse] = []
        self._effective: dict[tuple[str, str], AnnotationResponse] = {}
        self._counts: dict[str, int] = {}
        self._in_flight: dict[str, tuple[str, float]] = {}
        self._log_fh = None
        self._load()

    # -- persistence ------------------------------------------------------
    def _load(self) -> None:
        qpath = self.data_dir / QUESTIONS_FILE
        if qpath.exists():
            with qpath.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        q = AnnotationQuestion.from_dict(json.loads(line))
                        self._questions[q.id] = q
        rpath = self.data_dir / RESPONSES_LOG
        if rpath.exists():
            with rpath.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._index(AnnotationResponse.from_dict(json.loads(line)))
        self._log_fh = rpath.open("a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._log_fh is not None:
                self._log_fh.close()
                self._log_fh = None

    def compact(self) -> None:
        """Rewrite the log with one effective response per (question, worker)."""
        with self._lock:
            effective = annotation.effective_responses(self._responses)
            tmp = self.data_dir / (RESPONSES_LOG + ".tmp")
            with tmp.open("w", encoding="utf-8") as fh:
                for r in effective:
                    fh.write(dumps(r.to_dict()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            if self._log_fh is not None:
                self._log_fh.close()
            tmp.replace(self.data_dir / RESPONSES_LOG)
            self._log_fh = (self.data_dir / RESPONSES_LOG).open("a", encoding="utf-8")
            self._responses = list(effective)

    def add_questions(self, questions: Iterable[AnnotationQuestion]) -> int:
        added = 0
        with self._lock:
            qpath = self.data_dir / QUESTIONS_FILE
            with qpath.open("a", encoding="utf-8") as fh:
                for q in questions:
                    if q.id in self._questions:
                        continue
                    self._questions[q.id] = q
                    fh.write(dumps(q.to_dict()) + "\n")
                    added += 1
                fh.flush()
                os.fsync(fh.fileno())
        return added

    # -- core operations ----------------------------------------------------
    def _index(self, response: AnnotationResponse) -> None:
        self._responses.append(response)
        key = (response.question_id, response.worker_id)
        cur = self._effective.get(key)
        if cur is None:
            self._counts[response.question_id] = self._counts.get(response.question_id, 0) + 1
            self._effective[key] = response
        elif (response.timestamp, response.choice) >= (cur.timestamp, cur.choice):
            self._effective[key] = response

    def next_batch(self, worker_id: str, batch_size: int) -> list[AnnotationQuestion]:
        """Up to batch_size unanswered questions, fewest-responses-first then
        id order; served questions are held for this worker until they answer
        or the hold expires."""
        now = self.clock()
        with self._lock:
            for qid, (_, expiry) in list(self._in_flight.items()):
                if expiry <= now:
                    del self._in_flight[qid]
            candidates = []
            for qid in self._questions:
                if (qid, worker_id) in self._effective:
                    continue
                if qid in self._in_flight:
                    continue
                candidates.append(qid)
            candidates.sort(key=lambda q: (self._counts.get(q, 0), q))
            batch = candidates[:batch_size]
            for qid in batch:
                self._in_flight[qid] = (worker_id, now + self.serve_timeout)
            return [self._questions[qid] for qid in batch]

    def submit(self, question_id: str, worker_id: str, choice: str,
               timestamp: float | None = None) -> AnnotationResponse:
        """Validate, append durably, then acknowledge."""
        with self._lock:
            q = self._questions.get(question_id)
            if q is None:
                raise UnknownQuestionError(f"unknown question id {question_id!r}")
            if choice not in q.options:
                raise InvalidChoiceError(choice, q.options)
            response = AnnotationResponse(
                question_id=question_id,
                worker_id=worker_id,
                choice=choice,
                timestamp=self.clock() if timestamp is None else float(timestamp),
            )
            if self._log_fh is None:
                raise ServiceError("store is closed")
            self._log_fh.write(dumps(response.to_dict()) + "\n")
            self._log_fh.flush()
            os.fsync(self._log_fh.fileno())
            self._index(response)
            held = self._in_flight.get(question_id)
            if held is not None and held[0] == worker_id:
                del self._in_flight[question_id]
            return response

    # -- reporting ---------------------------------------------------------
    def response_count(self, question_id: str) -> int:
        with self._lock:
            return self._counts.get(question_id, 0)

    def export_matrix(self, relation: str) -> tuple[list[str], np.ndarray]:
        with self._lock:
            return annotation.build_rating_matrix(
                self._questions, list(self._responses), relation, self.n_raters
            )

    def export_csv(self, relation: str) -> str:
        ids, matrix = self.export_matrix(relation)
        options = annotation.options_for(relation)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["question_id", *options])
        for qid, row in zip(ids, matrix):
            writer.writerow([qid, *[int(x) for x in row]])
        return buf.getvalue()

    def majority_labels(self, relation: str) -> dict[str, str]:
        """Majority label per fully-answered question of one relation."""
        with self._lock:
            by_q: dict[str, list[AnnotationResponse]] = {}
            for r in annotation.effective_responses(self._responses):
                q = self._questions.get(r.question_id)
                if q is not None and q.relation == relation:
                    by_q.setdefault(r.question_id, []).append(r)
            return {
                qid: annotation.aggregate_majority(rs)
                for qid, rs in sorted(by_q.items())
                if len(rs) >= self.n_raters
            }

    def stats(self) -> dict:
        with self._lock:
            relations = sorted({q.relation for q in self._questions.values()})
            out: dict = {"n_raters": self.n_raters, "total_responses": len(self._responses),
                         "relations": {}}
            for rel in relations:
                qids = [qid for qid, q in self._questions.items() if q.relation == rel]
                ids, matrix = annotation.build_rating_matrix(
                    self._questions, list(self._responses), rel, self.n_raters
                )
                kappa = annotation.fleiss_kappa(matrix) if matrix.shape[0] >= 2 else None
                majorities = self.majority_labels(rel)
                options = list(annotation.options_for(rel)) + [annotation.UNRESOLVED]
                counts = {opt: 0 for opt in options}
                for label in majorities.values():
                    counts[label] += 1
                total_m = max(1, len(majorities))
                out["relations"][rel] = {
                    "questions": len(qids),
                    "fully_answered": len(ids),
                    "kappa": kappa,
                    "majority_proportions": {
                        opt: counts[opt] / total_m for opt in options
                    },
                }
            return out


# ---------------------------------------------------------------------------
# HTTP layer

from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer  # noqa: E402
from urllib.parse import parse_qs, urlparse  # noqa: E402

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>senscommon annotation</title></head>
<body><h1>senscommon annotation service</h1>
<p>The service is running. Build the browser UI (see frontend/) and serve it
with <code>--ui-dir frontend/dist</code>, or use the JSON API directly:</p>
<ul>
<li>GET /api/questions/next?worker=W&amp;n=K</li>
<li>POST /api/answers</li>
<li>GET /api/stats</li>
<li>GET /api/export?relation=R</li>
</ul></body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    server_version = "senscommon/0.1"

    @property
    def store(self) -> AnnotationStore:
        return self.server.store  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # route through logging, not stderr
        logger.debug("http: " + fmt, *args)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, text: str, content_type: str, status: int = 200) -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        query = parse_qs(url.query)
        try:
            if url.path == "/api/questions/next":
                worker = query.get("worker", [""])[0]
                if not worker:
                    return self._send_json({"error": "missing worker parameter"}, 400)
                n = int(query.get("n", ["10"])[0])
                batch = self.store.next_batch(worker, n)
                return self._send_json({"questions": [q.to_dict() for q in batch]})
            if url.path == "/api/stats":
                return self._send_json(self.store.stats())
            if url.path == "/api/export":
                relation = query.get("relation", [""])[0]
                if not relation:
                    return self._send_json(
                        {"error": "missing relation parameter",
                         "relations": sorted(annotation.RELATIONS)}, 400)
                try:
                    csv_text = self.store.export_csv(relation)
                except annotation.UnknownRelationError as exc:
                    return self._send_json({"error": str(exc)}, 400)
                return self._send_text(csv_text, "text/csv; charset=utf-8")
            return self._serve_static(url.path)
        except Exception as exc:  # pragma: no cover - last-resort guard
            logger.exception("request failed")
            self._send_json({"error": str(exc)}, 500)

    def do_POST(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        if url.path != "/api/answers":
            return self._send_json({"error": "not found"}, 404)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
            qid = payload["question_id"]
            worker = payload["worker_id"]
            choice = payload["choice"]
        except (KeyError, ValueError) as exc:
            return self._send_json({"error": f"bad request: {exc}"}, 400)
        try:
            self.store.submit(qid, worker, choice, timestamp=payload.get("timestamp"))
        except UnknownQuestionError as exc:
            return self._send_json({"error": str(exc)}, 404)
        except InvalidChoiceError as exc:
            return self._send_json({"error": str(exc), "allowed": exc.allowed}, 400)
        return self._send_json({"ok": True, "response_count": self.store.response_count(qid)})

    def _serve_static(self, path: str) -> None:
        ui_dir = getattr(self.server, "ui_dir", None)
        if path == "/":
            path = "/index.html"
        if ui_dir is not None:
            root = Path(ui_dir).resolve()
            target = (root / path.lstrip("/")).resolve()
            if target.is_file() and root in target.parents:
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
                return self._send_bytes(target.read_bytes(), ctype)
        if path == "/index.html":
            return self._send_text(_PLACEHOLDER_PAGE, "text/html; charset=utf-8")
        self._send_json({"error": "not found"}, 404)

    def _send_bytes(self, body: bytes, content_type: str, status: int = 200) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(store: AnnotationStore, host: str = "127.0.0.1", port: int = 0,
                ui_dir: str | Path | None = None) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _Handler)
    server.store = store  # type: ignore[attr-defined]
    server.ui_dir = str(ui_dir) if ui_dir else None  # type: ignore[attr-defined]
    return server


class ServiceThread:
    """Run the HTTP service in a background thread (tests, demo)."""

    def __init__(self, store: AnnotationStore, ui_dir: str | Path | None = None):
        self.server = make_server(store, ui_dir=ui_dir)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> "ServiceThread":
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.server.shutdown()
        self.server.server_close()
        self.thread.join(timeout=5)
