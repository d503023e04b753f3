"""HTTP service that assigns batches, serves questions, and stores responses.

State lives in an embedded sqlite database (append-only responses table plus
an assignments index); writes run inside IMMEDIATE transactions behind a
process lock, and uniqueness constraints make duplicate answers impossible
even under concurrent submissions.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .design import PROTOCOL_BTC, TripletQuestion
from .simulate import EXPORT_COLUMNS
from .stimuli import SOURCE_CODEC

BTC_TIMING = {"display_ms": 8_000, "blank_ms": 3_000, "answer_window_ms": 11_000, "flicker_phase_ms": 100}
PTC_TIMING = {"answer_window_ms": 30_000, "max_toggle_hz": 2, "min_toggles": 1}

ANSWER_VALUES = ("left", "right", "not_sure")


@dataclass
class ServiceConfig:
    questions: list[TripletQuestion]
    db_path: str | Path = ":memory:"
    stimuli_root: str | Path | None = None
    batches_per_assignment: tuple[int, int] = (1, 2)
    per_batch_quota: int | None = None
    max_assignments: int | None = None
    ttl_seconds: float = 86_400.0
    rng_seed: int | None = None
    response_time_slack_ms: float = 2_000.0
    clock: object = time.time


class OpenAssignmentRequest(BaseModel):
    worker_id: str = Field(min_length=1)


class ResponseBody(BaseModel):
    question_id: str
    answer: str
    response_time_ms: float = Field(ge=0)
    toggled_count: int | None = None


class StudyStore:
    """Assignment and response persistence over sqlite."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.questions = {q.question_id: q for q in config.questions}
        self.batches: dict[str, list[TripletQuestion]] = {}
        for q in config.questions:
            if q.batch_id is None:
                raise ValueError(f"question {q.question_id} has no batch id")
            self.batches.setdefault(q.batch_id, []).append(q)
        self._lock = threading.Lock()
        # isolation_level=None: autocommit with explicit BEGIN IMMEDIATE below;
        # the shared connection is serialized by the lock.
        self._conn = sqlite3.connect(
            str(config.db_path), check_same_thread=False, isolation_level=None
        )
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._init_schema()
        self._master_rng = np.random.default_rng(config.rng_seed)

    def _init_schema(self):
        with self._lock:
            self._conn.execute(
                """CREATE TABLE IF NOT EXISTS assignments (
                    assignment_id TEXT PRIMARY KEY,
                    worker_id TEXT NOT NULL UNIQUE,
                    batch_ids TEXT NOT NULL,
                    question_order TEXT NOT NULL,
                    state TEXT NOT NULL,
                    created_at REAL NOT NULL,
                    expires_at REAL NOT NULL
                )"""
            )
            self._conn.execute(
                """CREATE TABLE IF NOT EXISTS responses (
                    assignment_id TEXT NOT NULL,
                    question_id TEXT NOT NULL,
                    worker_id TEXT NOT NULL,
                    batch_id TEXT NOT NULL,
                    answer TEXT NOT NULL,
                    response_time_ms REAL NOT NULL,
                    toggled_count INTEGER,
                    submitted_at TEXT NOT NULL,
                    PRIMARY KEY (assignment_id, question_id)
                )"""
            )

    # -- assignments -------------------------------------------------------

    def _expire_stale(self, now: float):
        self._conn.execute(
            "UPDATE assignments SET state='expired' WHERE state='open' AND expires_at < ?",
            (now,),
        )

    def _worker_rng(self, worker_id: str) -> np.random.Generator:
        if self.config.rng_seed is None:
            return np.random.default_rng()
        digest = int.from_bytes(worker_id.encode()[:8].ljust(8, b"\0"), "big")
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.config.rng_seed, spawn_key=(digest,))
        )

    def open_assignment(self, worker_id: str) -> dict:
        now = float(self.config.clock())
        with self._lock:
            self._conn.execute("BEGIN IMMEDIATE")
            try:
                self._expire_stale(now)
                row = self._conn.execute(
                    "SELECT assignment_id FROM assignments WHERE worker_id=?", (worker_id,)
                ).fetchone()
                if row:
                    raise HTTPException(409, f"worker {worker_id} already holds an assignment")
                active = self._conn.execute(
                    "SELECT COUNT(*) FROM assignments WHERE state != 'expired'"
                ).fetchone()[0]
                if self.config.max_assignments is not None and active >= self.config.max_assignments:
                    raise HTTPException(503, "assignment pool exhausted")

                usage: dict[str, int] = {bid: 0 for bid in self.batches}
                for (batch_json,) in self._conn.execute(
                    "SELECT batch_ids FROM assignments WHERE state != 'expired'"
                ):
                    for bid in json.loads(batch_json):
                        usage[bid] = usage.get(bid, 0) + 1
                eligible = [
                    bid
                    for bid in sorted(self.batches)
                    if self.config.per_batch_quota is None
                    or usage[bid] < self.config.per_batch_quota
                ]
                if not eligible:
                    raise HTTPException(503, "no batch capacity left")

                lo, hi = self.config.batches_per_assignment
                k = min(int(self._master_rng.integers(lo, hi + 1)), len(eligible))
                picked = [eligible[i] for i in self._master_rng.choice(len(eligible), size=k, replace=False)]

                worker_rng = self._worker_rng(worker_id)
                qids = [q.question_id for bid in picked for q in self.batches[bid]]
                order = [qids[i] for i in worker_rng.permutation(len(qids))]

                assignment_id = uuid.uuid4().hex if self.config.rng_seed is None else (
                    f"a{self._conn.execute('SELECT COUNT(*) FROM assignments').fetchone()[0]:06d}"
                )
                self._conn.execute(
                    "INSERT INTO assignments VALUES (?,?,?,?,?,?,?)",
                    (
                        assignment_id,
                        worker_id,
                        json.dumps(picked),
                        json.dumps(order),
                        "open",
                        now,
                        now + self.config.ttl_seconds,
                    ),
                )
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise
        return {
            "assignment_id": assignment_id,
            "worker_id": worker_id,
            "batch_ids": picked,
            "n_questions": len(order),
            "state": "open",
        }

    def _load_assignment(self, assignment_id: str) -> dict:
        row = self._conn.execute(
            "SELECT assignment_id, worker_id, batch_ids, question_order, state, expires_at "
            "FROM assignments WHERE assignment_id=?",
            (assignment_id,),
        ).fetchone()
        if row is None:
            raise HTTPException(404, f"unknown assignment {assignment_id}")
        return {
            "assignment_id": row[0],
            "worker_id": row[1],
            "batch_ids": json.loads(row[2]),
            "question_order": json.loads(row[3]),
            "state": row[4],
            "expires_at": row[5],
        }

    def _check_not_expired(self, assignment: dict, now: float):
        if assignment["state"] == "expired" or (
            assignment["state"] == "open" and assignment["expires_at"] < now
        ):
            raise HTTPException(410, f"assignment {assignment['assignment_id']} expired")

    # -- questions and responses -------------------------------------------

    def _answered(self, assignment_id: str) -> set:
        return {
            qid
            for (qid,) in self._conn.execute(
                "SELECT question_id FROM responses WHERE assignment_id=?", (assignment_id,)
            )
        }

    def stimulus_urls(self, q: TripletQuestion) -> dict:
        def url(codec: str, level: int, variant: str) -> str:
            return f"/stimuli/{q.source_id}/{codec}/{level}_{variant}.png"

        if q.protocol == PROTOCOL_BTC:
            # Boosted sides flicker against the zoomed source; a level-0 side
            # is the zoomed source itself.
            def side(codec, level):
                if level == 0:
                    return url(SOURCE_CODEC, 0, "zoomed_src")
                return url(codec, level, "boosted")

            return {
                "left_url": side(q.left_codec, q.left_level),
                "right_url": side(q.right_codec, q.right_level),
                "source_url": url(SOURCE_CODEC, 0, "zoomed_src"),
            }
        return {
            "left_url": url(q.left_codec, q.left_level, "plain"),
            "right_url": url(q.right_codec, q.right_level, "plain"),
            "source_url": url(SOURCE_CODEC, 0, "plain"),
        }

    def next_question(self, assignment_id: str) -> dict:
        now = float(self.config.clock())
        with self._lock:
            assignment = self._load_assignment(assignment_id)
            self._check_not_expired(assignment, now)
            answered = self._answered(assignment_id)
        order = assignment["question_order"]
        pending = [qid for qid in order if qid not in answered]
        if not pending:
            return {"done": True, "answered": len(answered), "total": len(order)}
        q = self.questions[pending[0]]
        timing = BTC_TIMING if q.protocol == PROTOCOL_BTC else PTC_TIMING
        return {
            "done": False,
            "question_id": q.question_id,
            "protocol": q.protocol,
            "index": len(answered),
            "total": len(order),
            "timing": dict(timing),
            **self.stimulus_urls(q),
        }

    def submit_response(self, assignment_id: str, body: ResponseBody) -> dict:
        now = float(self.config.clock())
        if body.answer not in ANSWER_VALUES:
            raise HTTPException(422, f"answer must be one of {ANSWER_VALUES}")
        with self._lock:
            self._conn.execute("BEGIN IMMEDIATE")
            try:
                assignment = self._load_assignment(assignment_id)
                self._check_not_expired(assignment, now)
                if body.question_id not in assignment["question_order"]:
                    raise HTTPException(404, f"question {body.question_id} is not in this assignment")
                q = self.questions[body.question_id]
                timing = BTC_TIMING if q.protocol == PROTOCOL_BTC else PTC_TIMING
                window = timing["answer_window_ms"] + self.config.response_time_slack_ms
                if body.response_time_ms > window:
                    raise HTTPException(
                        422,
                        f"response_time_ms {body.response_time_ms} exceeds the "
                        f"{q.protocol} window ({window} ms with slack)",
                    )
                if q.protocol != PROTOCOL_BTC:
                    if body.toggled_count is None or body.toggled_count < 1:
                        raise HTTPException(422, "PTC submissions require toggled_count >= 1")
                submitted_at = datetime.fromtimestamp(now, tz=timezone.utc).isoformat()
                try:
                    self._conn.execute(
                        "INSERT INTO responses VALUES (?,?,?,?,?,?,?,?)",
                        (
                            assignment_id,
                            body.question_id,
                            assignment["worker_id"],
                            q.batch_id,
                            body.answer,
                            float(body.response_time_ms),
                            body.toggled_count,
                            submitted_at,
                        ),
                    )
                except sqlite3.IntegrityError:
                    raise HTTPException(409, f"question {body.question_id} already answered")
                n_answered = self._conn.execute(
                    "SELECT COUNT(*) FROM responses WHERE assignment_id=?", (assignment_id,)
                ).fetchone()[0]
                total = len(assignment["question_order"])
                if n_answered >= total:
                    self._conn.execute(
                        "UPDATE assignments SET state='completed' WHERE assignment_id=?",
                        (assignment_id,),
                    )
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise
        return {"status": "ok", "answered": n_answered, "total": total}

    def export_csv(self) -> str:
        with self._lock:
            rows = self._conn.execute(
                "SELECT question_id, worker_id, batch_id, answer, response_time_ms, "
                "toggled_count, submitted_at FROM responses ORDER BY worker_id, submitted_at, question_id"
            ).fetchall()
        lines = [",".join(EXPORT_COLUMNS)]
        for qid, worker, batch, answer, rt, toggles, submitted in rows:
            q = self.questions[qid]
            rt_text = f"{rt:.0f}" if float(rt).is_integer() else f"{rt}"
            lines.append(
                ",".join(
                    [
                        qid,
                        worker,
                        batch,
                        q.protocol,
                        q.kind,
                        q.source_id,
                        q.left_codec,
                        str(q.left_level),
                        q.right_codec,
                        str(q.right_level),
                        answer,
                        rt_text,
                        "" if toggles is None else str(int(toggles)),
                        submitted,
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def close(self):
        self._conn.close()


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="triplet study service")
    store = StudyStore(config)
    app.state.store = store

    @app.post("/assignments")
    def open_assignment(body: OpenAssignmentRequest):
        return store.open_assignment(body.worker_id)

    @app.get("/assignments/{assignment_id}/next")
    def next_question(assignment_id: str):
        return store.next_question(assignment_id)

    @app.post("/assignments/{assignment_id}/responses")
    def submit_response(assignment_id: str, body: ResponseBody):
        return store.submit_response(assignment_id, body)

    @app.get("/export.csv", response_class=PlainTextResponse)
    def export_csv():
        return PlainTextResponse(store.export_csv(), media_type="text/csv")

    if config.stimuli_root is not None:
        app.mount("/stimuli", StaticFiles(directory=str(config.stimuli_root)), name="stimuli")
    return app
