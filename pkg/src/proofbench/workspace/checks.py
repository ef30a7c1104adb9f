"""End-to-end check pipeline: snapshot, pre-assess, lint, prove, report.

Each submitted check runs, in order: (1) durable telemetry snapshots of the
submitted documents, (2) structural pre-assessment and linting (structural
errors never reach the prover), (3) the incremental prover round-trip in
the user's own prover session, (4) a result event with timing split into
server handling vs prover wait. Checks of one user are serialized; checks
of different users run in parallel.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..activities import ActivityConfig, ActivityRegistry
from ..diagnostics import Diagnostic, DiagnosticSource, Severity
from ..isar.lexer import tokenize
from ..isar.structure import check_structure
from ..linting import Ruleset, compile_ruleset, lint
from ..protocol.client import (
    ProgressNote,
    ProverClient,
    ProverSessionId,
    SessionOptions,
)
from ..telemetry import CheckEvent, Durations, EventKind, EventStore
from .documents import DocumentStore, TheoryDocument, plan_check
from .users import User

DEFAULT_SESSION_IDLE_TIMEOUT = 30 * 60.0
DEFAULT_RESULT_RETENTION = 24 * 3600.0

PushFn = Callable[[str, dict], None]


class ProverUnavailableError(Exception):
    pass


def _now_ms() -> int:
    return int(time.time() * 1000)


def structure_to_diagnostic(sd, theory_name: str) -> Diagnostic:
    return Diagnostic(
        source=DiagnosticSource.STRUCTURE,
        severity=Severity.ERROR,
        message=sd.message,
        range=sd.range,
        rule_id=sd.code.value,
        theory_name=theory_name,
    )


def prover_message_to_diagnostic(msg, fallback_theory: str = "") -> Diagnostic:
    severity = {
        "error": Severity.ERROR,
        "warning": Severity.WARNING,
    }.get(msg.kind, Severity.INFO)
    return Diagnostic(
        source=DiagnosticSource.PROVER,
        severity=severity,
        message=msg.text,
        range=msg.position,
        theory_name=msg.theory_name or fallback_theory,
    )


class ProverPool:
    """One shared prover connection; one lazily created session per user."""

    def __init__(
        self,
        client: ProverClient,
        options: Optional[SessionOptions] = None,
        idle_timeout: float = DEFAULT_SESSION_IDLE_TIMEOUT,
    ):
        self.client = client
        self.options = options or SessionOptions()
        self.idle_timeout = idle_timeout
        self._sessions: dict[str, tuple[ProverSessionId, float]] = {}
        self._lock = threading.Lock()

    def session_for(self, user_id: str) -> ProverSessionId:
        self._sweep()
        with self._lock:
            entry = self._sessions.get(user_id)
            if entry is not None:
                session, _ = entry
                self._sessions[user_id] = (session, time.monotonic())
                return session
        session = self.client.session_start(self.options)
        with self._lock:
            self._sessions[user_id] = (session, time.monotonic())
        return session

    def _sweep(self) -> None:
        now = time.monotonic()
        stale = []
        with self._lock:
            for user_id, (session, last_used) in list(self._sessions.items()):
                if now - last_used > self.idle_timeout:
                    stale.append(session)
                    del self._sessions[user_id]
        for session in stale:
            try:
                self.client.session_stop(session)
            except Exception:
                pass  # reaping is best-effort

    def session_ids(self) -> dict[str, str]:
        with self._lock:
            return {u: s.id for u, (s, _) in self._sessions.items()}

    def close(self) -> None:
        with self._lock:
            sessions = [s for s, _ in self._sessions.values()]
            self._sessions.clear()
        for session in sessions:
            try:
                self.client.session_stop(session)
            except Exception:
                pass


@dataclass
class CheckRecord:
    check_id: str
    user_id: str
    activity_id: str
    names: list[str]
    status: str = "pending"  # pending | running | done
    result: Optional[dict] = None
    progress: list[dict] = field(default_factory=list)
    created: float = field(default_factory=time.time)
    done_event: threading.Event = field(default_factory=threading.Event)

    def public(self) -> dict:
        return {
            "check_id": self.check_id,
            "status": self.status,
            "activity": self.activity_id,
            "names": self.names,
            "progress": list(self.progress),
            "result": self.result,
        }


class CheckCoordinator:
    def __init__(
        self,
        documents: DocumentStore,
        telemetry: EventStore,
        pool: ProverPool,
        activities: ActivityRegistry,
        push: Optional[PushFn] = None,
        metrics=None,
        max_workers: int = 32,
        task_timeout: float = 60.0,
        result_retention: float = DEFAULT_RESULT_RETENTION,
    ):
        self.documents = documents
        self.telemetry = telemetry
        self.pool = pool
        self.activities = activities
        self.push = push or (lambda user_id, message: None)
        self.metrics = metrics
        self.task_timeout = task_timeout
        self.result_retention = result_retention
        self._executor = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="check")
        self._records: dict[str, CheckRecord] = {}
        self._records_lock = threading.Lock()
        self._user_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._rulesets: dict[str, Ruleset] = {}

    def close(self) -> None:
        self._executor.shutdown(wait=False, cancel_futures=True)

    # -- public API --------------------------------------------------------

    def submit_check(
        self,
        user: User,
        activity_id: str,
        names: list[str],
        linter_enabled: bool = True,
    ) -> str:
        """Snapshot the documents durably, queue the check, return its id."""
        if not names:
            raise ValueError("a check needs at least one theory name")
        t0 = time.perf_counter()
        docs = []
        for name in names:
            doc = self.documents.load(user.id, activity_id, name)
            if doc is None:
                raise KeyError(f"no theory {name!r} in activity {activity_id!r}")
            docs.append(doc)

        for doc in docs:
            self.telemetry.record_event(
                CheckEvent(
                    user_id=user.id,
                    activity_id=activity_id,
                    theory_name=doc.name,
                    kind=EventKind.CHECK_SUBMITTED,
                    timestamp_ms=_now_ms(),
                    snapshot=doc.content,
                )
            )

        check_id = "C" + uuid.uuid4().hex[:16]
        record = CheckRecord(
            check_id=check_id, user_id=user.id, activity_id=activity_id, names=names
        )
        with self._records_lock:
            self._prune_locked()
            self._records[check_id] = record
        submit_elapsed = time.perf_counter() - t0
        self._executor.submit(self._run_guarded, record, user, docs, linter_enabled, submit_elapsed)
        return check_id

    def get(self, check_id: str, user_id: Optional[str] = None) -> Optional[CheckRecord]:
        with self._records_lock:
            record = self._records.get(check_id)
        if record is None:
            return None
        if user_id is not None and record.user_id != user_id:
            return None
        return record

    def wait(self, check_id: str, timeout: float = 30.0) -> CheckRecord:
        record = self.get(check_id)
        if record is None:
            raise KeyError(check_id)
        if not record.done_event.wait(timeout):
            raise TimeoutError(f"check {check_id} still running")
        return record

    def _prune_locked(self) -> None:
        cutoff = time.time() - self.result_retention
        for check_id in [c for c, r in self._records.items() if r.created < cutoff]:
            del self._records[check_id]

    def invalidate_ruleset(self, activity_id: str) -> None:
        self._rulesets.pop(activity_id, None)

    # -- pipeline ------------------------------------------------------------

    def ruleset_for(self, activity: Optional[ActivityConfig]) -> Optional[Ruleset]:
        if activity is None:
            return None
        cached = self._rulesets.get(activity.id)
        if cached is None:
            cached = compile_ruleset(activity.linter)
            self._rulesets[activity.id] = cached
        return cached

    def _run_guarded(self, record, user, docs, linter_enabled, submit_elapsed) -> None:
        try:
            self._run(record, user, docs, linter_enabled, submit_elapsed)
        except Exception as exc:  # the final result must always materialize
            self._finish(
                record,
                user,
                verdict="prover-unavailable",
                diagnostics=[
                    Diagnostic(
                        source=DiagnosticSource.PROVER,
                        severity=Severity.ERROR,
                        message=f"internal error while checking: {exc}",
                    )
                ],
                durations=Durations(),
                checked=[],
                skipped=[],
            )

    def _run(self, record, user: User, docs: list[TheoryDocument], linter_enabled, submit_elapsed) -> None:
        with self._user_locks[user.id]:
            record.status = "running"
            t_work = time.perf_counter()
            activity = self.activities.get(record.activity_id)
            ruleset = self.ruleset_for(activity)

            # the student toggle only applies where the activity allows it
            lint_on = linter_enabled or (ruleset is not None and not ruleset.student_toggleable)

            structure_diags: list[Diagnostic] = []
            lint_diags: list[Diagnostic] = []
            per_doc_structure: dict[str, list[Diagnostic]] = {}
            for doc in docs:
                tokens = tokenize(doc.content)
                sdiags = [
                    structure_to_diagnostic(sd, doc.name)
                    for sd in check_structure(tokens)
                ]
                if sdiags:
                    per_doc_structure[doc.name] = sdiags
                    structure_diags.extend(sdiags)
                if ruleset is not None and ruleset.rules and lint_on:
                    ldiags = lint(doc.content, ruleset, tokens=tokens, theory_name=doc.name)
                    if ldiags:
                        lint_diags.extend(ldiags)
                        self.telemetry.record_event(
                            CheckEvent(
                                user_id=user.id,
                                activity_id=record.activity_id,
                                theory_name=doc.name,
                                kind=EventKind.LINT_SHOWN,
                                timestamp_ms=_now_ms(),
                                diagnostics=ldiags,
                            )
                        )

            def handling() -> float:
                return submit_elapsed + (time.perf_counter() - t_work)

            if structure_diags:
                for doc in docs:
                    if doc.name in per_doc_structure:
                        self.telemetry.record_event(
                            CheckEvent(
                                user_id=user.id,
                                activity_id=record.activity_id,
                                theory_name=doc.name,
                                kind=EventKind.STRUCTURE_REJECTED,
                                timestamp_ms=_now_ms(),
                                diagnostics=per_doc_structure[doc.name],
                            )
                        )
                self._finish(
                    record,
                    user,
                    verdict="structure-rejected",
                    diagnostics=structure_diags + lint_diags,
                    durations=Durations(server_handling=handling(), prover=0.0),
                    checked=[],
                    skipped=[d.name for d in docs],
                )
                return

            if (
                ruleset is not None
                and ruleset.enforce
                and any(d.severity == Severity.ERROR for d in lint_diags)
            ):
                self._finish(
                    record,
                    user,
                    verdict="lint-rejected",
                    diagnostics=lint_diags,
                    durations=Durations(server_handling=handling(), prover=0.0),
                    checked=[],
                    skipped=[d.name for d in docs],
                )
                return

            plan = plan_check(docs)
            if not plan.to_check:
                self._finish(
                    record,
                    user,
                    verdict="no-changes",
                    diagnostics=lint_diags,
                    durations=Durations(server_handling=handling(), prover=0.0),
                    checked=[],
                    skipped=[d.name for d in docs],
                    note="no changes since the last check",
                )
                return

            for doc in docs:  # unchanged imports must exist on disk too
                self.documents.materialize(doc)
            master_dir = self.documents.master_dir(user.id)

            def on_progress(note: ProgressNote) -> None:
                entry = {"text": note.text, "theory_name": note.theory_name}
                record.progress.append(entry)
                self.push(user.id, {"type": "progress", "check_id": record.check_id, **entry})

            prover_wait = 0.0
            try:
                session = self.pool.session_for(user.id)
                t_prover = time.perf_counter()
                task_id = self.pool.client.use_theories(
                    session,
                    [f"{d.name}.thy" for d in plan.to_check],
                    master_dir,
                    on_progress=on_progress,
                )
                outcome = self.pool.client.await_task(task_id, timeout=self.task_timeout)
                prover_wait = time.perf_counter() - t_prover
            except Exception as exc:
                diag = Diagnostic(
                    source=DiagnosticSource.PROVER,
                    severity=Severity.ERROR,
                    message=f"prover unavailable: {exc}",
                )
                for doc in plan.to_check:
                    self.telemetry.record_event(
                        CheckEvent(
                            user_id=user.id,
                            activity_id=record.activity_id,
                            theory_name=doc.name,
                            kind=EventKind.RESULT_RECEIVED,
                            timestamp_ms=_now_ms(),
                            snapshot=doc.content,
                            diagnostics=[diag],
                            durations=Durations(server_handling=handling(), prover=prover_wait),
                        )
                    )
                self._finish(
                    record,
                    user,
                    verdict="prover-unavailable",
                    diagnostics=[diag] + lint_diags,
                    durations=Durations(server_handling=handling(), prover=prover_wait),
                    checked=[],
                    skipped=[d.name for d in docs],
                )
                return

            prover_diags = [prover_message_to_diagnostic(m) for m in outcome.messages]
            durations = Durations(
                server_handling=handling() - prover_wait, prover=prover_wait
            )
            for doc in plan.to_check:
                doc_diags = [d for d in prover_diags if d.theory_name == doc.name]
                self.telemetry.record_event(
                    CheckEvent(
                        user_id=user.id,
                        activity_id=record.activity_id,
                        theory_name=doc.name,
                        kind=EventKind.RESULT_RECEIVED,
                        timestamp_ms=_now_ms(),
                        snapshot=doc.content,
                        diagnostics=doc_diags,
                        durations=durations,
                    )
                )
            if outcome.verdict == "finished":
                for doc in plan.to_check:
                    self.documents.mark_checked(doc)
            self._finish(
                record,
                user,
                verdict=outcome.verdict,
                diagnostics=prover_diags + lint_diags,
                durations=durations,
                checked=[d.name for d in plan.to_check],
                skipped=[d.name for d in plan.skipped],
            )

    def _finish(
        self,
        record: CheckRecord,
        user: User,
        verdict: str,
        diagnostics: list[Diagnostic],
        durations: Durations,
        checked: list[str],
        skipped: list[str],
        note: str = "",
    ) -> None:
        result = {
            "verdict": verdict,
            "diagnostics": [d.to_dict() for d in diagnostics],
            "durations": {
                "server_handling": durations.server_handling,
                "prover_wait": durations.prover,
            },
            "checked": checked,
            "skipped": skipped,
        }
        if note:
            result["note"] = note
        record.result = result
        record.status = "done"
        record.done_event.set()
        if self.metrics is not None:
            self.metrics.record_check(durations.server_handling, durations.prover)
        self.push(user.id, {"type": "result", "check_id": record.check_id, **result})
