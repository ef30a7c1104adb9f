import threading

import pytest

from proofbench.diagnostics import DiagnosticSource
from proofbench.telemetry import EventFilter, EventKind


@pytest.fixture
def env(tmp_platform):
    token, user = tmp_platform.users.guest_login()
    activity = tmp_platform.activities.all()[0]
    return tmp_platform, user, activity


def save(platform, user, activity, name, body=""):
    content = f"theory {name} imports Main begin\n{body}end\n"
    platform.documents.save_theory(user, activity.id, name, content)
    return content


def test_mock_error_directive_flows_to_user_and_telemetry(env):
    platform, user, activity = env
    pushed = []
    platform.hub.push = lambda uid, msg: pushed.append((uid, msg))
    platform.coordinator.push = platform.hub.push

    save(platform, user, activity, "Ex1", '(*MOCK:error 2 "Type unification failed"*)\n')
    check_id = platform.coordinator.submit_check(user, activity.id, ["Ex1"])
    record = platform.coordinator.wait(check_id, timeout=15)

    assert record.result["verdict"] == "finished"
    errors = [d for d in record.result["diagnostics"] if d["severity"] == "error"]
    assert len(errors) == 1
    assert errors[0]["source"] == "prover"
    assert errors[0]["range"]["line"] == 2

    kinds = [e.kind for e in platform.telemetry.query(EventFilter(user_id=user.id))]
    assert EventKind.CHECK_SUBMITTED in kinds
    assert EventKind.RESULT_RECEIVED in kinds

    results = [m for uid, m in pushed if m["type"] == "result"]
    assert len(results) == 1 and results[0]["check_id"] == check_id


def test_structure_error_short_circuits_prover(env):
    platform, user, activity = env
    platform.documents.save_theory(
        user, activity.id, "Broken", 'theory Broken imports Main begin\nlemma "(A"\nend\n'
    )
    before = len(platform.embedded_mock.stats.use_theories_calls)
    check_id = platform.coordinator.submit_check(user, activity.id, ["Broken"])
    record = platform.coordinator.wait(check_id, timeout=15)
    assert record.result["verdict"] == "structure-rejected"
    assert all(d["source"] == "structure" for d in record.result["diagnostics"])
    assert len(platform.embedded_mock.stats.use_theories_calls) == before
    kinds = [e.kind for e in platform.telemetry.query(EventFilter(user_id=user.id))]
    assert EventKind.STRUCTURE_REJECTED in kinds
    assert EventKind.RESULT_RECEIVED not in kinds


def test_resubmit_unchanged_reports_no_changes(env):
    platform, user, activity = env
    save(platform, user, activity, "Same")
    first = platform.coordinator.wait(
        platform.coordinator.submit_check(user, activity.id, ["Same"]), timeout=15
    )
    assert first.result["verdict"] == "finished"
    submitted_before = list(platform.embedded_mock.stats.theories_submitted)
    second = platform.coordinator.wait(
        platform.coordinator.submit_check(user, activity.id, ["Same"]), timeout=15
    )
    assert second.result["verdict"] == "no-changes"
    assert "no changes" in second.result["note"]
    assert platform.embedded_mock.stats.theories_submitted == submitted_before


def test_lint_shown_event_and_advisory_behavior(env):
    platform, user, activity = env
    save(platform, user, activity, "Tactic", 'lemma True\n  by auto\n')
    check_id = platform.coordinator.submit_check(user, activity.id, ["Tactic"])
    record = platform.coordinator.wait(check_id, timeout=15)
    # advisory: prover still ran despite the lint warning
    assert record.result["verdict"] == "finished"
    lint_diags = [d for d in record.result["diagnostics"] if d["source"] == "linter"]
    assert len(lint_diags) == 1
    kinds = [e.kind for e in platform.telemetry.query(EventFilter(user_id=user.id))]
    assert EventKind.LINT_SHOWN in kinds


def test_linter_toggle_skips_lint_but_checks(env):
    platform, user, activity = env
    save(platform, user, activity, "Toggled", 'lemma True\n  by auto\n')
    check_id = platform.coordinator.submit_check(
        user, activity.id, ["Toggled"], linter_enabled=False
    )
    record = platform.coordinator.wait(check_id, timeout=15)
    assert record.result["verdict"] == "finished"
    assert [d for d in record.result["diagnostics"] if d["source"] == "linter"] == []


def test_non_toggleable_linter_ignores_the_toggle(env):
    platform, user, activity = env
    activity.linter.student_toggleable = False
    platform.activities.save(activity)
    platform.coordinator.invalidate_ruleset(activity.id)
    save(platform, user, activity, "Forced", "lemma True\n  by auto\n")
    record = platform.coordinator.wait(
        platform.coordinator.submit_check(
            user, activity.id, ["Forced"], linter_enabled=False
        ),
        timeout=15,
    )
    lints = [d for d in record.result["diagnostics"] if d["source"] == "linter"]
    assert len(lints) == 1


def test_enforced_lint_blocks_submission(env):
    platform, user, activity = env
    activity.linter.enforce = True
    activity.linter.rules = [
        {"id": "hard-no", "pattern": r"\Ablast\Z", "severity": "error", "message": "no blast"}
    ]
    platform.activities.save(activity)
    platform.coordinator.invalidate_ruleset(activity.id)
    save(platform, user, activity, "Blocked", "lemma True\n  by blast\n")
    before = len(platform.embedded_mock.stats.use_theories_calls)
    record = platform.coordinator.wait(
        platform.coordinator.submit_check(user, activity.id, ["Blocked"]), timeout=15
    )
    assert record.result["verdict"] == "lint-rejected"
    assert len(platform.embedded_mock.stats.use_theories_calls) == before


def test_telemetry_snapshot_recorded_even_when_prover_dies(env):
    platform, user, activity = env
    save(platform, user, activity, "Orphan")
    platform.embedded_mock.stop()
    platform.prover_client.close()
    check_id = platform.coordinator.submit_check(user, activity.id, ["Orphan"])
    record = platform.coordinator.wait(check_id, timeout=15)
    assert record.result["verdict"] == "prover-unavailable"
    events = platform.telemetry.query(EventFilter(user_id=user.id))
    submitted = [e for e in events if e.kind == EventKind.CHECK_SUBMITTED]
    assert len(submitted) == 1 and submitted[0].snapshot


def test_per_user_checks_serialize_but_cross_user_run_parallel(env):
    platform, user, activity = env
    _, other = platform.users.guest_login()
    save(platform, user, activity, "U1", '(*MOCK:delay 0.2 "slow"*)\n')
    save(platform, other, activity, "U2", '(*MOCK:delay 0.2 "slow"*)\n')

    import time

    start = time.monotonic()
    ids = [
        platform.coordinator.submit_check(user, activity.id, ["U1"]),
        platform.coordinator.submit_check(other, activity.id, ["U2"]),
    ]
    for cid in ids:
        platform.coordinator.wait(cid, timeout=15)
    elapsed = time.monotonic() - start
    assert elapsed < 0.38, f"cross-user checks did not overlap ({elapsed:.2f}s)"

    sessions = platform.pool.session_ids()
    assert sessions[user.id] != sessions[other.id]


def test_missing_document_raises_key_error(env):
    platform, user, activity = env
    with pytest.raises(KeyError):
        platform.coordinator.submit_check(user, activity.id, ["Nope"])


def test_durations_split_server_vs_prover(env):
    platform, user, activity = env
    platform.embedded_mock.default_latency = 0.2
    save(platform, user, activity, "Timed")
    record = platform.coordinator.wait(
        platform.coordinator.submit_check(user, activity.id, ["Timed"]), timeout=15
    )
    durations = record.result["durations"]
    assert durations["prover_wait"] >= 0.2
    assert durations["server_handling"] < durations["prover_wait"]
