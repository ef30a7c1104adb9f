import sys
import threading
import time

import pytest

from proofbench.protocol.client import (
    AuthFailedError,
    ConnectionLostError,
    PipeAddress,
    ProverClient,
    ProverError,
    ProverSessionId,
    SessionOptions,
    TaskTimeoutError,
    TcpAddress,
    TheoryFileError,
)

from conformance import assert_command_round_trip


@pytest.fixture
def client(mock_server):
    c = ProverClient.connect(TcpAddress(*mock_server.address), password="secret")
    yield c
    c.close()


def write_theory(tmp_path, name: str, body: str = ""):
    stem = name.removesuffix(".thy")
    text = f"theory {stem} imports Main begin\n{body}end\n"
    (tmp_path / f"{stem}.thy").write_text(text)
    return f"{stem}.thy"


def test_connect_with_correct_password(client):
    assert client is not None


def test_connect_with_wrong_password(mock_server):
    with pytest.raises(AuthFailedError):
        ProverClient.connect(TcpAddress(*mock_server.address), password="nope")


def test_connect_refused():
    from proofbench.protocol.client import ProverConnectError

    with pytest.raises(ProverConnectError):
        ProverClient.connect(TcpAddress("127.0.0.1", 1), password="x", timeout=2)


def test_pipe_transport_same_framing(tmp_path):
    command = f"{sys.executable} -m proofbench.mockprover --stdio --password pw"
    client = ProverClient.connect(PipeAddress(command), password="pw")
    session = client.session_start(SessionOptions())
    name = write_theory(tmp_path, "Pipe")
    task = client.use_theories(session, [name], tmp_path)
    assert client.await_task(task, timeout=10).verdict == "finished"
    client.close()


def test_session_start_forwards_options(client, mock_server):
    fast = client.session_start(SessionOptions(consolidate_delay=0.5, parent_session="HOL"))
    slow = client.session_start(SessionOptions(consolidate_delay=15.0, parent_session="HOL"))
    assert fast.id and slow.id and fast.id != slow.id
    sessions = mock_server.stats.sessions
    assert sessions[fast.id].consolidate_delay == pytest.approx(0.5)
    assert sessions[slow.id].consolidate_delay == pytest.approx(15.0)
    assert sessions[fast.id].parent_session == "HOL"


def test_two_sessions_are_distinct(client):
    ids = {client.session_start(SessionOptions()).id for _ in range(2)}
    assert len(ids) == 2


def test_use_theories_round_trip_with_error_directive(client, tmp_path):
    name = write_theory(tmp_path, "Bad", '(*MOCK:error 2 "Type unification failed"*)\n')
    session = client.session_start(SessionOptions())
    task = client.use_theories(session, [name], tmp_path)
    outcome = client.await_task(task, timeout=10)
    assert outcome.verdict == "finished"
    assert len(outcome.errors) == 1
    assert outcome.errors[0].text == "Type unification failed"


def test_empty_theory_finishes_without_errors(client, tmp_path):
    name = write_theory(tmp_path, "Empty")
    session = client.session_start(SessionOptions())
    outcome = client.await_task(client.use_theories(session, [name], tmp_path), timeout=10)
    assert outcome.verdict == "finished"
    assert outcome.errors == []


def test_one_task_covers_several_theories(client, tmp_path, mock_server):
    names = [write_theory(tmp_path, n) for n in ("A", "B")]
    session = client.session_start(SessionOptions())
    task = client.use_theories(session, names, tmp_path)
    outcome = client.await_task(task, timeout=10)
    assert outcome.verdict == "finished"
    call = mock_server.stats.use_theories_calls[-1]
    assert call["theories"] == names


def test_unknown_session_is_prover_error(client, tmp_path):
    name = write_theory(tmp_path, "X")
    with pytest.raises(ProverError) as err:
        client.use_theories(ProverSessionId("S-not-real"), [name], tmp_path)
    assert err.value.code == "unknown-session"


def test_unreadable_theory_is_io_error(client, tmp_path):
    session = client.session_start(SessionOptions())
    with pytest.raises(TheoryFileError):
        client.use_theories(session, ["Missing.thy"], tmp_path)


def test_await_with_zero_timeout_times_out(client, tmp_path, mock_server):
    mock_server.default_latency = 0.3
    name = write_theory(tmp_path, "Slow")
    session = client.session_start(SessionOptions())
    task = client.use_theories(session, [name], tmp_path)
    with pytest.raises(TaskTimeoutError):
        client.await_task(task, timeout=0)
    # still completes afterwards
    assert client.await_task(task, timeout=10).verdict == "finished"


def test_progress_notes_precede_verdict_in_order(client, tmp_path):
    names = [write_theory(tmp_path, n) for n in ("P1", "P2", "P3")]
    session = client.session_start(SessionOptions())
    seen = []
    task = client.use_theories(session, names, tmp_path, on_progress=lambda n: seen.append(n.theory_name))
    outcome = client.await_task(task, timeout=10)
    assert [n.theory_name for n in outcome.progress] == ["P1", "P2", "P3"]
    assert seen == ["P1", "P2", "P3"]
    assert outcome.verdict == "finished"


def test_concurrent_tasks_multiplex_on_one_handle(client, tmp_path):
    session = client.session_start(SessionOptions())
    slow = write_theory(tmp_path, "SlowOne", '(*MOCK:delay 0.3 "zzz"*)\n')
    fast = write_theory(tmp_path, "FastOne")
    results = {}

    def run(name):
        task = client.use_theories(session, [name], tmp_path)
        results[name] = client.await_task(task, timeout=10)

    threads = [threading.Thread(target=run, args=(n,)) for n in (slow, fast)]
    start = time.monotonic()
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=10)
    elapsed = time.monotonic() - start
    assert results[slow].verdict == "finished"
    assert results[fast].verdict == "finished"
    assert elapsed < 0.6  # ran concurrently, not 0.3 + 0.3 sequential


def test_every_task_gets_exactly_one_verdict_and_no_strays(client, tmp_path):
    session = client.session_start(SessionOptions())
    names = [write_theory(tmp_path, f"V{i}") for i in range(5)]
    tasks = [client.use_theories(session, [n], tmp_path) for n in names]
    outcomes = [client.await_task(t, timeout=10) for t in tasks]
    assert sorted(o.task_id for o in outcomes) == sorted(tasks)
    time.sleep(0.1)
    assert client.unexpected_frames == []


def test_await_unknown_task_is_value_error(client):
    with pytest.raises(ValueError):
        client.await_task("T-never-issued")


def test_connection_lost_fails_pending_tasks(tmp_path):
    from proofbench.mockprover.server import MockProverServer

    server = MockProverServer(password="", default_latency=5.0).start()
    client = ProverClient.connect(TcpAddress(*server.address))
    name = write_theory(tmp_path, "Doomed")
    session = client.session_start(SessionOptions())
    task = client.use_theories(session, [name], tmp_path)
    server.stop()
    with pytest.raises((ConnectionLostError, TaskTimeoutError)):
        client.await_task(task, timeout=3)
    client.close()


def test_command_payload_round_trips():
    assert_command_round_trip(
        [
            ("session_start", {"parent_session": "HOL", "consolidate_delay": 0.5}),
            (
                "use_theories",
                {"session_id": "s1", "theories": ["A.thy", "B.thy"], "master_dir": "/tmp/u"},
            ),
            ("purge", {"session_id": "s1", "theories": ["A.thy"]}),
            ("stop", {"session_id": "s1"}),
        ]
    )
