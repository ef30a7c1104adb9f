"""Assembles the stores, prover connection and check pipeline into one unit."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .activities import ActivityRegistry
from .mockprover.server import MockProverServer
from .protocol.client import (
    PipeAddress,
    ProverClient,
    SessionOptions,
    TcpAddress,
)
from .telemetry import EventStore
from .web.metrics import MetricsCollector
from .web.realtime import RealtimeHub
from .workspace.checks import CheckCoordinator, ProverPool
from .workspace.documents import DocumentStore
from .workspace.users import Role, UserStore

PROVER_PASSWORD_ENV = "PROOFBENCH_PROVER_PASSWORD"


@dataclass
class PlatformSettings:
    data_dir: Path
    config_dir: Path
    prover: str = "mock"  # mock | tcp:HOST:PORT | pipe:COMMAND
    prover_password: str = ""
    mock_latency: float = 0.0
    consolidate_delay: float = 0.5
    parent_session: str = "HOL"
    task_timeout: float = 60.0
    session_idle_timeout: float = 30 * 60.0
    seed_instructor: Optional[tuple[str, str]] = None  # (name, password)
    seed_demo_activity: bool = True


@dataclass
class Platform:
    settings: PlatformSettings
    users: UserStore
    documents: DocumentStore
    telemetry: EventStore
    activities: ActivityRegistry
    hub: RealtimeHub
    metrics: MetricsCollector
    prover_client: ProverClient
    pool: ProverPool
    coordinator: CheckCoordinator
    embedded_mock: Optional[MockProverServer] = field(default=None, repr=False)

    @classmethod
    def create(cls, settings: PlatformSettings) -> "Platform":
        data_dir = Path(settings.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)

        users = UserStore(data_dir / "users.db")
        documents = DocumentStore(data_dir)
        telemetry = EventStore(data_dir / "telemetry.db")
        activities = ActivityRegistry(
            settings.config_dir, seed_demo=settings.seed_demo_activity
        )
        hub = RealtimeHub()
        metrics = MetricsCollector()

        embedded_mock = None
        password = settings.prover_password
        if settings.prover == "mock":
            embedded_mock = MockProverServer(
                password=password, default_latency=settings.mock_latency
            ).start()
            host, port = embedded_mock.address
            address = TcpAddress(host, port)
        elif settings.prover.startswith("tcp:"):
            _, host, port = settings.prover.split(":", 2)
            address = TcpAddress(host, int(port))
        elif settings.prover.startswith("pipe:"):
            address = PipeAddress(settings.prover.split(":", 1)[1])
        else:
            raise ValueError(f"unsupported prover spec: {settings.prover!r}")

        prover_client = ProverClient.connect(
            address, password=password, default_timeout=settings.task_timeout
        )
        pool = ProverPool(
            prover_client,
            SessionOptions(
                consolidate_delay=settings.consolidate_delay,
                parent_session=settings.parent_session,
            ),
            idle_timeout=settings.session_idle_timeout,
        )
        coordinator = CheckCoordinator(
            documents=documents,
            telemetry=telemetry,
            pool=pool,
            activities=activities,
            push=hub.push,
            metrics=metrics,
            task_timeout=settings.task_timeout,
        )

        if settings.seed_instructor:
            name, pw = settings.seed_instructor
            if users.find_by_name(name) is None:
                users.create_user(name, pw, Role.INSTRUCTOR)

        return cls(
            settings=settings,
            users=users,
            documents=documents,
            telemetry=telemetry,
            activities=activities,
            hub=hub,
            metrics=metrics,
            prover_client=prover_client,
            pool=pool,
            coordinator=coordinator,
            embedded_mock=embedded_mock,
        )

    def close(self) -> None:
        self.coordinator.close()
        try:
            self.pool.close()
        except Exception:
            pass
        self.prover_client.close()
        if self.embedded_mock is not None:
            self.embedded_mock.stop()
        self.telemetry.close()
        self.documents.close()
        self.users.close()
