"""Users, theory documents and the end-to-end check pipeline."""

from .users import BadCredentialsError, Role, User, UserStore
from .documents import (
    CheckPlan,
    DocumentStore,
    NameInvalidError,
    QuotaExceededError,
    TheoryDocument,
    plan_check,
)
from .checks import CheckCoordinator, CheckRecord, ProverPool

__all__ = [
    "BadCredentialsError",
    "Role",
    "User",
    "UserStore",
    "CheckPlan",
    "DocumentStore",
    "NameInvalidError",
    "QuotaExceededError",
    "TheoryDocument",
    "plan_check",
    "CheckCoordinator",
    "CheckRecord",
    "ProverPool",
]
