import pytest

from proofbench.workspace.users import BadCredentialsError, Role, UserStore


@pytest.fixture
def store(tmp_path):
    s = UserStore(tmp_path / "users.db")
    yield s
    s.close()


def test_login_returns_token_with_role(store):
    store.create_user("alice", "pw", Role.INSTRUCTOR)
    token, user = store.login("alice", "pw")
    assert user.role == Role.INSTRUCTOR
    assert store.resolve_token(token) == user


def test_wrong_password_rejected(store):
    store.create_user("bob", "right")
    with pytest.raises(BadCredentialsError):
        store.login("bob", "wrong")
    with pytest.raises(BadCredentialsError):
        store.login("nobody", "x")


def test_guest_logins_are_distinct_users(store):
    token1, guest1 = store.guest_login()
    token2, guest2 = store.guest_login()
    assert guest1.id != guest2.id
    assert token1 != token2
    assert store.resolve_token(token1).id == guest1.id


def test_guests_expire_at_restart(tmp_path):
    store = UserStore(tmp_path / "users.db")
    token, guest = store.guest_login()
    store.close()
    reopened = UserStore(tmp_path / "users.db")
    assert reopened.resolve_token(token) is None
    assert reopened.get(guest.id) is None
    reopened.close()


def test_registered_users_survive_restart(tmp_path):
    store = UserStore(tmp_path / "users.db")
    created = store.create_user("carol", "pw")
    store.close()
    reopened = UserStore(tmp_path / "users.db")
    token, user = reopened.login("carol", "pw")
    assert user.id == created.id
    reopened.close()


def test_duplicate_names_rejected(store):
    store.create_user("dave", "x")
    import sqlite3

    with pytest.raises(sqlite3.IntegrityError):
        store.create_user("dave", "y")
