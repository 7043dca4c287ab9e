"""Bearer-token access control with a static credential file.

Read endpoints are public; write endpoints require a credential with the
``contributor`` or ``moderator`` role.  The credential file is JSON::

    {"tokens": [{"token": "...", "name": "ada", "role": "contributor"}]}

With no credential file configured the service fails closed: every write
endpoint answers 401.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

ROLES = ("contributor", "moderator")


@dataclass(frozen=True)
class Principal:
    name: str
    role: str


class CredentialSet:
    def __init__(self, tokens: dict[str, Principal] | None = None):
        self._tokens = dict(tokens or {})

    @classmethod
    def load(cls, path: str | Path) -> "CredentialSet":
        payload = json.loads(Path(path).read_text("utf-8"))
        tokens: dict[str, Principal] = {}
        for entry in payload.get("tokens", []):
            role = entry["role"]
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r} in credential file")
            tokens[entry["token"]] = Principal(name=entry["name"], role=role)
        return cls(tokens)

    def verify(self, token: str) -> Principal | None:
        return self._tokens.get(token)

    def __len__(self) -> int:
        return len(self._tokens)
