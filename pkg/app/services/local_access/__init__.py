from .assistant import (
    LocalAccessAssistant,
    NotActive,
    ScopeViolation,
    UnknownSubscriber,
    activation_for,
)
from .kdf import credential_digest, derive_token, key_fingerprint
from .lss import LocalSubscriberServer

__all__ = [
    "LocalAccessAssistant",
    "LocalSubscriberServer",
    "NotActive",
    "ScopeViolation",
    "UnknownSubscriber",
    "activation_for",
    "credential_digest",
    "derive_token",
    "key_fingerprint",
]
