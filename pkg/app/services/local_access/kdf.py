import hashlib

COUNTER_BYTES = 8


def credential_digest(credential: str | bytes) -> bytes:
    if isinstance(credential, str):
        credential = credential.encode("utf-8")
    return hashlib.sha256(credential).digest()


def derive_token(digest: bytes, counter: int) -> bytes:
    """Simulated AS key: sha256(digest || counter as 8-byte big-endian)."""
    return hashlib.sha256(digest + counter.to_bytes(COUNTER_BYTES, "big")).digest()


def key_fingerprint(token: bytes) -> str:
    return hashlib.sha256(token).hexdigest()[:16]
