from enum import IntEnum


class ExitStatus(IntEnum):
    OK = 0
    RUNTIME_FAILURE = 1
    INVALID_SCENARIO = 2
    INVARIANT_VIOLATION = 3
