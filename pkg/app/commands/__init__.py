from .report import handle_report
from .run import handle_run
from .validate import handle_validate

__all__ = ["handle_report", "handle_run", "handle_validate"]
