from .auditor import AuditCenter, InactiveAuditor, SecurityAuditor

__all__ = ["AuditCenter", "InactiveAuditor", "SecurityAuditor"]
