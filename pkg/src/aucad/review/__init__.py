"""Human relevance-review workflow: assignment planning, label journal,
agreement statistics, and the HTTP service the browser UI talks to."""

from .planning import AssignmentPlan, PlanError, plan_assignments
from .store import AnnotationRecord, ExportBlocked, ReviewStore

__all__ = [
    "AnnotationRecord",
    "AssignmentPlan",
    "ExportBlocked",
    "PlanError",
    "ReviewStore",
    "plan_assignments",
]
