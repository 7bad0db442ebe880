"""Experiment lifecycle event definitions."""

from datetime import datetime
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class EventType(Enum):
    EXPERIMENT_STARTED = "experiment_started"
    TASK_STARTED = "task_started"
    TASK_COMPLETED = "task_completed"
    TASK_FAILED = "task_failed"
    DIAGNOSTIC = "diagnostic"
    REPORT_WRITTEN = "report_written"
    EXPERIMENT_COMPLETED = "experiment_completed"


class Event(BaseModel):
    type: EventType
    data: Dict[str, Any]
    timestamp: datetime = Field(default_factory=datetime.now)
    metadata: Optional[Dict[str, Any]] = None
