from .app import EVENT_LOG_NAME, build_app
from .store import ConflictError, LabelEvent, LabelStore

__all__ = [
    "EVENT_LOG_NAME",
    "ConflictError",
    "LabelEvent",
    "LabelStore",
    "build_app",
]
