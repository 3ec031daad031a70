from .api import ApiError, create_app
from .engine import Engine, EngineConfig, PolicyEntry
from .evaluation import evaluate_qa, icon_vs_expert, qa_report_tables

__all__ = [
    "ApiError",
    "create_app",
    "Engine",
    "EngineConfig",
    "PolicyEntry",
    "evaluate_qa",
    "icon_vs_expert",
    "qa_report_tables",
]
