from .registry import (
    AnalyzerAdapter,
    AnalyzerDescriptor,
    AnalyzerRegistry,
    Capabilities,
    ScanRequest,
)
from .runner import ReportStore, detect_project_language, run_scan

__all__ = [
    "AnalyzerAdapter",
    "AnalyzerDescriptor",
    "AnalyzerRegistry",
    "Capabilities",
    "ScanRequest",
    "ReportStore",
    "detect_project_language",
    "run_scan",
]
