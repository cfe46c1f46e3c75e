"""
Service layer: report assembly for the CLI and batch flows.
"""

from .reports import Report, ReportEngine, RunConfig, render

__all__ = ["Report", "ReportEngine", "RunConfig", "render"]
