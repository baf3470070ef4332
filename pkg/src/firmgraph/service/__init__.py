from .app import ServiceSettings, create_app
from .store import AnalysisSnapshot, SnapshotStore

__all__ = ["AnalysisSnapshot", "ServiceSettings", "SnapshotStore", "create_app"]
