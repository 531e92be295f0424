from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List


class ReportWriterPort(ABC):
    """Port for persisting experiment outputs"""

    @abstractmethod
    def write_rows(self, name: str, columns: List[str], rows: List[List[Any]]) -> Path:
        """Write a table of rows"""
        pass

    @abstractmethod
    def write_document(self, name: str, payload: Dict[str, Any]) -> Path:
        """Write a structured document"""
        pass
