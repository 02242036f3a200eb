# src/services/storage_service.py
import json
import os
from typing import Any, Dict, Optional

from shared.config import GammaConfig
from shared.exceptions import InputError
from shared.utils import Logger, ReportFormatter

logger = Logger.setup_logger(__name__)


class StorageService:
    """Service for reading input documents and writing reports on the local filesystem"""

    def load_document(self, path: str) -> Dict[str, Any]:
        """Load a JSON input document"""
        try:
            logger.debug("📥 Loading document", path=path)
            with open(path, encoding='utf-8') as handle:
                document = json.load(handle)
        except FileNotFoundError:
            raise InputError(f"Input file not found: {path}")
        except json.JSONDecodeError as e:
            raise InputError(f"Input file {path} is not valid JSON (line {e.lineno}, column {e.colno})")
        except OSError as e:
            raise InputError(f"Cannot read {path}: {e}")
        if not isinstance(document, dict):
            raise InputError(f"Input file {path} must hold a JSON object")
        return document

    def load_gamma(self, path: str) -> GammaConfig:
        return GammaConfig.from_document(self.load_document(path))

    def save_report(self, report: Dict[str, Any], path: Optional[str] = None) -> str:
        """Write a report as canonical JSON; returns the text written"""
        text = ReportFormatter.to_json(report) + '\n'
        if path is None:
            return text
        try:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(text)
        except OSError as e:
            raise InputError(f"Cannot write report to {path}: {e}")
        Logger.log_success(logger, "Report saved", {'path': path, 'status': report.get('status')})
        return text
