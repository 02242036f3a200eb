# src/shared/utils.py
import json
import logging
import sys
from datetime import datetime, timezone
from typing import Dict, Any, Optional

import structlog

REPORT_SCHEMA = 'wittkit.report/1'

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2


class ReportFormatter:
    """Utility class for formatting command reports"""

    @staticmethod
    def success_report(command: str, gamma: str, result: Dict[str, Any],
                       status: str = 'ok', timing: Optional[float] = None) -> Dict[str, Any]:
        """Format a report for a command that ran to completion"""
        return {
            'schema': REPORT_SCHEMA,
            'command': command,
            'gamma': gamma,
            'status': status,
            'result': result,
            'timing': {'seconds': timing, 'finished_at': datetime.now(timezone.utc).isoformat()}
        }

    @staticmethod
    def error_report(command: str, error: Exception, gamma: Optional[str] = None,
                     status: str = 'input_error') -> Dict[str, Any]:
        """Format a report for a command that failed"""
        return {
            'schema': REPORT_SCHEMA,
            'command': command,
            'gamma': gamma,
            'status': status,
            'result': {
                'error': type(error).__name__,
                'message': str(error),
                **({'line': error.line, 'column': error.column} if hasattr(error, 'column') else {})
            },
            'timing': {'seconds': None, 'finished_at': datetime.now(timezone.utc).isoformat()}
        }

    @staticmethod
    def to_json(report: Dict[str, Any]) -> str:
        return json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2, default=str)

    @staticmethod
    def exit_code(report: Dict[str, Any]) -> int:
        """Map a report status onto the CLI exit-code contract"""
        status = report.get('status')
        if status == 'ok':
            return EXIT_OK
        if status == 'verification_failed':
            return EXIT_VERIFICATION_FAILED
        return EXIT_INPUT_ERROR


class Logger:
    """Utility class for logging operations"""

    _configured = False

    @staticmethod
    def configure(level: str = 'WARNING', fmt: str = 'console') -> None:
        """Configure structlog once; logs go to stderr"""
        numeric = getattr(logging, level.upper(), logging.WARNING)
        renderer = (structlog.processors.JSONRenderer(sort_keys=True) if fmt == 'json'
                    else structlog.dev.ConsoleRenderer(colors=False))
        structlog.configure(
            processors=[
                structlog.processors.add_log_level,
                structlog.processors.TimeStamper(fmt='iso'),
                renderer,
            ],
            wrapper_class=structlog.make_filtering_bound_logger(numeric),
            logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
            cache_logger_on_first_use=False,
        )
        Logger._configured = True

    @staticmethod
    def setup_logger(name: str):
        """Setup logger with consistent configuration"""
        if not Logger._configured:
            Logger.configure()
        return structlog.get_logger(name)

    @staticmethod
    def log_success(logger, message: str, data: Dict[str, Any] = None):
        """Log success message with optional data"""
        logger.info(f"✅ {message}", **(data or {}))

    @staticmethod
    def log_error(logger, message: str, error: Exception = None):
        """Log error message with optional exception"""
        if error:
            logger.error(f"❌ {message}", error=str(error), error_type=type(error).__name__)
        else:
            logger.error(f"❌ {message}")

    @staticmethod
    def log_processing_step(logger, message: str, data: Dict[str, Any] = None):
        """Log processing step with optional data"""
        logger.info(f"🔄 {message}", **(data or {}))
