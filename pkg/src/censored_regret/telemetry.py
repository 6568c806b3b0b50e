from __future__ import annotations
import logging

from azure.monitor.opentelemetry import configure_azure_monitor
from opentelemetry import trace

from censored_regret.config import settings

_configured = False

logger = logging.getLogger(__name__)


def setup_telemetry(log_level: str | None = None) -> None:
    """Configure logging and, when a connection string is set, the Azure Monitor exporter."""
    global _configured
    if _configured:
        return

    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if settings.appinsights_connection_string:
        try:
            configure_azure_monitor(connection_string=settings.appinsights_connection_string)
        except Exception as e:
            logger.warning("Failed to configure Azure Monitor exporter: %s", e)

    _configured = True


def get_tracer(name: str = "censored-regret"):
    return trace.get_tracer(name)
