"""
OpenTelemetry bootstrap and structured-logging helpers for the toolkit.

Provides:
  - configure_telemetry()  – call once at startup (the CLI does)
  - get_tracer()           – returns the app-wide Tracer
  - new_run_id()           – UUID-based run identifier for reports
  - structured JSON logger via stdlib logging (stderr, stdout stays clean)
"""

from __future__ import annotations

import logging
import os
import sys
import uuid

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    ConsoleSpanExporter,
)

_TRACER_NAME = "dualbell"
_configured = False


def configure_telemetry(service_name: str = "dualbell", log_level: str | None = None) -> None:
    """Initialise OTel tracer provider + structured JSON logging."""
    global _configured
    if _configured:
        return

    # --- OpenTelemetry tracing ---
    resource = Resource.create({"service.name": service_name})
    provider = TracerProvider(resource=resource)

    # Spans go to OTLP when an endpoint is configured, to stderr on request,
    # and nowhere otherwise: stdout carries the machine-readable report.
    otlp_endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
    console = os.getenv("DUALBELL_TRACE_CONSOLE", "false").lower() in ("true", "1", "yes")
    if otlp_endpoint:
        try:
            from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import (
                OTLPSpanExporter,
            )
            provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=otlp_endpoint)))
        except ImportError:
            provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))
    elif console:
        provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))

    trace.set_tracer_provider(provider)

    # --- Structured logging ---
    level_name = (log_level or os.getenv("LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format='{"time":"%(asctime)s","level":"%(levelname)s","logger":"%(name)s","message":"%(message)s"}',
        datefmt="%Y-%m-%dT%H:%M:%SZ",
        stream=sys.stderr,
    )

    _configured = True


def get_tracer() -> trace.Tracer:
    return trace.get_tracer(_TRACER_NAME)


def new_run_id() -> str:
    return str(uuid.uuid4())
