"""Client for an external structured-inference service.

Responses are schema-validated before they can become verdicts; a failing
backend surfaces as a typed error and is never mapped to a benign verdict.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import requests

from patentqa.errors import BackendUnavailableError, ConfigurationError, ProtocolError

log = logging.getLogger("patentqa.inference")

ENV_BASE_URL = "PATENTQA_INFERENCE_URL"
ENV_TOKEN = "PATENTQA_INFERENCE_TOKEN"

TASKS = ("compliance", "coherence", "figure_consistency")

COMPLIANCE_CATEGORIES = (
    "prohibited_commercial_language",
    "inconsistent_terminology",
    "missing_mandatory_section",
    "improper_title_abstract_format",
    "orthographic_error",
    "insufficient_figure_description",
)
RISK_LEVELS = ("safe", "low", "medium", "high")


@dataclass(frozen=True)
class ContentItem:
    kind: str  # "text" | "image"
    value: str


@dataclass(frozen=True)
class InferenceRequest:
    task: str
    instruction: str
    content: tuple[ContentItem, ...]
    schema_id: str

    def to_payload(self) -> dict:
        return {
            "task": self.task,
            "instruction": self.instruction,
            "content": [{"kind": c.kind, "value": c.value} for c in self.content],
            "schema_id": self.schema_id,
        }


@dataclass(frozen=True)
class InferenceResponse:
    verdict: dict
    rationale: str
    model_id: str
    latency_ms: float
    attempts: int


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    token: Optional[str] = None
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_s: float = 0.5
    max_in_flight: int = 4

    @classmethod
    def from_env(cls, **overrides) -> "EndpointConfig":
        base_url = overrides.pop("base_url", None) or os.environ.get(ENV_BASE_URL)
        if not base_url:
            raise ConfigurationError(
                f"no inference endpoint configured (set {ENV_BASE_URL} or pass base_url)"
            )
        token = overrides.pop("token", None) or os.environ.get(ENV_TOKEN)
        return cls(base_url=base_url, token=token, **overrides)


def _validate_compliance_verdict(verdict: dict) -> Optional[str]:
    if not isinstance(verdict.get("compliant"), bool):
        return "verdict.compliant must be a boolean"
    category = verdict.get("category")
    if verdict["compliant"]:
        if category is not None:
            return "compliant verdicts must not carry a category"
    else:
        if category not in COMPLIANCE_CATEGORIES:
            return f"verdict.category must be one of {COMPLIANCE_CATEGORIES}"
        if not verdict.get("explanation"):
            return "non-compliant verdicts must carry an explanation"
    return None


def _validate_risk_verdict(verdict: dict) -> Optional[str]:
    if verdict.get("level") not in RISK_LEVELS:
        return f"verdict.level must be one of {RISK_LEVELS}"
    criteria = verdict.get("criteria")
    if not isinstance(criteria, list) or not all(isinstance(c, str) for c in criteria):
        return "verdict.criteria must be a list of criterion ids"
    if verdict["level"] == "safe" and criteria:
        return "safe verdicts must not match criteria"
    if verdict["level"] != "safe" and not criteria:
        return "non-safe verdicts must match at least one criterion"
    return None


def _validate_figure_observation(verdict: dict) -> Optional[str]:
    numerals = verdict.get("visible_numerals")
    if not isinstance(numerals, list) or not all(isinstance(n, str) for n in numerals):
        return "verdict.visible_numerals must be a list of strings"
    return None


VERDICT_VALIDATORS: dict[str, Callable[[dict], Optional[str]]] = {
    "compliance_verdict/1": _validate_compliance_verdict,
    "risk_verdict/1": _validate_risk_verdict,
    "figure_observation/1": _validate_figure_observation,
}


def validate_response(schema_id: str, payload: object) -> Optional[str]:
    """Return an error string when the payload violates the response schema."""
    if schema_id not in VERDICT_VALIDATORS:
        return f"unknown schema id {schema_id!r}"
    if not isinstance(payload, dict):
        return "response must be a JSON object"
    for key, kind in (("verdict", dict), ("rationale", str), ("model_id", str)):
        if not isinstance(payload.get(key), kind):
            return f"response.{key} missing or not a {kind.__name__}"
    if not isinstance(payload.get("latency_ms"), (int, float)):
        return "response.latency_ms missing or not a number"
    return VERDICT_VALIDATORS[schema_id](payload["verdict"])


class InferenceClient:
    """Submits requests with bounded retries; ``transport`` swaps HTTP out in tests."""

    def __init__(
        self,
        config: EndpointConfig,
        transport: Callable[[dict], dict] | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._transport = transport
        self._sleep = sleep

    def _send(self, payload: dict) -> dict:
        if self._transport is not None:
            return self._transport(payload)
        headers = {"Content-Type": "application/json"}
        if self.config.token:
            headers["Authorization"] = f"Bearer {self.config.token}"
        response = requests.post(
            f"{self.config.base_url.rstrip('/')}/v1/infer",
            json=payload,
            headers=headers,
            timeout=self.config.timeout_s,
        )
        response.raise_for_status()
        return response.json()

    def submit(self, request: InferenceRequest) -> InferenceResponse:
        if request.task not in TASKS:
            raise ConfigurationError(f"unknown inference task {request.task!r}")
        if request.schema_id not in VERDICT_VALIDATORS:
            raise ConfigurationError(f"unknown response schema {request.schema_id!r}")

        payload = request.to_payload()
        last_error: Exception | None = None
        schema_failure: str | None = None
        for attempt in range(1, self.config.max_attempts + 1):
            try:
                raw = self._send(payload)
            except (requests.RequestException, ConnectionError, TimeoutError, OSError) as e:
                last_error = e
                log.warning("inference attempt %d/%d failed: %s", attempt, self.config.max_attempts, e)
            except (json.JSONDecodeError, ValueError) as e:
                schema_failure = f"non-JSON response: {e}"
                log.warning("inference attempt %d/%d returned non-JSON", attempt, self.config.max_attempts)
            else:
                problem = validate_response(request.schema_id, raw)
                if problem is None:
                    return InferenceResponse(
                        verdict=raw["verdict"],
                        rationale=raw["rationale"],
                        model_id=raw["model_id"],
                        latency_ms=float(raw["latency_ms"]),
                        attempts=attempt,
                    )
                schema_failure = problem
                log.warning(
                    "inference attempt %d/%d schema-invalid: %s",
                    attempt,
                    self.config.max_attempts,
                    problem,
                )
            if attempt < self.config.max_attempts:
                self._sleep(self.config.backoff_s * (2 ** (attempt - 1)))

        if schema_failure is not None:
            raise ProtocolError(
                f"endpoint never produced a schema-valid {request.schema_id} response: {schema_failure}"
            )
        raise BackendUnavailableError(
            f"inference endpoint unreachable after {self.config.max_attempts} attempts: {last_error}"
        )
