"""Provider-agnostic chat-completion clients.

Two implementations of one small contract: complete(prompt) returns the
model's text plus call metadata.  The stub client is fully deterministic
(its text is a digest of the prompt, its metadata is fixed) so that
end-to-end runs can be compared byte for byte.  The HTTP client speaks
the common JSON chat-completion shape and reads its credential from an
environment variable; the credential never appears in configuration
files, logs, or error messages.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Protocol

from .errors import ConfigError, TransportError

LOGGER = logging.getLogger(__name__)

STUB_TIMESTAMP = "1970-01-01T00:00:00Z"

# transport(url, headers, body) -> (status_code, response_body)
Transport = Callable[[str, dict, bytes], tuple[int, bytes]]


@dataclass(frozen=True)
class LlmResponse:
    text: str
    model_id: str
    retries: int
    latency_s: float
    timestamp_utc: str


class LlmClient(Protocol):
    model_id: str

    def complete(self, prompt: str) -> LlmResponse: ...


class StubClient:
    """Deterministic offline client.

    The response text embeds the first 16 hex digits of the prompt's
    SHA-256, so distinct prompts yield distinct, reproducible texts.
    """

    def __init__(self, model_id: str = "stub-model") -> None:
        self.model_id = model_id

    def complete(self, prompt: str) -> LlmResponse:
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]
        text = (
            f"[stub {digest}] Prioritize the weakest indicators behind this "
            "score, set measurable improvement targets, and report progress "
            "against them annually."
        )
        return LlmResponse(
            text=text,
            model_id=self.model_id,
            retries=0,
            latency_s=0.0,
            timestamp_utc=STUB_TIMESTAMP,
        )


def _urllib_transport(url: str, headers: dict, body: bytes) -> tuple[int, bytes]:
    request = urllib.request.Request(url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=60) as response:
            return response.status, response.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()
    except urllib.error.URLError as exc:
        raise TransportError(f"request to model endpoint failed: {exc.reason}") from None


class HttpChatClient:
    """JSON-over-HTTP chat-completion client with bounded retries.

    The credential is resolved from `credential_env` at construction
    time and the client refuses to start without it, so a misconfigured
    run fails before any prompt is sent.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        credential_env: str,
        max_retries: int = 3,
        backoff_s: float = 1.0,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if not endpoint:
            raise ConfigError("live client needs a non-empty endpoint URL")
        if not credential_env:
            raise ConfigError("live client needs the credential variable name")
        credential = os.environ.get(credential_env)
        if not credential:
            raise ConfigError(
                f"environment variable '{credential_env}' is not set; "
                "refusing to start the live client"
            )
        self.endpoint = endpoint
        self.model_id = model_id
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._credential = credential
        self._transport = transport or _urllib_transport
        self._sleep = sleep

    def complete(self, prompt: str) -> LlmResponse:
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
        }
        body = json.dumps(payload).encode("utf-8")
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._credential}",
        }
        started = time.monotonic()
        attempts = self.max_retries + 1
        last_error = "no attempt made"
        for attempt in range(attempts):
            if attempt:
                self._sleep(self.backoff_s * (2.0 ** (attempt - 1)))
            try:
                status, raw = self._transport(self.endpoint, headers, body)
            except TransportError as exc:
                last_error = str(exc)
                LOGGER.warning("attempt %d/%d failed: %s", attempt + 1, attempts, exc)
                continue
            if 500 <= status < 600 or status == 429:
                last_error = f"endpoint returned status {status}"
                LOGGER.warning("attempt %d/%d: %s", attempt + 1, attempts, last_error)
                continue
            if status != 200:
                raise TransportError(
                    f"model endpoint rejected the request with status {status}"
                )
            text = self._parse(raw)
            return LlmResponse(
                text=text,
                model_id=self.model_id,
                retries=attempt,
                latency_s=time.monotonic() - started,
                timestamp_utc=datetime.now(timezone.utc)
                .replace(microsecond=0)
                .isoformat()
                .replace("+00:00", "Z"),
            )
        raise TransportError(
            f"model endpoint unavailable after {attempts} attempts: {last_error}"
        )

    @staticmethod
    def _parse(raw: bytes) -> str:
        try:
            payload = json.loads(raw.decode("utf-8"))
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise TransportError(
                "model endpoint returned an unparseable completion payload"
            ) from None
