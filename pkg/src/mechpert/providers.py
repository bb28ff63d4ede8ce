"""Completion providers.

One interface -- ``complete(ProviderRequest) -> str`` -- with three
implementations: a generic HTTP JSON endpoint (request body template and
response field path are configurable, so any chat-style API fits), an
exact-match disk cache for replaying recorded runs, and the synthetic oracle
in :mod:`mechpert.synthetic`. A caching wrapper records any inner provider's
responses with atomic writes, which is what makes benchmark runs replayable
byte-for-byte.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass

import requests

from .errors import CacheCorrupt, ProviderTransportError

logger = logging.getLogger(__name__)

DEFAULT_TOKEN_ENV = "MECHPERT_API_KEY"

DEFAULT_REQUEST_TEMPLATE = {
    "model": "{model}",
    "temperature": "{temperature}",
    "messages": [{"role": "user", "content": "{prompt}"}],
}
DEFAULT_RESPONSE_PATH = "choices.0.message.content"


@dataclass(frozen=True)
class ProviderRequest:
    prompt: str
    temperature: float = 0.7
    chain_index: int = 0
    model_id: str = "default"


class Provider:
    """Interface for completion backends; implementations must be thread-safe."""

    def complete(self, request: ProviderRequest) -> str:
        raise NotImplementedError

    @property
    def name(self) -> str:
        return type(self).__name__


def _fill_template(node, values: dict):
    """Recursively substitute {prompt}/{model}/{temperature} placeholders.

    A string that IS a placeholder is replaced by the typed value (so
    temperature stays a number); placeholders inside longer strings are
    replaced textually.
    """
    if isinstance(node, dict):
        return {k: _fill_template(v, values) for k, v in node.items()}
    if isinstance(node, list):
        return [_fill_template(v, values) for v in node]
    if isinstance(node, str):
        for key, value in values.items():
            token = "{" + key + "}"
            if node == token:
                return value
            if token in node:
                node = node.replace(token, str(value))
        return node
    return node


def _walk_path(payload, path: str):
    node = payload
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node[part]
        else:
            raise KeyError(part)
    return node


class HttpProvider(Provider):
    """POSTs a templated JSON body to a configurable endpoint.

    The bearer token is read from an environment variable (default
    ``MECHPERT_API_KEY``) at request time; transport and HTTP errors raise
    :class:`ProviderTransportError`.
    """

    def __init__(
        self,
        url: str,
        token_env: str = DEFAULT_TOKEN_ENV,
        request_template: dict | None = None,
        response_path: str = DEFAULT_RESPONSE_PATH,
        timeout: float = 120.0,
        extra_headers: dict | None = None,
    ) -> None:
        self.url = url
        self.token_env = token_env
        self.request_template = request_template or DEFAULT_REQUEST_TEMPLATE
        self.response_path = response_path
        self.timeout = timeout
        self.extra_headers = extra_headers or {}

    def complete(self, request: ProviderRequest) -> str:
        body = _fill_template(
            copy.deepcopy(self.request_template),
            {
                "prompt": request.prompt,
                "model": request.model_id,
                "temperature": request.temperature,
            },
        )
        headers = {"Content-Type": "application/json", **self.extra_headers}
        token = os.environ.get(self.token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            response = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
            response.raise_for_status()
            payload = response.json()
        except (requests.RequestException, ValueError) as exc:
            raise ProviderTransportError(f"HTTP provider failed: {exc}") from exc
        try:
            text = _walk_path(payload, self.response_path)
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ProviderTransportError(
                f"response path {self.response_path!r} not found in provider payload"
            ) from exc
        if not isinstance(text, str):
            raise ProviderTransportError("provider payload at response path is not text")
        return text


# ---------------------------------------------------------------------------
# disk cache
# ---------------------------------------------------------------------------


def cache_key(model_id: str, prompt: str, temperature: float, chain_index: int) -> str:
    """Content address of one request: sha256 over its canonical JSON form."""
    canonical = json.dumps(
        {
            "chain_index": chain_index,
            "model_id": model_id,
            "prompt": prompt,
            "temperature": temperature,
        },
        sort_keys=True,
        ensure_ascii=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def cache_lookup(cache_dir: str, key: str) -> str | None:
    """Exact-match lookup; corrupt entries are a miss plus a warning."""
    path = os.path.join(cache_dir, f"{key}.json")
    if not os.path.isfile(path):
        return None
    try:
        with open(path, encoding="utf-8") as handle:
            entry = json.load(handle)
        response = entry["response"]
        if not isinstance(response, str):
            raise TypeError("response field is not text")
        return response
    except (json.JSONDecodeError, KeyError, TypeError, OSError):
        logger.warning("%s", CacheCorrupt(path))
        return None


def cache_store(cache_dir: str, key: str, response: str, metadata: dict | None = None) -> None:
    """Atomic write (temp file + rename) of one cache entry."""
    os.makedirs(cache_dir, exist_ok=True)
    entry = {
        "metadata": metadata or {},
        "response": response,
        "timestamp": time.time(),
    }
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(entry, handle, sort_keys=True)
        os.replace(tmp, os.path.join(cache_dir, f"{key}.json"))
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


class CacheReplayProvider(Provider):
    """Replays recorded responses; a miss is a transport-level failure."""

    def __init__(self, cache_dir: str) -> None:
        self.cache_dir = cache_dir

    def complete(self, request: ProviderRequest) -> str:
        key = cache_key(request.model_id, request.prompt, request.temperature, request.chain_index)
        response = cache_lookup(self.cache_dir, key)
        if response is None:
            raise ProviderTransportError(f"cache miss for key {key}")
        return response


class CachingProvider(Provider):
    """Write-through cache around another provider."""

    def __init__(self, inner: Provider, cache_dir: str) -> None:
        self.inner = inner
        self.cache_dir = cache_dir

    def complete(self, request: ProviderRequest) -> str:
        key = cache_key(request.model_id, request.prompt, request.temperature, request.chain_index)
        cached = cache_lookup(self.cache_dir, key)
        if cached is not None:
            return cached
        response = self.inner.complete(request)
        cache_store(
            self.cache_dir,
            key,
            response,
            metadata={
                "chain_index": request.chain_index,
                "model_id": request.model_id,
                "prompt": request.prompt,
                "temperature": request.temperature,
            },
        )
        return response
