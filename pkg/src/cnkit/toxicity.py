"""Client for a remote toxicity scorer.

The transport is injectable so the whole suite runs offline under mocks; the
real transport posts ``{"text": ...}`` and expects ``{"score": float}`` back.
"""

import hashlib
import os
import threading
import time

API_KEY_ENV = "TOXICITY_API_KEY"


class ToxicityConfigError(RuntimeError):
    pass


class ToxicityTransportError(RuntimeError):
    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


def http_transport(endpoint, api_key):
    import httpx

    def send(payload):
        resp = httpx.post(endpoint, params={"key": api_key}, json=payload)
        if resp.status_code != 200:
            raise ToxicityTransportError(
                f"toxicity endpoint returned {resp.status_code}",
                status=resp.status_code)
        return resp.json()

    return send


class ToxicityClient:
    """Scores texts via an injectable transport, with retry and caching.

    Responses are cached by text hash; identical texts hit the transport
    once. Failures are retried up to ``max_retries`` times with exponential
    backoff.
    """

    def __init__(self, endpoint=None, api_key=None, transport=None,
                 max_retries=3, backoff=0.5, sleep=time.sleep):
        if transport is None:
            key = api_key or os.environ.get(API_KEY_ENV)
            if not key:
                raise ToxicityConfigError(
                    f"no toxicity credential: set {API_KEY_ENV} or pass api_key")
            if not endpoint:
                raise ToxicityConfigError("no toxicity endpoint configured")
            transport = http_transport(endpoint, key)
        self._transport = transport
        self._max_retries = max_retries
        self._backoff = backoff
        self._sleep = sleep
        self._cache = {}
        self._lock = threading.Lock()

    def score(self, text: str) -> float:
        key = hashlib.sha256(text.encode("utf-8")).hexdigest()
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = self._score_with_retry(text)
        with self._lock:
            # last writer wins on concurrent misses
            self._cache[key] = value
        return value

    def _score_with_retry(self, text):
        last = None
        for attempt in range(self._max_retries + 1):
            try:
                reply = self._transport({"text": text})
                return float(reply["score"])
            except ToxicityTransportError as exc:
                last = exc
                if attempt < self._max_retries:
                    self._sleep(self._backoff * 2 ** attempt)
        raise last


def toxicity_score(text: str, client: ToxicityClient) -> float:
    return client.score(text)
