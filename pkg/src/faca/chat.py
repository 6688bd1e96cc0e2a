"""Chat-completion transport for the language-model negotiator.

``HttpChatClient`` speaks the common ``/chat/completions`` JSON shape: a list of
``{"role", "content"}`` messages in, ``choices[0].message.content`` out.
``ReplayChatService`` is an in-process stand-in that replays canned replies,
either directly or behind an ``httpx.MockTransport`` so the HTTP client can be
exercised without a network.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Optional, Protocol, Sequence

import httpx

API_KEY_ENV = "FACA_LLM_API_KEY"


class TransportError(RuntimeError):
    """The chat service could not be reached or answered nonsense."""


class ChatClient(Protocol):
    def complete(self, messages: Sequence[dict]) -> str: ...


class HttpChatClient:
    def __init__(self, url: str, model: str, timeout_s: float = 30.0,
                 api_key: Optional[str] = None,
                 transport: Optional[httpx.BaseTransport] = None):
        self.url = url
        self.model = model
        self.timeout_s = timeout_s
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._client = httpx.Client(timeout=timeout_s, transport=transport)

    def complete(self, messages: Sequence[dict]) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"model": self.model, "messages": list(messages), "temperature": 0.0}
        try:
            resp = self._client.post(self.url, json=payload, headers=headers)
            resp.raise_for_status()
            data = resp.json()
        except httpx.TimeoutException as e:
            raise TransportError(f"chat request timed out after {self.timeout_s}s") from e
        except (httpx.HTTPError, json.JSONDecodeError) as e:
            raise TransportError(f"chat request failed: {e}") from e
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise TransportError(f"unexpected response shape: {data!r:.200}") from e
        if not isinstance(content, str):
            raise TransportError("response content is not text")
        return content

    def close(self):
        self._client.close()


class ReplayChatService:
    """Replies with ``replies`` in order, then repeats ``filler`` forever.

    ``timeout_on`` lists 1-based call numbers that raise ``TransportError``
    instead of answering. Every request is kept in ``requests``.
    """

    def __init__(self, replies: Iterable[str] = (), filler: str = "Let us keep talking.",
                 timeout_on: Iterable[int] = ()):
        self.replies = list(replies)
        self.filler = filler
        self.timeout_on = set(timeout_on)
        self.requests: list[list[dict]] = []

    def complete(self, messages: Sequence[dict]) -> str:
        self.requests.append([dict(m) for m in messages])
        n = len(self.requests)
        if n in self.timeout_on:
            raise TransportError(f"simulated timeout on call {n}")
        if n <= len(self.replies):
            return self.replies[n - 1]
        return self.filler

    def as_transport(self) -> httpx.MockTransport:
        def handler(request: httpx.Request) -> httpx.Response:
            body = json.loads(request.content)
            try:
                text = self.complete(body["messages"])
            except TransportError:
                raise httpx.ReadTimeout("simulated timeout", request=request)
            return httpx.Response(200, json={
                "id": f"replay-{len(self.requests)}",
                "model": body.get("model", "replay"),
                "choices": [{"index": 0, "finish_reason": "stop",
                             "message": {"role": "assistant", "content": text}}],
            })
        return httpx.MockTransport(handler)
