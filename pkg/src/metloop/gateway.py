"""Pluggable multimodal chat gateway with a deterministic replay backend.

Backends are registered by name and dispatched through complete(). The
replay backend maps a hash of the rendered prompt (all text parts plus
attachment digests) to a canned response, which makes entire pipeline runs
bit-deterministic and robust to prompt-assembly refactors exactly when the
rendered content is unchanged.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from metloop.registry import Registry, RegistryError


class GatewayError(RuntimeError):
    """A backend could not produce a completion."""


class MissingCredentialsError(GatewayError):
    """A live backend's credentials environment variable is unset."""


class ReplayMissError(GatewayError):
    """The replay script has no entry for the rendered prompt."""


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    path: str
    media_type: str = "image/png"


@dataclass
class ChatMessage:
    role: str  # system | user | assistant
    parts: list

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown chat role {self.role!r}")
        if not self.parts:
            raise ValueError("a chat message needs at least one part")


def text_message(role: str, text: str, images=()) -> ChatMessage:
    parts = [TextPart(text)]
    parts.extend(ImagePart(str(p)) for p in images)
    return ChatMessage(role, parts)


@dataclass
class BackendConfig:
    name: str
    model_id: str = "offline"
    temperature: float = 0.0
    max_output_tokens: int = 4096
    credentials_env_var: str = ""

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


backends = Registry("backend")


def register_backend(name: str, adapter) -> None:
    backends.register(name, adapter)


def _digest_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def render_prompt(messages) -> str:
    """Stable textual rendering of a message list (images by digest)."""
    lines = []
    for msg in messages:
        lines.append(f"[{msg.role}]")
        for part in msg.parts:
            if isinstance(part, TextPart):
                lines.append(part.text)
            else:
                lines.append(f"<image sha256={_digest_file(part.path)}>")
    return "\n".join(lines)


def prompt_hash(messages) -> str:
    return hashlib.sha256(render_prompt(messages).encode("utf-8")).hexdigest()


class GatewayLog:
    """Append-only request/response log; one JSON line per complete() call."""

    def __init__(self, path):
        self.path = Path(path)
        self.count = 0

    def record(self, backend_name, cfg, phash, n_images, response):
        entry = {
            "call": self.count,
            "backend": backend_name,
            "model": cfg.model_id,
            "temperature": cfg.temperature,
            "prompt_sha256": phash,
            "images": n_images,
            "response": response,
        }
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
        self.count += 1


def complete(messages, cfg: BackendConfig, registry: Registry = backends,
             log: GatewayLog = None) -> str:
    """Dispatch a chat completion to the backend named in cfg.

    Validates image attachments before dispatch; appends the exact request
    hash and response to the gateway log when one is given.
    """
    adapter = registry.get(cfg.name)
    n_images = 0
    for msg in messages:
        for part in msg.parts:
            if isinstance(part, ImagePart):
                n_images += 1
                p = Path(part.path)
                if not p.is_file():
                    raise GatewayError(f"image attachment not readable: {p}")
    phash = prompt_hash(messages)
    response = adapter.complete(messages, cfg)
    if log is not None:
        log.record(cfg.name, cfg, phash, n_images, response)
    return response


class ReplayBackend:
    """Byte-identical canned responses keyed by rendered-prompt hash."""

    def __init__(self, script):
        if isinstance(script, (str, Path)):
            script = json.loads(Path(script).read_text(encoding="utf-8"))
        self.script = dict(script)

    def complete(self, messages, cfg) -> str:
        key = prompt_hash(messages)
        if key not in self.script:
            preview = render_prompt(messages)[:400]
            raise ReplayMissError(
                f"no scripted response for prompt hash {key}; "
                f"prompt starts: {preview!r}"
            )
        return self.script[key]


class RecordingBackend:
    """Wrap any backend and capture hash->response pairs for later replay."""

    def __init__(self, inner):
        self.inner = inner
        self.script = {}

    def complete(self, messages, cfg) -> str:
        response = self.inner.complete(messages, cfg)
        self.script[prompt_hash(messages)] = response
        return response

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(
            json.dumps(self.script, sort_keys=True, ensure_ascii=False, indent=1)
            + "\n",
            encoding="utf-8",
        )
        return path


class HttpChatBackend:
    """Minimal OpenAI-style chat-completions adapter with bounded retries.

    The transport is injectable for tests; credentials are checked before
    any network activity. Images are inlined as base64 data URLs.
    """

    RETRIES = 3

    def __init__(self, endpoint: str, transport=None, sleep=time.sleep):
        self.endpoint = endpoint
        self.transport = transport or self._default_transport
        self.sleep = sleep

    @staticmethod
    def _default_transport(endpoint, payload, api_key):
        import requests

        resp = requests.post(
            endpoint,
            json=payload,
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=120,
        )
        resp.raise_for_status()
        return resp.json()

    def _payload(self, messages, cfg):
        import base64

        out = []
        for msg in messages:
            content = []
            for part in msg.parts:
                if isinstance(part, TextPart):
                    content.append({"type": "text", "text": part.text})
                else:
                    data = base64.b64encode(Path(part.path).read_bytes()).decode()
                    content.append({
                        "type": "image_url",
                        "image_url": {"url": f"data:{part.media_type};base64,{data}"},
                    })
            out.append({"role": msg.role, "content": content})
        return {
            "model": cfg.model_id,
            "messages": out,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_output_tokens,
        }

    def complete(self, messages, cfg) -> str:
        import os

        if not cfg.credentials_env_var:
            raise MissingCredentialsError(
                f"backend '{cfg.name}' has no credentials_env_var configured"
            )
        api_key = os.environ.get(cfg.credentials_env_var, "")
        if not api_key:
            raise MissingCredentialsError(
                f"environment variable {cfg.credentials_env_var} is not set"
            )
        payload = self._payload(messages, cfg)
        last = None
        for attempt in range(self.RETRIES):
            try:
                data = self.transport(self.endpoint, payload, api_key)
                return data["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - retry any transport fault
                last = exc
                if attempt < self.RETRIES - 1:
                    self.sleep(2.0**attempt)
        raise GatewayError(
            f"transport failed after {self.RETRIES} attempts: {last}"
        ) from last
