"""Provider-agnostic LLM agent speaking a generic chat-completion shape.

Any endpoint accepting ``{model, messages, temperature, max_tokens}``
and answering ``{choices: [{message: {content}}]}`` works; provider
details live in a small JSON config and the API key is only ever read
from an environment variable.  Transport is injectable so the full
agent loop is testable offline.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from string import Template

from .agents import AgentPolicy
from .environment import DONE, INSPECT, INVALID, LIST, OPEN, SEARCH, Action, Observation, Session

try:  # resources are packaged; the fallback supports running from a checkout
    from importlib import resources
except ImportError:  # pragma: no cover
    resources = None

TRACK_SCRATCHPAD = "scratchpad"
TRACK_NO_PROBE = "no_probe"
TRACK_PROBE_ONLY = "probe_only"
TRACKING_MODES = (TRACK_SCRATCHPAD, TRACK_NO_PROBE, TRACK_PROBE_ONLY)

PROMPT_VERSIONS = ("v1", "v2")


class ConfigurationError(RuntimeError):
    """Missing or invalid run configuration (bad key env var, oversize prompt)."""


class RunFailedError(RuntimeError):
    """The upstream endpoint failed after bounded retries."""


@dataclass
class ProviderConfig:
    name: str
    base_url: str
    model: str
    api_key_env: str
    temperature: float = 0.0
    max_tokens: int = 4000
    rate_limit_per_min: int = 60
    prompt_char_limit: int = 400_000

    @classmethod
    def load(cls, path: str | Path) -> "ProviderConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(
                name=doc["name"],
                base_url=doc["base_url"].rstrip("/"),
                model=doc["model"],
                api_key_env=doc["api_key_env"],
                temperature=float(doc.get("temperature", 0.0)),
                max_tokens=int(doc.get("max_tokens", 4000)),
                rate_limit_per_min=int(doc.get("rate_limit_per_min", 60)),
                prompt_char_limit=int(doc.get("prompt_char_limit", 400_000)),
            )
        except KeyError as err:
            raise ConfigurationError(f"provider config {path} missing field {err}") from err

    def api_key(self) -> str:
        value = os.environ.get(self.api_key_env, "")
        if not value:
            raise ConfigurationError(
                f"environment variable {self.api_key_env} is not set (required for provider {self.name})"
            )
        return value


class _RateLimiter:
    """Serializes request start times so one provider sees at most
    ``per_minute`` requests per minute, across concurrently running
    agents in this process."""

    def __init__(self, per_minute: int):
        self.per_minute = max(1, per_minute)
        self.interval = 60.0 / self.per_minute
        self.lock = threading.Lock()
        self.next_free = 0.0

    def acquire(self, sleeper) -> None:
        with self.lock:
            now = time.monotonic()
            start = max(now, self.next_free)
            wait = start - now
            self.next_free = start + self.interval
        if wait > 0:
            sleeper(wait)


_LIMITERS: dict[str, _RateLimiter] = {}
_LIMITERS_LOCK = threading.Lock()


def provider_rate_limiter(provider: "ProviderConfig") -> _RateLimiter:
    with _LIMITERS_LOCK:
        limiter = _LIMITERS.get(provider.name)
        if limiter is None or limiter.per_minute != max(1, provider.rate_limit_per_min):
            limiter = _RateLimiter(provider.rate_limit_per_min)
            _LIMITERS[provider.name] = limiter
        return limiter


def default_transport(url: str, headers: dict, payload: dict, timeout: float = 120.0) -> dict:
    import requests

    response = requests.post(url, headers=headers, json=payload, timeout=timeout)
    response.raise_for_status()
    return response.json()


def load_prompt(name: str) -> str:
    if resources is not None:
        ref = resources.files("archprobe").joinpath(f"prompts/{name}.txt")
        return ref.read_text(encoding="utf-8")
    here = Path(__file__).parent / "prompts" / f"{name}.txt"  # pragma: no cover
    return here.read_text(encoding="utf-8")


_ACTION_LINE = re.compile(
    r"^\s*(LIST|OPEN|SEARCH|INSPECT|DONE)\s*(?:\((.*)\))?\s*\.?\s*$"
)


def _strip_quotes(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_action_reply(text: str) -> Action | None:
    """First recognized action line wins; None when nothing parses."""
    for line in text.splitlines():
        match = _ACTION_LINE.match(line)
        if not match:
            continue
        verb, raw_args = match.group(1), match.group(2) or ""
        if verb == DONE:
            return Action(DONE)
        if verb == INSPECT:
            if "," not in raw_args:
                continue
            file_arg, symbol = raw_args.split(",", 1)
            return Action(INSPECT, _strip_quotes(file_arg), _strip_quotes(symbol))
        if verb in (LIST, OPEN, SEARCH):
            if verb != LIST and not raw_args.strip():
                continue
            return Action(verb, _strip_quotes(raw_args))
    return None


class LlmAgent(AgentPolicy):
    """Chat-driven exploration agent with selectable probe tracking mode."""

    name = "llm"

    MAX_RETRIES = 3
    BACKOFF_BASE = 0.5

    def __init__(self, provider: ProviderConfig, tracking_mode: str = TRACK_SCRATCHPAD,
                 prompt_version: str = "v2", transport=None, sleeper=time.sleep):
        if tracking_mode not in TRACKING_MODES:
            raise ConfigurationError(f"unknown tracking mode {tracking_mode!r}")
        if prompt_version not in PROMPT_VERSIONS:
            raise ConfigurationError(f"unknown prompt version {prompt_version!r}")
        self.provider = provider
        self.tracking_mode = tracking_mode
        self.prompt_version = prompt_version
        self.transport = transport or default_transport
        self.sleeper = sleeper
        self.history: list[tuple[str, str, str]] = []  # (role, content, tag)
        self.request_count = 0
        self.name = f"llm:{provider.model}"

    # -- transcript ---------------------------------------------------------

    def begin(self, session: Session) -> None:
        system = Template(load_prompt("system")).substitute(
            budget=session.budget, probe_interval=session.probe_interval,
        )
        self.history = [("system", system, "system")]

    def _messages(self, extra: list[tuple[str, str]] = ()) -> list[dict]:
        messages = []
        for role, content, tag in self.history:
            if self.tracking_mode == TRACK_PROBE_ONLY and tag == "probe":
                continue
            messages.append({"role": role, "content": content})
        for role, content in extra:
            messages.append({"role": role, "content": content})
        return messages

    def _throttle(self) -> None:
        provider_rate_limiter(self.provider).acquire(self.sleeper)

    def _request(self, messages: list[dict]) -> str:
        total_chars = sum(len(m["content"]) for m in messages)
        if total_chars > self.provider.prompt_char_limit:
            raise ConfigurationError(
                f"assembled prompt is {total_chars} characters, over the configured "
                f"limit of {self.provider.prompt_char_limit}; refusing to truncate silently"
            )
        payload = {
            "model": self.provider.model,
            "messages": messages,
            "temperature": self.provider.temperature,
            "max_tokens": self.provider.max_tokens,
        }
        headers = {
            "Authorization": f"Bearer {self.provider.api_key()}",
            "Content-Type": "application/json",
        }
        url = f"{self.provider.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.MAX_RETRIES):
            try:
                self._throttle()
                self.request_count += 1
                doc = self.transport(url, headers, payload)
                return doc["choices"][0]["message"]["content"]
            except ConfigurationError:
                raise
            except Exception as err:  # transport and shape errors both retry
                last_error = err
                if attempt < self.MAX_RETRIES - 1:
                    self.sleeper(self.BACKOFF_BASE * (2 ** attempt))
        raise RunFailedError(f"provider {self.provider.name} failed after "
                             f"{self.MAX_RETRIES} attempts: {last_error}")

    # -- policy interface ---------------------------------------------------

    def next_action(self, session: Session) -> Action:
        turn = Template(load_prompt("action")).substitute(
            remaining=session.budget_remaining,
            taken=session.actions_taken,
            opened="\n".join(sorted(session.opened)) or "(none)",
        )
        self.history.append(("user", turn, "action"))
        reply = self._request(self._messages())
        self.history.append(("assistant", reply, "action"))
        action = parse_action_reply(reply)
        if action is None:
            return Action(INVALID, reply.strip().splitlines()[0][:60] if reply.strip() else "")
        return action

    def observe(self, action: Action, obs: Observation) -> None:
        content = (f"OBSERVATION [{obs.kind}] for {action.render()} "
                   f"(budget remaining {obs.budget_remaining}):\n{obs.payload}")
        self.history.append(("user", content, "action"))

    def observe_all(self, files: dict[str, str]) -> None:
        blocks = [f"### FILE: {path}\n{text}" for path, text in sorted(files.items())]
        content = "You receive the entire codebase at once:\n\n" + "\n\n".join(blocks)
        self.history.append(("user", content, "action"))

    def on_probe(self, session: Session) -> str:
        prompt = load_prompt(f"probe_{self.prompt_version}")
        extra = [("user", prompt)]
        reply = self._request(self._messages(extra))
        if self.tracking_mode == TRACK_SCRATCHPAD:
            self.history.append(("user", prompt, "probe"))
            self.history.append(("assistant", reply, "probe"))
        elif self.tracking_mode == TRACK_PROBE_ONLY:
            # Collected but stripped: neither the prompt nor the JSON is retained.
            pass
        else:
            self.history.append(("user", prompt, "probe"))
            self.history.append(("assistant", reply, "probe"))
        return reply
