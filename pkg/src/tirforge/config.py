"""Pipeline configuration: one JSON file, env-var interpolation for secrets.

Budget defaults are the pipeline's operating constants: 5 tool attempts
under a 30 s timeout, 15 solver steps, 3 translator attempts.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

from . import __version__
from .gateway import EndpointConfig

ROLES = ("solver", "translator", "judge", "rephrase", "eval")

EXECUTOR_CMD_ENV = "TIRFORGE_EXECUTOR_CMD"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Budgets:
    tool_attempts: int = 5
    tool_timeout_s: float = 30.0
    max_steps: int = 15
    translator_attempts: int = 3


@dataclass
class PipelineConfig:
    endpoints: dict = field(default_factory=dict)  # role -> EndpointConfig
    executor_command: tuple = ()
    executor_pool_size: int = 1
    budgets: Budgets = field(default_factory=Budgets)
    parallelism: int = 8
    trace_store: str = "traces.jsonl"
    record_store: str = "records.jsonl"
    template_overrides: dict = field(default_factory=dict)
    pipeline_version: str = __version__

    def endpoint(self, role: str) -> EndpointConfig:
        if role not in self.endpoints:
            raise ConfigError(f"no endpoint configured for role {role!r}")
        return self.endpoints[role]

    def resolved_executor_command(self) -> tuple:
        override = os.environ.get(EXECUTOR_CMD_ENV)
        if override:
            import shlex

            return tuple(shlex.split(override))
        return self.executor_command

    def version_hash(self) -> str:
        stable = {
            "version": self.pipeline_version,
            "budgets": vars(self.budgets) if not isinstance(self.budgets, dict) else self.budgets,
            "models": {role: ep.model for role, ep in sorted(self.endpoints.items())},
            "templates": dict(sorted(self.template_overrides.items())),
        }
        blob = json.dumps(stable, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


_ENV_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z_0-9]*)\}")


def _interpolate(value, missing: set):
    if isinstance(value, str):
        def sub(match):
            name = match.group(1)
            if name not in os.environ:
                missing.add(name)
                return ""
            return os.environ[name]

        return _ENV_RE.sub(sub, value)
    if isinstance(value, list):
        return [_interpolate(v, missing) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v, missing) for k, v in value.items()}
    return value


def load_config(path: str | None = None) -> PipelineConfig:
    """Load a pipeline config; ``${VAR}`` strings pull from the environment
    and unset variables are a startup error."""
    if path is None:
        return PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    missing: set = set()
    raw = _interpolate(raw, missing)
    if missing:
        raise ConfigError(f"config references unset environment variables: {sorted(missing)}")

    endpoints = {}
    for role, spec in raw.get("endpoints", {}).items():
        if role not in ROLES:
            raise ConfigError(f"unknown endpoint role {role!r}; roles are {ROLES}")
        endpoints[role] = EndpointConfig(
            base_url=spec.get("base_url", ""),
            model=spec.get("model", ""),
            api_key_env=spec.get("api_key_env", "TIRFORGE_API_KEY"),
            temperature=float(spec.get("temperature", 0.0)),
            timeout_s=float(spec.get("timeout_s", 120.0)),
            max_retries=int(spec.get("max_retries", 3)),
            concurrency=int(spec.get("concurrency", 4)),
        )

    executor = raw.get("executor", {})
    command = executor.get("command", ())
    if isinstance(command, str):
        import shlex

        command = tuple(shlex.split(command))
    else:
        command = tuple(command)

    budgets_raw = raw.get("budgets", {})
    budgets = Budgets(
        tool_attempts=int(budgets_raw.get("tool_attempts", 5)),
        tool_timeout_s=float(budgets_raw.get("tool_timeout_s", 30.0)),
        max_steps=int(budgets_raw.get("max_steps", 15)),
        translator_attempts=int(budgets_raw.get("translator_attempts", 3)),
    )

    stores = raw.get("stores", {})
    return PipelineConfig(
        endpoints=endpoints,
        executor_command=command,
        executor_pool_size=int(executor.get("pool_size", 1)),
        budgets=budgets,
        parallelism=int(raw.get("parallelism", 8)),
        trace_store=stores.get("traces", "traces.jsonl"),
        record_store=stores.get("records", "records.jsonl"),
        template_overrides=dict(raw.get("templates", {})),
        pipeline_version=str(raw.get("pipeline_version", __version__)),
    )
