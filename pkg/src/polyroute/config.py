"""Engine configuration shared by the CLI and the HTTP service."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from polyroute.errors import ConfigParse
from polyroute.execution import ExecLimits, Executor, VerbalizeCaps
from polyroute.llm import Gateway, HttpProvider, Provider, ScriptedProvider
from polyroute.pipeline import Engine
from polyroute.registry import Catalog, load_catalog


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # http | scripted
    script: Path | None = None
    model: str | None = None
    base_url: str | None = None
    timeout: float = 60.0

    def build(self) -> Provider:
        if self.kind == "scripted":
            return ScriptedProvider.from_file(self.script)
        return HttpProvider(self.base_url, model=self.model, timeout=self.timeout)


@dataclass(frozen=True)
class EngineConfig:
    catalog_path: Path
    provider: ProviderConfig
    judge_provider: ProviderConfig | None = None
    k: int = 3
    limits: ExecLimits = field(default_factory=ExecLimits)
    caps: VerbalizeCaps = field(default_factory=VerbalizeCaps)
    llm_concurrency: int = 4
    fanout: int = 4
    questions: int = 4
    requests: int = 8
    trace_path: Path | None = None

    def load_catalog(self) -> Catalog:
        return load_catalog(self.catalog_path)

    def build_engine(self, catalog: Catalog | None = None) -> Engine:
        gateway = Gateway(self.provider.build(), self.llm_concurrency)
        return Engine(catalog or self.load_catalog(), gateway, limits=self.limits, executor=Executor(),
                      fanout=self.fanout, caps=self.caps)

    def build_judge(self, default: Provider) -> Provider:
        if self.judge_provider is None:
            return default
        return Gateway(self.judge_provider.build(), self.llm_concurrency)


def _provider(raw: Any, base: Path, where: str) -> ProviderConfig:
    if not isinstance(raw, dict):
        raise ConfigParse(f"{where} must be an object")
    kind = raw.get("kind", "http")
    if kind == "scripted":
        if not raw.get("script"):
            raise ConfigParse(f"{where}: scripted provider needs 'script'")
        script = (base / raw["script"]).resolve()
        if not script.is_file():
            raise ConfigParse(f"{where}: script file {script} not found")
        return ProviderConfig("scripted", script=script)
    if kind == "http":
        return ProviderConfig("http", model=raw.get("model"), base_url=raw.get("base_url"),
                              timeout=float(raw.get("timeout", 60.0)))
    raise ConfigParse(f"{where}: unknown provider kind {kind!r}")


def _positive(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigParse(f"{name} must be a positive integer")
    return value


def load_config(path: str | Path) -> EngineConfig:
    """Load and fully validate an engine config; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path}: {exc}") from None
    if not isinstance(raw, dict) or "catalog" not in raw or "provider" not in raw:
        raise ConfigParse(f"{path}: config needs 'catalog' and 'provider'")
    base = path.parent
    catalog_path = (base / raw["catalog"]).resolve()
    if not catalog_path.is_file():
        raise ConfigParse(f"catalog file {catalog_path} not found")

    limits_raw = raw.get("limits", {})
    conc = raw.get("concurrency", {})
    try:
        limits = ExecLimits(float(limits_raw.get("timeout", 30.0)), _positive(limits_raw.get("max_rows", 500), "max_rows"))
        caps = VerbalizeCaps(_positive(limits_raw.get("max_items", 50), "max_items"),
                             _positive(limits_raw.get("max_chars", 2000), "max_chars"))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigParse(f"{path}: bad limits: {exc}") from None
    if limits.timeout <= 0:
        raise ConfigParse("timeout must be positive")

    judge = raw.get("judge_provider")
    trace = raw.get("trace")
    return EngineConfig(
        catalog_path=catalog_path,
        provider=_provider(raw["provider"], base, "provider"),
        judge_provider=_provider(judge, base, "judge_provider") if judge is not None else None,
        k=_positive(raw.get("k", 3), "k"),
        limits=limits,
        caps=caps,
        llm_concurrency=_positive(conc.get("llm", 4), "concurrency.llm"),
        fanout=_positive(conc.get("fanout", 4), "concurrency.fanout"),
        questions=_positive(conc.get("questions", 4), "concurrency.questions"),
        requests=_positive(conc.get("requests", 8), "concurrency.requests"),
        trace_path=(base / trace).resolve() if trace else None,
    )
