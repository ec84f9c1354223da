"""Plug-and-play analyzer registry.

Any tool can serve scans once wrapped in an :class:`AnalyzerAdapter`.
Selection prefers an explicit user choice, then the most popular compatible
analyzer, where popularity is simply the persisted completed-scan count.
"""

from __future__ import annotations

import abc
import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import RegistryError, SelectionError
from ..model import NormalizedReport, ScanTarget

DEFAULT_TIMEOUT = 300.0  # seconds


@dataclass(frozen=True)
class Capabilities:
    autofix: bool = False
    clone_detection: bool = False

    def to_dict(self) -> dict:
        return {"autofix": self.autofix, "clone_detection": self.clone_detection}


@dataclass(frozen=True)
class AnalyzerDescriptor:
    analyzer_id: str
    display_name: str
    supported_languages: tuple[str, ...]
    categories: tuple[str, ...]
    capabilities: Capabilities = Capabilities()
    popularity: int = 0

    def supports(self, language: str) -> bool:
        return language.lower() in {lang.lower() for lang in self.supported_languages}

    def to_dict(self) -> dict:
        return {
            "analyzer_id": self.analyzer_id,
            "display_name": self.display_name,
            "supported_languages": list(self.supported_languages),
            "categories": list(self.categories),
            "capabilities": self.capabilities.to_dict(),
            "popularity": self.popularity,
        }


@dataclass(frozen=True)
class ScanRequest:
    target: ScanTarget
    analyzer_id: str
    ruleset_labels: tuple[str, ...] = ()
    timeout: float = DEFAULT_TIMEOUT

    def to_dict(self) -> dict:
        return {
            "target": self.target.to_dict(),
            "analyzer_id": self.analyzer_id,
            "ruleset_labels": list(self.ruleset_labels),
            "timeout": self.timeout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScanRequest":
        return cls(
            target=ScanTarget.from_dict(d["target"]),
            analyzer_id=d["analyzer_id"],
            ruleset_labels=tuple(d.get("ruleset_labels", ())),
            timeout=float(d.get("timeout", DEFAULT_TIMEOUT)),
        )


class AnalyzerAdapter(abc.ABC):
    """Uniform face of one analysis tool. ``scan`` must never mutate the
    target directory."""

    @abc.abstractmethod
    def describe(self) -> AnalyzerDescriptor: ...

    @abc.abstractmethod
    def scan(self, request: ScanRequest) -> NormalizedReport: ...


class AnalyzerRegistry:
    """Thread-safe adapter registry with a persisted popularity counter."""

    def __init__(self, store_path: str | Path | None = None):
        self._store_path = Path(store_path) if store_path else None
        self._lock = threading.RLock()
        self._adapters: dict[str, AnalyzerAdapter] = {}
        self._popularity: dict[str, int] = {}
        if self._store_path and self._store_path.exists():
            raw = json.loads(self._store_path.read_text(encoding="utf-8"))
            self._popularity = {str(k): int(v) for k, v in raw.items()}

    def register(self, adapter: AnalyzerAdapter) -> None:
        descriptor = adapter.describe()
        with self._lock:
            if descriptor.analyzer_id in self._adapters:
                raise RegistryError(
                    f"analyzer {descriptor.analyzer_id!r} is already registered"
                )
            self._adapters[descriptor.analyzer_id] = adapter
            self._popularity.setdefault(
                descriptor.analyzer_id, descriptor.popularity
            )

    def list_descriptors(self) -> list[AnalyzerDescriptor]:
        with self._lock:
            return sorted(
                (
                    replace(a.describe(), popularity=self._popularity.get(aid, 0))
                    for aid, a in self._adapters.items()
                ),
                key=lambda d: d.analyzer_id,
            )

    def find(self, analyzer_id: str) -> AnalyzerDescriptor | None:
        with self._lock:
            adapter = self._adapters.get(analyzer_id)
            if adapter is None:
                return None
            return replace(
                adapter.describe(), popularity=self._popularity.get(analyzer_id, 0)
            )

    def adapter_for(self, analyzer_id: str) -> AnalyzerAdapter:
        with self._lock:
            adapter = self._adapters.get(analyzer_id)
        if adapter is None:
            raise RegistryError(f"no analyzer registered as {analyzer_id!r}")
        return adapter

    def select(
        self, project_language: str, preference: str | None = None
    ) -> AnalyzerDescriptor:
        descriptors = self.list_descriptors()
        if not descriptors:
            raise SelectionError("the analyzer registry is empty")
        compatible = [d for d in descriptors if d.supports(project_language)]
        if preference is not None:
            for d in compatible:
                if d.analyzer_id == preference:
                    return d
        if not compatible:
            raise SelectionError(
                f"no registered analyzer supports language {project_language!r}"
            )
        # Highest popularity wins; analyzer_id breaks ties deterministically.
        return min(compatible, key=lambda d: (-d.popularity, d.analyzer_id))

    def bump_popularity(self, analyzer_id: str) -> None:
        with self._lock:
            self._popularity[analyzer_id] = self._popularity.get(analyzer_id, 0) + 1
            self._save()

    def _save(self) -> None:
        if self._store_path is None:
            return
        self._store_path.parent.mkdir(parents=True, exist_ok=True)
        self._store_path.write_text(
            json.dumps(self._popularity, indent=2) + "\n", encoding="utf-8"
        )
