"""Editor-activity queue and environment probes.

The queue is the durable log of "what the user is working on": one JSON
object per line, append-only, reconciled so each project has at most one
currently-active event. Probes answer what is open on the host (applications,
browser tabs); the only built-in implementation reads a fixture file, which
keeps everything hermetic. A native probe can be added behind the same
interface later.
"""

from __future__ import annotations

import abc
import json
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Iterator
from urllib.parse import urlparse

from .errors import InputError, StorageError
from .model import ScanTarget, TargetKind, format_timestamp, parse_timestamp, utcnow

DEFAULT_STALENESS = timedelta(minutes=30)
DEBOUNCE_SECONDS = 0.5
WATCH_EXCLUSIONS = (".git", ".hg", ".idea", "build", "target", "out", "node_modules", "__pycache__")


@dataclass(frozen=True)
class WorkspaceEvent:
    """One editor-activity record."""

    project_name: str
    project_location: str
    current_file: str
    date_added: datetime
    currently_active: bool

    def to_dict(self) -> dict:
        return {
            "project_name": self.project_name,
            "project_location": self.project_location,
            "current_file": self.current_file,
            "date_added": format_timestamp(self.date_added),
            "currently_active": self.currently_active,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorkspaceEvent":
        return cls(
            project_name=d["project_name"],
            project_location=d["project_location"],
            current_file=d["current_file"],
            date_added=parse_timestamp(d["date_added"]),
            currently_active=bool(d["currently_active"]),
        )


@dataclass(frozen=True)
class ActiveContext:
    """The project/file the user is working on right now."""

    project: ScanTarget
    current_file: str
    as_of: datetime

    def to_dict(self) -> dict:
        return {
            "project": self.project.to_dict(),
            "current_file": self.current_file,
            "as_of": format_timestamp(self.as_of),
        }


@dataclass(frozen=True)
class RepoRef:
    owner: str
    repo: str
    url: str

    def to_dict(self) -> dict:
        return {"owner": self.owner, "repo": self.repo, "url": self.url}


class EnvironmentProbe(abc.ABC):
    """Read-only view of the host environment. Implementations must never
    mutate host state."""

    @abc.abstractmethod
    def list_open_applications(self) -> list[str]: ...

    @abc.abstractmethod
    def frontmost_application(self) -> str: ...

    @abc.abstractmethod
    def list_browser_tab_urls(self) -> list[str]: ...


class FileProbe(EnvironmentProbe):
    """Probe backed by a JSON fixture with keys ``open_applications``,
    ``frontmost``, and ``browser_tabs``. Re-read on every call so tests and
    demos can swap the fixture while the service runs."""

    def __init__(self, path: str | Path):
        self._path = Path(path)

    def _load(self) -> dict:
        return json.loads(self._path.read_text(encoding="utf-8"))

    def list_open_applications(self) -> list[str]:
        return [str(a) for a in self._load().get("open_applications", [])]

    def frontmost_application(self) -> str:
        return str(self._load().get("frontmost", ""))

    def list_browser_tab_urls(self) -> list[str]:
        return [str(u) for u in self._load().get("browser_tabs", [])]


class StaticProbe(EnvironmentProbe):
    def __init__(self, apps: list[str] | None = None, frontmost: str = "",
                 tabs: list[str] | None = None):
        self.apps = apps or []
        self.frontmost = frontmost
        self.tabs = tabs or []

    def list_open_applications(self) -> list[str]:
        return list(self.apps)

    def frontmost_application(self) -> str:
        return self.frontmost

    def list_browser_tab_urls(self) -> list[str]:
        return list(self.tabs)


class EventQueue:
    """Durable editor-activity queue (JSON lines, append-only).

    Writes serialize on an internal lock; reads return consistent snapshots.
    Reconciliation keeps at most one active event per project, so replaying
    the log always converges to the same answer.
    """

    def __init__(self, path: str | Path, staleness: timedelta = DEFAULT_STALENESS):
        self._path = Path(path)
        self._staleness = staleness
        self._lock = threading.Lock()
        self._events: list[WorkspaceEvent] = []
        if self._path.exists():
            for line in self._path.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if line:
                    self._apply(WorkspaceEvent.from_dict(json.loads(line)))

    def record_event(self, event: WorkspaceEvent) -> None:
        if not event.project_name or not event.project_location:
            raise InputError("workspace event needs project_name and project_location")
        with self._lock:
            self._apply(event)
            try:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event.to_dict()) + "\n")
            except OSError as exc:
                raise StorageError(f"cannot append to queue {self._path}: {exc}") from exc

    def _apply(self, event: WorkspaceEvent) -> None:
        if event.currently_active:
            # A new active file supersedes every earlier event of the project.
            self._events = [
                e if e.project_location != event.project_location
                else WorkspaceEvent(
                    e.project_name, e.project_location, e.current_file,
                    e.date_added, False,
                )
                for e in self._events
            ]
        self._events.append(event)

    def events(self) -> list[WorkspaceEvent]:
        with self._lock:
            return list(self._events)

    def active_context(self, now: datetime | None = None) -> ActiveContext | None:
        now = now or utcnow()
        best: WorkspaceEvent | None = None
        with self._lock:
            for e in self._events:
                if not e.currently_active:
                    continue
                if now - e.date_added > self._staleness:
                    continue
                if best is None or e.date_added >= best.date_added:
                    best = e
        if best is None:
            return None
        return ActiveContext(
            project=ScanTarget(
                kind=TargetKind.IDE_PROJECT,
                path=best.project_location,
                display_name=best.project_name,
            ),
            current_file=best.current_file,
            as_of=best.date_added,
        )

    def compact(self) -> None:
        """Rewrite the log to the reconciled in-memory state."""
        with self._lock:
            try:
                tmp = self._path.with_suffix(".tmp")
                with tmp.open("w", encoding="utf-8") as fh:
                    for e in self._events:
                        fh.write(json.dumps(e.to_dict()) + "\n")
                tmp.replace(self._path)
            except OSError as exc:
                raise StorageError(f"cannot compact queue {self._path}: {exc}") from exc

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)


def detect_github_repos(urls: list[str]) -> list[RepoRef]:
    """Keep https://github.com/{owner}/{repo}... URLs, normalized to the repo
    root, deduplicated in first-seen order. Malformed URLs are skipped."""
    refs: list[RepoRef] = []
    seen: set[tuple[str, str]] = set()
    for raw in urls:
        try:
            parsed = urlparse(raw)
        except ValueError:
            continue
        if parsed.scheme != "https" or parsed.netloc.lower() != "github.com":
            continue
        parts = [p for p in parsed.path.split("/") if p]
        if len(parts) < 2:
            continue
        owner, repo = parts[0], parts[1]
        if repo.endswith(".git"):
            repo = repo[: -len(".git")]
        if not owner or not repo:
            continue
        key = (owner.lower(), repo.lower())
        if key in seen:
            continue
        seen.add(key)
        refs.append(RepoRef(owner=owner, repo=repo, url=f"https://github.com/{owner}/{repo}"))
    return refs


def frontmost_hint(probe: EnvironmentProbe, known_ides: list[str]) -> str | None:
    """Name the IDE the user is looking at, or None. Never raises: a broken
    probe must not block the dialog."""
    try:
        front = probe.frontmost_application()
    except Exception:
        return None
    if not front:
        return None
    lowered = front.lower()
    for ide in known_ides:
        if ide.lower() in lowered or lowered in ide.lower():
            return ide
    return None


class DirectoryWatcher:
    """Polling stand-in for an IDE plugin: file modifications under a root
    become WorkspaceEvents. Rapid re-saves of the same file are coalesced
    within the debounce interval."""

    def __init__(
        self,
        root: str | Path,
        *,
        exclusions: tuple[str, ...] = WATCH_EXCLUSIONS,
        debounce: float = DEBOUNCE_SECONDS,
        clock: Callable[[], float] = time.monotonic,
    ):
        self._root = Path(root)
        if not self._root.is_dir():
            raise InputError(f"watch root does not exist: {root}")
        self._exclusions = set(exclusions)
        self._debounce = debounce
        self._clock = clock
        self._mtimes = self._snapshot()
        self._last_emit: dict[str, float] = {}

    def _snapshot(self) -> dict[str, float]:
        snap: dict[str, float] = {}
        for dirpath, dirnames, filenames in os.walk(self._root):
            dirnames[:] = [d for d in dirnames if d not in self._exclusions]
            for name in filenames:
                full = os.path.join(dirpath, name)
                try:
                    snap[full] = os.stat(full).st_mtime
                except OSError:
                    continue
        return snap

    def poll_once(self) -> list[WorkspaceEvent]:
        """Diff the tree against the previous poll and emit change events."""
        now = self._clock()
        current = self._snapshot()
        events: list[WorkspaceEvent] = []
        for full, mtime in current.items():
            if self._mtimes.get(full) == mtime:
                continue
            last = self._last_emit.get(full)
            if last is not None and now - last < self._debounce:
                continue
            self._last_emit[full] = now
            rel = Path(full).relative_to(self._root).as_posix()
            events.append(
                WorkspaceEvent(
                    project_name=self._root.name,
                    project_location=str(self._root),
                    current_file=rel,
                    date_added=utcnow(),
                    currently_active=True,
                )
            )
        self._mtimes = current
        return events

    def watch(
        self, interval: float = 0.5, stop: threading.Event | None = None
    ) -> Iterator[WorkspaceEvent]:
        """Blocking stream of events; set ``stop`` to end it."""
        while stop is None or not stop.is_set():
            yield from self.poll_once()
            time.sleep(interval)


def watch_directory(root: str | Path, **kwargs) -> DirectoryWatcher:
    return DirectoryWatcher(root, **kwargs)
