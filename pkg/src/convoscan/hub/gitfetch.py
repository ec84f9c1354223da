"""Shallow acquisition of Git scan targets with a one-hour reuse window."""

from __future__ import annotations

import subprocess
import time
from pathlib import Path
from typing import Callable

from ..errors import FetchError
from ..model import ScanTarget, TargetKind
from ..workspace import RepoRef

FRESHNESS_SECONDS = 3600.0
_STAMP_NAME = "convoscan-fetch-stamp"


def _run_git(args: list[str]) -> subprocess.CompletedProcess:
    try:
        return subprocess.run(
            ["git", *args], capture_output=True, text=True, timeout=600
        )
    except FileNotFoundError as exc:
        raise FetchError("git executable not found on PATH") from exc
    except subprocess.TimeoutExpired as exc:
        raise FetchError(f"git {' '.join(args[:2])} timed out") from exc


def fetch_git_target(
    ref: RepoRef,
    workdir: str | Path,
    *,
    max_age: float = FRESHNESS_SECONDS,
    runner: Callable[[list[str]], subprocess.CompletedProcess] = _run_git,
) -> ScanTarget:
    """Clone ``ref`` (depth 1) into ``workdir/{owner}-{repo}``.

    An existing checkout is reused as-is when fresher than ``max_age``
    seconds, otherwise re-fetched. Clone/fetch failures raise
    :class:`FetchError` carrying the tool's stderr.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    dest = workdir / f"{ref.owner}-{ref.repo}"
    target = ScanTarget(
        kind=TargetKind.GIT_REPO,
        path=str(dest),
        display_name=f"{ref.owner}/{ref.repo}",
        origin=ref.url,
    )

    stamp = dest / ".git" / _STAMP_NAME
    if dest.is_dir() and any(dest.iterdir()):
        age = time.time() - stamp.stat().st_mtime if stamp.exists() else None
        if age is not None and age <= max_age:
            return target
        proc = runner(["-C", str(dest), "fetch", "--depth", "1", "origin"])
        if proc.returncode != 0:
            raise FetchError(f"git fetch failed for {ref.url}: {proc.stderr.strip()}")
        proc = runner(["-C", str(dest), "reset", "--hard", "FETCH_HEAD"])
        if proc.returncode != 0:
            raise FetchError(f"git reset failed for {ref.url}: {proc.stderr.strip()}")
    else:
        proc = runner(["clone", "--depth", "1", ref.url, str(dest)])
        if proc.returncode != 0:
            raise FetchError(f"git clone failed for {ref.url}: {proc.stderr.strip()}")

    try:
        stamp.parent.mkdir(parents=True, exist_ok=True)
        stamp.touch()
    except OSError:
        pass  # freshness tracking is advisory
    return target
