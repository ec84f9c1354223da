from __future__ import annotations

import os
import subprocess
import time

import pytest

from convoscan.errors import FetchError
from convoscan.hub.gitfetch import fetch_git_target
from convoscan.model import TargetKind
from convoscan.workspace import RepoRef


def _git(cwd, *args):
    env = dict(
        os.environ,
        GIT_AUTHOR_NAME="t", GIT_AUTHOR_EMAIL="t@x", GIT_COMMITTER_NAME="t",
        GIT_COMMITTER_EMAIL="t@x",
    )
    subprocess.run(["git", *args], cwd=cwd, check=True, capture_output=True, env=env)


@pytest.fixture(scope="module")
def origin_repo(tmp_path_factory):
    origin = tmp_path_factory.mktemp("origin") / "demo"
    origin.mkdir()
    (origin / "Main.java").write_text("public class Main {}\n")
    _git(origin, "init", "-q")
    _git(origin, "add", ".")
    _git(origin, "commit", "-q", "-m", "initial import")
    return origin


def ref_for(origin) -> RepoRef:
    return RepoRef(owner="acme", repo="demo", url=f"file://{origin}")


class CountingRunner:
    def __init__(self):
        self.calls: list[list[str]] = []

    def __call__(self, args):
        self.calls.append(args)
        from convoscan.hub.gitfetch import _run_git

        return _run_git(args)


class TestFetch:
    def test_shallow_clone(self, origin_repo, tmp_path):
        target = fetch_git_target(ref_for(origin_repo), tmp_path)
        assert target.kind is TargetKind.GIT_REPO
        assert target.path.endswith("acme-demo")
        assert target.origin == f"file://{origin_repo}"
        assert (tmp_path / "acme-demo" / "Main.java").exists()

    def test_fresh_checkout_reused_without_network(self, origin_repo, tmp_path):
        runner = CountingRunner()
        fetch_git_target(ref_for(origin_repo), tmp_path, runner=runner)
        assert len(runner.calls) == 1  # the clone

        fetch_git_target(ref_for(origin_repo), tmp_path, runner=runner)
        assert len(runner.calls) == 1  # cache hit, no git invocation

    def test_stale_checkout_refetched(self, origin_repo, tmp_path):
        runner = CountingRunner()
        target = fetch_git_target(ref_for(origin_repo), tmp_path, runner=runner)
        stamp = os.path.join(target.path, ".git", "convoscan-fetch-stamp")
        old = time.time() - 7200
        os.utime(stamp, (old, old))

        fetch_git_target(ref_for(origin_repo), tmp_path, runner=runner)
        commands = [c[2] if c[0] == "-C" else c[0] for c in runner.calls]
        assert commands == ["clone", "fetch", "reset"]

    def test_unreachable_url(self, tmp_path):
        bad = RepoRef(owner="a", repo="b", url=f"file://{tmp_path}/missing-repo")
        with pytest.raises(FetchError) as exc:
            fetch_git_target(bad, tmp_path / "work")
        assert "clone failed" in str(exc.value)
