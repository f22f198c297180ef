"""HTTP access for the tracker and forge layers, with an offline twin.

Live mode wraps ``requests`` with bounded retries and a token-bucket rate
limit, so concurrent page fetches cannot hammer a host. Offline mode reads
recorded payloads from a fixture directory through the same source
interfaces, selected by a flag at the CLI level, so the pipeline code path
is identical either way.

Tokens are only ever read from the environment: AUCAD_TRACKER_TOKEN for
the issue tracker, AUCAD_FORGE_TOKEN for the code forge.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path

TRACKER_TOKEN_ENV = "AUCAD_TRACKER_TOKEN"
FORGE_TOKEN_ENV = "AUCAD_FORGE_TOKEN"


class TransportError(Exception):
    """Retryable transport failure; carries the number of attempts made."""

    def __init__(self, message, attempts=1):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class CredentialError(Exception):
    """Authentication failed; not retryable."""


class NotFoundError(Exception):
    """The requested resource does not exist."""


class TokenBucket:
    """Simple thread-safe token bucket: ``rate`` requests/s, burst ``capacity``."""

    def __init__(self, rate=5.0, capacity=5):
        self.rate = float(rate)
        self.capacity = float(capacity)
        self._tokens = float(capacity)
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._last) * self.rate
                )
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class HttpClient:
    """GET with retries, rate limiting, and auth/404 classification."""

    def __init__(self, token=None, rate=5.0, retries=3, backoff=0.5, session=None):
        import requests

        self._session = session or requests.Session()
        self._bucket = TokenBucket(rate=rate)
        self._retries = retries
        self._backoff = backoff
        self._headers = {}
        if token:
            self._headers["Authorization"] = f"Bearer {token}"

    def get(self, url, params=None, accept=None):
        import requests

        headers = dict(self._headers)
        if accept:
            headers["Accept"] = accept
        last_exc = None
        for attempt in range(1, self._retries + 1):
            self._bucket.acquire()
            try:
                resp = self._session.get(
                    url, params=params, headers=headers, timeout=30
                )
            except requests.RequestException as exc:
                last_exc = exc
                time.sleep(self._backoff * attempt)
                continue
            if resp.status_code in (401, 403):
                raise CredentialError(f"auth failure for {url}: {resp.status_code}")
            if resp.status_code == 404:
                raise NotFoundError(url)
            if resp.status_code >= 500:
                last_exc = RuntimeError(f"server error {resp.status_code}")
                time.sleep(self._backoff * attempt)
                continue
            resp.raise_for_status()
            return resp
        raise TransportError(f"GET {url} failed: {last_exc}", attempts=self._retries)


class TrackerSource:
    """Issue-search pages, live from a Jira-style REST endpoint or recorded."""

    def __init__(self, fixtures_dir=None, base_url=None, client=None, page_size=50):
        if (fixtures_dir is None) == (base_url is None):
            raise ValueError("exactly one of fixtures_dir or base_url is required")
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.base_url = base_url.rstrip("/") if base_url else None
        self.page_size = page_size
        if base_url and client is None:
            client = HttpClient(token=os.environ.get(TRACKER_TOKEN_ENV))
        self.client = client

    @property
    def offline(self):
        return self.fixtures_dir is not None

    def pages(self, plan):
        """Yield (page_name, payload_text) search responses in order."""
        if self.offline:
            files = sorted(self.fixtures_dir.glob("page_*.json"))
            for idx, f in enumerate(files):
                if plan.max_pages is not None and idx >= plan.max_pages:
                    break
                yield f.name, f.read_text(encoding="utf-8")
            return
        start_at = 0
        page = 0
        while plan.max_pages is None or page < plan.max_pages:
            resp = self.client.get(
                f"{self.base_url}/search",
                params={
                    "jql": plan.query_text,
                    "startAt": start_at,
                    "maxResults": plan.page_size,
                },
            )
            text = resp.text
            yield f"page_{page:03d}", text
            payload = json.loads(text)
            issues = payload.get("issues", [])
            total = payload.get("total", 0)
            start_at += len(issues)
            page += 1
            if not issues or start_at >= total:
                break


def _repo_dir(root, repo):
    owner, _, name = repo.partition("/")
    return Path(root) / "repos" / owner / name


class ForgeSource:
    """Commit metadata, raw diffs, post-change files, and PR commit lists."""

    def __init__(self, fixtures_dir=None, api_base=None, client=None):
        if (fixtures_dir is None) == (api_base is None):
            raise ValueError("exactly one of fixtures_dir or api_base is required")
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.api_base = api_base.rstrip("/") if api_base else None
        if api_base and client is None:
            client = HttpClient(token=os.environ.get(FORGE_TOKEN_ENV))
        self.client = client

    @property
    def offline(self):
        return self.fixtures_dir is not None

    def _fixture(self, repo, *parts):
        return _repo_dir(self.fixtures_dir, repo).joinpath(*parts)

    def commit_meta(self, repo, sha):
        if self.offline:
            path = self._fixture(repo, "commits", f"{sha}.json")
            if not path.exists():
                raise NotFoundError(f"{repo}@{sha}")
            return json.loads(path.read_text(encoding="utf-8"))
        resp = self.client.get(f"{self.api_base}/repos/{repo}/commits/{sha}")
        return resp.json()

    def commit_diff(self, repo, sha):
        if self.offline:
            path = self._fixture(repo, "commits", f"{sha}.diff")
            if not path.exists():
                raise NotFoundError(f"{repo}@{sha} diff")
            return path.read_text(encoding="utf-8")
        resp = self.client.get(
            f"{self.api_base}/repos/{repo}/commits/{sha}",
            accept="application/vnd.github.diff",
        )
        return resp.text

    def commit_exists(self, repo, sha):
        try:
            self.commit_meta(repo, sha)
            return True
        except NotFoundError:
            return False

    def file_after(self, repo, sha, path):
        if self.offline:
            fpath = self._fixture(repo, "files", sha, path)
            if not fpath.exists():
                raise NotFoundError(f"{repo}@{sha}:{path}")
            return fpath.read_text(encoding="utf-8")
        resp = self.client.get(
            f"{self.api_base}/repos/{repo}/contents/{path}",
            params={"ref": sha},
            accept="application/vnd.github.raw",
        )
        return resp.text

    def pr_commits(self, repo, number):
        """Commit events of a pull request, oldest first."""
        if self.offline:
            path = self._fixture(repo, "pulls", str(number), "commits.json")
            if not path.exists():
                raise NotFoundError(f"{repo}#{number}")
            return json.loads(path.read_text(encoding="utf-8"))
        resp = self.client.get(f"{self.api_base}/repos/{repo}/pulls/{number}/commits")
        return resp.json()
