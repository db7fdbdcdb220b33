"""Turn a :class:`SourceSpec` into bytes: local file, HTTP(S), inline content or
the standard output of a command."""

from __future__ import annotations

import hashlib
import io
import logging
import shlex
import subprocess
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Callable, List, Optional, Tuple
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

from .config import DIRECTORY, FacadeOptions, SourceSpec, extension_media_type, guess_media_type, split_media_type
from .errors import (CommandFailedError, ConfigError, HttpStatusError, LocalSourceDisabledError, MissingFileError,
                     NoSourceError, SourceError, UnsupportedSchemeError)

log = logging.getLogger(__name__)

HTTP_METHODS = ("GET", "POST", "PUT", "DELETE", "HEAD", "PATCH")
TIMEOUT = 30.0
MAX_REDIRECTS = 5


@dataclass
class ResolvedSource:
    opener: Callable[[], BinaryIO]
    media_type: str
    charset: str
    origin: SourceSpec
    identity: str
    path: Optional[Path] = None
    _consumed: bool = field(default=False, repr=False)
    reopenable: bool = False

    def open(self) -> BinaryIO:
        if self._consumed and not self.reopenable:
            raise SourceError("source stream already consumed", self.origin.describe())
        self._consumed = True
        return self.opener()

    def read(self) -> bytes:
        with self.open() as fh:
            return fh.read()

    def text(self) -> str:
        return decode(self.read(), self.charset)

    def text_stream(self) -> io.TextIOBase:
        return io.TextIOWrapper(self.open(), encoding=_codec(self.charset), newline="")


def _codec(charset: str) -> str:
    # a BOM is noise for every text format we read
    return "utf-8-sig" if charset.lower().replace("_", "-") in ("utf-8", "utf8") else charset


def decode(data: bytes, charset: str) -> str:
    return data.decode(_codec(charset))


def from_bytes(data: bytes, media_type: str, charset: str = "UTF-8", identity: Optional[str] = None) -> ResolvedSource:
    """Wrap in-memory bytes as a source (handy for tests and embedding)."""
    ident = identity or "urn:facadex:content:" + hashlib.sha1(data).hexdigest()
    return ResolvedSource(lambda: io.BytesIO(data), media_type, charset,
                          SourceSpec("content", ident), ident, reopenable=True)


# -- HTTP ---------------------------------------------------------------------

@dataclass
class HttpRequestPlan:
    method: str
    url: str
    headers: List[Tuple[str, str]] = field(default_factory=list)
    query_params: List[Tuple[str, str]] = field(default_factory=list)
    basic_auth: Optional[Tuple[str, str]] = None


def build_http_request_plan(location: str, opts: FacadeOptions) -> HttpRequestPlan:
    opts = FacadeOptions(opts)
    scheme = urlsplit(location).scheme.lower()
    if scheme not in ("http", "https"):
        raise ConfigError(f"not an HTTP(S) URL: {location}")
    method = (opts.get("http.method") or "GET").upper()
    if method not in HTTP_METHODS:
        raise ConfigError(f"unsupported HTTP method {method!r}")
    headers: dict = {}
    for name, value in opts.prefixed("http.header.").items():
        # case-insensitive dedup, last write wins, original spelling of the last writer kept
        for existing in [k for k in headers if k.lower() == name.lower()]:
            del headers[existing]
        headers[name] = value
    params = list(opts.prefixed("http.query.").items())
    parts = urlsplit(location)
    query = parse_qsl(parts.query, keep_blank_values=True) + params
    url = urlunsplit((parts.scheme, parts.netloc, parts.path, urlencode(query), parts.fragment))
    auth = None
    if "http.auth.user" in opts:
        auth = (opts["http.auth.user"], opts.get("http.auth.password", ""))
    return HttpRequestPlan(method, url, list(headers.items()), params, auth)


def _fetch_http(plan: HttpRequestPlan):
    import httpx

    try:
        with httpx.Client(follow_redirects=True, max_redirects=MAX_REDIRECTS, timeout=TIMEOUT) as client:
            response = client.request(plan.method, plan.url, headers=plan.headers, auth=plan.basic_auth)
    except httpx.HTTPError as exc:
        raise SourceError(f"HTTP request failed ({exc})", plan.url) from exc
    if response.status_code >= 400:
        raise HttpStatusError(response.status_code, plan.url)
    return response.content, response.headers.get("content-type")


# -- commands ------------------------------------------------------------------

def run_command(cmd: str) -> Tuple[bytes, int]:
    """Run ``cmd`` without a shell. Tokens split on whitespace, quotes group (POSIX shlex rules)."""
    if not cmd.strip():
        raise ConfigError("empty command")
    try:
        argv = shlex.split(cmd)
    except ValueError as exc:
        raise ConfigError(f"cannot tokenize command {cmd!r}: {exc}") from exc
    try:
        proc = subprocess.run(argv, stdin=subprocess.DEVNULL, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                              check=False)
    except OSError as exc:
        raise CommandFailedError(cmd, -1, str(exc)) from exc
    stderr = proc.stderr.decode("utf-8", "replace")
    if stderr:
        log.info("command stderr (%s): %s", cmd, stderr.strip())
    if proc.returncode != 0:
        raise CommandFailedError(cmd, proc.returncode, stderr)
    return proc.stdout, proc.returncode


# -- resolution ------------------------------------------------------------------

def _charset(opts: FacadeOptions, fallback: Optional[str] = None) -> str:
    mt = opts.get("media-type")
    if mt:
        params = split_media_type(mt)[1]
        if "charset" in params:
            return params["charset"]
    return opts.get("charset") or fallback or "UTF-8"


def resolve(spec: Optional[SourceSpec], opts, allow_local: bool = True,
            base_dir: Optional[Path] = None) -> ResolvedSource:
    """``base_dir`` anchors relative local paths (default: the working directory)."""
    opts = FacadeOptions(opts)
    if spec is None:
        raise NoSourceError("no location, content or command given", "x-sparql-anything:")
    media_type = guess_media_type(spec, opts)

    if spec.kind == "content":
        data = spec.value.encode(_charset(opts))
        ident = "urn:facadex:content:" + hashlib.sha1(data).hexdigest()
        return ResolvedSource(lambda: io.BytesIO(data), media_type, _charset(opts), spec, ident, reopenable=True)

    if spec.kind == "command":
        if not allow_local:
            raise LocalSourceDisabledError("command sources are disabled", spec.value)
        out, _ = run_command(spec.value)
        ident = "urn:facadex:command:" + hashlib.sha1(spec.value.encode("utf-8")).hexdigest()
        return ResolvedSource(lambda: io.BytesIO(out), media_type, _charset(opts), spec, ident, reopenable=True)

    location = spec.value
    scheme = urlsplit(location).scheme.lower()
    if scheme in ("http", "https"):
        plan = build_http_request_plan(location, opts)
        body, content_type = _fetch_http(plan)
        server_charset = None
        if content_type:
            ctype, params = split_media_type(content_type)
            server_charset = params.get("charset")
            if "media-type" not in opts and extension_media_type(location) is None and media_type != DIRECTORY:
                media_type = ctype
        charset = server_charset or _charset(opts)
        return ResolvedSource(lambda: io.BytesIO(body), media_type, charset, spec, plan.url, reopenable=True)

    if scheme == "file" or len(scheme) <= 1:
        # no scheme, a file: URL, or a Windows drive letter
        if not allow_local:
            raise LocalSourceDisabledError("local file sources are disabled", location)
        path = Path(urllib.request.url2pathname(urlsplit(location).path)) if scheme == "file" else Path(location)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if not path.exists():
            raise MissingFileError("no such file or directory", str(path))
        ident = path.resolve().as_uri()
        if path.is_dir():
            return ResolvedSource(lambda: io.BytesIO(b""), DIRECTORY, _charset(opts), spec, ident, path=path,
                                  reopenable=True)
        return ResolvedSource(lambda: open(path, "rb"), media_type, _charset(opts), spec, ident, path=path,
                              reopenable=True)

    try:
        with urllib.request.urlopen(location, timeout=TIMEOUT) as fh:
            data = fh.read()
    except urllib.error.URLError as exc:
        if "unknown url type" in str(exc.reason):
            raise UnsupportedSchemeError(f"unsupported URL scheme {scheme!r}", location) from exc
        raise SourceError(f"cannot read ({exc.reason})", location) from exc
    except ValueError as exc:
        raise UnsupportedSchemeError(f"unsupported URL scheme {scheme!r}", location) from exc
    return ResolvedSource(lambda: io.BytesIO(data), media_type, _charset(opts), spec, location, reopenable=True)


def resolve_location_path(location: str) -> Optional[str]:
    """Local filesystem path for a location, or None for remote URLs."""
    scheme = urlsplit(location).scheme.lower()
    if scheme == "file":
        return urllib.request.url2pathname(urlsplit(location).path)
    if len(scheme) <= 1:
        return location
    return None


__all__ = ["ResolvedSource", "HttpRequestPlan", "build_http_request_plan", "resolve", "run_command",
           "from_bytes", "decode"]
