import base64
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from facadex.config import FacadeOptions, SourceSpec
from facadex.errors import (CommandFailedError, ConfigError, HttpStatusError, LocalSourceDisabledError,
                            MissingFileError, NoSourceError, SourceError, UnsupportedSchemeError)
from facadex.resolver import build_http_request_plan, resolve, run_command


# -- request plans --------------------------------------------------------------

def test_plan_query_param():
    plan = build_http_request_plan("http://api/x", FacadeOptions({"http.query.param.api-key": "my-api-key"}))
    assert plan.method == "GET"
    assert plan.url == "http://api/x?api-key=my-api-key"


def test_plan_defaults():
    plan = build_http_request_plan("http://api/x", FacadeOptions())
    assert (plan.method, plan.url, plan.headers, plan.query_params, plan.basic_auth) == \
        ("GET", "http://api/x", [], [], None)


def test_plan_appends_to_existing_query():
    plan = build_http_request_plan("http://api/x?a=1", FacadeOptions({"http.query.b": "2", "http.method": "post"}))
    assert plan.method == "POST"
    assert plan.url == "http://api/x?a=1&b=2"


def test_plan_headers_dedup_case_insensitively():
    opts = FacadeOptions({"http.header.Accept": "text/csv", "http.header.X-Key": "1",
                          "http.header.accept": "application/json; charset=utf-8"})
    plan = build_http_request_plan("https://api/x", opts)
    assert plan.headers == [("X-Key", "1"), ("accept", "application/json; charset=utf-8")]


def test_plan_keeps_every_param():
    opts = FacadeOptions({f"http.query.p{i}": str(i) for i in range(6)})
    plan = build_http_request_plan("http://api/x?keep=me", opts)
    assert plan.url.count("=") == 7


def test_plan_basic_auth():
    plan = build_http_request_plan("http://api/x", FacadeOptions({"http.auth.user": "u", "http.auth.password": "p"}))
    assert plan.basic_auth == ("u", "p")


def test_plan_bad_method():
    with pytest.raises(ConfigError):
        build_http_request_plan("http://api/x", FacadeOptions({"http.method": "BREW"}))


# -- a recording stub server ------------------------------------------------------

class _Recorder(BaseHTTPRequestHandler):
    seen = []

    def log_message(self, *args):
        pass

    def _reply(self):
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else b""
        _Recorder.seen.append((self.command, self.path, dict(self.headers), body))
        if self.path.startswith("/missing"):
            self.send_response(404)
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        if self.path.startswith("/hop"):
            self.send_response(302)
            self.send_header("Location", "/data.csv")
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        if self.path.startswith("/latin"):
            payload = "café".encode("latin-1")
            ctype = "text/plain; charset=ISO-8859-1"
        elif self.path.startswith("/api"):
            payload = b'{"ok": true}'
            ctype = "application/json"
        else:
            payload = b"a,b\n1,2\n"
            ctype = "text/csv"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = _reply


@pytest.fixture
def stub():
    _Recorder.seen = []
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Recorder)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def test_http_get_with_params(stub):
    src = resolve(SourceSpec("location", stub + "/data.csv"), {"http.query.api-key": "k"})
    assert src.read() == b"a,b\n1,2\n"
    assert src.media_type == "text/csv"
    method, path, _, _ = _Recorder.seen[-1]
    assert (method, path) == ("GET", "/data.csv?api-key=k")


def test_http_post_appends_params(stub):
    resolve(SourceSpec("location", stub + "/data.csv?a=1"), {"http.query.b": "2", "http.method": "POST"})
    method, path, _, _ = _Recorder.seen[-1]
    assert (method, path) == ("POST", "/data.csv?a=1&b=2")


def test_http_headers_and_auth(stub):
    resolve(SourceSpec("location", stub + "/data.csv"),
            {"http.header.Accept": "application/json; charset=utf-8", "http.auth.user": "ann",
             "http.auth.password": "pw"})
    headers = {k.lower(): v for k, v in _Recorder.seen[-1][2].items()}
    assert headers["accept"] == "application/json; charset=utf-8"
    assert headers["authorization"] == "Basic " + base64.b64encode(b"ann:pw").decode()


def test_http_media_type_from_response(stub):
    src = resolve(SourceSpec("location", stub + "/api"), {})
    assert src.media_type == "application/json"


def test_http_charset_from_response(stub):
    src = resolve(SourceSpec("location", stub + "/latin"), {})
    assert src.text() == "café"


def test_http_follows_redirects(stub):
    src = resolve(SourceSpec("location", stub + "/hop"), {})
    assert src.read() == b"a,b\n1,2\n"


def test_http_error_status(stub):
    with pytest.raises(HttpStatusError) as info:
        resolve(SourceSpec("location", stub + "/missing.csv"), {})
    assert info.value.status == 404
    assert "/missing.csv" in str(info.value)


# -- content and commands -------------------------------------------------------

def test_content_bytes():
    src = resolve(SourceSpec("content", "first,second,third"), {"media-type": "text/csv"})
    data = src.read()
    assert len(data) == 18 and src.media_type == "text/csv"


@pytest.mark.parametrize("text", ["", " padded \n", "ünïcode\r\n", "a,b"])
def test_content_round_trips_exactly(text):
    for charset in ("UTF-8", "UTF-16", "ISO-8859-1"):
        src = resolve(SourceSpec("content", text), {"charset": charset})
        assert src.text() == text


def test_command_stdout():
    src = resolve(SourceSpec("command", "echo first,second,third"), {})
    assert src.read() == b"first,second,third\n"


def test_run_command_quotes_group():
    out, code = run_command('printf "%s|" "a b" c')
    assert out == b"a b|c|" and code == 0


def test_command_failure():
    with pytest.raises(CommandFailedError) as info:
        run_command("false")
    assert info.value.returncode != 0


def test_command_failure_carries_stderr():
    with pytest.raises(CommandFailedError) as info:
        run_command("ls /definitely/not/here")
    assert "not/here" in str(info.value)


def test_command_not_found():
    with pytest.raises(CommandFailedError):
        run_command("no-such-binary-xyz")


# -- local files ------------------------------------------------------------------

def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.csv"
    with pytest.raises(MissingFileError) as info:
        resolve(SourceSpec("location", str(missing)), {})
    assert str(missing) in str(info.value)


def test_local_file_and_base_dir(tmp_path):
    (tmp_path / "d.json").write_text("[1]")
    src = resolve(SourceSpec("location", "d.json"), {}, base_dir=tmp_path)
    assert src.media_type == "application/json"
    assert src.read() == b"[1]"
    assert src.identity.startswith("file://")


def test_file_url(tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("hello")
    assert resolve(SourceSpec("location", f.as_uri()), {}).text() == "hello"


def test_directory_source(tmp_path):
    src = resolve(SourceSpec("location", str(tmp_path)), {})
    assert src.media_type == "inode/directory" and src.path == tmp_path


def test_local_disabled(tmp_path):
    (tmp_path / "a.csv").write_text("x")
    with pytest.raises(LocalSourceDisabledError):
        resolve(SourceSpec("location", str(tmp_path / "a.csv")), {}, allow_local=False)
    with pytest.raises(LocalSourceDisabledError):
        resolve(SourceSpec("command", "echo hi"), {}, allow_local=False)
    # inline content stays available
    assert resolve(SourceSpec("content", "x"), {}, allow_local=False).read() == b"x"


def test_unsupported_scheme():
    with pytest.raises(UnsupportedSchemeError):
        resolve(SourceSpec("location", "madeup://host/x"), {})


def test_no_source():
    with pytest.raises(NoSourceError):
        resolve(None, {})


def test_error_kinds_are_distinct():
    kinds = [MissingFileError, HttpStatusError, CommandFailedError, UnsupportedSchemeError]
    for a in kinds:
        assert issubclass(a, SourceError)
        for b in kinds:
            assert a is b or not issubclass(a, b)
