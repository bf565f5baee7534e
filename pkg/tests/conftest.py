from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from gear.backends import BackendStats, ScriptedBackend, ScriptedRule, truncate_at_stop
from gear.patterns import load_pattern_config
from gear.tools import load_library

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"


class FnBackend:
    """Test backend driven by a prompt -> text function, with stats."""

    def __init__(self, fn, default: str = ""):
        self.fn = fn
        self.default = default
        self.stats = BackendStats()

    def generate(self, request):
        self.stats.record_generate()
        out = self.fn(request.prompt)
        if out is None:
            out = self.default
        return truncate_at_stop(out, request.stop_sequences)


@pytest.fixture(scope="session")
def patterns4():
    return load_pattern_config(CONFIG_DIR / "patterns4.json")


@pytest.fixture(scope="session")
def patterns7():
    return load_pattern_config(CONFIG_DIR / "patterns7.json")


@pytest.fixture(scope="session")
def basic4():
    return load_library(CONFIG_DIR / "basic4.json")


@pytest.fixture(scope="session")
def tools10():
    return load_library(CONFIG_DIR / "tools10.json")


# Scripted SLM whose per-tool API-call rules key off each tool's
# demonstrations marker; bare-query prompts fall through to the answer
# rules. Used by engine, evaluation, CLI, and service tests.
def demo_slm():
    return ScriptedBackend(
        [
            ScriptedRule("Calculator API calls", "<Q> count <API> [Calculator(2 + 4)]."),
            ScriptedRule("MT API calls", '<Q> t <API> [MT("Did you have dinner yet?", "ja")].'),
            ScriptedRule("WikiSearch API calls", '<Q> w <API> [WikiSearch("Ghana flag red meaning")].'),
            ScriptedRule("QA API calls", '<Q> q <API> [QA("What was the cause of this?")].'),
            ScriptedRule(
                "TimezoneConverter API calls",
                '<Q> c <API> [TimezoneConverter("2022-01-02 22:00:00", "Asia/Shanghai", "America/New_York")].',
            ),
            ScriptedRule("Pow API calls", "<Q> p <API> [Pow(2, 3)]."),
            ScriptedRule("Log API calls", "<Q> l <API> [Log(2, 8)]."),
            ScriptedRule("Sleep API calls", "<Q> s <API> [Sleep(60)]."),
            ScriptedRule("RobotMove API calls", "<Q> m <API> [RobotMove(0.3)]."),
            ScriptedRule(
                "MultilingualQA API calls",
                '<Q> ml <API> [MultilingualQA("question: 多少 context: the six button layout")].',
            ),
            ScriptedRule("2 + 4", "i make $2"),
            ScriptedRule("dinner", "晚ご飯をもう食べましたか。"),
            ScriptedRule("what time", "it is 2022-01-02 09:00:00 there"),
        ],
        default="i am not sure",
    )


# -- recorded-fixture HTTP server ----------------------------------------

FIXTURE_EMBEDDING = [0.25, -1.5, 3.0, 0.125]

FIXTURE_GENERATIONS = {
    "ping": "pong from fixture",
}


def _tool_fixture_response(tool: str, args: list[str], raw: str) -> str:
    if tool == "QA":
        if "Street Fighter" in raw:
            return "Six"
        return "The Normans first gained their separate identity in the 11th century."
    if tool == "MT":
        if len(args) > 1 and args[1] == "en":
            return "How many round objects are used to control the character in the arcade game Street Fighter II?"
        return "晩ご飯をもう食べましたか。"
    if tool == "WikiSearch":
        return (
            'Lord of the Flies (song) "Lord of the Flies" is an Iron Maiden single '
            'and second track on their 1995 album "The X Factor".'
        )
    return ""


class _FixtureHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (stdlib API)
        length = int(self.headers.get("Content-Length", 0))
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            body = {}
        if self.path == "/generate":
            payload = {"text": FIXTURE_GENERATIONS.get(body.get("prompt", ""), "fixture default")}
        elif self.path == "/embed":
            payload = {"embedding": FIXTURE_EMBEDDING}
        elif self.path == "/tool":
            payload = {
                "text": _tool_fixture_response(
                    body.get("tool", ""), body.get("args", []), body.get("raw_args", "")
                )
            }
        elif self.path == "/broken":
            self.send_response(500)
            self.end_headers()
            return
        else:
            self.send_response(404)
            self.end_headers()
            return
        data = json.dumps(payload).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="session")
def fixture_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _FixtureHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join(timeout=5)
