import sys
from collections import Counter
from pathlib import Path

import pytest

from facadex.rdf import isomorphic
from facadex.rdf.turtle import parse_turtle, serialize_turtle
from facadex.resolver import from_bytes
from facadex.triplifiers import triplify

FIXTURES = Path(__file__).parent / "fixtures"

PREFIXES = """\
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix fx: <http://sparql.xyz/facade-x/ns/> .
@prefix xyz: <http://sparql.xyz/facade-x/data/> .
"""

SPARQL_PREFIXES = """\
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
PREFIX fx: <http://sparql.xyz/facade-x/ns/>
PREFIX xyz: <http://sparql.xyz/facade-x/data/>
"""


def ttl(body: str):
    """Parse a Turtle snippet with the usual prefixes predeclared."""
    return parse_turtle(PREFIXES + body)


def facade(data, media_type: str, **options):
    if isinstance(data, str):
        data = data.encode("utf-8")
    return triplify(from_bytes(data, media_type), options)


def assert_iso(actual, expected):
    if not isomorphic(actual, expected):
        pytest.fail("graphs differ\n--- actual\n" + serialize_turtle(actual)
                    + "--- expected\n" + serialize_turtle(expected))


def multiset(rows):
    """Order-insensitive view of a list of solution dicts."""
    return Counter(frozenset(r.items()) for r in rows)


def run_fx(*args, cwd=None):
    import subprocess

    return subprocess.run([sys.executable, "-m", "facadex.cli", *map(str, args)], capture_output=True,
                          text=True, cwd=cwd)


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
