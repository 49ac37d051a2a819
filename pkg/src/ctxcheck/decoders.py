"""Decoding for the layers the scanners peel off.

All four decoders are forgiving: malformed escape sequences pass through
verbatim instead of raising.  Annotation tokens are purely alphanumeric,
so every decoder leaves them untouched.
"""

from __future__ import annotations

import html
import re
from urllib.parse import unquote


def entity_decode(text: str) -> str:
    """Resolve HTML character references (named, decimal and hex)."""
    return html.unescape(text)


def percent_decode(text: str) -> str:
    """Resolve percent-encoded bytes as UTF-8."""
    return unquote(text)


_CSS_ESCAPE_RE = re.compile(r"\\([0-9a-fA-F]{1,6})[ \t\n\r\f]?|\\(.)", re.S)


def css_unescape(text: str) -> str:
    """Resolve CSS backslash escapes, hex and literal."""

    def _sub(match: re.Match) -> str:
        digits, literal = match.groups()
        if digits is not None:
            try:
                return chr(int(digits, 16))
            except (ValueError, OverflowError):
                return match.group(0)
        return literal

    return _CSS_ESCAPE_RE.sub(_sub, text)


_JS_ESCAPE_RE = re.compile(
    r"\\u\{([0-9a-fA-F]{1,6})\}|\\u([0-9a-fA-F]{4})|\\x([0-9a-fA-F]{2})|\\(.)",
    re.S,
)

_JS_SIMPLE_ESCAPES = {
    "n": "\n", "r": "\r", "t": "\t", "b": "\b",
    "f": "\f", "v": "\v", "0": "\0",
}


def js_string_decode(text: str) -> str:
    """Resolve JavaScript string escapes (\\xHH, \\uHHHH, \\u{...}, simple)."""

    def _sub(match: re.Match) -> str:
        braced, u4, x2, literal = match.groups()
        digits = braced or u4 or x2
        if digits is not None:
            try:
                return chr(int(digits, 16))
            except (ValueError, OverflowError):
                return match.group(0)
        if literal in ("u", "x"):
            # Incomplete hex escape; leave it verbatim.
            return match.group(0)
        return _JS_SIMPLE_ESCAPES.get(literal, literal)

    return _JS_ESCAPE_RE.sub(_sub, text)
