"""Browser contexts and the nested context sequences values land in.

A context names the syntactic position where a browser interprets a
piece of output.  Languages nest, so a located value gets a sequence of
contexts, outermost parser first: a value inside a quoted string inside a
script element resolves to (HtmlScriptData, JsStringDq).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class BrowserContext(enum.Enum):
    HtmlText = "HtmlText"
    HtmlComment = "HtmlComment"
    HtmlAttrDq = "HtmlAttrDq"
    HtmlAttrSq = "HtmlAttrSq"
    HtmlAttrUnq = "HtmlAttrUnq"
    HtmlScriptData = "HtmlScriptData"
    HtmlStyleData = "HtmlStyleData"
    JsCode = "JsCode"
    JsStringDq = "JsStringDq"
    JsStringSq = "JsStringSq"
    JsComment = "JsComment"
    CssDeclValue = "CssDeclValue"
    CssString = "CssString"
    CssComment = "CssComment"
    Uri = "Uri"
    UriScriptSrc = "UriScriptSrc"
    Unknown = "Unknown"


# Ordered list of contexts, one per nested parser invocation.
ContextSequence = tuple[BrowserContext, ...]


def sequence_from_names(names) -> ContextSequence:
    """Build a sequence from context names, e.g. from a config file."""
    try:
        return tuple(BrowserContext(name) for name in names)
    except ValueError:
        bad = [n for n in names if n not in BrowserContext.__members__]
        raise ValueError(f"unknown browser context {bad[0]!r}") from None


def sequence_names(sequence: ContextSequence) -> list[str]:
    return [ctx.value for ctx in sequence]


def format_sequence(sequence: ContextSequence) -> str:
    return "(" + ", ".join(sequence_names(sequence)) + ")"


@dataclass(frozen=True)
class Finding:
    """One located annotation token and its resolved context sequence."""

    token: str
    context: ContextSequence
    excerpt: str = ""
